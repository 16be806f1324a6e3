"""CART regression tree with squared-error splits.

Trees are grown breadth-first into flat arrays (``feature[i] < 0`` marks a
leaf) so prediction is a vectorized walk. :attr:`RegressionTree.root` gives
the equivalent linked :class:`TreeNode` view.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

LEAF = -1


@dataclass
class TreeNode:
    leaf_value: float
    split_feature: Optional[int] = None
    split_threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.split_feature is None


def best_split(x: np.ndarray, y: np.ndarray, min_leaf: int) -> Optional[tuple[float, float]]:
    """Lowest-SSE threshold on one feature as ``(sse, threshold)``.

    Candidate thresholds are midpoints between consecutive distinct values;
    both sides must keep ``min_leaf`` samples. Ties go to the smaller
    threshold. ``None`` when no admissible split exists.
    """
    n = x.size
    if n < 2 * min_leaf:
        return None
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order] - y.mean()  # centring keeps the cumulative sums well conditioned
    k = np.arange(1, n)  # left size
    valid = (xs[1:] > xs[:-1]) & (k >= min_leaf) & (n - k >= min_leaf)
    if not valid.any():
        return None
    csum = np.cumsum(ys)
    csum2 = np.cumsum(ys * ys)
    s_l, s_r = csum[:-1], csum[-1] - csum[:-1]
    q_l, q_r = csum2[:-1], csum2[-1] - csum2[:-1]
    sse = (q_l - s_l * s_l / k) + (q_r - s_r * s_r / (n - k))
    sse = np.where(valid, sse, np.inf)
    pos = int(np.argmin(sse))
    lo, hi = xs[pos], xs[pos + 1]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:  # adjacent floats
        thr = lo
    return float(sse[pos]), float(thr)


class RegressionTree:
    def __init__(self, feature, threshold, left, right, value, n_features: int):
        self.n_features = int(n_features)
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.n_features)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node]
            active = feat != LEAF
            if not active.any():
                break
            f = np.where(active, feat, 0)
            go_left = X[rows, f] <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(active, nxt, node)
        return self.value[node]

    @property
    def root(self) -> TreeNode:
        nodes = [TreeNode(float(v)) for v in self.value]
        for i, node in enumerate(nodes):
            if self.feature[i] != LEAF:
                node.split_feature = int(self.feature[i])
                node.split_threshold = float(self.threshold[i])
                node.left = nodes[self.left[i]]
                node.right = nodes[self.right[i]]
        return nodes[0]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        return cls(d["feature"], d["threshold"], d["left"], d["right"], d["value"], d["n_features"])


def predict_trees(trees: list[RegressionTree], X) -> np.ndarray:
    """Predictions of every tree as an ``(n_trees, n_rows)`` array.

    All trees are packed into one node table and walked together, which
    is much faster than looping over hundreds of small trees.
    """
    X = np.asarray(X, dtype=float).reshape(-1, trees[0].n_features)
    sizes = np.array([t.n_nodes for t in trees])
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    feature = np.concatenate([t.feature for t in trees])
    threshold = np.concatenate([t.threshold for t in trees])
    value = np.concatenate([t.value for t in trees])
    left = np.concatenate([np.where(t.feature != LEAF, t.left + o, 0) for t, o in zip(trees, offsets)])
    right = np.concatenate([np.where(t.feature != LEAF, t.right + o, 0) for t, o in zip(trees, offsets)])

    n = X.shape[0]
    node = np.repeat(offsets, n)
    idx = np.arange(node.size)  # positions still inside an internal node
    cur = node.copy()
    xflat = X.ravel()
    n_feat = X.shape[1]
    rows = np.tile(np.arange(n) * n_feat, len(trees))
    while idx.size:
        feat = feature[cur]
        inner = feat != LEAF
        if not inner.all():
            node[idx[~inner]] = cur[~inner]
            idx, cur, feat, rows = idx[inner], cur[inner], feat[inner], rows[inner]
            if not idx.size:
                break
        go_left = xflat[rows + feat] <= threshold[cur]
        cur = np.where(go_left, left[cur], right[cur])
    return value[node].reshape(len(trees), n)


def fit_tree(
    X,
    y,
    depth_max: Optional[int] = None,
    min_leaf: int = 1,
    mtry: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> RegressionTree:
    """Greedy variance-reduction tree; leaves hold the mean target.

    With ``mtry`` below the feature count, each split examines a random
    subset of ``mtry`` features first and falls back to the remaining ones
    only if none of the subset admits a split.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.size:
        raise ValueError("fit_tree needs a non-empty (n, d) matrix and n targets")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    if X.shape[0] < min_leaf:
        raise ValueError("fewer samples than min_leaf")
    n_feat = X.shape[1]
    mtry = n_feat if mtry is None else max(1, min(mtry, n_feat))
    if mtry < n_feat and rng is None:
        raise ValueError("feature subsampling needs an rng")

    feature, threshold, left, right, value = [LEAF], [0.0], [LEAF], [LEAF], [float(y.mean())]
    queue = deque([(0, np.arange(y.size), 0)])
    while queue:
        node, idx, depth = queue.popleft()
        yi = y[idx]
        if depth_max is not None and depth >= depth_max:
            continue
        if idx.size < 2 * min_leaf or np.all(yi == yi[0]):
            continue
        order = rng.permutation(n_feat) if mtry < n_feat else np.arange(n_feat)
        best = None
        for pos, f in enumerate(order):
            if pos >= mtry and best is not None:
                break
            cand = best_split(X[idx, f], yi, min_leaf)
            if cand is not None and (best is None or cand[0] < best[0]):
                best = (cand[0], cand[1], int(f))
        if best is None:
            continue
        _, thr, f = best
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        for child_idx, side in ((li, left), (ri, right)):
            child = len(feature)
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            value.append(float(y[child_idx].mean()))
            side[node] = child
            queue.append((child, child_idx, depth + 1))
    return RegressionTree(feature, threshold, left, right, value, n_feat)
