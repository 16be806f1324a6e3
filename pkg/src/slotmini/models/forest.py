from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .tree import RegressionTree, fit_tree, predict_trees


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 200
    depth_max: Optional[int] = 12
    min_leaf: int = 1
    mtry: int = 1
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.mtry < 1 or self.min_leaf < 1:
            raise ValueError("mtry and min_leaf must be >= 1")


class RandomForest:
    """Bagged regression trees; prediction is the plain mean over trees."""

    def __init__(self, trees: list[RegressionTree], config: ForestConfig):
        self.trees = trees
        self.config = config

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        total = np.zeros(X.reshape(-1, self.trees[0].n_features).shape[0])
        for row in predict_trees(self.trees, X):
            total += row
        return total / len(self.trees)


def fit_forest(X, y, config: ForestConfig = ForestConfig(), seed: int = 0) -> RandomForest:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(config.n_trees):
        # Each tree owns a child generator so the sample and the feature draws
        # stay reproducible independently of tree count.
        tree_rng = np.random.default_rng(rng.integers(2**63))
        idx = tree_rng.integers(0, n, size=n) if config.bootstrap else np.arange(n)
        trees.append(
            fit_tree(X[idx], y[idx], config.depth_max, config.min_leaf, config.mtry, tree_rng)
        )
    return RandomForest(trees, config)
