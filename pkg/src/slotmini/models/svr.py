"""Epsilon-insensitive support-vector regression with an RBF kernel.

The dual is solved in its 2n-variable form

    min_a  1/2 a'Qa + p'a    s.t.  z'a = 0,  0 <= a <= C

with ``a = [alpha; alpha*]``, ``z = [+1..; -1..]``, ``Q_st = z_s z_t K``,
``p = [eps - y; eps + y]``, by SMO with second-order working-set
selection. The model keeps ``coef = alpha - alpha*`` per training row and
predicts ``sum_k coef_k K(x_k, x) + bias``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TAU = 1e-12


class SvrConvergenceError(RuntimeError):
    def __init__(self, message: str, kkt_violation: float, n_iter: int):
        super().__init__(message)
        self.kkt_violation = kkt_violation
        self.n_iter = n_iter


@dataclass(frozen=True)
class SvrConfig:
    C: float = 10.0
    epsilon: float = 0.01
    gamma: float = 2.0
    tol: float = 1e-3
    max_passes: int = 1000

    def __post_init__(self) -> None:
        if not self.C > 0:
            raise ValueError("C must be > 0")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if self.epsilon < 0 or not self.tol > 0 or self.max_passes < 1:
            raise ValueError("need epsilon >= 0, tol > 0, max_passes >= 1")


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


class SvrModel:
    def __init__(self, support: np.ndarray, coef: np.ndarray, bias: float, config: SvrConfig,
                 kkt_violation: float = 0.0, n_iter: int = 0):
        self.support = np.asarray(support, dtype=float)
        self.coef = np.asarray(coef, dtype=float)
        self.bias = float(bias)
        self.config = config
        self.kkt_violation = kkt_violation
        self.n_iter = n_iter

    @property
    def support_mask(self) -> np.ndarray:
        return self.coef != 0.0

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.support.shape[1])
        if X.shape[0] == 0:
            return np.zeros(0)
        mask = self.support_mask
        if not mask.any():
            return np.full(X.shape[0], self.bias)
        K = rbf_kernel(X, self.support[mask], self.config.gamma)
        return K @ self.coef[mask] + self.bias


def fit_svr(X, y, config: SvrConfig = SvrConfig()) -> SvrModel:
    """Raises :class:`SvrConvergenceError` if the KKT gap is still above
    ``tol`` after ``max_passes * n`` SMO iterations."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    if X.ndim != 2 or X.shape[0] != n or n == 0:
        raise ValueError("fit_svr needs a non-empty (n, d) matrix and n targets")
    C, eps, tol = config.C, config.epsilon, config.tol

    K = rbf_kernel(X, X, config.gamma)
    diag = np.diag(K).copy()
    z = np.concatenate([np.ones(n), -np.ones(n)])
    a = np.zeros(2 * n)
    G = np.concatenate([eps - y, eps + y])  # gradient Qa + p at a = 0
    point = np.concatenate([np.arange(n), np.arange(n)])

    max_iter = config.max_passes * n
    gap = np.inf
    it = 0
    while True:
        neg_zG = -z * G
        up = np.where(z > 0, a < C, a > 0)
        low = np.where(z > 0, a > 0, a < C)
        g_max = np.max(neg_zG, where=up, initial=-np.inf)
        g_max2 = np.max(-neg_zG, where=low, initial=-np.inf)
        gap = g_max + g_max2
        if gap < tol:
            break
        if it >= max_iter:
            raise SvrConvergenceError(
                f"SVR did not reach KKT tolerance {tol} in {max_iter} iterations (gap {gap:.3e})",
                float(gap),
                it,
            )
        i = int(np.argmax(np.where(up, neg_zG, -np.inf)))
        pi = point[i]
        k_i = K[pi][point]
        diff = g_max - neg_zG
        quad = diag[pi] + diag[point] - 2.0 * k_i
        quad = np.where(quad > 0, quad, TAU)
        score = np.where(low & (diff > 0), -(diff * diff) / quad, np.inf)
        j = int(np.argmin(score))
        if not np.isfinite(score[j]):
            break  # cannot happen when gap >= tol; kept as a guard
        pj = point[j]

        old_i, old_j = a[i], a[j]
        Q_ij = z[i] * z[j] * K[pi, pj]
        if z[i] != z[j]:
            qc = diag[pi] + diag[pj] + 2.0 * Q_ij
            qc = qc if qc > 0 else TAU
            delta = (-G[i] - G[j]) / qc
            d = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if d > 0:
                if a[j] < 0:
                    a[j], a[i] = 0.0, d
            elif a[i] < 0:
                a[i], a[j] = 0.0, -d
            if d > 0:  # C_i - C_j == 0
                if a[i] > C:
                    a[i], a[j] = C, C - d
            elif a[j] > C:
                a[j], a[i] = C, C + d
        else:
            qc = diag[pi] + diag[pj] - 2.0 * Q_ij
            qc = qc if qc > 0 else TAU
            delta = (G[i] - G[j]) / qc
            s = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if s > C:
                if a[i] > C:
                    a[i], a[j] = C, s - C
            elif a[j] < 0:
                a[j], a[i] = 0.0, s
            if s > C:
                if a[j] > C:
                    a[j], a[i] = C, s - C
            elif a[i] < 0:
                a[i], a[j] = 0.0, s

        d_i, d_j = a[i] - old_i, a[j] - old_j
        G += z * (z[i] * d_i * k_i + z[j] * d_j * K[pj][point])
        it += 1

    rho = _rho(a, z, G, C)
    coef = a[:n] - a[n:]
    return SvrModel(X.copy(), coef, -rho, config, float(gap), it)


def _rho(a, z, G, C) -> float:
    zG = z * G
    at_upper = a >= C
    at_lower = a <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        return float(zG[free].mean())
    # Bounded-only solution: midpoint of the feasible interval for rho.
    ub_mask = (at_upper & (z < 0)) | (at_lower & (z > 0))
    lb_mask = (at_upper & (z > 0)) | (at_lower & (z < 0))
    ub = zG[ub_mask].min() if ub_mask.any() else np.inf
    lb = zG[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2.0)
