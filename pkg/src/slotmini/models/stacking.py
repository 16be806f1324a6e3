"""Stacked ensemble: an affine least-squares meta-learner over base predictions.

``paper`` mode fits the meta-learner on in-sample base predictions of the
training split. That overfits by construction and is kept deliberately.
``out_of_fold`` builds the meta-features from k-fold held-out predictions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .forest import ForestConfig, fit_forest
from .gbt import GbtConfig, fit_gbt
from .svr import SvrConfig, fit_svr

log = logging.getLogger(__name__)

BASE_ORDER = ("forest", "svr", "gbt")
MODES = ("paper", "out_of_fold")


@dataclass(frozen=True)
class BaseConfigs:
    forest: ForestConfig = field(default_factory=ForestConfig)
    svr: SvrConfig = field(default_factory=SvrConfig)
    gbt: GbtConfig = field(default_factory=GbtConfig)
    seed: int = 0


def fit_base(name: str, X, y, configs: BaseConfigs):
    if name == "forest":
        return fit_forest(X, y, configs.forest, seed=configs.seed)
    if name == "svr":
        return fit_svr(X, y, configs.svr)
    if name == "gbt":
        return fit_gbt(X, y, configs.gbt)
    raise ValueError(f"unknown base model {name!r}")


@dataclass(frozen=True)
class MetaLearner:
    intercept: float
    weights: np.ndarray
    fallback: bool = False

    def predict(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float).reshape(-1, self.weights.size)
        return self.intercept + P @ self.weights


def fit_meta(P, y, rcond: float = 1e-10) -> MetaLearner:
    """Least-squares ``y ~ b + P w``; equal weights if the system is rank deficient."""
    P = np.asarray(P, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    A = np.column_stack([np.ones(P.shape[0]), P])
    s = np.linalg.svd(A, compute_uv=False)
    if s.size < A.shape[1] or s[-1] <= rcond * s[0]:
        log.warning("meta-learner design is rank deficient; using equal weights")
        k = P.shape[1]
        return MetaLearner(0.0, np.full(k, 1.0 / k), fallback=True)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return MetaLearner(float(coef[0]), coef[1:], fallback=False)


class StackedModel:
    def __init__(self, bases: Mapping[str, object], meta: MetaLearner, mode: str):
        self.bases = dict(bases)
        self.meta = meta
        self.mode = mode

    @property
    def base_names(self) -> tuple[str, ...]:
        return tuple(self.bases)

    def base_predictions(self, X) -> np.ndarray:
        return np.column_stack([m.predict(X) for m in self.bases.values()])

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.reshape(-1, 2).shape[0] == 0:
            return np.zeros(0)
        return self.meta.predict(self.base_predictions(X))


def _folds(n: int, k: int, seed: int) -> list[np.ndarray]:
    order = np.random.default_rng(seed).permutation(n)
    return np.array_split(order, k)


def fit_stacked(
    X,
    y,
    configs: BaseConfigs = BaseConfigs(),
    mode: str = "paper",
    bases: Mapping[str, object] | None = None,
    names: tuple[str, ...] = BASE_ORDER,
    k_folds: int = 5,
) -> StackedModel:
    """Fit base models (unless ``bases`` are given) and the meta-learner.

    ``names`` selects which base families participate, in column order.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if bases is None:
        bases = {name: fit_base(name, X, y, configs) for name in names}
    else:
        bases = {name: bases[name] for name in names}

    if mode == "paper":
        P = np.column_stack([bases[name].predict(X) for name in names])
    else:
        P = np.zeros((y.size, len(names)))
        for fold in _folds(y.size, k_folds, configs.seed):
            keep = np.setdiff1d(np.arange(y.size), fold)
            for col, name in enumerate(names):
                P[fold, col] = fit_base(name, X[keep], y[keep], configs).predict(X[fold])
    return StackedModel(bases, fit_meta(P, y), mode)
