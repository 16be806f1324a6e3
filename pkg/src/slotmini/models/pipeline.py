"""Training-split-bound scaling and the four-model surrogate suite."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .scaling import MinMaxScaler
from .stacking import BASE_ORDER, BaseConfigs, fit_base, fit_stacked
from .svr import SvrConvergenceError

log = logging.getLogger(__name__)

REPORT_NAMES = {"forest": "Random Forest", "svr": "SVM", "gbt": "XGBoost", "stacked": "Stacked Model"}
SHORT_NAMES = {"forest": "rf", "svr": "svm", "gbt": "xgb", "stacked": "stacked"}

# Bare models expect min-max scaled features; anything far outside [0, 1]
# is taken to be raw millimetres.
_SCALED_RANGE = (-1.0, 2.0)


class ScaledModel:
    """A fitted model together with the scaler fitted on its training split."""

    def __init__(self, scaler: MinMaxScaler, model):
        self.scaler = scaler
        self.model = model

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.scaler.data_min.size)
        if X.shape[0] == 0:
            return np.zeros(0)
        return self.model.predict(self.scaler.transform(X))


def predict(model, features) -> np.ndarray:
    """Predict GHz values for raw ``(d_inner, d_outer)`` rows.

    Bare models (no bound scaler) only accept already-scaled features.
    """
    X = np.asarray(features, dtype=float).reshape(-1, 2)
    if X.shape[0] == 0:
        return np.zeros(0)
    if not isinstance(model, ScaledModel):
        lo, hi = _SCALED_RANGE
        if X.min() < lo or X.max() > hi:
            raise ValueError("features look unscaled and the model has no bound scaler")
    out = model.predict(X)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("model produced non-finite predictions")
    return out


@dataclass
class SurrogateSuite:
    """Forest, SVR, boosted trees and their stack, all behind one scaler."""

    scaler: MinMaxScaler
    models: dict = field(default_factory=dict)  # key -> ScaledModel
    failures: dict = field(default_factory=dict)  # key -> message
    meta_fallback: bool = False

    @classmethod
    def fit(cls, X_train, y_train, configs: BaseConfigs = BaseConfigs(), mode: str = "paper") -> "SurrogateSuite":
        X_train = np.asarray(X_train, dtype=float)
        scaler = MinMaxScaler.fit(X_train)
        Xs = scaler.transform(X_train)
        suite = cls(scaler)
        bases = {}
        for name in BASE_ORDER:
            try:
                bases[name] = fit_base(name, Xs, y_train, configs)
            except SvrConvergenceError as exc:
                log.warning("%s failed: %s", REPORT_NAMES[name], exc)
                suite.failures[name] = str(exc)
        names = tuple(n for n in BASE_ORDER if n in bases)
        for name in names:
            suite.models[name] = ScaledModel(scaler, bases[name])
        if names:
            stacked = fit_stacked(Xs, y_train, configs, mode, bases=bases, names=names)
            suite.models["stacked"] = ScaledModel(scaler, stacked)
            suite.meta_fallback = stacked.meta.fallback
        return suite

    def predict_all(self, X) -> dict:
        return {key: m.predict(X) for key, m in self.models.items()}
