from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-feature min-max map fitted on one (training) matrix."""

    data_min: np.ndarray
    data_max: np.ndarray

    @classmethod
    def fit(cls, X) -> "MinMaxScaler":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("scaler needs a non-empty 2-D matrix")
        return cls(X.min(axis=0), X.max(axis=0))

    @property
    def scale(self) -> np.ndarray:
        span = self.data_max - self.data_min
        return np.where(span > 0, span, 1.0)

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.data_min.size)
        return (X - self.data_min) / self.scale

    def to_dict(self) -> dict:
        return {"data_min": self.data_min.tolist(), "data_max": self.data_max.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "MinMaxScaler":
        return cls(np.array(d["data_min"], dtype=float), np.array(d["data_max"], dtype=float))
