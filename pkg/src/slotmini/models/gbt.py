"""Stagewise squared-error gradient boosting (first order, no regularized splits)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import RegressionTree, fit_tree, predict_trees


@dataclass(frozen=True)
class GbtConfig:
    n_rounds: int = 300
    learning_rate: float = 0.1
    depth_max: int = 3
    min_leaf: int = 1

    def __post_init__(self) -> None:
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")


class GradientBoostedTrees:
    def __init__(self, init: float, trees: list[RegressionTree], config: GbtConfig, train_mse=None):
        self.init = float(init)
        self.trees = trees
        self.config = config
        self.train_mse = list(train_mse or [])  # in-sample MSE after 0..n_rounds rounds

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.full(X.reshape(-1, self.trees[0].n_features).shape[0], self.init)
        for row in predict_trees(self.trees, X):
            out += self.config.learning_rate * row
        return out


def fit_gbt(X, y, config: GbtConfig = GbtConfig()) -> GradientBoostedTrees:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    f0 = float(y.mean())
    pred = np.full(y.size, f0)
    mse = [float(np.mean((y - pred) ** 2))]
    trees = []
    for _ in range(config.n_rounds):
        tree = fit_tree(X, y - pred, config.depth_max, config.min_leaf)
        pred = pred + config.learning_rate * tree.predict(X)
        trees.append(tree)
        mse.append(float(np.mean((y - pred) ** 2)))
    return GradientBoostedTrees(f0, trees, config, mse)
