"""Versioned JSON persistence for fitted models.

Floats are written with ``repr`` precision, so a save/load round trip
reproduces predictions bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .forest import ForestConfig, RandomForest
from .gbt import GbtConfig, GradientBoostedTrees
from .pipeline import ScaledModel
from .scaling import MinMaxScaler
from .stacking import MetaLearner, StackedModel
from .svr import SvrConfig, SvrModel
from .tree import RegressionTree

FORMAT = "slotmini-model"
VERSION = 1


class PersistenceError(ValueError):
    pass


def to_dict(model) -> dict:
    if isinstance(model, RegressionTree):
        return {"kind": "tree", **model.to_dict()}
    if isinstance(model, RandomForest):
        return {
            "kind": "forest",
            "config": asdict(model.config),
            "trees": [t.to_dict() for t in model.trees],
        }
    if isinstance(model, GradientBoostedTrees):
        return {
            "kind": "gbt",
            "config": asdict(model.config),
            "init": model.init,
            "trees": [t.to_dict() for t in model.trees],
            "train_mse": model.train_mse,
        }
    if isinstance(model, SvrModel):
        return {
            "kind": "svr",
            "config": asdict(model.config),
            "support": model.support.tolist(),
            "coef": model.coef.tolist(),
            "bias": model.bias,
            "kkt_violation": model.kkt_violation,
            "n_iter": model.n_iter,
        }
    if isinstance(model, MetaLearner):
        return {
            "kind": "meta",
            "intercept": model.intercept,
            "weights": model.weights.tolist(),
            "fallback": model.fallback,
        }
    if isinstance(model, StackedModel):
        return {
            "kind": "stacked",
            "mode": model.mode,
            "bases": {name: to_dict(m) for name, m in model.bases.items()},
            "meta": to_dict(model.meta),
        }
    if isinstance(model, ScaledModel):
        return {"kind": "scaled", "scaler": model.scaler.to_dict(), "model": to_dict(model.model)}
    raise PersistenceError(f"cannot serialize {type(model).__name__}")


def from_dict(d: dict):
    kind = d.get("kind")
    if kind == "tree":
        return RegressionTree.from_dict(d)
    if kind == "forest":
        return RandomForest([RegressionTree.from_dict(t) for t in d["trees"]], ForestConfig(**d["config"]))
    if kind == "gbt":
        return GradientBoostedTrees(
            d["init"], [RegressionTree.from_dict(t) for t in d["trees"]], GbtConfig(**d["config"]), d["train_mse"]
        )
    if kind == "svr":
        return SvrModel(
            np.array(d["support"], dtype=float),
            np.array(d["coef"], dtype=float),
            d["bias"],
            SvrConfig(**d["config"]),
            d["kkt_violation"],
            d["n_iter"],
        )
    if kind == "meta":
        return MetaLearner(d["intercept"], np.array(d["weights"], dtype=float), d["fallback"])
    if kind == "stacked":
        bases = {name: from_dict(m) for name, m in d["bases"].items()}
        return StackedModel(bases, from_dict(d["meta"]), d["mode"])
    if kind == "scaled":
        return ScaledModel(MinMaxScaler.from_dict(d["scaler"]), from_dict(d["model"]))
    raise PersistenceError(f"unknown model kind {kind!r}")


def dumps(model) -> str:
    return json.dumps({"format": FORMAT, "version": VERSION, "model": to_dict(model)}, indent=1)


def loads(text: str):
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise PersistenceError("not a slotmini model file")
    if doc.get("version") != VERSION:
        raise PersistenceError(f"unsupported model file version {doc.get('version')!r}")
    return from_dict(doc["model"])


def save_model(model, path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load_model(path):
    return loads(Path(path).read_text(encoding="utf-8"))
