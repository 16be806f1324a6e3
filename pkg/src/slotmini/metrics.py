"""Six-metric regression panel and per-split model reports."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, fields
from typing import Iterable, Mapping, Sequence

import numpy as np

SPLITS = ("train", "test", "validation")
MODEL_ORDER = ("Random Forest", "SVM", "XGBoost", "Stacked Model")
REPORT_HEADER = ("model", "split", "mae", "mse", "rmse", "r2", "rmspe", "mape")


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class MetricPanel:
    """MAE/MSE/RMSE in target units, R^2 unitless, RMSPE/MAPE in percent."""

    mae: float
    mse: float
    rmse: float
    r2: float
    rmspe: float
    mape: float

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)

    @classmethod
    def missing(cls) -> "MetricPanel":
        return cls(*([math.nan] * 6))


def metric_panel(actual: Sequence[float], predicted: Sequence[float]) -> MetricPanel:
    a = np.asarray(actual, dtype=float).ravel()
    p = np.asarray(predicted, dtype=float).ravel()
    if a.shape != p.shape:
        raise MetricError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size == 0:
        raise MetricError("no values to evaluate")
    zero = np.flatnonzero(a == 0.0)
    if zero.size:
        raise MetricError(f"actual value at index {int(zero[0])} is zero; percentage metrics undefined")

    err = p - a
    mse = float(np.mean(err**2))
    ss_res = float(np.sum(err**2))
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise MetricError("actual values are constant; R^2 undefined")
    rel = err / a
    return MetricPanel(
        mae=float(np.mean(np.abs(err))),
        mse=mse,
        rmse=math.sqrt(mse),
        r2=1.0 - ss_res / ss_tot,
        rmspe=100.0 * math.sqrt(float(np.mean(rel**2))),
        mape=100.0 * float(np.mean(np.abs(rel))),
    )


@dataclass(frozen=True)
class ModelReport:
    model: str
    panels: Mapping[str, MetricPanel]

    def __post_init__(self) -> None:
        if set(self.panels) != set(SPLITS):
            raise MetricError(f"report needs exactly the splits {SPLITS}")


def build_report(model_name: str, predict, splits) -> ModelReport:
    """Evaluate ``predict`` (features -> predictions) on every split.

    ``splits`` maps split name to ``(features, targets)``.
    """
    panels = {}
    for name in SPLITS:
        X, y = splits[name]
        panels[name] = metric_panel(y, predict(X))
    return ModelReport(model_name, panels)


def _order(reports: Iterable[ModelReport]) -> list[ModelReport]:
    def key(r: ModelReport):
        return (MODEL_ORDER.index(r.model) if r.model in MODEL_ORDER else len(MODEL_ORDER), r.model)

    return sorted(reports, key=key)


def report_csv(reports: Iterable[ModelReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for rep in _order(reports):
        for split in SPLITS:
            writer.writerow([rep.model, split, *(f"{v:.4f}" for v in rep.panels[split].as_tuple())])
    return buf.getvalue()


def parse_report_csv(text: str) -> list[ModelReport]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != REPORT_HEADER:
        raise MetricError("unexpected report header")
    grouped: dict[str, dict[str, MetricPanel]] = {}
    names = [f.name for f in fields(MetricPanel)]
    for row in reader:
        panel = MetricPanel(*(float(row[n]) for n in names))
        grouped.setdefault(row["model"], {})[row["split"]] = panel
    return [ModelReport(m, p) for m, p in grouped.items()]


def report_table(reports: Iterable[ModelReport]) -> str:
    """Aligned plain-text tables, one per split."""
    reports = _order(reports)
    titles = {"train": "Training", "test": "Testing", "validation": "Validation"}
    width = max([len("Model")] + [len(r.model) for r in reports])
    lines = []
    for split in SPLITS:
        lines.append(f"Performance metrics on {titles[split]} data")
        lines.append(
            f"{'Model':<{width}}  " + "  ".join(f"{h.upper() if h != 'r2' else 'R2':>9}" for h in REPORT_HEADER[2:])
        )
        for rep in reports:
            vals = "  ".join(f"{v:>9.4f}" for v in rep.panels[split].as_tuple())
            lines.append(f"{rep.model:<{width}}  {vals}")
        lines.append("")
    return "\n".join(lines)
