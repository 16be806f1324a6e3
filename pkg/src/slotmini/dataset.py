"""Dataset schema, CSV I/O, seeded 90/5/5 splitting and a synthetic generator.

The synthetic generator stands in for a full-wave simulation campaign. Its
``d_inner`` coupling term and the return-loss/efficiency columns are
placeholders that give the regressors a two-feature signal; they are not
physics.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import physics

COLUMNS = (
    "d_inner_mm",
    "d_outer_mm",
    "f_res_ghz",
    "return_loss_db",
    "rl_depth_db",
    "efficiency",
)
SIG_DIGITS = 6
MIN_SPLIT_RECORDS = 20


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class SampleRecord:
    d_inner: float
    d_outer: float
    f_res: float
    return_loss: float
    rl_depth: float
    efficiency: float

    def problems(self) -> list[tuple[str, str]]:
        """Invariant violations as ``(field, message)`` pairs."""
        out = []
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                out.append((f.name, "is not finite"))
        if out:
            return out
        if not physics.MIN_INNER_DIAMETER < self.d_inner:
            out.append(("d_inner", "violates the 1.2 mm lower limit"))
        elif not physics.is_feasible(self.d_inner, self.d_outer):
            out.append(("d_outer", "violates the loop-diameter constraints"))
        if self.f_res <= 0:
            out.append(("f_res", "must be positive"))
        if not 0.0 <= self.efficiency <= 1.0:
            out.append(("efficiency", "must lie in [0, 1]"))
        return out


@dataclass(frozen=True)
class DatasetSplit:
    train: list[SampleRecord]
    validation: list[SampleRecord]
    test: list[SampleRecord]
    seed: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.validation), len(self.test)

    def items(self):
        """``(name, records)`` in report order: train, test, validation."""
        return (("train", self.train), ("test", self.test), ("validation", self.validation))


@dataclass(frozen=True)
class SynthConfig:
    n_samples: int = 936
    noise_std: float = 0.02
    alpha: float = 0.05
    seed: int = 1

    def __post_init__(self) -> None:
        if self.n_samples < 10:
            raise DatasetError("n_samples must be >= 10")
        if not self.noise_std >= 0:
            raise DatasetError("noise_std must be >= 0")
        if not math.isfinite(self.alpha):
            raise DatasetError("alpha must be finite")


def features(records: Sequence[SampleRecord]) -> np.ndarray:
    """``(n, 2)`` array of ``(d_inner, d_outer)``."""
    return np.array([(r.d_inner, r.d_outer) for r in records], dtype=float).reshape(-1, 2)


def targets(records: Sequence[SampleRecord]) -> np.ndarray:
    return np.array([r.f_res for r in records], dtype=float)


def format_value(value: float) -> str:
    return f"{value:.{SIG_DIGITS}g}"


def quantize(record: SampleRecord) -> SampleRecord:
    """Round every field to the CSV's 6 significant digits."""
    return SampleRecord(*(float(format_value(v)) for v in astuple(record)))


def format_csv(records: Iterable[SampleRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in records:
        writer.writerow([format_value(v) for v in astuple(r)])
    return buf.getvalue()


def write_csv(path, records: Iterable[SampleRecord]) -> None:
    Path(path).write_text(format_csv(records), encoding="utf-8", newline="")


def parse_csv(text: str) -> list[SampleRecord]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("missing header") from None
    header = [h.strip() for h in header]
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise DatasetError(f"missing column(s): {', '.join(missing)}")
    index = [header.index(c) for c in COLUMNS]
    names = [f.name for f in fields(SampleRecord)]

    records = []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        values = []
        for col, name in zip(index, names):
            try:
                values.append(float(row[col]))
            except IndexError:
                raise DatasetError(f"row {row_no}: {name} is missing") from None
            except ValueError:
                raise DatasetError(f"row {row_no}: {name} is not a number: {row[col]!r}") from None
        record = SampleRecord(*values)
        problems = record.problems()
        if problems:
            name, msg = problems[0]
            raise DatasetError(f"row {row_no}: {name} {msg}")
        records.append(record)
    return records


def load_csv(path) -> list[SampleRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    return parse_csv(text)


def fisher_yates(n: int, rng: np.random.Generator) -> list[int]:
    """Permutation of ``range(n)``, drawing ``j ~ U{0..i}`` for i = n-1 .. 1."""
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    return order


def split_sizes(n: int) -> tuple[int, int, int]:
    """90/5/5 sizes; validation and test are floored, the remainder trains."""
    n_val = n_test = int(math.floor(n * 0.05))
    return n - n_val - n_test, n_val, n_test


def split(records: Sequence[SampleRecord], seed: int) -> DatasetSplit:
    if len(records) < MIN_SPLIT_RECORDS:
        raise DatasetError(f"need at least {MIN_SPLIT_RECORDS} records to split, got {len(records)}")
    order = fisher_yates(len(records), np.random.default_rng(seed))
    shuffled = [records[i] for i in order]
    n_train, n_val, _ = split_sizes(len(records))
    return DatasetSplit(
        train=shuffled[:n_train],
        validation=shuffled[n_train : n_train + n_val],
        test=shuffled[n_train + n_val :],
        seed=seed,
    )


def _placeholder_responses(d_inner: float, d_outer: float) -> tuple[float, float, float]:
    # Smooth, bounded stand-ins; only their invariants matter.
    ratio = d_inner / d_outer
    return_loss = -(10.0 + 15.0 * ratio)
    rl_depth = return_loss - 2.0 * (d_outer / physics.MAX_OUTER_DIAMETER)
    efficiency = 0.6 + 0.3 * ratio
    return return_loss, rl_depth, efficiency


def generate_synthetic(
    cfg: SynthConfig = SynthConfig(),
    geometry: physics.AntennaGeometry | None = None,
) -> list[SampleRecord]:
    """Synthetic records over the feasible diameter region.

    f_res = f_r(d_outer) * (1 + alpha * (d_inner / d_outer - 0.5)) + N(0, noise_std)
    """
    geometry = geometry or physics.AntennaGeometry(d_inner=6.0, d_outer=12.0)
    rng = np.random.default_rng(cfg.seed)
    lo, hi = physics.MIN_INNER_DIAMETER, physics.MAX_OUTER_DIAMETER
    records: list[SampleRecord] = []
    while len(records) < cfg.n_samples:
        d_inner, d_outer = rng.uniform(lo, hi, size=2)
        if not physics.is_feasible(d_inner, d_outer):
            continue
        f0 = physics.resonant_frequency(geometry.with_loops(d_inner, d_outer))
        f_res = f0 * (1.0 + cfg.alpha * (d_inner / d_outer - 0.5))
        if cfg.noise_std > 0:
            f_res += rng.normal(0.0, cfg.noise_std)
        records.append(
            SampleRecord(float(d_inner), float(d_outer), float(f_res), *_placeholder_responses(d_inner, d_outer))
        )
    return records
