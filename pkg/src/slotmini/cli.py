"""Command-line entry point.

Exit codes: 0 success, 1 usage/config error, 2 data/validation error,
3 failed reproduction check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import dataset, metrics, physics, qdpso
from .models import BaseConfigs, ForestConfig, GbtConfig, SurrogateSuite, SvrConfig
from .models.pipeline import REPORT_NAMES, SHORT_NAMES

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CHECK = 0, 1, 2, 3

REFERENCE_OPTIMIZE_S = 11.53
REFERENCE_PREDICT_S = 0.75

log = logging.getLogger("slotmini")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# (dest, type, builtin default, help)
_COMMON = [
    ("seed", int, 1, "random seed"),
    ("config", str, None, "flat JSON file of option values (flags win)"),
    ("out", str, None, "output directory"),
]
_OPTIONS = {
    "optimize": [
        ("swarm", int, 30, "swarm size"),
        ("iters", int, 100, "maximum iterations"),
        ("target", float, physics.REFERENCE_FREQUENCY_GHZ, "target frequency (GHz)"),
        ("beta_start", float, 1.0, "initial contraction-expansion coefficient"),
        ("beta_end", float, 0.5, "final contraction-expansion coefficient"),
        ("stagnation_window", int, 0, "stop after this many iterations without improvement (0: off)"),
        ("stagnation_eps", float, 0.0, "minimal improvement counted by the stagnation test"),
        ("threshold", float, None, "stop once the best fitness is at or below this value"),
    ],
    "generate": [
        ("n", int, 936, "number of records"),
        ("noise", float, 0.02, "Gaussian noise std on f_res (GHz)"),
        ("alpha", float, 0.05, "strength of the synthetic d_inner coupling"),
        ("output", str, None, "dataset path (default <out>/dataset.csv)"),
    ],
    "train-eval": [
        ("data", str, None, "dataset CSV (default <out>/dataset.csv)"),
        ("mode", str, "paper", "stacking mode: paper or out_of_fold"),
        ("trees", int, 200, "forest size"),
        ("depth", int, 12, "forest tree depth"),
        ("mtry", int, 1, "features tried per forest split"),
        ("rounds", int, 300, "boosting rounds"),
        ("lr", float, 0.1, "boosting learning rate"),
        ("gbt_depth", int, 3, "boosting tree depth"),
        ("svr_c", float, 10.0, "SVR regularization C"),
        ("svr_eps", float, 0.01, "SVR tube half-width (GHz)"),
        ("svr_gamma", float, 2.0, "RBF kernel gamma on scaled features"),
        ("svr_tol", float, 1e-3, "SVR KKT tolerance"),
        ("svr_max_passes", int, 1000, "SVR iteration budget in passes over the training rows"),
    ],
    "reproduce": [],
    "timing": [
        ("data", str, None, "dataset CSV for the prediction stage (default: synthetic)"),
    ],
}
_OPTIONS["timing"] = _OPTIONS["timing"] + [o for o in _OPTIONS["optimize"] + _OPTIONS["train-eval"] if o[0] != "data"]


@dataclass
class RunConfig:
    command: str
    seed: int
    out: Optional[Path]
    params: dict = field(default_factory=dict)

    def __getattr__(self, name: str) -> Any:
        try:
            return self.__dict__["params"][name]
        except KeyError:
            raise AttributeError(name) from None


@dataclass(frozen=True)
class TimingReport:
    optimize_s: float
    predict_s: float
    total_s: float
    hardware: str


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slotmini", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, opts in _OPTIONS.items():
        sub = subs.add_parser(name)
        for dest, typ, _, help_ in _COMMON + opts:
            sub.add_argument("--" + dest.replace("_", "-"), dest=dest, type=typ, default=None, help=help_)
    return parser


def _load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict) or any(isinstance(v, (dict, list)) for v in data.values()):
        raise UsageError("config file must be a flat JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge builtin defaults < config file < flags."""
    file_values = _load_config_file(args.config) if args.config else {}
    opts = {d: (t, default) for d, t, default, _ in _COMMON + _OPTIONS[args.command]}
    unknown = set(file_values) - set(opts)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    values = {}
    for dest, (typ, default) in opts.items():
        value = getattr(args, dest)
        if value is None and dest in file_values:
            try:
                value = typ(file_values[dest]) if file_values[dest] is not None else None
            except (TypeError, ValueError):
                raise UsageError(f"config key {dest!r} must be {typ.__name__}") from None
        values[dest] = default if value is None else value
    out = values.pop("out")
    seed = values.pop("seed")
    values.pop("config")
    return RunConfig(args.command, seed, Path(out) if out is not None else None, values)


def _outdir(cfg: RunConfig) -> Path:
    out = cfg.out if cfg.out is not None else Path(".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def _swarm_config(cfg: RunConfig) -> qdpso.SwarmConfig:
    try:
        return qdpso.SwarmConfig(
            swarm_size=cfg.swarm,
            max_iterations=cfg.iters,
            stagnation_window=cfg.stagnation_window,
            stagnation_epsilon=cfg.stagnation_eps,
            fitness_threshold=cfg.threshold,
            beta_start=cfg.beta_start,
            beta_end=cfg.beta_end,
            target_frequency=cfg.target,
            seed=cfg.seed,
        )
    except qdpso.ConfigError as exc:
        raise UsageError(str(exc)) from exc


def _base_configs(cfg: RunConfig) -> BaseConfigs:
    if cfg.mode not in ("paper", "out_of_fold"):
        raise UsageError("--mode must be paper or out_of_fold")
    try:
        return BaseConfigs(
            forest=ForestConfig(n_trees=cfg.trees, depth_max=cfg.depth, mtry=cfg.mtry),
            svr=SvrConfig(C=cfg.svr_c, epsilon=cfg.svr_eps, gamma=cfg.svr_gamma, tol=cfg.svr_tol,
                          max_passes=cfg.svr_max_passes),
            gbt=GbtConfig(n_rounds=cfg.rounds, learning_rate=cfg.lr, depth_max=cfg.gbt_depth),
            seed=cfg.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _table_row(d_outer, d_inner, f, pct) -> str:
    return f"{d_outer:8.4f} mm  {d_inner:8.4f} mm  {f:7.4f} GHz  {pct:6.2f} %"


def cmd_optimize(cfg: RunConfig) -> int:
    swarm = _swarm_config(cfg)
    out = _outdir(cfg)
    result = qdpso.run(swarm)
    geo = swarm.geometry.with_loops(result.d_inner, result.d_outer)
    freq = physics.evaluate(geo)

    qdpso.write_trace(out / "fitness_trace.csv", result.fitness_trace)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d_outer_mm", "d_inner_mm", "f_r_ghz", "miniaturization_pct", "best_fitness", "iterations"])
    w.writerow([
        f"{result.d_outer:.6f}", f"{result.d_inner:.6f}", f"{freq.f_r:.6f}",
        f"{freq.miniaturization_percent:.4f}", repr(result.best_fitness), result.fitness_trace[-1][0],
    ])
    _write(out / "optimize_summary.csv", buf.getvalue())

    print("Outer Diameter  Inner Diameter  Frequency (analytical)  Miniaturization")
    print(_table_row(result.d_outer, result.d_inner, freq.f_r, freq.miniaturization_percent))
    print(f"best fitness {result.best_fitness:.6f} after {result.fitness_trace[-1][0]} iterations")
    return EXIT_OK


def cmd_generate(cfg: RunConfig) -> int:
    try:
        synth = dataset.SynthConfig(n_samples=cfg.n, noise_std=cfg.noise, alpha=cfg.alpha, seed=cfg.seed)
    except dataset.DatasetError as exc:
        raise UsageError(str(exc)) from exc
    path = Path(cfg.output) if cfg.output else _outdir(cfg) / "dataset.csv"
    records = dataset.generate_synthetic(synth)
    _write(path, dataset.format_csv(records))
    print(f"wrote {len(records)} records to {path}")
    return EXIT_OK


def _splits_xy(split: dataset.DatasetSplit) -> dict:
    return {name: (dataset.features(recs), dataset.targets(recs)) for name, recs in split.items()}


def _load_split(path: Path, seed: int) -> dataset.DatasetSplit:
    try:
        records = dataset.load_csv(path)
        return dataset.split(records, seed)
    except dataset.DatasetError as exc:
        raise DataError(str(exc)) from exc


def _fixture_rows() -> list[dict]:
    text = resources.files("slotmini").joinpath("data/table_ii.csv").read_text(encoding="utf-8")
    return [
        {k: float(v) for k, v in row.items()}
        for row in csv.DictReader(io.StringIO(text))
    ]


def cmd_train_eval(cfg: RunConfig) -> int:
    configs = _base_configs(cfg)
    out = _outdir(cfg)
    path = Path(cfg.data) if cfg.data else out / "dataset.csv"
    split = _load_split(path, cfg.seed)
    xy = _splits_xy(split)

    suite = SurrogateSuite.fit(*xy["train"], configs=configs, mode=cfg.mode)
    reports = []
    for key in ("forest", "svr", "gbt", "stacked"):
        name = REPORT_NAMES[key]
        if key in suite.models:
            try:
                reports.append(metrics.build_report(name, suite.models[key].predict, xy))
            except metrics.MetricError as exc:
                raise DataError(f"{name}: {exc}") from exc
        else:
            reports.append(metrics.ModelReport(name, {s: metrics.MetricPanel.missing() for s in metrics.SPLITS}))
    for key, msg in suite.failures.items():
        print(f"warning: {REPORT_NAMES[key]} not converged: {msg}", file=sys.stderr)
    if suite.meta_fallback:
        print("warning: stacked meta-learner fell back to equal weights", file=sys.stderr)

    _write(out / "model_report.csv", metrics.report_csv(reports))
    table = metrics.report_table(reports)
    _write(out / "model_report.txt", table)

    keys = [k for k in ("forest", "svr", "gbt", "stacked") if k in suite.models]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d_outer_mm", "d_inner_mm", "split", "f_res_ghz", *(SHORT_NAMES[k] for k in keys)])
    for name, recs in split.items():
        X = dataset.features(recs)
        preds = suite.predict_all(X)
        for row, rec in enumerate(recs):
            w.writerow([
                dataset.format_value(rec.d_outer), dataset.format_value(rec.d_inner), name, dataset.format_value(rec.f_res),
                *(f"{preds[k][row]:.6f}" for k in keys),
            ])
    _write(out / "predictions.csv", buf.getvalue())

    fixture = _fixture_rows()
    X_fix = np.array([(r["d_inner_mm"], r["d_outer_mm"]) for r in fixture])
    preds = suite.predict_all(X_fix)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d_outer_mm", "d_inner_mm", *(SHORT_NAMES[k] for k in keys), "f_ansys_ghz"])
    for row, r in enumerate(fixture):
        w.writerow([f"{r['d_outer_mm']:.4f}", f"{r['d_inner_mm']:.4f}",
                    *(f"{preds[k][row]:.4f}" for k in keys), f"{r['f_ansys_ghz']:.4f}"])
    _write(out / "table_ii_predictions.csv", buf.getvalue())

    print(f"split sizes (train, validation, test): {split.sizes}")
    print(table)
    return EXIT_OK


def cmd_reproduce(cfg: RunConfig) -> int:
    geo0 = physics.AntennaGeometry(d_inner=6.0, d_outer=12.0)
    ok = True
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d_outer_mm", "d_inner_mm", "f_ansys_ghz", "miniaturization_pct", "recomputed_pct",
                "pct_ok", "feasible", "f_analytical_ghz", "gap_pct"])
    print(f"{'outer':>8} {'inner':>8} {'f_ansys':>8} {'mini%':>6} {'recomp':>7}  ok  feas {'f_eq':>8} {'gap%':>7}")
    for r in _fixture_rows():
        pct = physics.miniaturization_percent(r["f_ansys_ghz"])
        pct_ok = abs(pct - r["miniaturization_pct"]) <= 0.01
        feasible = physics.is_feasible(r["d_inner_mm"], r["d_outer_mm"])
        f_eq = physics.resonant_frequency(geo0.with_loops(r["d_inner_mm"], r["d_outer_mm"]))
        gap = 100.0 * (f_eq - r["f_ansys_ghz"]) / r["f_ansys_ghz"]
        ok &= pct_ok and feasible
        w.writerow([f"{r['d_outer_mm']:.4f}", f"{r['d_inner_mm']:.4f}", f"{r['f_ansys_ghz']:.4f}",
                    f"{r['miniaturization_pct']:.2f}", f"{pct:.4f}", pct_ok, feasible, f"{f_eq:.4f}", f"{gap:.2f}"])
        print(f"{r['d_outer_mm']:8.4f} {r['d_inner_mm']:8.4f} {r['f_ansys_ghz']:8.4f} "
              f"{r['miniaturization_pct']:6.2f} {pct:7.3f}  {'✓' if pct_ok else '✗'}   {'✓' if feasible else '✗'}  "
              f"{f_eq:8.4f} {gap:+7.2f}")
    print("analytical model depends on d_outer only; the gap is surrogate vs full-wave simulation")
    if cfg.out is not None:
        _write(_outdir(cfg) / "reproduce_summary.csv", buf.getvalue())
    print("all checks passed" if ok else "CHECK FAILED")
    return EXIT_OK if ok else EXIT_CHECK


def measure_timing(cfg: RunConfig) -> TimingReport:
    swarm = _swarm_config(cfg)
    configs = _base_configs(cfg)
    if cfg.data:
        try:
            records = dataset.load_csv(cfg.data)
        except dataset.DatasetError as exc:
            raise DataError(str(exc)) from exc
    else:
        records = dataset.generate_synthetic(dataset.SynthConfig(seed=cfg.seed))
    try:
        split = dataset.split(records, cfg.seed)
    except dataset.DatasetError as exc:
        raise DataError(str(exc)) from exc
    suite = SurrogateSuite.fit(dataset.features(split.train), dataset.targets(split.train), configs, cfg.mode)
    model = suite.models["stacked"]
    X_all = dataset.features(records)

    t0 = time.perf_counter()
    qdpso.run(swarm)
    t1 = time.perf_counter()
    model.predict(X_all)
    t2 = time.perf_counter()
    hardware = f"{platform.processor() or platform.machine()}, {os.cpu_count()} logical CPUs, {platform.system()}"
    return TimingReport(t1 - t0, t2 - t1, t2 - t0, hardware)


def cmd_timing(cfg: RunConfig) -> int:
    rep = measure_timing(cfg)
    print(f"optimize stage: {rep.optimize_s:.3f} s   (paper reference, different hardware, not an acceptance gate: {REFERENCE_OPTIMIZE_S} s)")
    print(f"predict stage:  {rep.predict_s:.3f} s   (paper reference, different hardware, not an acceptance gate: {REFERENCE_PREDICT_S} s)")
    print(f"total:          {rep.total_s:.3f} s")
    print("full-wave validation stage: not available here (no EM solver); omitted from the total")
    print(f"hardware: {rep.hardware}")
    if cfg.out is not None:
        _write(
            _outdir(cfg) / "timing.csv",
            "stage,seconds\n"
            f"optimize,{rep.optimize_s:.6f}\npredict,{rep.predict_s:.6f}\ntotal,{rep.total_s:.6f}\n",
        )
    return EXIT_OK


COMMANDS = {
    "optimize": cmd_optimize,
    "generate": cmd_generate,
    "train-eval": cmd_train_eval,
    "reproduce": cmd_reproduce,
    "timing": cmd_timing,
}


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"slotmini {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"slotmini {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
