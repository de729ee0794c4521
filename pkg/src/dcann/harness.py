"""Experiment sweep: methods x feature kinds x p_true x variable counts x repetitions.

One continuous dataset and one train/validation split are drawn per
``p_true``; the discrete variant is the floor transform of the same data, so
both kinds share rows and split. For every ``(p_true, kind, n_vars, rep)``
cell a variable subset is drawn once and both methods are fitted on it
(paired design).

Seeds::

    dataset  = derive_seed(master, "dataset", p_true)
    split    = derive_seed(master, "split", p_true)
    cell     = derive_seed(master, p_true, kind, n_vars, rep)   # drives the subset
    mlp seed = derive_seed(cell, "mlp")

Everything except ``fit_wall_seconds`` is a pure function of the config, so
records are identical whatever the worker count.
"""

from __future__ import annotations

import csv
import functools
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels, logit, metrics, mlp, synthgen
from .seeding import derive_seed
from .synthgen import GeneratorConfig

DEFAULT_P_TRUE_GRID = (0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_V_GRID = (1, 2, 3, 4, 5, 7, 10, 15, 20, 25, 30, 40, 50, 60, 70, 80, 90, 100)
METHODS = ("logit", "mlp")
FEATURE_KINDS = ("continuous", "discrete")

RESULTS_COLUMNS = (
    "method", "feature_kind", "p_true", "n_vars", "rep", "seed",
    "accuracy", "precision", "recall", "f1", "mean_prob_actual", "mean_prob_predicted",
    "fit_wall_seconds", "converged", "separable",
    # extra provenance, after the fixed columns
    "n_iter", "variable_subset", "error",
)


@dataclass(frozen=True)
class LogitSettings:
    gtol: float = 1e-8
    ftol: float = 1e-10
    max_iter: int = 100


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorConfig = GeneratorConfig()
    p_true_grid: tuple[float, ...] = DEFAULT_P_TRUE_GRID
    v_grid: tuple[int, ...] = DEFAULT_V_GRID
    repetitions: int = 20
    feature_kinds: tuple[str, ...] = FEATURE_KINDS
    methods: tuple[str, ...] = METHODS
    master_seed: int = 0
    train_fraction: float = 0.75
    hidden_layers: tuple[int, ...] = (15, 5)
    mlp: mlp.TrainSettings = mlp.TrainSettings()
    logit: LogitSettings = LogitSettings()

    def __post_init__(self):
        for name in ("p_true_grid", "v_grid", "feature_kinds", "methods", "hidden_layers"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not (self.p_true_grid and self.v_grid and self.feature_kinds and self.methods):
            raise ValueError("p_true_grid, v_grid, feature_kinds and methods must be nonempty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        for p in self.p_true_grid:
            if not 0.0 < p < 1.0:
                raise ValueError(f"p_true {p} outside (0, 1)")
        for v in self.v_grid:
            if not 1 <= v <= self.generator.n_features:
                raise ValueError(f"n_vars {v} outside [1, {self.generator.n_features}]")
        if len(set(self.v_grid)) != len(self.v_grid) or len(set(self.p_true_grid)) != len(self.p_true_grid):
            raise ValueError("grids must not contain duplicates")
        bad = set(self.feature_kinds) - set(FEATURE_KINDS) or set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown feature kind or method: {sorted(bad)}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    def cells(self) -> list["Cell"]:
        return [
            Cell(p, kind, v, rep)
            for p in self.p_true_grid
            for kind in self.feature_kinds
            for v in self.v_grid
            for rep in range(self.repetitions)
        ]

    @property
    def n_records(self) -> int:
        return len(self.p_true_grid) * len(self.feature_kinds) * len(self.v_grid) * self.repetitions * len(self.methods)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, order=True)
class Cell:
    p_true: float
    feature_kind: str
    n_vars: int
    rep: int

    def seed(self, master_seed: int) -> int:
        return derive_seed(master_seed, self.p_true, self.feature_kind, self.n_vars, self.rep)


@dataclass(frozen=True)
class RunRecord:
    method: str
    feature_kind: str
    p_true: float
    n_vars: int
    rep: int
    seed: int
    accuracy: float | None = None
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    mean_prob_actual: float | None = None
    mean_prob_predicted: float | None = None
    fit_wall_seconds: float = 0.0
    converged: bool = False
    separable: bool | None = None
    n_iter: int = 0
    variable_subset: tuple[int, ...] = ()
    error: str = ""

    @property
    def key(self) -> tuple:
        return (self.method, self.feature_kind, self.p_true, self.n_vars, self.rep)

    @property
    def failed(self) -> bool:
        return bool(self.error)

    def without_timing(self) -> "RunRecord":
        return replace(self, fit_wall_seconds=0.0)


@dataclass
class SweepResult:
    records: list[RunRecord]
    summary: dict = field(default_factory=dict)


def dataset_seed(master_seed: int, p_true: float) -> int:
    return derive_seed(master_seed, "dataset", p_true)


def split_seed(master_seed: int, p_true: float) -> int:
    return derive_seed(master_seed, "split", p_true)


@functools.lru_cache(maxsize=8)
def prepared_split(
    generator: GeneratorConfig, feature_kind: str, master_seed: int, train_fraction: float
) -> synthgen.SplitDataset:
    """The shared dataset split for one ``p_true`` (taken from ``generator``) and feature kind."""
    cfg = replace(generator, seed=dataset_seed(master_seed, generator.p_true))
    data = synthgen.generate(cfg)
    if feature_kind == "discrete":
        data = synthgen.discretize(data)
    return synthgen.split(data, train_fraction, seed=split_seed(master_seed, generator.p_true))


def draw_subset(cell_seed: int, n_features: int, n_vars: int) -> tuple[int, ...]:
    rng = np.random.default_rng(cell_seed)
    return tuple(int(i) for i in rng.choice(n_features, size=n_vars, replace=False))


def _fit_logit(config: ExperimentConfig, Xtr, ytr, Xva):
    params, report = logit.fit(
        Xtr, ytr, 2,
        gtol=config.logit.gtol, ftol=config.logit.ftol, max_iter=config.logit.max_iter,
    )
    return logit.choice_probabilities(params, Xva), report.converged, report.separable_flag, report.n_iterations


def _fit_mlp(config: ExperimentConfig, Xtr, ytr, Xva, seed: int):
    arch = mlp.Architecture((Xtr.shape[1], *config.hidden_layers, 2))
    settings = replace(config.mlp, seed=seed)
    params, log = mlp.train(arch, Xtr, ytr, settings)
    return mlp.forward(params, Xva), log.stopped_early, None, log.n_epochs


def run_cell(config: ExperimentConfig, cell: Cell) -> list[RunRecord]:
    """Fit every configured method on one cell; failures become flagged records."""
    gen = replace(config.generator, p_true=cell.p_true)
    data = prepared_split(gen, cell.feature_kind, config.master_seed, config.train_fraction)
    seed = cell.seed(config.master_seed)
    subset = draw_subset(seed, gen.n_features, cell.n_vars)
    train = synthgen.select_features(data.train, subset)
    val = synthgen.select_features(data.validation, subset)
    Xtr = np.asarray(train.features, dtype=float)
    Xva = np.asarray(val.features, dtype=float)

    out = []
    for method in config.methods:
        base = dict(
            method=method, feature_kind=cell.feature_kind, p_true=cell.p_true,
            n_vars=cell.n_vars, rep=cell.rep, seed=seed, variable_subset=subset,
        )
        t0 = time.perf_counter()
        try:
            if method == "logit":
                proba, converged, separable, n_iter = _fit_logit(config, Xtr, train.labels, Xva)
            else:
                proba, converged, separable, n_iter = _fit_mlp(
                    config, Xtr, train.labels, Xva, derive_seed(seed, "mlp")
                )
            _, sc = metrics.evaluate(val.labels, proba)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
            out.append(RunRecord(
                **base, fit_wall_seconds=time.perf_counter() - t0,
                error=f"{type(exc).__name__}: {exc}",
            ))
            continue
        out.append(RunRecord(
            **base, **sc.as_dict(),
            fit_wall_seconds=time.perf_counter() - t0,
            converged=bool(converged), separable=separable, n_iter=int(n_iter),
        ))
    return out


def _run_cells(args):
    config, cells = args
    return [r for cell in cells for r in run_cell(config, cell)]


def _chunks(cells: Sequence[Cell], size: int) -> list[list[Cell]]:
    return [list(cells[i:i + size]) for i in range(0, len(cells), size)]


def run(
    config: ExperimentConfig,
    sink: Callable[[RunRecord], None] | None = None,
    jobs: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> SweepResult:
    """Execute the whole sweep and return the records sorted by key.

    ``sink`` receives each record after the final sort, so its input does not
    depend on ``jobs``.
    """
    t0 = time.perf_counter()
    cells = config.cells()
    records: list[RunRecord] = []
    # cells are ordered by (p_true, kind) so a worker reuses its cached split
    batches = _chunks(cells, max(1, min(len(config.v_grid) * config.repetitions, 64)))
    done = 0
    if jobs <= 1:
        for batch in batches:
            records.extend(_run_cells((config, batch)))
            done += len(batch)
            if progress:
                progress(done, len(cells))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for batch, recs in zip(batches, pool.map(_run_cells, [(config, b) for b in batches])):
                records.extend(recs)
                done += len(batch)
                if progress:
                    progress(done, len(cells))

    records.sort(key=lambda r: r.key)
    keys = [r.key for r in records]
    if len(set(keys)) != len(keys):
        raise RuntimeError("duplicate record keys in sweep output")
    if sink is not None:
        for r in records:
            sink(r)

    failures: dict[str, int] = {}
    for r in records:
        if r.failed:
            failures[r.method] = failures.get(r.method, 0) + 1
    summary = {
        "config": config.to_dict(),
        "n_records": len(records),
        "n_expected": config.n_records,
        "n_failed": sum(failures.values()),
        "failures_by_method": failures,
        "runtime_seconds": time.perf_counter() - t0,
        "kernel_backend": kernels.BACKEND,
        "jobs": jobs,
    }
    return SweepResult(records, summary)


# aggregation ---------------------------------------------------------------


@dataclass(frozen=True)
class FieldStats:
    mean: float | None
    sd: float | None
    n: int
    skipped: int


@dataclass(frozen=True)
class AggregateRow:
    method: str
    feature_kind: str
    p_true: float
    n_vars: int
    n_runs: int
    stats: dict

    def mean(self, name: str) -> float | None:
        return self.stats[name].mean

    def sd(self, name: str) -> float | None:
        return self.stats[name].sd


def _field_stats(values: list[float | None]) -> FieldStats:
    present = [v for v in values if v is not None and not math.isnan(v)]
    skipped = len(values) - len(present)
    if not present:
        return FieldStats(None, None, 0, skipped)
    mean = math.fsum(present) / len(present)
    sd = statistics.stdev(present) if len(present) > 1 else 0.0
    return FieldStats(mean, sd, len(present), skipped)


def aggregate(records: Iterable[RunRecord]) -> list[AggregateRow]:
    """Mean and sample standard deviation of each score per (method, kind, p_true, n_vars).

    Undefined scores are skipped and counted.
    """
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.feature_kind, r.p_true, r.n_vars), []).append(r)
    rows = []
    for key in sorted(groups):
        recs = groups[key]
        stats = {name: _field_stats([getattr(r, name) for r in recs]) for name in metrics.SCORE_FIELDS}
        rows.append(AggregateRow(*key, n_runs=len(recs), stats=stats))
    return rows


# persistence ---------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ";".join(str(i) for i in value)
    return str(value)


def write_results_csv(records: Iterable[RunRecord], path: str | Path, include_timing: bool = True) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_COLUMNS)
        for r in records:
            if not include_timing:
                r = r.without_timing()
            w.writerow([_fmt(getattr(r, c)) for c in RESULTS_COLUMNS])
    return path


def _opt_float(s: str) -> float | None:
    return float(s) if s != "" else None


def _opt_bool(s: str) -> bool | None:
    if s == "":
        return None
    if s not in ("0", "1"):
        raise ValueError(f"expected 0/1, got {s!r}")
    return s == "1"


def read_results_csv(path: str | Path) -> list[RunRecord]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        required = RESULTS_COLUMNS[:15]
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in required):
            raise ValueError(f"{path}: missing results columns; expected at least {', '.join(required)}")
        out = []
        for line, row in enumerate(reader, start=2):
            try:
                subset = row.get("variable_subset") or ""
                out.append(RunRecord(
                    method=row["method"],
                    feature_kind=row["feature_kind"],
                    p_true=float(row["p_true"]),
                    n_vars=int(row["n_vars"]),
                    rep=int(row["rep"]),
                    seed=int(row["seed"]),
                    accuracy=_opt_float(row["accuracy"]),
                    precision=_opt_float(row["precision"]),
                    recall=_opt_float(row["recall"]),
                    f1=_opt_float(row["f1"]),
                    mean_prob_actual=_opt_float(row["mean_prob_actual"]),
                    mean_prob_predicted=_opt_float(row["mean_prob_predicted"]),
                    fit_wall_seconds=float(row["fit_wall_seconds"] or 0.0),
                    converged=bool(_opt_bool(row["converged"])),
                    separable=_opt_bool(row["separable"]),
                    n_iter=int(row.get("n_iter") or 0),
                    variable_subset=tuple(int(i) for i in subset.split(";")) if subset else (),
                    error=row.get("error") or "",
                ))
            except (TypeError, ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{line}: malformed row ({exc})") from None
    if out and any(r.method not in METHODS or r.feature_kind not in FEATURE_KINDS for r in out):
        raise ValueError(f"{path}: unknown method or feature kind")
    return out


def aggregate_columns() -> list[str]:
    cols = ["method", "feature_kind", "p_true", "n_vars", "n_runs"]
    for name in metrics.SCORE_FIELDS:
        cols += [f"{name}_mean", f"{name}_sd", f"{name}_skipped"]
    return cols


def write_aggregate_csv(rows: Iterable[AggregateRow], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(aggregate_columns())
        for row in rows:
            line = [row.method, row.feature_kind, _fmt(row.p_true), row.n_vars, row.n_runs]
            for name in metrics.SCORE_FIELDS:
                st = row.stats[name]
                line += [_fmt(st.mean), _fmt(st.sd), st.skipped]
            w.writerow(line)
    return path


def read_aggregate_csv(path: str | Path) -> list[AggregateRow]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        cols = aggregate_columns()
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in cols):
            raise ValueError(f"{path}: not an aggregate CSV (missing columns)")
        rows = []
        for line, rec in enumerate(reader, start=2):
            try:
                n_runs = int(rec["n_runs"])
                stats = {}
                for name in metrics.SCORE_FIELDS:
                    skipped = int(rec[f"{name}_skipped"])
                    stats[name] = FieldStats(
                        _opt_float(rec[f"{name}_mean"]), _opt_float(rec[f"{name}_sd"]),
                        n_runs - skipped, skipped,
                    )
                rows.append(AggregateRow(
                    rec["method"], rec["feature_kind"], float(rec["p_true"]), int(rec["n_vars"]),
                    n_runs, stats,
                ))
            except (TypeError, ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{line}: malformed row ({exc})") from None
    return rows


def write_summary_json(summary: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
    return path
