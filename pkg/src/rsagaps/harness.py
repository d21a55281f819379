"""Seeded Monte Carlo experiments: configuration, per-trial runs and summaries.

Trial ``i`` of an experiment always draws from substream ``i`` of the master
seed, and every reduction runs over the trial-indexed array, so output files
are byte-identical whatever the worker count.
"""
from __future__ import annotations

import csv
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import classical, ghost, packing2d
from .rng import trial_stream

SCHEMA_VERSION = 1

PROCESSES = {
    "classical": ("split", "naive"),
    "ghost-interval": ("accelerated", "naive"),
    "ghost-circle": ("accelerated", "naive"),
    "2d-classical": ("boxed",),
    "2d-ghost": ("boxed", "torus"),
    "2d-ghost-then-classical": ("boxed",),
}

_STAT_RE = re.compile(r"^(rod_count|max_gap|density|gap_count_at|occupancy_histogram|pair_correlation)(?:\((.+)\))?$")
_PARAM_STATS = {"gap_count_at", "occupancy_histogram", "pair_correlation"}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def parse_statistic(spec: str) -> tuple[str, float | None]:
    m = _STAT_RE.match(spec.strip())
    if not m:
        raise ConfigError("statistics", f"unknown statistic {spec!r}")
    name, arg = m.group(1), m.group(2)
    if (name in _PARAM_STATS) != (arg is not None):
        raise ConfigError("statistics", f"{name} {'needs' if name in _PARAM_STATS else 'takes no'} parameter")
    if arg is None:
        return name, None
    try:
        val = float(arg)
    except ValueError:
        raise ConfigError("statistics", f"bad parameter in {spec!r}") from None
    if name != "gap_count_at" and (val != int(val) or val < 1):
        raise ConfigError("statistics", f"{name} needs a positive integer bin count")
    if name == "gap_count_at" and not val > 0:
        raise ConfigError("statistics", "gap_count_at needs r > 0")
    return name, val


@dataclass
class ExperimentConfig:
    process: str
    L: list[float]
    trials: int
    master_seed: int
    statistics: list[str]
    mode: str | None = None
    out: str | None = None
    raw: bool = False
    workers: int = 1
    boundary_gaps: bool | None = None  # default: True for classical, False for ghost
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if isinstance(self.L, (int, float)):
            self.L = [float(self.L)]
        self.L = [float(x) for x in self.L]
        if isinstance(self.statistics, str):
            self.statistics = [self.statistics]
        if self.mode is None and self.process in PROCESSES:
            self.mode = PROCESSES[self.process][0]
        if self.boundary_gaps is None:
            self.boundary_gaps = self.process == "classical"
        self.validate()

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {self.schema_version!r}")
        if self.process not in PROCESSES:
            raise ConfigError("process", f"must be one of {sorted(PROCESSES)}")
        if self.mode not in PROCESSES[self.process]:
            raise ConfigError("mode", f"{self.process} supports {PROCESSES[self.process]}")
        if not self.L:
            raise ConfigError("L", "at least one length is required")
        if any(not math.isfinite(x) or x < 0 for x in self.L):
            raise ConfigError("L", "lengths must be finite and >= 0")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials", "must be an integer >= 1")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed", "must be a 64-bit unsigned integer")
        if not self.statistics:
            raise ConfigError("statistics", "must be non-empty")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers", "must be an integer >= 1")
        for s in self.statistics:
            name, _ = parse_statistic(s)
            if name == "pair_correlation" and self.process != "ghost-circle":
                raise ConfigError("statistics", "pair_correlation is only defined for ghost-circle")
            if self.process.startswith("2d") and name in ("max_gap", "gap_count_at", "occupancy_histogram"):
                raise ConfigError("statistics", f"{name} is a 1D statistic")
        if self.process == "ghost-circle" and any(x <= 4 for x in self.L):
            raise ConfigError("L", "ghost-circle needs L > 4")
        if self.process.startswith("2d") and any(x < 2 for x in self.L):
            raise ConfigError("L", "2D processes need L >= 2")

    @classmethod
    def from_mapping(cls, data: dict[str, Any], **overrides) -> "ExperimentConfig":
        data = dict(data)
        data.update({k: v for k, v in overrides.items() if v is not None})
        if "schema_version" not in data:
            raise ConfigError("schema_version", "field is mandatory")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        missing = [f for f in ("process", "L", "trials", "master_seed", "statistics") if f not in data]
        if missing:
            raise ConfigError(missing[0], "field is mandatory")
        return cls(**data)

    @classmethod
    def from_yaml(cls, path, **overrides) -> "ExperimentConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a mapping")
        return cls.from_mapping(data, **overrides)


@dataclass(frozen=True)
class TrialSummary:
    statistic: str
    L: float
    mean: float
    variance: float
    ci_halfwidth: float
    trials: int
    master_seed: int

    @property
    def se(self) -> float:
        return math.sqrt(self.variance / self.trials)

    @classmethod
    def from_values(cls, statistic: str, L: float, values: np.ndarray, master_seed: int) -> "TrialSummary":
        values = np.asarray(values, dtype=float)
        n = len(values)
        mean = float(np.sum(values) / n)
        var = float(np.var(values, ddof=1)) if n > 1 else 0.0
        return cls(statistic, L, mean, var, 1.96 * math.sqrt(var / n), n, master_seed)


# --------------------------------------------------------------------------
# Single trials


def _covered_bins(lo: np.ndarray, hi: np.ndarray, L: float, bins: int) -> list[float]:
    """Covered fraction of each of ``bins`` equal bins of ``[0, L]``."""
    edges = np.linspace(0.0, L, bins + 1)
    a = np.clip(lo[:, None], edges[None, :-1], edges[None, 1:])
    b = np.clip(hi[:, None], edges[None, :-1], edges[None, 1:])
    return ((b - a).sum(axis=0) / np.diff(edges)).tolist() if len(lo) else [0.0] * bins


def _simulate(process: str, mode: str, L: float, stream):
    if process == "classical":
        run = classical.saturate_split if mode == "split" else classical.saturate_naive
        return run(L, stream)
    if process == "ghost-interval":
        return ghost.run_ghost_interval(L, stream, mode)
    if process == "ghost-circle":
        return ghost.run_ghost_circle(L, stream, mode)
    if process == "2d-classical":
        return packing2d.saturate_classical_2d(L, stream)
    if process == "2d-ghost":
        return packing2d.run_ghost_2d(L, stream, mode)
    return packing2d.ghost_then_classical(L, stream)


def _gaps(process: str, state) -> list:
    if process == "classical":
        return classical.gaps_of(state)
    return ghost.ghost_gaps(state)


def _rod_intervals(process: str, state) -> tuple[np.ndarray, np.ndarray]:
    if process == "classical":
        return state.rods, state.rods + classical.ROD
    lo, hi = state.rods - 1.0, state.rods + 1.0
    if process == "ghost-circle":
        L = state.L
        lo, hi = np.concatenate((lo, lo + L, lo - L)), np.concatenate((hi, hi + L, hi - L))
    return lo, hi


def _statistic(process: str, state, gaps, boundary: bool, name: str, param) -> float | list[float]:
    if process.startswith("2d"):
        return float(state.count) if name == "rod_count" else state.density
    n = state.rod_count
    interior = [g.length for g in gaps if boundary or not g.touches_boundary]
    if name == "rod_count":
        return float(n)
    if name == "density":
        return 2.0 * n / state.L if state.L > 0 else 0.0
    if name == "max_gap":
        return max(interior, default=0.0)
    if name == "gap_count_at":
        return float(sum(1 for g in interior if g >= param))
    if name == "occupancy_histogram":
        lo, hi = _rod_intervals(process, state)
        return _covered_bins(lo, hi, state.L, int(param))
    # pair_correlation: bin centres on [0, L/2]
    bins = int(param)
    xs = (np.arange(bins) + 0.5) * (state.L / 2.0) / bins
    return [ghost.circle_pair_coverage(state, float(x)) for x in xs]


def run_trial(process: str, mode: str, L: float, master_seed: int, index: int, statistics: tuple[str, ...],
              boundary_gaps: bool = True):
    """One trial: a raw record plus the value of every requested statistic."""
    state = _simulate(process, mode, L, trial_stream(master_seed, index))
    is_2d = process.startswith("2d")
    record: dict[str, Any] = {"trial": index, "L": L, "rod_count": state.count if is_2d else state.rod_count}
    if is_2d:
        record["centers"] = state.centers.tolist()
        if state.ghost_count is not None:
            record["ghost_count"] = state.ghost_count
        gaps = None
    else:
        gaps = _gaps(process, state)
        record["gaps"] = [g.length for g in gaps]
    values = {s: _statistic(process, state, gaps, boundary_gaps, *parse_statistic(s)) for s in statistics}
    return record, values


def _run_chunk(args):
    process, mode, L, seed, indices, stats, boundary = args
    return [run_trial(process, mode, L, seed, i, stats, boundary) for i in indices]


def _summaries(stat: str, L: float, vals: list, seed: int) -> list[TrialSummary]:
    arr = np.asarray(vals, dtype=float)
    if arr.ndim == 1:
        return [TrialSummary.from_values(stat, L, arr, seed)]
    return [TrialSummary.from_values(f"{stat}[{k}]", L, arr[:, k], seed) for k in range(arr.shape[1])]


def run_experiment(config: ExperimentConfig) -> list[TrialSummary]:
    """Run every (L, trial) pair and write ``summary.csv`` (and ``raw.jsonl``) under ``config.out``."""
    config.validate()
    out_dir = Path(config.out) if config.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    stats = tuple(config.statistics)
    jobs = []
    for li, L in enumerate(config.L):
        base = li * config.trials
        indices = list(range(base, base + config.trials))
        size = max(1, -(-len(indices) // (4 * config.workers)))
        for k in range(0, len(indices), size):
            jobs.append((config.process, config.mode, L, config.master_seed, indices[k : k + size], stats,
                         config.boundary_gaps))
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_run_chunk, jobs))
    else:
        chunks = [_run_chunk(j) for j in jobs]
    results = [r for chunk in chunks for r in chunk]

    summaries: list[TrialSummary] = []
    for li, L in enumerate(config.L):
        block = results[li * config.trials : (li + 1) * config.trials]
        for s in stats:
            summaries.extend(_summaries(s, L, [v[s] for _, v in block], config.master_seed))

    if out_dir is not None:
        write_summary_csv(summaries, out_dir / "summary.csv")
        if config.raw:
            with (out_dir / "raw.jsonl").open("w") as fh:
                for rec, _ in results:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return summaries


def write_summary_csv(summaries: list[TrialSummary], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        names = [f.name for f in fields(TrialSummary)]
        w.writerow(names)
        for s in summaries:
            w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(s).values()])
    return path


# --------------------------------------------------------------------------
# Solver against simulation


@dataclass(frozen=True)
class CrossValidationReport:
    r: float
    L: float
    solver_value: float
    mc_mean: float
    se: float
    z: float
    trials: int

    @property
    def passed(self) -> bool:
        return abs(self.z) <= 3.0

    def lines(self) -> list[str]:
        return [
            f"r={self.r} L={self.L} trials={self.trials}",
            f"solver f_r(L) = {self.solver_value:.8g}",
            f"monte carlo   = {self.mc_mean:.8g} (SE {self.se:.3g})",
            f"z = {self.z:.3f} -> {'PASS' if self.passed else 'FAIL'}",
        ]


def cross_validate(r: float, L: float, trials: int, seed: int, h: float = 0.01) -> CrossValidationReport:
    """Compare the solved ``f_r(L)`` with the Monte Carlo mean gap count."""
    from .recurrence import solve_gap_expectation

    table = solve_gap_expectation(r, max(L, 4.0), h, estimate_error=False)
    solver = table.at(L)
    counts = np.array([
        classical.count_gaps_at_least(classical.saturate_split(L, trial_stream(seed, i)), r)
        for i in range(trials)
    ], dtype=float)
    mean = float(np.sum(counts) / trials)
    se = float(np.std(counts, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    diff = mean - solver
    if se > 0:
        z = diff / se
    else:
        z = 0.0 if abs(diff) <= 1e-9 else math.copysign(math.inf, diff)
    return CrossValidationReport(r, L, solver, mean, se, z, trials)
