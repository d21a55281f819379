"""CSV data behind the density, max-gap, occupancy and pair-correlation plots."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np
from scipy import stats

from . import analytic, ghost
from .harness import ExperimentConfig, run_experiment
from .recurrence import renyi_alpha
from .rng import trial_stream

FIGURES = ("fig1", "fig2", "fig4", "fig5")

FIG1_LENGTHS = (10, 20, 50, 100, 200, 500, 1000, 2000)
FIG2_LENGTHS = (50, 100, 200, 300, 500, 700, 1000)


def _write(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
    return path


def _log(x: float, base: str) -> float:
    if base == "e":
        return math.log(x)
    if base == "2":
        return math.log2(x)
    raise ValueError("log base must be 'e' or '2'")


def fig1(out, trials=200, seed=1, lengths=FIG1_LENGTHS, workers=1) -> Path:
    cfg = ExperimentConfig(process="classical", L=list(lengths), trials=trials, master_seed=seed,
                           statistics=["rod_count"], workers=workers)
    alpha = renyi_alpha(1e-10)
    rows = []
    for s in run_experiment(cfg):
        dr = alpha * s.L / 2.0 + alpha - 1.0
        rows.append((s.L, 2.0 * s.mean / s.L, alpha, 2.0 * dr / s.L))
    return _write(out, ["L", "empirical_density", "alpha", "dr_approx"], rows)


def max_gap_fit(trials=200, seed=2, lengths=FIG2_LENGTHS, log_base="e", workers=1):
    """Mean interior max gap per length and its least-squares fit against log L."""
    cfg = ExperimentConfig(process="ghost-interval", L=list(lengths), trials=trials, master_seed=seed,
                           statistics=["max_gap"], workers=workers)
    summ = run_experiment(cfg)
    logs = np.array([_log(s.L, log_base) for s in summ])
    means = np.array([s.mean for s in summ])
    fit = stats.linregress(logs, means)
    return summ, logs, fit


def fig2(out, trials=200, seed=2, lengths=FIG2_LENGTHS, log_base="e", workers=1) -> Path:
    summ, logs, fit = max_gap_fit(trials, seed, lengths, log_base, workers)
    col = "ln_L" if log_base == "e" else "log2_L"
    rows = [(s.L, s.mean, lg, fit.slope, fit.intercept, fit.rvalue**2) for s, lg in zip(summ, logs)]
    return _write(out, ["L", "mean_max_gap", col, "fit_slope", "fit_intercept", "r_squared"], rows)


def empirical_occupancy(xs, L: float, trials: int, seed: int) -> np.ndarray:
    hits = np.zeros(len(xs))
    for i in range(trials):
        st = ghost.run_ghost_interval(L, trial_stream(seed, i))
        hits += [ghost.is_covered(st, float(x)) for x in xs]
    return hits / trials


def empirical_pair_correlation(xs, L: float, trials: int, seed: int) -> np.ndarray:
    acc = np.zeros(len(xs))
    for i in range(trials):
        st = ghost.run_ghost_circle(L, trial_stream(seed, i))
        acc += [ghost.circle_pair_coverage(st, float(x)) for x in xs]
    return acc / trials


def fig4(out, trials=2000, seed=4, L=20.0) -> Path:
    xs = np.round(np.arange(0.0, 6.0 + 1e-9, 0.25), 10)
    emp = empirical_occupancy(xs, L, trials, seed)
    rows = [(x, analytic.occupancy(float(x), L), e) for x, e in zip(xs, emp)]
    return _write(out, ["x", "formula_value", "empirical_value"], rows)


def fig5(out, trials=2000, seed=5, L=40.0) -> Path:
    xs = np.round(np.arange(0.25, 10.0 + 1e-9, 0.25), 10)
    emp = empirical_pair_correlation(xs, L, trials, seed)
    rows = [
        (x, analytic.pair_correlation_circle(float(x)), e, analytic.pair_correlation_circle_exact(float(x)))
        for x, e in zip(xs, emp)
    ]
    return _write(out, ["x", "formula_value", "empirical_value", "exact_value"], rows)


def figure_data(figure: str, out, **params) -> Path:
    if figure not in FIGURES:
        raise ValueError(f"figure must be one of {FIGURES}")
    return {"fig1": fig1, "fig2": fig2, "fig4": fig4, "fig5": fig5}[figure](out, **params)
