"""Quadrature solvers for the integral recurrences of the 1D parking process.

All delay recurrences are marched on a uniform grid with the composite
trapezoid rule.  The grid is forced to contain every point where the solution
jumps or kinks in its base region, and the one-sided limits at jumps are both
stored, so each panel integrates a smooth piece and the scheme keeps its
O(h**2) order.  Per-node error estimates come from re-solving at ``h / 2``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

# Reported value of the parking constant, used only by tests and reports.
PARKING_CONSTANT_REFERENCE = 0.7475979202


@dataclass(frozen=True)
class RecurrenceTable:
    name: str
    grid_step: float
    args: np.ndarray
    values: np.ndarray
    left_values: np.ndarray
    breakpoints: tuple[float, ...]
    errors: np.ndarray = field(repr=False)

    @property
    def max_arg(self) -> float:
        return float(self.args[-1])

    @property
    def est_error(self) -> float:
        return float(self.errors.max()) if len(self.errors) else 0.0

    def index(self, x: float) -> int:
        return _node(x, self.grid_step)

    def at(self, x: float) -> float:
        """Value at ``x``: exact on grid nodes, linear in between."""
        k = x / self.grid_step
        if abs(k - round(k)) < 1e-9:
            return float(self.values[int(round(k))])
        if not 0 <= x <= self.max_arg:
            raise ValueError(f"{x} outside table range [0, {self.max_arg}]")
        return float(np.interp(x, self.args, self.values))

    def error_at(self, x: float) -> float:
        return float(np.interp(x, self.args, self.errors))

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["arg", "value", "est_error"])
            for a, v, e in zip(self.args.tolist(), self.values.tolist(), self.errors.tolist()):
                w.writerow([repr(a), repr(v), repr(e)])
        return path


@dataclass(frozen=True)
class LimitEstimate:
    value: float
    at_arg: float
    residual: float


def _node(x: float, h: float) -> int:
    k = round(x / h)
    if abs(k * h - x) > 1e-9 * max(1.0, abs(x)):
        raise ValueError(f"point {x} is not on the grid of step {h}")
    return int(k)


def _grid(max_arg: float, h: float) -> tuple[int, np.ndarray]:
    n = int(math.ceil(max_arg / h - 1e-9))
    return n, np.arange(n + 1) * h


def _delay_march(v, vl, h, m, start, const, scale, lower):
    """March ``v[i] = const[i] + scale[i] * int_{x_lower}^{x_i - 2} v`` for ``i >= start``.

    ``v``/``vl`` hold right values and left limits; nodes below ``start`` are
    base data.  Nodes are filled in blocks of ``m`` since each block only
    needs the integral up to ``m`` nodes back.
    """
    n = len(v) - 1
    cum = np.zeros(n + 1)
    if start > 1:
        panels = 0.5 * h * (v[: start - 1] + vl[1:start])
        cum[1:start] = np.cumsum(panels)
    i = start
    while i <= n:
        idx = np.arange(i, min(i + m, n + 1))
        v[idx] = const[idx] + scale[idx] * (cum[idx - m] - cum[lower])
        vl[idx] = v[idx]
        cum[idx] = cum[i - 1] + np.cumsum(0.5 * h * (v[idx - 1] + vl[idx]))
        i = idx[-1] + 1
    return v, vl


def _with_error(name, solve, max_arg, h, breakpoints, estimate_error):
    args, v, vl = solve(max_arg, h)
    if estimate_error:
        _, v2, _ = solve(max_arg, h / 2)
        errors = np.abs(v - v2[::2][: len(v)]) * (4.0 / 3.0)
    else:
        errors = np.zeros_like(v)
    return RecurrenceTable(name, h, args, v, vl, tuple(breakpoints), errors)


# --------------------------------------------------------------------------
# Parking constant

_EULER_GAMMA = 0.57721566490153286061


def _inner_integrand(y: float) -> float:
    """(1 - exp(-y)) / y, with its series near zero."""
    if abs(y) < 1e-4:
        return 1.0 - y / 2.0 + y * y / 6.0 - y**3 / 24.0
    return -math.expm1(-y) / y


def _inner_series(x: float) -> float:
    total, term, k = 0.0, 1.0, 1
    while True:
        term *= x / k  # x**k / k!
        add = term / k if k % 2 else -term / k
        total += add
        if abs(add) < 1e-18:
            return total
        k += 1


def _inner(x: float) -> float:
    if x <= 1.0:
        return _inner_series(x)
    val, _ = integrate.quad(_inner_integrand, 1.0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    return _inner_series(1.0) + val


def _outer_integrand(x: float) -> float:
    return math.exp(-2.0 * _inner(x))


def renyi_alpha(tolerance: float = 1e-8) -> float:
    """The 1D parking constant by nested quadrature.

    The outer integral is cut at ``X = 40``; beyond it the inner integral
    equals ``gamma + ln x + E1(x)`` with ``E1(x) < exp(-x) / x``, so the tail
    is ``exp(-2 gamma) / X`` up to a relative error below ``1e-17``.
    """
    if not 0 < tolerance <= 1e-3:
        raise ValueError("tolerance must lie in (0, 1e-3]")
    X = 40.0
    eps = tolerance / 10.0
    body = 0.0
    for a, b in ((0.0, 1.0), (1.0, 4.0), (4.0, 12.0), (12.0, X)):
        val, _ = integrate.quad(_outer_integrand, a, b, epsabs=eps / 4, epsrel=1e-12, limit=200)
        body += val
    tail = math.exp(-2.0 * _EULER_GAMMA) / X
    return body + tail


# --------------------------------------------------------------------------
# Classical-process recurrences


def _density_solver(max_arg, h):
    n, L = _grid(max_arg, h)
    m = _node(2.0, h)
    v = np.where(L < 2.0 - 1e-12, 0.0, 1.0)
    vl = v.copy()
    vl[m] = 0.0
    with np.errstate(divide="ignore"):
        scale = 2.0 / (L - 2.0)
    return (L,) + _delay_march(v, vl, h, m, m + 1, np.ones(n + 1), scale, 0)


def solve_density(L_max: float, h: float = 0.01, *, estimate_error: bool = True) -> RecurrenceTable:
    """Expected rod count ``E[N(L)]`` of the saturated classical process."""
    if h > 0.05:
        raise ValueError("step must be <= 0.05")
    if L_max < 4:
        raise ValueError("L_max must be >= 4")
    return _with_error("density", _density_solver, L_max, h, (2.0, 4.0), estimate_error)


def _gap_base(L, h, r):
    m = _node(2.0, h)
    ir = _node(r, h)
    v = np.zeros_like(L)
    v[ir:m] = 1.0
    vl = v.copy()
    vl[ir] = 0.0
    vl[m] = 1.0
    return v, vl, m


def _gap_solver(r, factor):
    def solve(max_arg, h):
        n, L = _grid(max_arg, h)
        v, vl, m = _gap_base(L, h, r)
        with np.errstate(divide="ignore"):
            scale = factor / (L - 2.0)
        return (L,) + _delay_march(v, vl, h, m, m + 1, np.zeros(n + 1), scale, 0)

    return solve


def _check_r(r: float) -> None:
    if not 0 < r < 2:
        raise ValueError("r must lie in (0, 2)")


def solve_gap_expectation(r: float, L_max: float, h: float = 0.01, *, estimate_error: bool = True) -> RecurrenceTable:
    """``f_r(L)``, the expected number of gaps of length >= r (boundary gaps included)."""
    _check_r(r)
    bps = sorted({r, 2.0, 2.0 + r, 4.0})
    for b in bps:
        _node(b, h)
    return _with_error(f"gaps(r={r})", _gap_solver(r, 2.0), max(L_max, 4.0), h, bps, estimate_error)


def solve_second_moment_bound(r: float, L_max: float, h: float = 0.01, *, estimate_error: bool = True) -> RecurrenceTable:
    """Majorant of ``E[G(L, r)**2]`` from the variance recurrence taken with equality."""
    _check_r(r)
    bps = sorted({r, 2.0, 2.0 + r, 4.0})
    for b in bps:
        _node(b, h)
    return _with_error(f"second-moment(r={r})", _gap_solver(r, 4.0), max(L_max, 4.0), h, bps, estimate_error)


def _h_solver(r):
    def solve(max_arg, h):
        n, L = _grid(max_arg, h)
        m = _node(2.0, h)
        i_r = _node(2.0 + r, h)
        i4 = _node(4.0, h)
        v = np.zeros(n + 1)
        v[i_r : i4 + 1] = 2.0 / (L[i_r : i4 + 1] - 2.0)
        vl = v.copy()
        vl[i_r] = 0.0
        with np.errstate(divide="ignore"):
            scale = 2.0 / (L - 2.0)
        return (L,) + _delay_march(v, vl, h, m, i4 + 1, scale, scale, m)

    return solve


def solve_h(r: float, L_max: float, h: float = 0.01, *, estimate_error: bool = True) -> RecurrenceTable:
    """The auxiliary function ``h_r`` (minus the r-derivative of ``f_r``)."""
    if not 0 < r <= 2:
        raise ValueError("r must lie in (0, 2]")
    bps = sorted({2.0, 2.0 + r, 4.0})
    for b in bps:
        _node(b, h)
    return _with_error(f"h(r={r})", _h_solver(r), max(L_max, 4.0), h, bps, estimate_error)


def _read_limit(table: RecurrenceTable, L_big: float) -> LimitEstimate:
    g_big = table.at(L_big) / (L_big + 2.0)
    g_half = table.at(L_big / 2) / (L_big / 2 + 2.0)
    return LimitEstimate(g_big, L_big, abs(g_big - g_half))


def limit_coefficient_c(r: float, L_big: float = 200.0, h: float = 0.01) -> LimitEstimate:
    """``c_r = lim f_r(L) / (L + 2)``, read off at ``L_big``."""
    table = solve_gap_expectation(r, L_big, h, estimate_error=False)
    return _read_limit(table, L_big)


def solve_h_and_lambda(r: float, L_big: float = 200.0, h: float = 0.01) -> tuple[RecurrenceTable, LimitEstimate]:
    """``h_r`` on ``[0, L_big]`` and ``lambda_r = lim h_r(L) / (L + 2)``."""
    table = solve_h(r, L_big, h)
    return table, _read_limit(table, L_big)


# --------------------------------------------------------------------------
# Ghost-process gap retention


def _retention_solver(max_arg, h):
    n, s = _grid(max_arg, h)
    m = _node(2.0, h)
    P = np.ones(n + 1)
    # The window is re-summed every step: a running sum would carry an
    # absolute error near 1e-13, far above P itself once s passes ~30.
    for i in range(m + 1, n + 1):
        c = h / (s[i] + 2.0)
        window = 0.5 * P[i - m] + P[i - m + 1 : i].sum()
        P[i] = 2.0 * c * window / (1.0 - c)
    return s, P, P.copy()


def solve_retention(s_max: float, h: float = 0.001, *, estimate_error: bool = True) -> RecurrenceTable:
    """Retention probability of a gap whose un-ghosted core has length ``s``."""
    if h > 0.01:
        raise ValueError("step must be <= 0.01")
    if s_max < 4:
        raise ValueError("s_max must be >= 4")
    return _with_error("retention", _retention_solver, s_max, h, (2.0,), estimate_error)


def _induction_ratio(s: float) -> float:
    """``s**(-s/3)`` over ``2/(s+2)`` times the window integral of ``x**(-x/3)``."""
    val, _ = integrate.quad(lambda x: x ** (-x / 3.0), s - 2.0, s)
    return s ** (-s / 3.0) * (s + 2.0) / (2.0 * val)


def retention_induction_threshold(s_hi: float = 200.0, step: float = 0.05) -> float:
    """Smallest ``M`` past which the upper-bound induction step holds on ``(M, s_hi]``."""
    grid = np.arange(2.0 + step, s_hi + step / 2, step)
    bad = [s for s in grid if _induction_ratio(float(s)) < 1.0]
    return float(max(bad)) if bad else 2.0


def fit_retention_constant(table: RecurrenceTable, fit_hi: float) -> float:
    """``C`` with ``P(s) <= C s**(-s/3)`` on the grid nodes in ``[2, fit_hi]``."""
    s = table.args
    mask = (s >= 2.0) & (s <= fit_hi + 1e-12)
    return float(np.max(table.values[mask] * s[mask] ** (s[mask] / 3.0)))
