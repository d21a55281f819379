"""Closed-form quantities of the 1D ghost process.

Every piecewise expression is wrapped in :class:`PiecewiseFormula`, which
refuses to evaluate below the length where the expression is valid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

CONTINUITY_TOL = 1e-12


class ValidityError(ValueError):
    """Raised when a formula is evaluated outside the range where it holds."""


@dataclass(frozen=True)
class PiecewiseFormula:
    """Piece ``k`` applies on ``[breakpoints[k-1], breakpoints[k])``; the last piece is unbounded."""

    name: str
    breakpoints: tuple[float, ...]
    pieces: tuple[Callable[[float], float], ...]
    validity_floor: float

    def __post_init__(self):
        if len(self.pieces) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one more piece than breakpoints")
        if list(self.breakpoints) != sorted(self.breakpoints):
            raise ValueError("breakpoints must be increasing")

    def check_length(self, L: float) -> None:
        if L < self.validity_floor:
            raise ValidityError(f"{self.name} holds only for L >= {self.validity_floor}, got L = {L}")

    def __call__(self, x: float) -> float:
        k = int(np.searchsorted(self.breakpoints, x, side="right"))
        return float(self.pieces[k](x))

    def jumps(self) -> list[float]:
        """Absolute jump of the formula at each interior breakpoint."""
        return [abs(self.pieces[k](b) - self.pieces[k + 1](b)) for k, b in enumerate(self.breakpoints)]

    def is_continuous(self, tol: float = CONTINUITY_TOL) -> bool:
        return all(j <= tol for j in self.jumps())


# --------------------------------------------------------------------------
# Success probability and expected rod count

SUCCESS_FLOOR = 6.0


def success_prob(t: int, L: float) -> float:
    """Probability that the ``t``-th candidate on ``[0, L]`` is accepted."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if L < SUCCESS_FLOOR:
        raise ValidityError(f"success_prob needs L >= {SUCCESS_FLOOR}")
    a = (L - 3.0) / L
    b = (L - 4.0) / L
    return 2.0 * (a**t - b**t) / t + b**t


def expected_rods_series(L: float, tol: float = 1e-12) -> tuple[float, float]:
    """Sum of ``success_prob(t, L)`` over all ``t`` and a bound on the dropped tail.

    Every term is at most ``3 q**t`` with ``q = (L - 3) / L``, so the tail past
    ``T`` is at most ``3 q**(T+1) / (1 - q)``.
    """
    if L < SUCCESS_FLOOR:
        raise ValidityError(f"series needs L >= {SUCCESS_FLOOR}")
    q = (L - 3.0) / L
    a, b = q, (L - 4.0) / L
    total = 0.0
    t0, chunk = 1, 4096
    while True:
        t = np.arange(t0, t0 + chunk, dtype=float)
        terms = 2.0 * (a**t - b**t) / t + b**t
        total += math.fsum(terms)
        T = t0 + chunk - 1
        bound = 3.0 * q ** (T + 1) / (1.0 - q)
        if bound < tol:
            return total, bound
        t0 += chunk


def expected_rods_ghost(L: float, geometry: str = "interval") -> float:
    if geometry == "interval":
        if L < SUCCESS_FLOOR:
            raise ValidityError(f"interval formula needs L >= {SUCCESS_FLOOR}")
        return L / 4.0 + math.log(16.0 / 9.0) - 1.0
    if geometry == "circle":
        if not L > 4:
            raise ValidityError("circle formula needs L > 4")
        return L / 4.0
    raise ValueError(f"unknown geometry {geometry!r}")


# --------------------------------------------------------------------------
# Occupancy on the interval

OCCUPANCY = PiecewiseFormula(
    "occupancy",
    (1.0, 2.0, 3.0),
    (
        lambda x: math.log((3.0 + x) / 3.0),
        lambda x: (x - 1.0) / 4.0 + math.log(4.0 / 3.0),
        lambda x: (x - 1.0) / 4.0 + math.log(4.0 / (1.0 + x)),
        lambda x: 0.5,
    ),
    validity_floor=10.0,
)


def occupancy(x: float, L: float) -> float:
    """Probability that ``x`` in ``[0, L]`` is covered at termination."""
    OCCUPANCY.check_length(L)
    if not 0 <= x <= L:
        raise ValueError("x must lie in [0, L]")
    return OCCUPANCY(min(x, L - x))


def occupancy_mass(L: float) -> float:
    """``int_0^L occupancy(x, L) dx`` by adaptive quadrature over the smooth pieces."""
    OCCUPANCY.check_length(L)
    edges = sorted({0.0, 1.0, 2.0, 3.0, L / 2.0})
    half = 0.0
    for a, b in zip(edges, edges[1:]):
        if b <= L / 2.0:
            val, _ = integrate.quad(OCCUPANCY, a, b, epsabs=1e-13, epsrel=1e-13)
            half += val
    return 2.0 * half


# --------------------------------------------------------------------------
# Pair correlation on the circle

PAIR_FLOOR = 20.0

PAIR_CORRELATION = PiecewiseFormula(
    "pair_correlation",
    (1.0, 2.0, 3.0, 4.0),
    (
        lambda x: 0.25 * (2.0 + math.log(27.0) - 3.0 * math.log(x + 3.0)),
        lambda x: 0.25 * (x * x / 8.0 - x + 23.0 / 8.0 - math.log(64.0 / 27.0)),
        lambda x: 0.25 * (19.0 / 8.0 - 0.5 * x - 3.0 * math.log(4.0 / (x + 1.0))),
        lambda x: 0.25 * (x - x * x / 8.0 - 1.0),
        lambda x: 0.25,
    ),
    validity_floor=PAIR_FLOOR,
)


def pair_correlation_circle(x: float) -> float:
    """Published five-piece closed form for the circle pair correlation.

    It is the ``sigma``-average of :func:`conditional_occupancy`.  Simulation
    disagrees with it on roughly ``1 < x < 6``; see
    :func:`pair_correlation_circle_exact`.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    return PAIR_CORRELATION(x)


def conditional_occupancy(x: float, sigma: float) -> float:
    """Coverage probability at distance ``x`` right of a point covered by the first rod.

    ``sigma`` in ``[0, 2]`` is the part of that rod lying right of the point.
    """
    if not 0 <= sigma <= 2:
        raise ValueError("sigma must lie in [0, 2]")
    if x <= sigma:
        return 1.0
    if sigma >= 1.0:
        return 0.5 if x >= 2.0 + sigma else (x - sigma) / 4.0
    if x >= 3.0:
        return 0.5
    if x >= 2.0 + sigma:
        return (x - 1.0) / 4.0 + math.log(4.0 / (x + 1.0))
    if x >= 1.0:
        return (x - 1.0) / 4.0 + math.log(4.0 / (3.0 + sigma))
    return math.log((3.0 + x) / (3.0 + sigma))


def pair_correlation_from_conditional(x: float) -> float:
    """Numeric ``sigma``-average of :func:`conditional_occupancy` (second route to the closed form)."""
    pts = sorted({p for p in (x, x - 2.0, 1.0) if 0.0 < p < 2.0})
    val, _ = integrate.quad(lambda s: conditional_occupancy(x, s), 0.0, 2.0, points=pts or None,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return 0.25 * val


def _pair_weight_antiderivative(u: float, a: float, b: float) -> float:
    """Antiderivative of ``(a + b u) w(u)``, ``w(u) = 1/(2(4+u))`` below 4 and ``1/16`` above."""
    if u <= 4.0:
        return 0.5 * (b * u + (a - 4.0 * b) * math.log(4.0 + u))
    at4 = 0.5 * (4.0 * b + (a - 4.0 * b) * math.log(8.0))
    return at4 + (a * (u - 4.0) + b * (u * u - 16.0) / 2.0) / 16.0


def _weighted_tent(lo: float, hi: float, a: float, b: float) -> float:
    if hi <= lo:
        return 0.0
    F = _pair_weight_antiderivative
    mid = [p for p in (4.0,) if lo < p < hi]
    knots = [lo, *mid, hi]
    return sum(F(q, a, b) - F(p, a, b) for p, q in zip(knots, knots[1:]))


def pair_correlation_circle_exact(x: float) -> float:
    """Circle pair correlation from the exact two-rod separation law.

    Two rods at separation ``u >= 2`` occur with density ``1 / (2 (4 + u))``
    per unit length squared below ``u = 4`` and ``1/16`` beyond, and the pair
    of points is covered by a rod pair at separation ``u`` on a set of measure
    ``(2 - |u - x|)+``.  The same-rod term contributes ``(2 - x)+ / 4``.
    """
    if not x >= 0:
        raise ValueError("x must be non-negative")
    lo = max(2.0, x - 2.0)
    # Tent 2 - |u - x| is (2 - x) + u on [x-2, x] and (2 + x) - u on [x, x+2].
    left = _weighted_tent(lo, max(lo, x), 2.0 - x, 1.0)
    right = _weighted_tent(max(lo, x), x + 2.0, 2.0 + x, -1.0)
    return max(0.0, 2.0 - x) / 4.0 + left + right


def curve(fn: Callable[[float], float], xs: Sequence[float]) -> np.ndarray:
    return np.array([fn(float(x)) for x in xs])
