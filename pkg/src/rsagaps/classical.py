"""Saturated configurations of the classical 1D hard-core (parking) process.

Rods have length 2 and are identified by their left endpoint ``p``; a rod
occupies ``[p, p + 2]`` inside ``[0, L]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .intervals import (
    GapRecord,
    Interval,
    IntervalSet,
    MEASURE_RTOL,
    complement_components,
    insert_dilated,
)

ROD = 2.0


@dataclass
class PackingState:
    L: float
    rods: np.ndarray  # sorted left endpoints
    ghosts: IntervalSet = field(default_factory=IntervalSet)
    candidates_seen: int = 0
    accepted: int = 0

    def __post_init__(self):
        self.rods = np.sort(np.asarray(self.rods, dtype=float))

    @property
    def rod_count(self) -> int:
        return len(self.rods)

    def check(self, tol: float = 1e-9) -> None:
        """Assert the state invariants."""
        r = self.rods
        assert self.accepted == len(r)
        if len(r):
            assert r[0] >= -tol and r[-1] <= self.L - ROD + tol
            assert np.all(np.diff(r) >= ROD - tol)


def saturate_split(L: float, rng) -> PackingState:
    """Exact saturated configuration by recursive splitting.

    A segment of length ``ell >= 2`` receives a rod with left endpoint uniform
    on ``[lo, lo + ell - 2]`` and splits into two independent segments.  All
    segments of one generation are processed together, left to right, so the
    number and order of random draws depend only on ``L`` and the stream.
    """
    if L < 0:
        raise ValueError("L must be non-negative")
    gen = rng.generator
    lo = np.array([0.0])
    length = np.array([float(L)])
    placed = []
    while len(lo):
        keep = length >= ROD
        lo, length = lo[keep], length[keep]
        if not len(lo):
            break
        x = lo + gen.random(len(lo)) * (length - ROD)
        placed.append(x)
        right_lo = x + ROD
        right_len = (lo + length) - right_lo
        lo, length = (
            np.column_stack((lo, right_lo)).ravel(),
            np.column_stack((x - lo, right_len)).ravel(),
        )
    rods = np.concatenate(placed) if placed else np.empty(0)
    return PackingState(L=float(L), rods=rods, candidates_seen=len(rods), accepted=len(rods))


def saturate_naive(L: float, rng) -> PackingState:
    """Sequential uniform candidates with rejection, stopped at exact saturation.

    The feasible left-endpoint region is ``[0, L - 2]`` minus ``(p - 2, p + 2)``
    for every placed rod ``p``; the run ends when it has measure zero.
    """
    if L < 0:
        raise ValueError("L must be non-negative")
    if L < ROD:
        return PackingState(L=float(L), rods=np.empty(0))
    domain = Interval(0.0, L - ROD)
    if domain.length <= MEASURE_RTOL * max(L, 1.0):
        # Only p = 0 fits; its feasible region is a single point.
        return PackingState(L=float(L), rods=np.array([0.0]), candidates_seen=1, accepted=1)
    tol = MEASURE_RTOL * L
    forbidden = IntervalSet()
    rods = []
    seen = 0
    free = domain.length
    while free > tol:
        p = rng.uniform(domain.lo, domain.hi)
        seen += 1
        if forbidden.contains(p):
            continue
        rods.append(p)
        forbidden = insert_dilated(forbidden, p, ROD, domain)
        free = sum(c.length for c in complement_components(forbidden, domain))
    return PackingState(L=float(L), rods=np.array(rods), ghosts=IntervalSet(), candidates_seen=seen, accepted=len(rods))


def gaps_between(L: float, left: np.ndarray, right: np.ndarray) -> list[GapRecord]:
    """Gaps of ``[0, L]`` around sorted rods given by their left/right ends."""
    edges_lo = np.concatenate(([0.0], right))
    edges_hi = np.concatenate((left, [float(L)]))
    out = []
    last = len(edges_lo) - 1
    for k, (a, b) in enumerate(zip(edges_lo.tolist(), edges_hi.tolist())):
        if b > a:
            out.append(GapRecord(a, b, b - a, k == 0 or k == last))
    return out


def gaps_of(state: PackingState) -> list[GapRecord]:
    """All maximal empty segments, boundary segments flagged."""
    return gaps_between(state.L, state.rods, state.rods + ROD)


def count_gaps_at_least(state: PackingState, r: float, include_boundary: bool = True) -> int:
    """Number of gaps of length at least ``r`` in this realization."""
    if r <= 0:
        raise ValueError("r must be positive")
    return sum(
        1 for g in gaps_of(state) if g.length >= r and (include_boundary or not g.touches_boundary)
    )


def max_gap(state: PackingState, include_boundary: bool = True) -> float:
    lengths = [g.length for g in gaps_of(state) if include_boundary or not g.touches_boundary]
    return max(lengths, default=0.0)


def is_covered(state: PackingState, x: float) -> bool:
    i = np.searchsorted(state.rods, x, side="right") - 1
    return bool(i >= 0 and x < state.rods[i] + ROD)
