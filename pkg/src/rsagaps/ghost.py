"""The one-dimensional ghost hard-core process, run to termination.

Each candidate centre ``x`` ghosts ``(x - 1, x + 1)``; it is accepted only if
that window misses every earlier ghost (and, on the interval, ``x`` lies in
``[1, L - 1]``).  The run stops once no uncovered component of length >= 2
remains.

Two samplers are provided.  ``naive`` draws every candidate uniformly and
follows the definition literally.  ``accelerated`` draws only candidates whose
window is not already fully ghosted: those are uniform on the active region
(the radius-1 dilation of the uncovered set), and skipping the others changes
neither the ghost set nor the accepted rods.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .classical import gaps_between
from .intervals import (
    GapRecord,
    Interval,
    IntervalSet,
    complement_components,
    insert_dilated,
)
from .rng import trial_stream

CANDIDATE_BUDGET = 10**9

Geometry = Literal["interval", "circle"]
Mode = Literal["naive", "accelerated"]


class CandidateBudgetExceeded(RuntimeError):
    pass


@dataclass
class GhostState:
    geometry: Geometry
    L: float
    Y: IntervalSet
    rods: np.ndarray  # sorted accepted centres
    candidates_seen: int
    accepted: int
    effective_candidates: int
    acceptance_times: list[int] | None = None  # naive mode only
    terminated: bool = True

    @property
    def rod_count(self) -> int:
        return len(self.rods)


def _big(lo: float, hi: float) -> bool:
    return hi - lo >= 2.0


class _Uncovered:
    """Uncovered components ``[lo, hi]`` of a line segment, kept sorted."""

    def __init__(self, los: list[float], his: list[float]):
        self.los = los
        self.his = his
        self.n_big = sum(_big(a, b) for a, b in zip(los, his))

    def active_pieces(self, clip_lo: float, clip_hi: float) -> tuple[list[float], list[float], float]:
        """Disjoint pieces of the radius-1 dilation, with their cumulative measure."""
        starts, cum = [], []
        total = 0.0
        prev_end = clip_lo
        for lo, hi in zip(self.los, self.his):
            s = max(lo - 1.0, prev_end)
            e = min(hi + 1.0, clip_hi)
            if e > s:
                total += e - s
                starts.append(s)
                cum.append(total)
                prev_end = e
        return starts, cum, total

    def sample_active(self, rng, clip_lo: float, clip_hi: float) -> float:
        starts, cum, total = self.active_pieces(clip_lo, clip_hi)
        target = rng.random() * total
        k = min(bisect_right(cum, target), len(cum) - 1)
        return starts[k] + (target - (cum[k - 1] if k else 0.0))

    def window_free(self, x: float) -> bool:
        """True iff ``[x - 1, x + 1]`` lies inside one uncovered component."""
        i = bisect_right(self.los, x - 1.0) - 1
        return i >= 0 and self.his[i] >= x + 1.0

    def cover(self, a: float, b: float) -> bool:
        """Remove ``(a, b)``; return whether anything changed."""
        i = bisect_right(self.his, a)
        j = bisect_left(self.los, b)
        if i >= j:
            return False
        new_lo, new_hi = [], []
        if self.los[i] < a:
            new_lo.append(self.los[i])
            new_hi.append(a)
        if self.his[j - 1] > b:
            new_lo.append(b)
            new_hi.append(self.his[j - 1])
        self.n_big -= sum(_big(self.los[k], self.his[k]) for k in range(i, j))
        self.n_big += sum(_big(p, q) for p, q in zip(new_lo, new_hi))
        self.los[i:j] = new_lo
        self.his[i:j] = new_hi
        return True

    def covered_set(self, L: float) -> IntervalSet:
        pairs = []
        cursor = 0.0
        for lo, hi in zip(self.los, self.his):
            if lo > cursor:
                pairs.append((cursor, lo))
            cursor = hi
        if cursor < L:
            pairs.append((cursor, L))
        return IntervalSet(pairs)


def _budget_check(seen: int, budget: int) -> None:
    if seen > budget:
        raise CandidateBudgetExceeded(f"ghost run exceeded {budget} candidates")


def _ghost_interval_accelerated(L: float, rng, budget: int) -> GhostState:
    unc = _Uncovered([0.0], [float(L)])
    rods = []
    seen = 0
    while unc.n_big:
        x = unc.sample_active(rng, 0.0, L)
        seen += 1
        _budget_check(seen, budget)
        ok = 1.0 <= x <= L - 1.0 and unc.window_free(x)
        unc.cover(max(x - 1.0, 0.0), min(x + 1.0, L))
        if ok:
            rods.append(x)
    return GhostState("interval", float(L), unc.covered_set(L), np.sort(np.array(rods)),
                      candidates_seen=seen, accepted=len(rods), effective_candidates=seen)


def _has_big_component(Y: IntervalSet, domain: Interval) -> bool:
    return any(c.length >= 2.0 for c in complement_components(Y, domain))


def _ghost_interval_naive(L: float, rng, max_candidates: int | None, budget: int) -> GhostState:
    domain = Interval(0.0, float(L))
    Y = IntervalSet()
    rods, times = [], []
    t = effective = 0
    alive = _has_big_component(Y, domain)
    while alive:
        if max_candidates is not None and t >= max_candidates:
            break
        x = rng.uniform(0.0, L)
        t += 1
        _budget_check(t, budget)
        if x < 1.0 or x > L - 1.0:
            accept = False
        else:
            accept = not Y.intersects_open(x - 1.0, x + 1.0)
        new_Y = insert_dilated(Y, x, 1.0, domain)
        if accept:
            rods.append(x)
            times.append(t)
        if new_Y != Y:
            effective += 1
            Y = new_Y
            alive = _has_big_component(Y, domain)
    return GhostState("interval", float(L), Y, np.sort(np.array(rods)), candidates_seen=t,
                      accepted=len(rods), effective_candidates=effective, acceptance_times=times,
                      terminated=not alive)


def run_ghost_interval(L: float, rng, mode: Mode = "accelerated", *, max_candidates: int | None = None,
                       budget: int = CANDIDATE_BUDGET) -> GhostState:
    """Run the ghost process on ``[0, L]`` to termination.

    ``max_candidates`` truncates a naive run after that many candidates (used
    for per-time statistics); the returned state then has ``terminated`` False
    if the process was still alive.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    if mode == "naive":
        return _ghost_interval_naive(L, rng, max_candidates, budget)
    if mode == "accelerated":
        if max_candidates is not None:
            raise ValueError("candidate times are only defined in naive mode")
        return _ghost_interval_accelerated(L, rng, budget)
    raise ValueError(f"unknown mode {mode!r}")


def _wrap(a: float, b: float, L: float) -> list[tuple[float, float]]:
    """Pieces of the circular arc ``(a, b)`` (with ``b - a < L``) inside ``[0, L]``."""
    a0 = a % L
    b0 = a0 + (b - a)
    if b0 <= L:
        return [(a0, b0)]
    return [(a0, L), (0.0, b0 - L)]


def _circle_pieces_to_set(pairs, L: float) -> IntervalSet:
    out = []
    for a, b in pairs:
        out.extend(_wrap(a, b, L))
    return IntervalSet(out)


def _ghost_circle_accelerated(L: float, rng, budget: int) -> GhostState:
    # Cut the circle at the left end of the first (always accepted) rod.
    x0 = rng.uniform(0.0, L)
    unc = _Uncovered([2.0], [float(L)])
    rods = [1.0]
    seen = 1
    while unc.n_big:
        x = unc.sample_active(rng, -math.inf, math.inf)
        seen += 1
        _budget_check(seen, budget)
        ok = unc.window_free(x)
        unc.cover(x - 1.0, min(x + 1.0, L))
        if ok:
            rods.append(x)
    shift = x0 - 1.0
    centres = np.sort((np.array(rods) + shift) % L)
    covered = unc.covered_set(L)
    Y = _circle_pieces_to_set([(p.lo + shift, p.hi + shift) for p in covered.parts], L)
    return GhostState("circle", float(L), Y, centres, candidates_seen=seen, accepted=len(rods),
                      effective_candidates=seen)


def _circle_alive(Y: IntervalSet, L: float) -> bool:
    comps = complement_components(Y, Interval(0.0, L))
    if not comps:
        return False
    lengths = [c.length for c in comps]
    if len(comps) > 1 and comps[0].lo == 0.0 and comps[-1].hi == L:
        lengths[0] += lengths.pop()
    return max(lengths) >= 2.0


def _ghost_circle_naive(L: float, rng, budget: int) -> GhostState:
    Y = IntervalSet()
    rods = []
    t = effective = 0
    alive = True
    while alive:
        x = rng.uniform(0.0, L)
        t += 1
        _budget_check(t, budget)
        pieces = _wrap(x - 1.0, x + 1.0, L)
        if not any(Y.intersects_open(a, b) for a, b in pieces):
            rods.append(x)
        new_Y = Y
        for a, b in pieces:
            new_Y = new_Y.union(a, b)
        if new_Y != Y:
            effective += 1
            Y = new_Y
            alive = _circle_alive(Y, L)
    return GhostState("circle", float(L), Y, np.sort(np.array(rods)), candidates_seen=t,
                      accepted=len(rods), effective_candidates=effective)


def run_ghost_circle(L: float, rng, mode: Mode = "accelerated", *, budget: int = CANDIDATE_BUDGET) -> GhostState:
    """Run the ghost process on a circle of circumference ``L``."""
    if not L > 4:
        raise ValueError("circle geometry needs L > 4")
    if mode == "naive":
        return _ghost_circle_naive(L, rng, budget)
    if mode == "accelerated":
        return _ghost_circle_accelerated(L, rng, budget)
    raise ValueError(f"unknown mode {mode!r}")


def success_probability_empirical(L: float, t: int, trials: int, seed: int) -> float:
    """Fraction of naive runs whose ``t``-th candidate is accepted."""
    if t < 1:
        raise ValueError("t must be >= 1")
    hits = 0
    for i in range(trials):
        st = run_ghost_interval(L, trial_stream(seed, i), "naive", max_candidates=t)
        if st.acceptance_times and st.acceptance_times[-1] == t:
            hits += 1
    return hits / trials


def ghost_gaps(state: GhostState) -> list[GapRecord]:
    """Empty segments between rods; boundary segments flagged (interval only)."""
    c = state.rods
    if state.geometry == "interval":
        return gaps_between(state.L, c - 1.0, c + 1.0)
    if len(c) == 0:
        return [GapRecord(0.0, state.L, state.L, False)]
    nxt = np.append(c[1:], c[0] + state.L)
    return [GapRecord(a + 1.0, b - 1.0, b - a - 2.0, False) for a, b in zip(c.tolist(), nxt.tolist()) if b - a > 2.0]


def max_gap(state: GhostState, include_boundary: bool = False) -> float:
    return max((g.length for g in ghost_gaps(state) if include_boundary or not g.touches_boundary), default=0.0)


def is_covered(state: GhostState, x: float) -> bool:
    d = np.abs(state.rods - x)
    if state.geometry == "circle":
        d = np.minimum(d, state.L - d)
    return bool(np.any(d < 1.0))


def circle_pair_coverage(state: GhostState, x: float) -> float:
    """Fraction of base points ``u`` with both ``u`` and ``u + x`` covered."""
    c = state.rods
    L = state.L
    diff = (c[:, None] - c[None, :] + x) % L
    diff = np.minimum(diff, L - diff)
    return float(np.clip(2.0 - diff, 0.0, None).sum() / L)
