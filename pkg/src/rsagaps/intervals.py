"""One-dimensional interval arithmetic shared by the 1D simulators.

An :class:`IntervalSet` is kept in canonical form: parts sorted by ``lo``,
pairwise disjoint, with touching parts (``a.hi == b.lo``) merged and
zero-length parts dropped.  Endpoint openness is not tracked; every
quantity the simulators need is a measure, so contacts of measure zero
are irrelevant.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterable, Sequence

# Absolute tolerance for measure comparisons, scaled by the domain length.
MEASURE_RTOL = 1e-12


class EmptySupportError(ValueError):
    """Raised when sampling from a union of intervals of zero total measure."""


@dataclass(frozen=True, slots=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite: ({self.lo}, {self.hi})")
        if self.lo > self.hi:
            raise ValueError(f"interval has lo > hi: ({self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True, slots=True)
class GapRecord:
    """One empty segment between rods or between a rod and the boundary."""

    lo: float
    hi: float
    length: float
    touches_boundary: bool


def _canonical(pairs: Iterable[tuple[float, float]]) -> tuple[Interval, ...]:
    merged: list[list[float]] = []
    for lo, hi in sorted(p for p in pairs if p[1] > p[0]):
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return tuple(Interval(lo, hi) for lo, hi in merged)


class IntervalSet:
    """Immutable canonical union of intervals."""

    __slots__ = ("_parts", "_los")

    def __init__(self, parts: Iterable[Interval | tuple[float, float]] = ()):
        pairs = [(p.lo, p.hi) if isinstance(p, Interval) else (float(p[0]), float(p[1])) for p in parts]
        for lo, hi in pairs:
            Interval(lo, hi)  # validation
        self._parts = _canonical(pairs)
        self._los = [p.lo for p in self._parts]

    @classmethod
    def _from_canonical(cls, parts: tuple[Interval, ...]) -> "IntervalSet":
        obj = cls.__new__(cls)
        obj._parts = parts
        obj._los = [p.lo for p in parts]
        return obj

    @property
    def parts(self) -> tuple[Interval, ...]:
        return self._parts

    def __len__(self) -> int:
        return len(self._parts)

    def __iter__(self):
        return iter(self._parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self._parts == other._parts

    def __hash__(self) -> int:
        return hash(self._parts)

    def __repr__(self) -> str:
        inner = ", ".join(f"({p.lo:g}, {p.hi:g})" for p in self._parts)
        return f"IntervalSet([{inner}])"

    def as_pairs(self) -> list[tuple[float, float]]:
        return [(p.lo, p.hi) for p in self._parts]

    def canonicalize(self) -> "IntervalSet":
        return IntervalSet(self._parts)

    def measure(self) -> float:
        return math.fsum(p.hi - p.lo for p in self._parts)

    def is_empty(self) -> bool:
        return not self._parts

    def contains(self, x: float) -> bool:
        """Membership in the interior of some part."""
        i = bisect_right(self._los, x) - 1
        return i >= 0 and self._parts[i].lo < x < self._parts[i].hi

    def intersects_open(self, lo: float, hi: float) -> bool:
        """True iff ``(lo, hi)`` meets the set in positive measure."""
        if hi <= lo:
            return False
        i = bisect_left(self._los, hi) - 1
        return i >= 0 and self._parts[i].hi > lo

    def union(self, lo: float, hi: float) -> "IntervalSet":
        """Canonical union with one interval, touching only the affected parts."""
        if hi <= lo:
            return self
        parts = self._parts
        i = bisect_left(self._los, lo)
        if i > 0 and parts[i - 1].hi >= lo:
            i -= 1
        j = bisect_right(self._los, hi)
        if i < j:
            lo = min(lo, parts[i].lo)
            hi = max(hi, parts[j - 1].hi)
        return IntervalSet._from_canonical(parts[:i] + (Interval(lo, hi),) + parts[j:])


def insert_dilated(set_: IntervalSet, center: float, radius: float, domain: Interval) -> IntervalSet:
    """Union ``set_`` with ``(center - radius, center + radius)`` clipped to ``domain``."""
    if not domain.contains(center):
        raise ValueError(f"center {center} outside domain [{domain.lo}, {domain.hi}]")
    if radius <= 0:
        raise ValueError("radius must be positive")
    return set_.union(max(center - radius, domain.lo), min(center + radius, domain.hi))


def complement_components(set_: IntervalSet, domain: Interval) -> list[Interval]:
    """Maximal intervals of ``domain`` not covered by ``set_``, in increasing order."""
    out = []
    cursor = domain.lo
    for p in set_.parts:
        if p.hi <= domain.lo:
            continue
        if p.lo >= domain.hi:
            break
        if p.lo > cursor:
            out.append(Interval(cursor, p.lo))
        cursor = max(cursor, p.hi)
    if cursor < domain.hi:
        out.append(Interval(cursor, domain.hi))
    return out


def dilate(set_: IntervalSet, radius: float, domain: Interval) -> IntervalSet:
    """Points of ``domain`` within distance ``radius`` of ``set_`` (``radius == 0`` clips only)."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    return IntervalSet(
        (max(p.lo - radius, domain.lo), min(p.hi + radius, domain.hi)) for p in set_.parts
    )


def _locate(components: Sequence[Interval], u: float) -> float:
    """Map ``u`` in [0, 1) to a point of the union by inverse transform."""
    cum = list(accumulate(c.hi - c.lo for c in components))
    total = cum[-1] if cum else 0.0
    if not total > 0:
        raise EmptySupportError("components have zero total measure")
    target = u * total
    i = min(bisect_right(cum, target), len(components) - 1)
    while components[i].hi <= components[i].lo:
        i -= 1
    prev = cum[i - 1] if i else 0.0
    return min(components[i].lo + (target - prev), components[i].hi)


def sample_uniform(components: Sequence[Interval], rng) -> float:
    """Uniform point on the union of ``components`` (which must not overlap)."""
    if not components:
        raise EmptySupportError("no components to sample from")
    if not sum(c.hi - c.lo for c in components) > 0:
        raise EmptySupportError("components have zero total measure")
    return _locate(components, rng.random())
