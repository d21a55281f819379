"""Classical and ghost packing of 2x2 axis-aligned squares in an L x L box or torus.

A square is identified by its centre.  Two squares overlap iff their centres
are closer than 2 in the Chebyshev metric, so a placed centre ``p`` forbids
the open 4x4 square ``(p - 2, p + 2)^2`` of later centres.

The simulators keep the set of still-admissible centres as a list of
disjoint rectangles and subtract each new 4x4 square from it.  This gives
exact saturation detection (zero remaining area) and direct sampling.
:class:`RectRegion` is the independent union-area routine used to verify
those decompositions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SIDE = 2.0
EXCL = 2.0  # half-side of the exclusion square around a centre
SLIVER_RTOL = 1e-12


def _as_rects(rects) -> np.ndarray:
    arr = np.asarray(rects, dtype=float).reshape(-1, 4)
    if np.any(arr[:, 2] < arr[:, 0]) or np.any(arr[:, 3] < arr[:, 1]):
        raise ValueError("rectangles need x0 <= x1 and y0 <= y1")
    return arr


class RectRegion:
    """Union of axis-aligned rectangles ``(x0, y0, x1, y1)``, possibly overlapping."""

    def __init__(self, rects=()):
        self.rects = _as_rects(list(rects)) if len(rects) else np.empty((0, 4))

    def __len__(self) -> int:
        return len(self.rects)

    def add(self, rect) -> None:
        self.rects = np.vstack((self.rects, _as_rects([rect])))

    def slabs(self):
        """Yield ``(x0, x1, y_union)`` per coordinate-compressed x-slab."""
        r = self.rects
        xs = np.unique(r[:, [0, 2]])
        for a, b in zip(xs[:-1], xs[1:]):
            mid = 0.5 * (a + b)
            cover = r[(r[:, 0] <= mid) & (r[:, 2] >= mid)]
            yield a, b, _merge(cover[:, 1], cover[:, 3])

    def area(self) -> float:
        total = 0.0
        for a, b, ys in self.slabs():
            total += (b - a) * sum(hi - lo for lo, hi in ys)
        return total

    def contains(self, x: float, y: float) -> bool:
        r = self.rects
        return bool(np.any((r[:, 0] < x) & (x < r[:, 2]) & (r[:, 1] < y) & (y < r[:, 3])))


def _merge(lo: np.ndarray, hi: np.ndarray) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for a, b in sorted(zip(lo.tolist(), hi.tolist())):
        if b <= a:
            continue
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def _subtract(free: np.ndarray, sq, min_side: float) -> np.ndarray:
    """``free`` (disjoint rectangles) minus the open rectangle ``sq``."""
    a0, b0, a1, b1 = sq
    hit = (free[:, 0] < a1) & (free[:, 2] > a0) & (free[:, 1] < b1) & (free[:, 3] > b0)
    if not hit.any():
        return free
    keep = free[~hit]
    f = free[hit]
    cx0 = np.maximum(f[:, 0], a0)
    cx1 = np.minimum(f[:, 2], a1)
    pieces = np.concatenate((
        np.column_stack((f[:, 0], f[:, 1], cx0, f[:, 3])),  # left
        np.column_stack((cx1, f[:, 1], f[:, 2], f[:, 3])),  # right
        np.column_stack((cx0, f[:, 1], cx1, np.minimum(f[:, 3], b0))),  # below
        np.column_stack((cx0, np.maximum(f[:, 1], b1), cx1, f[:, 3])),  # above
    ))
    ok = (pieces[:, 2] - pieces[:, 0] > min_side) & (pieces[:, 3] - pieces[:, 1] > min_side)
    return np.vstack((keep, pieces[ok]))


def _torus_pieces(cx: float, cy: float, half: float, L: float) -> list[tuple[float, float, float, float]]:
    """The open square of half-side ``half`` around ``(cx, cy)``, wrapped into ``[0, L)^2``."""
    def split(c):
        lo, hi = c - half, c + half
        if lo < 0:
            return [(0.0, hi), (lo + L, L)]
        if hi > L:
            return [(lo, L), (0.0, hi - L)]
        return [(lo, hi)]

    return [(x0, y0, x1, y1) for x0, x1 in split(cx) for y0, y1 in split(cy)]


def _free_area(free: np.ndarray) -> float:
    return float(np.sum((free[:, 2] - free[:, 0]) * (free[:, 3] - free[:, 1])))


def _sample_free(free: np.ndarray, gen) -> tuple[float, float]:
    w = (free[:, 2] - free[:, 0]) * (free[:, 3] - free[:, 1])
    cum = np.cumsum(w)
    k = min(int(np.searchsorted(cum, gen.random() * cum[-1], side="right")), len(free) - 1)
    u, v = gen.random(2)
    x0, y0, x1, y1 = free[k]
    return x0 + u * (x1 - x0), y0 + v * (y1 - y0)


@dataclass
class Packing2DState:
    L: float
    geometry: str = "boxed"
    centers: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    ghost_forbidden: RectRegion | None = None
    candidates_seen: int = 0
    effective_candidates: int = 0
    ghost_count: int | None = None

    @property
    def count(self) -> int:
        return len(self.centers)

    @property
    def density(self) -> float:
        return SIDE * SIDE * self.count / (self.L * self.L)

    def overlapping_pairs(self, tol: float = 1e-9) -> list[tuple[int, int]]:
        c = self.centers
        d = np.abs(c[:, None, :] - c[None, :, :])
        if self.geometry == "torus":
            d = np.minimum(d, self.L - d)
        bad = np.all(d < SIDE - tol, axis=2)
        i, j = np.nonzero(np.triu(bad, k=1))
        return list(zip(i.tolist(), j.tolist()))

    def check(self) -> None:
        assert not self.overlapping_pairs(), "placed squares overlap"
        if self.geometry == "boxed" and self.count:
            assert np.all(self.centers >= 1.0 - 1e-9) and np.all(self.centers <= self.L - 1.0 + 1e-9)


def _box_free(L: float) -> np.ndarray:
    return np.array([[1.0, 1.0, L - 1.0, L - 1.0]])


def _classical_fill(L: float, free: np.ndarray, centers: list, gen) -> np.ndarray:
    min_side = SLIVER_RTOL * L
    for cx, cy in centers:
        free = _subtract(free, (cx - EXCL, cy - EXCL, cx + EXCL, cy + EXCL), min_side)
    while len(free):
        cx, cy = _sample_free(free, gen)
        centers.append((cx, cy))
        free = _subtract(free, (cx - EXCL, cy - EXCL, cx + EXCL, cy + EXCL), min_side)
    return np.array(centers).reshape(-1, 2)


def saturate_classical_2d(L: float, rng) -> Packing2DState:
    """Saturated classical packing of the box, candidates drawn from the admissible region."""
    if L < SIDE:
        raise ValueError("L must be >= 2")
    if L == SIDE:
        return Packing2DState(float(L), centers=np.array([[1.0, 1.0]]), candidates_seen=1, effective_candidates=1)
    centers = _classical_fill(L, _box_free(L), [], rng.generator)
    return Packing2DState(float(L), "boxed", centers, candidates_seen=len(centers),
                          effective_candidates=len(centers))


def run_ghost_2d(L: float, rng, geometry: str = "boxed") -> Packing2DState:
    """Ghost packing: every candidate forbids its 4x4 square, accepted or not.

    Candidates are uniform on the admissible-centre domain (``[1, L-1]^2`` in
    the box, the whole torus otherwise).  The run stops when no admissible
    centre is left, after which no candidate could be accepted.
    """
    if L < SIDE:
        raise ValueError("L must be >= 2")
    if geometry not in ("boxed", "torus"):
        raise ValueError(f"unknown geometry {geometry!r}")
    if geometry == "torus" and L <= 2 * EXCL:
        raise ValueError("torus geometry needs L > 4")
    gen = rng.generator
    min_side = SLIVER_RTOL * L
    if geometry == "boxed":
        if L == SIDE:
            return Packing2DState(float(L), centers=np.array([[1.0, 1.0]]), ghost_forbidden=RectRegion(),
                                  candidates_seen=1, effective_candidates=1)
        free, lo, span = _box_free(L), 1.0, L - 2.0
    else:
        free, lo, span = np.array([[0.0, 0.0, L, L]]), 0.0, float(L)
    ghosts = []
    centers = []
    seen = effective = 0
    while len(free):
        cx, cy = lo + span * gen.random(2)
        seen += 1
        inside = (free[:, 0] < cx) & (cx < free[:, 2]) & (free[:, 1] < cy) & (cy < free[:, 3])
        if geometry == "boxed":
            squares = [(cx - EXCL, cy - EXCL, cx + EXCL, cy + EXCL)]
        else:
            squares = _torus_pieces(cx, cy, EXCL, L)
        before = len(free), _free_area(free)
        for sq in squares:
            free = _subtract(free, sq, min_side)
        if (len(free), _free_area(free)) != before:
            effective += 1
            ghosts.extend(squares)
        if inside.any():
            centers.append((cx, cy))
    return Packing2DState(float(L), geometry, np.array(centers).reshape(-1, 2), RectRegion(ghosts),
                          candidates_seen=seen, effective_candidates=effective)


def ghost_then_classical(L: float, rng) -> Packing2DState:
    """Ghost packing of the box, then classical saturation from the ghost squares."""
    ghost = run_ghost_2d(L, rng, "boxed")
    centers = _classical_fill(L, _box_free(L), [tuple(c) for c in ghost.centers.tolist()], rng.generator)
    return Packing2DState(float(L), "boxed", centers, None, ghost.candidates_seen + len(centers) - ghost.count,
                          ghost.effective_candidates + len(centers) - ghost.count, ghost_count=ghost.count)


def admissible_area(state: Packing2DState) -> float:
    """Area of centres still admissible given the placed squares (box geometry), by sweep."""
    L = state.L
    region = RectRegion([(1.0, 1.0, L - 1.0, L - 1.0)])
    blocked = RectRegion([
        (max(x - EXCL, 1.0), max(y - EXCL, 1.0), min(x + EXCL, L - 1.0), min(y + EXCL, L - 1.0))
        for x, y in state.centers.tolist()
    ] or [])
    return region.area() - blocked.area()


def largest_empty_square(state: Packing2DState, resolution: float) -> float:
    """Side of the largest empty axis-aligned square, from a grid of candidate centres.

    Each grid point gets its exact Chebyshev clearance to the placed squares
    (and to the walls in the box); the answer is twice the best clearance.
    It never exceeds the true optimum and falls short of it by at most
    ``resolution``.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    L = state.L
    n = int(np.ceil(L / resolution)) + 1
    g = np.linspace(0.0, L, n)
    gx, gy = np.meshgrid(g, g, indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    if state.geometry == "boxed":
        clear = np.minimum.reduce([gx, L - gx, gy, L - gy])
    else:
        clear = np.full(gx.shape, L / 2.0)
    half = SIDE / 2.0
    for cx, cy in state.centers.tolist():
        dx = np.abs(gx - cx)
        dy = np.abs(gy - cy)
        if state.geometry == "torus":
            dx = np.minimum(dx, L - dx)
            dy = np.minimum(dy, L - dy)
        d = np.maximum(np.maximum(dx - half, 0.0), np.maximum(dy - half, 0.0))
        np.minimum(clear, d, out=clear)
    return float(2.0 * clear.max())
