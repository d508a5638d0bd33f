"""Axis-aligned intervals, hypercubes and difference regions.

Rule preconditions are products of one interval per input dimension.
Membership is half-open: a point lies in a cube when ``lo <= x < hi`` in
every dimension, except that ``hi`` is inclusive in dimensions where it
coincides with the domain's upper bound.  Grid cells therefore tile their
parent exactly: no point is covered twice and nothing is lost at the
domain boundary.

Boxes fitted around data (:func:`enclosing_cube`) are closed on both
sides; rule regions built from them set ``closed=True`` so that samples
sitting exactly on a box face remain inside.  A :class:`Region` subtracts
zero or more hole cubes from an outer cube, which is how non-cubic areas
are expressed without leaving single-variable interval constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class Interval:
    """Bounds pair with lo <= hi; open/closed interpretation is contextual."""

    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval bounds must be finite: [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"interval bounds out of order: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class Hypercube:
    """Axis-aligned box: one :class:`Interval` per input dimension."""

    intervals: tuple[Interval, ...]

    def __post_init__(self):
        ivs = tuple(self.intervals)
        if not ivs:
            raise ValueError("a hypercube needs at least one dimension")
        if not all(isinstance(iv, Interval) for iv in ivs):
            ivs = tuple(iv if isinstance(iv, Interval) else Interval(*iv) for iv in ivs)
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def from_bounds(cls, lows: Sequence[float], highs: Sequence[float]) -> "Hypercube":
        if len(lows) != len(highs):
            raise ValueError("lows and highs differ in length")
        return cls(tuple(Interval(lo, hi) for lo, hi in zip(lows, highs)))

    @classmethod
    def from_points(cls, X) -> "Hypercube":
        """Minimal closed box containing every row of ``X`` (n, d)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("expected a non-empty (n, d) array of points")
        return cls.from_bounds(X.min(axis=0), X.max(axis=0))

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def lows(self) -> np.ndarray:
        return np.array([iv.lo for iv in self.intervals])

    @property
    def highs(self) -> np.ndarray:
        return np.array([iv.hi for iv in self.intervals])

    @property
    def volume(self) -> float:
        v = 1.0
        for iv in self.intervals:
            v *= iv.width
        return v

    def _check_dim(self, other_dim: int, what: str) -> None:
        if other_dim != self.dim:
            raise ValueError(f"dimension mismatch: cube is {self.dim}-d, {what} is {other_dim}-d")

    def with_interval(self, dim: int, interval: Interval) -> "Hypercube":
        ivs = list(self.intervals)
        ivs[dim] = interval
        return Hypercube(tuple(ivs))

    # -- membership ---------------------------------------------------------

    def contains_batch(self, X, domain: "Hypercube") -> np.ndarray:
        """Half-open membership per row of X, closed at the domain's top face.

        A zero-width cube therefore contains its own point only when that
        point sits exactly on the domain's upper bound in the degenerate
        dimensions; everywhere else ``lo <= x < lo`` is empty.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError("expected a (n, d) array of points")
        self._check_dim(X.shape[1], "point batch")
        self._check_dim(domain.dim, "domain")
        mask = np.ones(X.shape[0], dtype=bool)
        for i, iv in enumerate(self.intervals):
            xi = X[:, i]
            upper = xi < iv.hi
            if iv.hi == domain.intervals[i].hi:
                upper |= xi == iv.hi
            mask &= (xi >= iv.lo) & upper
        return mask

    def contains(self, point, domain: "Hypercube") -> bool:
        return bool(self.contains_batch(np.asarray(point, dtype=float)[None, :], domain)[0])

    def contains_closed_batch(self, X) -> np.ndarray:
        """Membership with both bounds inclusive (data-box semantics)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError("expected a (n, d) array of points")
        self._check_dim(X.shape[1], "point batch")
        mask = np.ones(X.shape[0], dtype=bool)
        for i, iv in enumerate(self.intervals):
            xi = X[:, i]
            mask &= (xi >= iv.lo) & (xi <= iv.hi)
        return mask

    def contains_closed(self, point) -> bool:
        return bool(self.contains_closed_batch(np.asarray(point, dtype=float)[None, :])[0])

    # -- relations ----------------------------------------------------------

    def overlaps(self, other: "Hypercube") -> bool:
        """True iff the intersection has positive extent in every dimension.

        Touching faces do not count as overlap, so grid cells and merged
        cubes coexist with the non-overlap invariant.
        """
        self._check_dim(other.dim, "other cube")
        for a, b in zip(self.intervals, other.intervals):
            if not (max(a.lo, b.lo) < min(a.hi, b.hi)):
                return False
        return True

    def merge_adjacent(self, other: "Hypercube") -> "Hypercube":
        """Union box of two cubes sharing one full face.

        Requires identical intervals on d-1 dimensions and exact contiguity
        (``a.hi == b.lo`` or vice versa) on the remaining one; anything else
        would not union to a hypercube and raises ValueError.
        """
        merged = try_merge_adjacent(self, other)
        if merged is None:
            raise ValueError("cubes are not full-face adjacent; union is not a hypercube")
        return merged

    # -- constructions ------------------------------------------------------

    def split_grid(self, slices: Sequence[int]) -> list["Hypercube"]:
        """Split into an equal-width grid, ``slices[i]`` pieces along dim i.

        Cell edges are shared exactly between neighbours and the outermost
        edges equal the cube bounds, so the cells tile the cube under the
        half-open membership convention.
        """
        if len(slices) != self.dim:
            raise ValueError(f"expected {self.dim} slice counts, got {len(slices)}")
        if any(int(s) != s or s < 1 for s in slices):
            raise ValueError(f"slice counts must be positive integers: {tuple(slices)}")
        edges = []
        for iv, s in zip(self.intervals, slices):
            s = int(s)
            e = [iv.lo + j * (iv.hi - iv.lo) / s for j in range(s)]
            e.append(iv.hi)
            edges.append(e)
        cells = [self]
        for dim, e in enumerate(edges):
            new_cells = []
            for cell in cells:
                for j in range(len(e) - 1):
                    new_cells.append(cell.with_interval(dim, Interval(e[j], e[j + 1])))
            cells = new_cells
        return cells

    def expand(
        self,
        dim: int,
        side: str,
        width: float,
        domain: "Hypercube",
        blockers: Sequence["Hypercube"] = (),
    ) -> "Hypercube | None":
        """Temporary side-cube of thickness <= width against the chosen face.

        The slab is clipped to the domain and shrunk along ``dim`` to stop
        at the nearest overlapping blocker.  Returns None when the clipped
        thickness is zero.
        """
        if width < 0:
            raise ValueError(f"expansion width must be non-negative, got {width}")
        if not 0 <= dim < self.dim:
            raise ValueError(f"dimension index {dim} out of range for {self.dim}-d cube")
        if side not in (LOWER, UPPER):
            raise ValueError(f"side must be {LOWER!r} or {UPPER!r}, got {side!r}")
        self._check_dim(domain.dim, "domain")
        iv = self.intervals[dim]
        div = domain.intervals[dim]
        if side == LOWER:
            lo, hi = max(div.lo, iv.lo - width), iv.lo
        else:
            lo, hi = iv.hi, min(div.hi, iv.hi + width)
        if hi - lo <= 0:
            return None
        slab = self.with_interval(dim, Interval(lo, hi))
        for b in blockers:
            if slab.overlaps(b):
                if side == LOWER:
                    lo = max(lo, min(b.intervals[dim].hi, iv.lo))
                else:
                    hi = min(hi, max(b.intervals[dim].lo, iv.hi))
        if hi - lo <= 0:
            return None
        return self.with_interval(dim, Interval(lo, hi))


def try_merge_adjacent(a: Hypercube, b: Hypercube) -> Hypercube | None:
    """merge_adjacent that returns None instead of raising."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim}-d vs {b.dim}-d")
    differing = [i for i in range(a.dim) if a.intervals[i] != b.intervals[i]]
    if len(differing) != 1:
        return None
    i = differing[0]
    ia, ib = a.intervals[i], b.intervals[i]
    if ia.hi == ib.lo:
        return a.with_interval(i, Interval(ia.lo, ib.hi))
    if ib.hi == ia.lo:
        return a.with_interval(i, Interval(ib.lo, ia.hi))
    return None


def _nearest_rank(sorted_values: np.ndarray, fraction: float) -> float:
    # rank = ceil(fraction * n), clamped to [1, n]; tiny slack guards float
    # error in fraction * n when the product should be an exact integer.
    n = len(sorted_values)
    rank = math.ceil(fraction * n - 1e-9)
    rank = min(max(rank, 1), n)
    return float(sorted_values[rank - 1])


def enclosing_cube(points, trim_fraction: float = 0.0) -> Hypercube:
    """Minimal closed box around the per-dimension quantile-trimmed points.

    With ``trim_fraction`` q the box spans the nearest-rank [q, 1-q]
    empirical quantiles of each coordinate; q = 0 gives the exact min/max.
    Trimming is how outliers are kept from inflating the box.
    """
    if not 0 <= trim_fraction < 0.5:
        raise ValueError(f"trim_fraction must be in [0, 0.5), got {trim_fraction}")
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("expected a non-empty (n, d) array of points")
    lows, highs = [], []
    for i in range(X.shape[1]):
        col = np.sort(X[:, i])
        lows.append(_nearest_rank(col, trim_fraction))
        highs.append(_nearest_rank(col, 1.0 - trim_fraction))
    return Hypercube.from_bounds(lows, highs)


@dataclass(frozen=True)
class Region:
    """Outer cube minus hole cubes; `closed` selects data-box membership."""

    outer: Hypercube
    holes: tuple[Hypercube, ...] = ()
    closed: bool = False

    def __post_init__(self):
        holes = tuple(self.holes)
        object.__setattr__(self, "holes", holes)
        for h in holes:
            if h.dim != self.outer.dim:
                raise ValueError("hole dimension differs from outer cube")
            if not self.outer.overlaps(h):
                raise ValueError("every hole must overlap the outer cube")

    @property
    def dim(self) -> int:
        return self.outer.dim

    def contains_batch(self, X, domain: Hypercube) -> np.ndarray:
        if self.closed:
            mask = self.outer.contains_closed_batch(X)
            for h in self.holes:
                mask &= ~h.contains_closed_batch(X)
        else:
            mask = self.outer.contains_batch(X, domain)
            for h in self.holes:
                mask &= ~h.contains_batch(X, domain)
        return mask

    def contains(self, point, domain: Hypercube) -> bool:
        return bool(self.contains_batch(np.asarray(point, dtype=float)[None, :], domain)[0])
