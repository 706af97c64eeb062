"""Finite metric spaces: validation, balls, covering numbers, box dimension.

A space stores either an explicit distance matrix or point coordinates with one
of two coordinate metrics (Euclidean, or max over dimensions with optional
unit-period wrap per dimension). Coordinate spaces at most `cache_limit` points
materialize their matrix lazily; larger ones evaluate distances on demand.

All distance arithmetic funnels through the kernel backends, which are bitwise
interchangeable, so any quantity derived here is reproducible no matter which
backend is active.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels_numpy as _ref
from ._backend import kernels
from .errors import UsageError
from .solvers import exact_set_cover, masks_transpose, resolve_budget

DEFAULT_CACHE_LIMIT = 2048
EXACT_POINT_LIMIT = 25

_METRIC_MODES = {
    "euclidean": _ref.MODE_EUCLIDEAN,
    # a 1-d line is the max metric in one dimension; the max path takes plain
    # absolute differences, so tiny gaps survive where squaring would underflow
    "line": _ref.MODE_MAX,
    "circle": _ref.MODE_MAX,
    "max": _ref.MODE_MAX,
}


@dataclass(frozen=True)
class ExtValue:
    """Extended real: a finite value, or a tagged +infinity (never raw inf math)."""

    value: float
    infinite: bool = False

    @staticmethod
    def finite(v: float) -> "ExtValue":
        return ExtValue(float(v), False)

    @staticmethod
    def infinity() -> "ExtValue":
        return ExtValue(math.inf, True)


@dataclass(frozen=True, init=False)
class PointSet:
    """Sorted duplicate-free point ids; the carrier for cover members and sets."""

    ids: tuple[int, ...]

    def __init__(self, ids=()):
        object.__setattr__(self, "ids", tuple(sorted({int(i) for i in ids})))

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def __contains__(self, x) -> bool:
        return int(x) in set(self.ids)

    def mask(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=np.bool_)
        out[list(self.ids)] = True
        return out

    @staticmethod
    def from_mask(mask) -> "PointSet":
        return PointSet(np.flatnonzero(np.asarray(mask, dtype=bool)))


@dataclass(frozen=True)
class Violation:
    axiom: str
    points: tuple[int, ...]
    detail: str


@dataclass(frozen=True)
class CoveringNumber:
    count: int
    centers: tuple[int, ...]
    exact: bool


@dataclass(frozen=True)
class DimEstimate:
    per_scale: tuple[tuple[float, int, str], ...]
    slope: float
    scale_window: tuple[float, float]


class FiniteMetricSpace:
    """Immutable finite metric space; use the factory functions to build one."""

    def __init__(self, *, matrix=None, points=None, wraps=None, mode=None,
                 scale=1.0, labels=None, cache_limit=DEFAULT_CACHE_LIMIT):
        if (matrix is None) == (points is None):
            raise UsageError("provide exactly one of matrix or points")
        self._cache_limit = int(cache_limit)
        self._scale = float(scale)
        if matrix is not None:
            m = np.ascontiguousarray(matrix, dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise UsageError("distance matrix must be square")
            self._matrix = m
            self._points = None
            self._wraps = None
            self._mode = None
            self.point_count = m.shape[0]
        else:
            p = np.ascontiguousarray(points, dtype=np.float64)
            if p.ndim == 1:
                p = p[:, None]
            if p.ndim != 2:
                raise UsageError("points must be a 1-d or 2-d array")
            self._matrix = None
            self._points = p
            w = np.zeros(p.shape[1], dtype=np.bool_) if wraps is None \
                else np.asarray(wraps, dtype=np.bool_)
            if w.shape != (p.shape[1],):
                raise UsageError("wraps must have one flag per dimension")
            self._wraps = w
            self._mode = int(mode if mode is not None else _ref.MODE_EUCLIDEAN)
            self.point_count = p.shape[0]
        if self.point_count == 0:
            raise UsageError("space must have at least one point")
        self.labels = tuple(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != self.point_count:
            raise UsageError("labels must match point count")
        self._extremes: tuple[float, float] | None = None

    # -- kernel plumbing ---------------------------------------------------

    def matrix(self):
        """Full distance matrix, or None when the space is above cache_limit."""
        if self._matrix is None and self.point_count <= self._cache_limit:
            self._matrix = kernels().pairwise_matrix(
                self._points, self._wraps, self._mode, self._scale)
        return self._matrix

    @property
    def has_matrix(self) -> bool:
        return self._matrix is not None or self.point_count <= self._cache_limit

    def _call(self, name: str, *extra):
        if self.has_matrix:
            return getattr(kernels(), name + "_matrix")(self.matrix(), *extra)
        return getattr(kernels(), name + "_coords")(
            self._points, self._wraps, self._mode, self._scale, *extra)

    def dist_row(self, x: int) -> np.ndarray:
        """Distances from x to every point (reference arithmetic, any backend)."""
        self._check_id(x)
        if self.has_matrix:
            return self.matrix()[x].copy()
        return _ref._coord_block(self._points, self._wraps, self._mode,
                                 self._scale, np.array([x]),
                                 np.arange(self.point_count))[0]

    def dist(self, x: int, y: int) -> float:
        self._check_id(x)
        self._check_id(y)
        if self.has_matrix:
            return float(self.matrix()[x, y])
        return float(_ref._coord_block(self._points, self._wraps, self._mode,
                                       self._scale, np.array([x]),
                                       np.array([y]))[0, 0])

    def _check_id(self, x) -> None:
        if not 0 <= int(x) < self.point_count:
            raise UsageError(f"point id {x} outside 0..{self.point_count - 1}")

    def _extreme_pair(self) -> tuple[float, float]:
        if self._extremes is None:
            d, g = self._call("extremes")
            self._extremes = (float(d), float(g))
        return self._extremes

    @property
    def diameter(self) -> float:
        return self._extreme_pair()[0]

    @property
    def min_gap(self) -> float:
        """Smallest pairwise distance (0 for a single-point space)."""
        return self._extreme_pair()[1]

    def ball_masks(self, r: float) -> np.ndarray:
        """Row x = membership mask of the open ball B(x, r)."""
        return self._call("ball_masks", float(r))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        kind = "matrix" if self._points is None else "coords"
        return f"FiniteMetricSpace({self.point_count} points, {kind})"


# -- factories --------------------------------------------------------------

def space_from_matrix(matrix, labels=None, validate: bool = True) -> FiniteMetricSpace:
    """Space from an explicit symmetric distance matrix."""
    space = FiniteMetricSpace(matrix=matrix, labels=labels)
    if validate:
        bad = validate_space(space)
        if bad:
            v = bad[0]
            raise UsageError(
                f"invalid metric: {v.axiom} at points {v.points} ({v.detail})"
                + (f"; {len(bad) - 1} more violation(s)" if len(bad) > 1 else ""))
    return space


def space_from_points(points, metric: str = "euclidean", wraps=None,
                      labels=None) -> FiniteMetricSpace:
    """Space from coordinates.

    metric: "euclidean" / "line" (alias), or "max" (sup over dimensions, with
    optional per-dimension unit-period wrap flags), or "circle" (1-d, wrapped).
    """
    if metric not in _METRIC_MODES:
        raise UsageError(f"unknown metric {metric!r}; one of {sorted(_METRIC_MODES)}")
    p = np.asarray(points, dtype=np.float64)
    if p.ndim == 1:
        p = p[:, None]
    if metric == "circle":
        if p.shape[1] != 1:
            raise UsageError("circle metric needs 1-d points")
        wraps = [True]
    elif metric in ("euclidean", "line"):
        wraps = None
    return FiniteMetricSpace(points=p, wraps=wraps, mode=_METRIC_MODES[metric],
                             labels=labels)


def circle_grid(g: int, labels: bool = True) -> FiniteMetricSpace:
    """g equispaced points on the unit circle with an index-exact matrix.

    Entries are min(|i-j|, g-|i-j|)/g computed from integer index differences,
    so isometries of the grid (rotations) preserve distances bitwise even when
    the coordinates j/g are not exactly representable.
    """
    if g < 1:
        raise UsageError("grid size must be positive")
    idx = np.arange(g)
    diff = np.abs(idx[:, None] - idx[None, :])
    D = np.minimum(diff, g - diff) / g
    lab = tuple(f"{j}/{g}" for j in range(g)) if labels else None
    return FiniteMetricSpace(matrix=D, labels=lab)


def scale_metric(space: FiniteMetricSpace, c: float) -> FiniteMetricSpace:
    """New space with every distance multiplied by c (> 0).

    Matrix spaces scale entrywise, so each new distance is the correctly
    rounded c*d. Coordinate spaces fold c into their scale factor; starting
    from an unscaled space this is the same correctly rounded c*d.
    """
    if not c > 0:
        raise UsageError("scale factor must be positive")
    c = float(c)
    if space._matrix is not None or space._points is None:
        return FiniteMetricSpace(matrix=c * space.matrix(), labels=space.labels,
                                 cache_limit=space._cache_limit)
    return FiniteMetricSpace(points=space._points, wraps=space._wraps,
                             mode=space._mode, scale=c * space._scale,
                             labels=space.labels, cache_limit=space._cache_limit)


# -- validation ---------------------------------------------------------------

def validate_space(space: FiniteMetricSpace, tol_rel: float = 1e-9,
                   full_limit: int = 1200, samples: int = 2_000_000,
                   seed: int = 12345) -> list[Violation]:
    """Check the metric axioms; empty list iff the space is a valid metric.

    Triangle inequality is swept in full up to full_limit points and checked on
    a seeded random sample of triples beyond that.
    """
    out: list[Violation] = []
    n = space.point_count
    if space._matrix is not None:
        D = space._matrix
        ii, jj = np.nonzero(D != D.T)
        if ii.size:
            i, j = int(ii[0]), int(jj[0])
            out.append(Violation("symmetry", (i, j),
                                 f"d(x,y)={float(D[i, j])!r} but d(y,x)={float(D[j, i])!r}"))
        diag = np.flatnonzero(np.diag(D) != 0.0)
        if diag.size:
            i = int(diag[0])
            out.append(Violation("zero_self_distance", (i,),
                                 f"d(x,x)={float(D[i, i])!r}"))
        neg = np.argwhere(D < 0.0)
        if neg.size:
            i, j = map(int, neg[0])
            out.append(Violation("nonnegativity", (i, j), f"d={float(D[i, j])!r}"))
    if n >= 2 and space.min_gap <= 0.0:
        if space._matrix is not None:
            off = space._matrix + np.where(np.eye(n, dtype=bool), np.inf, 0.0)
            i, j = map(int, divmod(int(off.argmin()), n))
        else:
            i, j = _argmin_offdiag_coords(space)
        out.append(Violation("distinct_points", (i, j), "d(x,y)=0 for x != y"))
    tol = tol_rel * space.diameter
    if n <= full_limit:
        if n <= 1:
            return out
        count, worst, i, j, k = kernels().triangle_check_matrix(space.matrix(), tol)
    else:
        rng = np.random.default_rng(seed)
        triples = rng.integers(0, n, size=(samples, 3)).astype(np.int64)
        count, worst, i, j, k = space._call("triangle_check_triples", triples, tol)
    if count:
        out.append(Violation("triangle", (int(i), int(j), int(k)),
                             f"excess {float(worst)!r} over tolerance {tol!r} "
                             f"({int(count)} violating triple(s) found)"))
    return out


def _argmin_offdiag_coords(space: FiniteMetricSpace) -> tuple[int, int]:
    n = space.point_count
    best = math.inf
    arg = (0, 1)
    for x in range(n):
        row = space.dist_row(x)
        row[x] = math.inf
        j = int(row.argmin())
        if row[j] < best:
            best = float(row[j])
            arg = (x, j)
    return arg


# -- balls, covering numbers, box dimension -----------------------------------

def ball(space: FiniteMetricSpace, center: int, radius: float) -> PointSet:
    """Open ball: points strictly within radius of center."""
    space._check_id(center)
    return PointSet.from_mask(space.dist_row(center) < radius)


def dist_to_complement(space: FiniteMetricSpace, s: PointSet, x: int) -> ExtValue:
    """Distance from x to the complement of s; tagged infinity when s = X."""
    space._check_id(x)
    mask = s.mask(space.point_count)
    if mask.all():
        return ExtValue.infinity()
    return ExtValue.finite(space.dist_row(x)[~mask].min())


def covering_number(space: FiniteMetricSpace, gamma: float, mode: str | None = None,
                    budget: int | None = None) -> CoveringNumber:
    """Minimum (exact) or greedy-bound number of open gamma-balls covering X.

    Ball centers range over the points of the space. Greedy picks the largest
    uncovered gain, lowest center id on ties.
    """
    if not gamma > 0:
        raise UsageError("covering radius must be positive")
    if mode is None:
        mode = "exact" if space.point_count <= EXACT_POINT_LIMIT else "greedy"
    if mode not in ("exact", "greedy"):
        raise UsageError(f"mode must be exact or greedy, got {mode!r}")
    masks = space.ball_masks(float(gamma))
    if mode == "exact":
        sel = exact_set_cover(masks, budget=resolve_budget(budget))
        return CoveringNumber(len(sel), tuple(sel), True)
    indptr, members = masks_transpose(masks)
    sel, ok = kernels().greedy_set_cover(masks, indptr, members)
    if not ok:
        raise UsageError("balls do not cover the space")
    return CoveringNumber(int(sel.size), tuple(int(i) for i in sel), False)


def box_dim_estimate(space: FiniteMetricSpace, gamma_grid, mode: str | None = None,
                     budget: int | None = None) -> DimEstimate:
    """Box-dimension slope: least squares of ln N(gamma) against -ln gamma.

    Greedy counts can dip below a coarser scale's count; they are repaired to a
    non-increasing-in-gamma table by a running minimum from the finest scale,
    which keeps every entry a valid upper bound on the true N(gamma).
    """
    gammas = [float(g) for g in gamma_grid]
    if len(gammas) < 3:
        raise UsageError("need at least 3 scales for a box-dimension estimate")
    if any(not g > 0 for g in gammas):
        raise UsageError("scales must be positive")
    if len(set(gammas)) != len(gammas):
        raise UsageError("scales must be distinct")
    gammas.sort()
    results = [covering_number(space, g, mode=mode, budget=budget) for g in gammas]
    counts = []
    run = math.inf
    for r in results:
        run = min(run, r.count)
        counts.append(int(run))
    per_scale = tuple((g, c, "exact" if r.exact else "greedy")
                      for g, c, r in zip(gammas, counts, results))
    x = -np.log(np.array(gammas))
    y = np.log(np.array(counts, dtype=np.float64))
    xc = x - x.mean()
    denom = float(xc @ xc)
    slope = float(xc @ (y - y.mean()) / denom) if denom > 0 else 0.0
    return DimEstimate(per_scale, slope, (gammas[0], gammas[-1]))
