"""Covers and their Lebesgue numbers: joins, refinement, mesh covers, subcovers.

Conventions that keep downstream identities exact in floating point:
- A member equal to the whole space makes every per-point value infinite; the
  reported number is then capped at the diameter and flagged, never raw inf.
- Distance-to-complement of an intersection is the min of the parts' values
  (complement of an intersection is the union of complements), so joins never
  introduce rounding beyond the pairwise distances themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels_numpy as _ref
from ._backend import kernels
from .errors import NumericError, UsageError
from .metric_core import (EXACT_POINT_LIMIT, ExtValue, FiniteMetricSpace,
                          PointSet, Violation)
from .solvers import (exact_set_cover, iter_minimum_covers, masks_transpose,
                      resolve_budget)

EXACT_MEMBER_LIMIT = 24


class Cover:
    """Finite family of nonempty point sets, indexed 0..len-1, duplicates kept.

    Duplicates are preserved because member identity matters for subcover
    witnesses; the synthesizing constructors (mesh_cover, iterated covers)
    deduplicate on their own. The canonical representation is the mask matrix;
    PointSet members are materialized lazily since iterated joins can pass
    through millions of intermediate rows.
    """

    def __init__(self, members, point_count: int):
        self.point_count = int(point_count)
        rows = []
        for m in members:
            ids = sorted({int(i) for i in (m.ids if isinstance(m, PointSet) else m)})
            if not ids:
                raise UsageError("cover members must be nonempty")
            if ids[0] < 0 or ids[-1] >= self.point_count:
                raise UsageError(f"member ids {ids} outside 0..{self.point_count - 1}")
            row = np.zeros(self.point_count, dtype=np.bool_)
            row[ids] = True
            rows.append(row)
        if not rows:
            raise UsageError("cover must have at least one member")
        self.masks = np.ascontiguousarray(np.stack(rows))
        self._members: tuple[PointSet, ...] | None = None

    @staticmethod
    def from_masks(masks, point_count: int | None = None) -> "Cover":
        arr = np.ascontiguousarray(masks, dtype=np.bool_)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise UsageError("cover must have at least one member")
        if point_count is not None and arr.shape[1] != point_count:
            raise UsageError("mask width does not match point count")
        if not arr.any(axis=1).all():
            raise UsageError("cover members must be nonempty")
        cov = Cover.__new__(Cover)
        cov.point_count = arr.shape[1]
        cov.masks = arr
        cov._members = None
        return cov

    @property
    def members(self) -> tuple[PointSet, ...]:
        if self._members is None:
            self._members = tuple(PointSet.from_mask(row) for row in self.masks)
        return self._members

    @property
    def whole_space_flags(self) -> np.ndarray:
        return self.masks.all(axis=1)

    @property
    def has_whole_space(self) -> bool:
        return bool(self.whole_space_flags.any())

    def covers_all(self) -> bool:
        return bool(self.masks.any(axis=0).all())

    def __len__(self) -> int:
        return self.masks.shape[0]

    def __iter__(self):
        return iter(self.members)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Cover)
                and self.point_count == other.point_count
                and self.masks.shape == other.masks.shape
                and bool((self.masks == other.masks).all()))

    def __hash__(self):
        return hash((self.point_count, self.masks.tobytes()))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Cover({len(self)} members on {self.point_count} points)"


@dataclass(frozen=True)
class LebesgueReport:
    delta: float
    argmin: int | None
    capped: bool
    per_point: np.ndarray | None = None


@dataclass(frozen=True)
class SubcoverReport:
    size: int
    indices: tuple[int, ...]
    witness: Cover
    exact: bool


@dataclass(frozen=True)
class DeltaReport:
    value: float
    witness: tuple[int, ...]
    capped: bool
    subcover_count: int


def validate_cover(space: FiniteMetricSpace, cover: Cover) -> list[Violation]:
    """Empty list iff the family is a genuine cover of the space."""
    out: list[Violation] = []
    if cover.point_count != space.point_count:
        out.append(Violation("point_count", (),
                             f"cover indexes {cover.point_count} points, "
                             f"space has {space.point_count}"))
        return out
    uncovered = np.flatnonzero(~cover.masks.any(axis=0))
    if uncovered.size:
        shown = tuple(int(i) for i in uncovered[:8])
        out.append(Violation("coverage", shown,
                             f"{uncovered.size} point(s) in no member"))
    return out


def _require_cover(space: FiniteMetricSpace, cover: Cover) -> None:
    bad = validate_cover(space, cover)
    if bad:
        raise UsageError(f"not a cover: {bad[0].axiom} ({bad[0].detail})")


def lebesgue_at_point(space: FiniteMetricSpace, cover: Cover, x: int) -> ExtValue:
    """Largest radius r with B(x, r) inside some member: max over members
    containing x of the distance from x to that member's complement."""
    space._check_id(x)
    if cover.point_count != space.point_count:
        raise UsageError("cover and space point counts differ")
    containing = np.flatnonzero(cover.masks[:, x])
    if containing.size == 0:
        raise UsageError(f"point {x} is not covered")
    if cover.whole_space_flags[containing].any():
        return ExtValue.infinity()
    row = space.dist_row(x)
    best = 0.0
    for i in containing:
        best = max(best, float(row[~cover.masks[i]].min()))
    return ExtValue.finite(best)


def lebesgue_number(space: FiniteMetricSpace, cover: Cover,
                    per_point: bool = False) -> LebesgueReport:
    """Lebesgue number: min over points of the best inscribed-ball radius.

    A whole-space member makes every per-point value infinite; the report then
    carries delta = diameter with capped set and no argmin.
    """
    _require_cover(space, cover)
    n = space.point_count
    if cover.has_whole_space:
        pp = np.full(n, math.inf) if per_point else None
        return LebesgueReport(space.diameter, None, True, pp)
    if per_point:
        T = space._call("dtc_rows", cover.masks)
        pp = np.where(cover.masks, T, 0.0).max(axis=0)
        arg = int(pp.argmin())
        return LebesgueReport(float(pp[arg]), arg, False, pp)
    delta, arg = space._call("delta_min", cover.masks)
    return LebesgueReport(float(delta), int(arg), False, None)


def join(u: Cover, v: Cover) -> Cover:
    """Common refinement: pairwise intersections, u-major pair order, empties
    dropped, duplicates kept. Materialized in bounded chunks so large joins
    don't hold the full member product in memory at once."""
    if u.point_count != v.point_count:
        raise UsageError("covers live on different point counts")
    n = u.point_count
    vm = v.masks
    chunk = max(1, 4_000_000 // max(1, vm.shape[0] * n))
    parts = []
    for s in range(0, len(u), chunk):
        block = (u.masks[s:s + chunk, None, :] & vm[None, :, :]).reshape(-1, n)
        block = block[block.any(axis=1)]
        if block.shape[0]:
            parts.append(block)
    if not parts:
        raise UsageError("join has no nonempty members")
    return Cover.from_masks(np.ascontiguousarray(np.concatenate(parts)), n)


def is_finer(u: Cover, v: Cover) -> bool:
    """True when every member of u sits inside some member of v."""
    if u.point_count != v.point_count:
        raise UsageError("covers live on different point counts")
    for row in u.masks:
        if (row & ~v.masks).any(axis=1).all():
            return False
    return True


def cover_diam(space: FiniteMetricSpace, cover: Cover) -> float:
    """Mesh of the cover: largest member diameter (0 for all singletons)."""
    if cover.point_count != space.point_count:
        raise UsageError("cover and space point counts differ")
    best = 0.0
    for row in cover.masks:
        ids = np.flatnonzero(row)
        if ids.size < 2:
            continue
        if space.has_matrix:
            val = float(space.matrix()[np.ix_(ids, ids)].max())
        else:
            val = float(_ref._coord_block(space._points, space._wraps,
                                          space._mode, space._scale,
                                          ids, ids).max())
        best = max(best, val)
    return best


def dedup_masks(masks: np.ndarray) -> np.ndarray:
    """Drop duplicate rows, keeping the first occurrence, preserving order."""
    if masks.shape[0] <= 1:
        return masks
    arr = np.ascontiguousarray(masks)
    view = arr.view(np.dtype((np.void, arr.dtype.itemsize * arr.shape[1]))).ravel()
    _, first = np.unique(view, return_index=True)
    return arr[np.sort(first)]

def mesh_cover(space: FiniteMetricSpace, r: float) -> Cover:
    """Cover by the open r-balls around every point, deduplicated."""
    if not r > 0:
        raise UsageError("mesh radius must be positive")
    masks = dedup_masks(space.ball_masks(float(r)))
    return Cover.from_masks(masks, space.point_count)


def min_subcover(space: FiniteMetricSpace, cover: Cover, mode: str | None = None,
                 budget: int | None = None) -> SubcoverReport:
    """Smallest subfamily that still covers, exact or greedy.

    Auto mode goes exact up to 25 points and 24 members, greedy beyond; the
    exact witness is the lexicographically least index tuple among optima.
    """
    _require_cover(space, cover)
    if mode is None:
        small = (space.point_count <= EXACT_POINT_LIMIT
                 and len(cover) <= EXACT_MEMBER_LIMIT)
        mode = "exact" if small else "greedy"
    if mode not in ("exact", "greedy"):
        raise UsageError(f"mode must be exact or greedy, got {mode!r}")
    if mode == "exact":
        idx = exact_set_cover(cover.masks, budget=resolve_budget(budget))
    else:
        indptr, members = masks_transpose(cover.masks)
        sel, ok = kernels().greedy_set_cover(cover.masks, indptr, members)
        if not ok:
            raise UsageError("family does not cover all points")
        idx = tuple(int(i) for i in sel)
    witness = Cover.from_masks(cover.masks[list(idx)], cover.point_count)
    return SubcoverReport(len(idx), tuple(idx), witness, mode == "exact")


def delta_minimal_subcovers(space: FiniteMetricSpace, cover: Cover,
                            budget: int | None = None) -> DeltaReport:
    """Largest Lebesgue number over all minimum-size subcovers.

    Streams every minimum cover from a node-budgeted branch and bound. No
    subcover can beat the full cover's Lebesgue number, so enumeration stops
    early once some minimum cover attains it; subcover_count reports how many
    covers were examined (the full count only when no cover attains the bound).
    The witness is the first maximizer in examination order, which is
    deterministic but not globally sorted.
    """
    _require_cover(space, cover)
    if cover.has_whole_space:
        first = int(np.flatnonzero(cover.whole_space_flags)[0])
        return DeltaReport(space.diameter, (first,), True, 1)
    size, stream = iter_minimum_covers(cover.masks, budget=resolve_budget(budget))
    T = space._call("dtc_rows", cover.masks)
    full = lebesgue_number(space, cover)
    best = -math.inf
    witness: tuple[int, ...] = ()
    examined = 0
    for w in stream:
        examined += 1
        idx = list(w)
        d = float(np.where(cover.masks[idx], T[idx], 0.0).max(axis=0).min())
        if d > best:
            best = d
            witness = tuple(w)
            if best >= full.delta:
                break
    if best > full.delta:
        raise NumericError("subcover Lebesgue number exceeded the full cover's")
    return DeltaReport(best, witness, False, examined)
