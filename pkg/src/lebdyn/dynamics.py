"""Self-maps of finite metric spaces and everything built on their iterates:
pullback and iterated covers, Lebesgue-number sequences, Bowen metrics and
separated sets, Lipschitz growth, orbit block lengths, preimage gaps, and the
eventual image.

The delta_n fast path exploits that the Lebesgue number of a join is the min
of the joined covers' numbers at every point, so delta_n is a running minimum
of per-pullback values; pullbacks whose members blow up to the whole space
contribute an infinite value and simply drop out of the minimum. An entry is
capped (reported as the diameter) only while no pullback has produced a finite
value yet, which keeps the sequence equal to the directly computed Lebesgue
number of the iterated cover in every case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .cover_calc import Cover, dedup_masks, join, lebesgue_number
from .errors import BudgetError, NumericError, UsageError
from .metric_core import ExtValue, FiniteMetricSpace, PointSet
from .solvers import exact_max_independent, resolve_budget

MAX_JOIN_MEMBERS = 100_000
MAX_JOIN_PRODUCT = 20_000_000
EXACT_SEPARATED_LIMIT = 50


class DynMap:
    """Total self-map in array form: point x maps to image[x]."""

    def __init__(self, image, point_count: int | None = None):
        img = np.ascontiguousarray(image, dtype=np.int64)
        if img.ndim != 1:
            raise UsageError("map image must be a 1-d id array")
        n = img.shape[0] if point_count is None else int(point_count)
        if img.shape[0] != n:
            raise UsageError(f"map image has {img.shape[0]} entries for {n} points")
        if n == 0:
            raise UsageError("map needs at least one point")
        if img.min() < 0 or img.max() >= n:
            raise UsageError("map image ids outside point range")
        self.image = img
        self.point_count = n

    def apply(self, x: int) -> int:
        return int(self.image[int(x)])

    def __eq__(self, other) -> bool:
        return (isinstance(other, DynMap)
                and self.point_count == other.point_count
                and bool((self.image == other.image).all()))

    def __hash__(self):
        return hash((self.point_count, self.image.tobytes()))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"DynMap({self.point_count} points)"


@dataclass(frozen=True)
class RateSequence:
    """delta_1..delta_N with cap flags; a_n = -ln(delta_n)/n."""

    name: str
    values: np.ndarray
    capped: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.values)

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(1, self.horizon + 1)

    @property
    def a_n(self) -> np.ndarray:
        return -np.log(self.values) / self.n_values


@dataclass(frozen=True)
class SeparatedReport:
    count: int
    points: PointSet
    exact: bool


@dataclass(frozen=True)
class IterateRate:
    l_estimate: float
    per_n: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class BlockLength:
    length: int
    capped: bool


@dataclass(frozen=True)
class LbdBounds:
    lower: float
    upper: float
    pair: tuple[int, int]


def map_power(f: DynMap, n: int) -> DynMap:
    """n-fold composition; n = 0 is the identity."""
    if n < 0:
        raise UsageError("map power needs n >= 0")
    idx = np.arange(f.point_count, dtype=np.int64)
    for _ in range(n):
        idx = f.image[idx]
    return DynMap(idx, f.point_count)


def pullback_cover(space: FiniteMetricSpace, f: DynMap, cover: Cover) -> Cover:
    """Preimages of the members; empty preimages dropped, duplicates and
    whole-space members kept (they carry the capping semantics)."""
    _check_same_points(space, f, cover)
    pre = cover.masks[:, f.image]
    keep = pre.any(axis=1)
    if not keep.all():
        pre = pre[keep]
    return Cover.from_masks(np.ascontiguousarray(pre), cover.point_count)


def iterated_covers(space: FiniteMetricSpace, f: DynMap, cover: Cover, n: int,
                    member_cap: int = MAX_JOIN_MEMBERS):
    """Yield the joins of f^-k(U) for k = 0..m-1, m = 1..n, one join per step.

    Incremental version of iterated_cover for callers that need the whole
    ladder; building each depth from scratch would repeat the early joins."""
    _check_same_points(space, f, cover)
    if n < 1:
        raise UsageError("iterated cover needs n >= 1")
    cur = Cover.from_masks(dedup_masks(cover.masks), cover.point_count)
    yield cur
    pull = cover
    for _ in range(1, n):
        pull = pullback_cover(space, f, pull)
        if len(cur) * len(pull) > MAX_JOIN_PRODUCT:
            raise BudgetError(
                f"iterated cover join would try {len(cur) * len(pull)} "
                f"intersections (cap {MAX_JOIN_PRODUCT})")
        cur = Cover.from_masks(dedup_masks(join(cur, pull).masks),
                               cover.point_count)
        if len(cur) > member_cap:
            raise BudgetError(
                f"iterated cover grew to {len(cur)} members (cap {member_cap})")
        yield cur


def iterated_cover(space: FiniteMetricSpace, f: DynMap, cover: Cover, n: int,
                   member_cap: int = MAX_JOIN_MEMBERS) -> Cover:
    """Join of the pullbacks f^-k(U) for k = 0..n-1, deduplicated per step."""
    for cur in iterated_covers(space, f, cover, n, member_cap):
        pass
    return cur


def delta_sequence(space: FiniteMetricSpace, f: DynMap, cover: Cover,
                   horizon: int, method: str = "pullback",
                   name: str = "delta") -> RateSequence:
    """Lebesgue numbers of the iterated covers, delta_1..delta_horizon.

    The pullback method evaluates each f^-k(U) once and takes running minima;
    the direct method rebuilds every iterated cover and is the cross-check.
    A pullback with a whole-space member has no finite Lebesgue number and is
    skipped; entries stay capped at the diameter until some pullback yields a
    finite value, after which caps cannot reappear.
    """
    _check_same_points(space, f, cover)
    if horizon < 1:
        raise UsageError("delta sequence needs horizon >= 1")
    if method not in ("pullback", "direct"):
        raise UsageError(f"method must be pullback or direct, got {method!r}")
    values = np.empty(horizon, dtype=np.float64)
    capped = np.zeros(horizon, dtype=np.bool_)
    if method == "direct":
        for n in range(1, horizon + 1):
            rep = lebesgue_number(space, iterated_cover(space, f, cover, n))
            values[n - 1] = rep.delta
            capped[n - 1] = rep.capped
        return RateSequence(name, values, capped)
    rep0 = lebesgue_number(space, cover)  # validates coverage once
    run = math.inf
    idx = np.arange(space.point_count, dtype=np.int64)
    for k in range(horizon):
        if k == 0:
            d_k = None if rep0.capped else rep0.delta
        else:
            mk = cover.masks[:, idx]
            mk = mk[mk.any(axis=1)]
            if mk.all(axis=1).any():
                d_k = None
            else:
                mk = dedup_masks(np.ascontiguousarray(mk))
                d_k = float(space._call("delta_min", mk)[0])
        if d_k is not None:
            run = min(run, d_k)
        capped[k] = math.isinf(run)
        values[k] = space.diameter if capped[k] else run
        idx = f.image[idx]
    return RateSequence(name, values, capped)


def bowen_dist(space: FiniteMetricSpace, f: DynMap, n: int, x: int, y: int) -> float:
    """max over 0 <= k < n of d(f^k x, f^k y)."""
    if n < 1:
        raise UsageError("bowen distance needs n >= 1")
    space._check_id(x)
    space._check_id(y)
    a, b = int(x), int(y)
    best = 0.0
    for _ in range(n):
        best = max(best, space.dist(a, b))
        a, b = f.apply(a), f.apply(b)
    return best


def _orbit_table(f: DynMap, n: int) -> np.ndarray:
    orbits = np.empty((n, f.point_count), dtype=np.int64)
    orbits[0] = np.arange(f.point_count)
    for k in range(1, n):
        orbits[k] = f.image[orbits[k - 1]]
    return orbits


def max_separated(space: FiniteMetricSpace, f: DynMap, n: int, eps: float,
                  mode: str | None = None, budget: int | None = None) -> SeparatedReport:
    """Largest set with pairwise orbit distance strictly above eps.

    Exact mode solves maximum independent set on the graph joining pairs with
    d_f^n <= eps (attempted by default only up to 50 points); greedy keeps the
    lowest-index point compatible with everything chosen so far.
    """
    _check_same_points(space, f, None)
    if n < 1:
        raise UsageError("separated sets need n >= 1")
    if not eps > 0:
        raise UsageError("separation scale must be positive")
    N = space.point_count
    if mode is None:
        mode = "exact" if N <= EXACT_SEPARATED_LIMIT else "greedy"
    if mode not in ("exact", "greedy"):
        raise UsageError(f"mode must be exact or greedy, got {mode!r}")
    orbits = _orbit_table(f, n)
    if mode == "greedy":
        if space.has_matrix:
            B = kernels().bowen_matrix(space.matrix(), orbits)
            sel = kernels().greedy_separated_matrix(B, float(eps))
        else:
            sel = kernels().greedy_separated_coords(
                space._points, space._wraps, space._mode, space._scale,
                orbits, float(eps))
        return SeparatedReport(int(sel.size), PointSet(sel), False)
    if not space.has_matrix:
        raise UsageError("exact separated-set search needs a space small enough "
                         "for its distance matrix")
    B = kernels().bowen_matrix(space.matrix(), orbits)
    adj = []
    for i in range(N):
        row = B[i] <= eps
        row[i] = False
        bits = 0
        for j in np.flatnonzero(row):
            bits |= 1 << int(j)
        adj.append(bits)
    ids = exact_max_independent(adj, budget=resolve_budget(budget))
    return SeparatedReport(len(ids), PointSet(ids), True)


def lipschitz_constant(space: FiniteMetricSpace, f: DynMap) -> float:
    """Smallest L with d(fx, fy) <= L d(x, y): max ratio over pairs."""
    _check_same_points(space, f, None)
    if space.point_count < 2:
        raise UsageError("Lipschitz constant needs at least 2 points")
    return float(space._call("lipschitz", f.image))


def iterate_rate(space: FiniteMetricSpace, f: DynMap, n_max: int) -> IterateRate:
    """Per-n Lipschitz growth (1/n) ln L(f^n) and its minimum.

    ln L(f^n) is sub-additive, so the min over a finite horizon is the best
    finite-data stand-in for the limit; sub-additivity itself is asserted.
    """
    if n_max < 1:
        raise UsageError("iterate rate needs n_max >= 1")
    logs: list[float] = []
    idx = np.arange(f.point_count, dtype=np.int64)
    for n in range(1, n_max + 1):
        idx = f.image[idx]
        L = float(space._call("lipschitz", idx))
        logs.append(math.log(L) if L > 0 else -math.inf)
    for m in range(1, n_max + 1):
        for k in range(1, n_max + 1 - m):
            lhs, a, b = logs[m + k - 1], logs[m - 1], logs[k - 1]
            if math.isinf(a) or math.isinf(b):
                continue
            if lhs > a + b + 1e-9 * (1.0 + abs(a) + abs(b)):
                raise NumericError(
                    f"ln L(f^n) failed sub-additivity at m={m}, k={k}: "
                    f"{lhs} > {a} + {b}")
    per_n = tuple((n, logs[n - 1] / n) for n in range(1, n_max + 1))
    return IterateRate(min(r for _, r in per_n), per_n)


def bowen_block_length(space: FiniteMetricSpace, f: DynMap, cover: Cover,
                       b: PointSet, cap: int) -> BlockLength:
    """Largest n <= cap with f^k(b) inside some member for every k < n.

    0 when b itself fits no member; capped flag when the orbit still fits at
    the cap.
    """
    _check_same_points(space, f, cover)
    if cap < 1:
        raise UsageError("block length cap must be >= 1")
    if len(b) == 0:
        raise UsageError("block must be nonempty")
    cur = np.fromiter(b.ids, dtype=np.int64)
    for k in range(cap):
        if not cover.masks[:, cur].all(axis=1).any():
            return BlockLength(k, False)
        cur = np.unique(f.image[cur])
    return BlockLength(cap, True)


def preimage_gap(space: FiniteMetricSpace, f: DynMap, n: int, x: int, y: int) -> ExtValue:
    """Smallest distance between the n-step preimage sets of x and y.

    Tagged infinity when either preimage is empty; n = 0 gives d(x, y).
    """
    if n < 0:
        raise UsageError("preimage gap needs n >= 0")
    space._check_id(x)
    space._check_id(y)
    if n == 0:
        return ExtValue.finite(space.dist(int(x), int(y)))
    img = map_power(f, n).image
    A = np.flatnonzero(img == int(x)).astype(np.int64)
    B = np.flatnonzero(img == int(y)).astype(np.int64)
    if A.size == 0 or B.size == 0:
        return ExtValue.infinity()
    return ExtValue.finite(space._call("pair_min", A, B))


def eventual_image(space: FiniteMetricSpace, f: DynMap) -> PointSet:
    """Intersection of the forward images f^n(X): iterate to the fixpoint."""
    _check_same_points(space, f, None)
    cur = np.unique(f.image)
    while True:
        nxt = np.unique(f.image[cur])
        if nxt.size == cur.size and (nxt == cur).all():
            return PointSet(cur)
        cur = nxt


def lbd_lower_bound(space: FiniteMetricSpace, f: DynMap, N: int,
                    pair_budget: int = 200, window: tuple[int, int] | None = None,
                    seed: int = 12345) -> LbdBounds:
    """Backward-separation rate bounds from preimage gaps on the eventual image.

    For pairs x != y in the eventual image, c_n = (1/n) ln(d(x,y) / D_n) where
    D_n is the gap between the n-step preimage sets. Returns the sup over pairs
    of the windowed min and windowed max of c_n (tail window by default) and
    the pair attaining the lower bound.
    """
    if N < 1:
        raise UsageError("preimage rate bound needs N >= 1")
    core = eventual_image(space, f)
    if len(core) < 2:
        raise UsageError("eventual image is a single point; no pair to separate")
    lo, hi = window if window is not None else (max(1, N // 2), N)
    if not 1 <= lo <= hi <= N:
        raise UsageError(f"window {lo}:{hi} outside 1..{N}")
    ids = list(core.ids)
    pairs = [(x, y) for i, x in enumerate(ids) for y in ids[i + 1:]]
    if len(pairs) > pair_budget:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(pairs), size=pair_budget, replace=False)
        pairs = [pairs[i] for i in sorted(pick)]
    n_pts = space.point_count
    best_lower = -math.inf
    best_upper = -math.inf
    best_pair = pairs[0]
    for x, y in pairs:
        d0 = space.dist(x, y)
        in_a = np.zeros(n_pts, dtype=np.bool_)
        in_b = np.zeros(n_pts, dtype=np.bool_)
        in_a[x] = True
        in_b[y] = True
        p_lo, p_hi = math.inf, -math.inf
        for n in range(1, hi + 1):
            in_a = in_a[f.image]
            in_b = in_b[f.image]
            if n < lo:
                continue
            A = np.flatnonzero(in_a).astype(np.int64)
            B = np.flatnonzero(in_b).astype(np.int64)
            if A.size == 0 or B.size == 0:
                raise NumericError("eventual-image point lost its preimage")
            c_n = math.log(d0 / float(space._call("pair_min", A, B))) / n
            p_lo = min(p_lo, c_n)
            p_hi = max(p_hi, c_n)
        if p_lo > best_lower:
            best_lower = p_lo
            best_pair = (x, y)
        best_upper = max(best_upper, p_hi)
    return LbdBounds(best_lower, best_upper, best_pair)


def _check_same_points(space: FiniteMetricSpace, f: DynMap | None,
                       cover: Cover | None) -> None:
    if f is not None and f.point_count != space.point_count:
        raise UsageError("map and space point counts differ")
    if cover is not None and cover.point_count != space.point_count:
        raise UsageError("cover and space point counts differ")
