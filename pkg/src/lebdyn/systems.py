"""Example dynamical systems on finite metric models, with analytic targets.

Each family builds a (space, map, covers) bundle together with whatever
reference values are pinned by the construction itself: zero rates for
isometries and period-two maps, exact halving rates for dyadic models,
dimensions for grids and products, Lipschitz constants where the defining
map fixes them. Bundles are deterministic: the same spec always produces
the same space, map and covers, bit for bit.

Families:
  doubling    x -> 2x mod 1 on a circle grid (standard expanding model)
  rotation    x -> x + k/g on a circle grid (isometry)
  sqrt        square-root chain 2^(-2^k) with the preimage cascade at 1/2
  involution  x -> sqrt(1 - x^2) on symmetric pairs (period two)
  ladder_ex3  {2^-m} doubling ladder with fixed rungs at 2^(-2^k)
  xab         successor map on the two-parameter cluster set X_{a,b}
  xa          successor map on the one-parameter cluster set X_a
  osc         contraction chain t_n = exp(-s_n) with block-alternating slopes
  cylinder    (x, y) -> (2x, y) with wraparound collapse to the x=0 column
  shift       truncated binary full shift with the 2^(-j) word metric
  product     coordinate product of two factor systems under the max metric
"""

from __future__ import annotations

import difflib
import math
from dataclasses import dataclass, field

import numpy as np

from .cover_calc import Cover, mesh_cover
from .dynamics import (DynMap, eventual_image, iterate_rate, lbd_lower_bound,
                       lipschitz_constant)
from .errors import BudgetError, NumericError, UsageError
from .metric_core import (FiniteMetricSpace, box_dim_estimate, circle_grid,
                          space_from_points, validate_space)
from .rates import (EstimateSet, cover_entropy, hl_delta_estimate,
                    hl_estimates, sep_entropy)

MIN_DISTANCE = 1e-300

# estimate_bundle only attempts the expensive exact enumerations on models
# at or below these sizes; larger systems keep the plain rate estimators.
ENTROPY_POINT_LIMIT = 300
DELTA_ENUM_POINT_LIMIT = 128


@dataclass(frozen=True)
class SystemSpec:
    """Reproducible description of a generated system."""

    family: str
    params: dict = field(default_factory=dict)
    mesh_radii: tuple[float, ...] = ()
    horizon: int = 0


@dataclass(frozen=True)
class KnownValue:
    value: float
    basis: str


@dataclass(frozen=True)
class SystemBundle:
    spec: SystemSpec
    space: FiniteMetricSpace
    map: DynMap
    covers: tuple[tuple[str, Cover], ...]
    known: dict[str, KnownValue]

    def cover(self, label: str) -> Cover:
        for name, cov in self.covers:
            if name == label:
                return cov
        raise UsageError(f"no cover labelled {label!r}")


@dataclass(frozen=True)
class FamilyInfo:
    name: str
    summary: str
    params: dict[str, str]
    defaults: dict
    mesh_radii: tuple[float, ...]
    horizon: int
    basis: str


LN2 = math.log(2)


# -- family builders ----------------------------------------------------------


def _build_doubling(p):
    g = 1 << p["m"]
    space = circle_grid(g)
    f = DynMap(np.arange(g, dtype=np.int64) * 2 % g, g)
    known = {
        "h": KnownValue(LN2, "expanding circle map: entropy equals the log of the degree"),
        "dimb": KnownValue(1.0, "grid model of the circle"),
        "dimh": KnownValue(1.0, "grid model of the circle"),
        "h_l_lower": KnownValue(LN2, "mesh pullbacks halve until the grid floor"),
        "h_l_upper": KnownValue(LN2, "mesh pullbacks halve until the grid floor"),
        "l": KnownValue(LN2, "uniform stretching by 2"),
        "L": KnownValue(2.0, "adjacent pairs stretch by exactly 2"),
    }
    return space, f, known


def _build_rotation(p):
    g = p["g"]
    space = circle_grid(g)
    f = DynMap((np.arange(g, dtype=np.int64) + p["steps"]) % g, g)
    zero = KnownValue(0.0, "isometries leave every cover geometry unchanged")
    known = {
        "h": zero,
        "h_l_lower": zero,
        "h_l_upper": zero,
        "l": zero,
        "L": KnownValue(1.0, "isometry"),
        "dimb": KnownValue(1.0, "grid model of the circle"),
        "dimh": KnownValue(1.0, "grid model of the circle"),
    }
    return space, f, known


def _build_sqrt(p):
    K = p["K"]
    if 2 ** K > 996:
        raise NumericError(f"K={K} underflows double precision; largest safe K is 9")
    chain = [2.0 ** -(2 ** k) for k in range(K, -1, -1)]  # ascending, 2^-2^K .. 1/2
    pts = [0.0] + chain + [1.0]
    space = space_from_points(pts, "line")
    # indices: 0 -> 0.0, 1..K+1 -> chain (k = K down to 0), K+2 -> 1.0
    image = np.empty(len(pts), dtype=np.int64)
    image[0] = 0
    image[len(pts) - 1] = len(pts) - 1
    for i in range(1, K + 2):
        image[i] = i + 1  # square root: 2^(-2^k) -> 2^(-2^(k-1)), 1/2 -> 1
    f = DynMap(image, len(pts))
    known = {
        "h": KnownValue(0.0, "every orbit reaches a fixed point"),
        "dimh": KnownValue(0.0, "countable compact model"),
    }
    return space, f, known


def _build_involution(p):
    xs = sorted(p["xs"])
    if any(not 0 < x < 1 / math.sqrt(2) for x in xs):
        raise UsageError("involution anchors must lie strictly between 0 and 1/sqrt(2)")
    pts = []
    for x in xs:
        pts.append((x, math.sqrt(1.0 - x * x)))
    vals = sorted({v for pair in pts for v in pair} | {1 / math.sqrt(2)})
    idx = {v: i for i, v in enumerate(vals)}
    image = np.arange(len(vals), dtype=np.int64)
    for x, y in pts:
        image[idx[x]] = idx[y]
        image[idx[y]] = idx[x]
    space = space_from_points(vals, "line")
    f = DynMap(image, len(vals))
    known = {
        "h": KnownValue(0.0, "period-two map"),
        "h_l_lower": KnownValue(0.0, "the square is the identity, covers repeat with period 2"),
        "h_l_upper": KnownValue(0.0, "the square is the identity, covers repeat with period 2"),
        "l": KnownValue(0.0, "L(f^2) = 1 at every even power"),
        "dimh": KnownValue(0.0, "countable compact model"),
    }
    return space, f, known


def _build_ladder(p):
    M = p["M"]
    if M > 996:
        raise NumericError(f"M={M} underflows double precision; largest safe M is 996")
    vals = [0.0] + [2.0 ** -m for m in range(M, 0, -1)]
    space = space_from_points(vals, "line")
    fixed_exps = {1 << k for k in range(M.bit_length() + 1)}
    image = np.empty(len(vals), dtype=np.int64)
    image[0] = 0
    for i in range(1, len(vals)):
        m = M - i + 1  # vals[i] = 2^-m
        # doubling moves one rung up except at the fixed rungs 2^(-2^k)
        image[i] = i if m in fixed_exps else i + 1
    f = DynMap(image, len(vals))
    known = {
        "h": KnownValue(0.0, "every orbit reaches a fixed rung"),
        "h_l_upper": KnownValue(0.0, "the member absorbing the tail pulls back onto itself"),
        "l": KnownValue(LN2, "doubling runs of unbounded length between fixed rungs"),
        "L": KnownValue(2.0, "single-rung doubling"),
        "dimh": KnownValue(0.0, "countable compact model"),
    }
    return space, f, known


def _xab_points(a, b, P, q_below, q_above):
    pts = {0.0}
    for m in range(1, (1 << P) + 1):
        pts.add(a ** -m)
    for p in range(P + 1):
        anchor = a ** -(1 << p)
        for q in range(1, q_below + 1):
            pts.add(q * anchor / (a + q))
        if b is not None:
            q = q_above
            while True:  # multipliers 1 + b^j for every integer j with 1 + b^j < a
                mult = 1.0 + b ** -q
                pts.add(anchor * mult)
                q -= 1
                if q < -60 or not 1.0 + b ** -(q) < a:
                    break
        else:
            for q in range(1, q_above + 1):
                val = anchor * (a + q) / q  # the inverted-ratio branch
                if val <= 1.0:
                    pts.add(val)
    return np.array(sorted(pts))


def _successor_map(vals, fixed_values):
    image = np.arange(len(vals), dtype=np.int64)
    fixed = np.zeros(len(vals), dtype=bool)
    for v in fixed_values:
        j = int(np.searchsorted(vals, v))
        if j < len(vals) and vals[j] == v:
            fixed[j] = True
    for i in range(len(vals) - 1):
        if not fixed[i]:
            image[i] = i + 1
    return image  # top point stays fixed by construction


def _build_xab(p):
    a, b, P = p["a"], p["b"], p["P"]
    if not a >= b > 1:
        raise UsageError("xab needs a >= b > 1")
    vals = _xab_points(a, b, P, p["q_below"], p["q_above"])
    if vals[1] < MIN_DISTANCE or np.diff(vals).min() < MIN_DISTANCE:
        raise NumericError(f"P={P} with q_above={p['q_above']} underflows double "
                           f"precision; shrink the truncation depths")
    space = space_from_points(vals, "line")
    anchors = [a ** -(1 << k) for k in range(P + 1)]
    f = DynMap(_successor_map(vals, [0.0] + anchors), len(vals))
    known = {
        "h": KnownValue(0.0, "homeomorphism of a countable compact set"),
        "l": KnownValue(math.log(a), "geometric-chain runs stretch by a per step"),
        "h_l_lower": KnownValue(math.log(b), "cluster ladders contract by b per pullback"),
        "h_l_upper": KnownValue(math.log(b), "cluster ladders contract by b per pullback"),
        "dimh": KnownValue(0.0, "countable compact model"),
    }
    return space, f, known


def _build_xa(p):
    a, P = p["a"], p["P"]
    if not a > 1:
        raise UsageError("xa needs a > 1")
    vals = _xab_points(a, None, P, p["q_cap"], p["q_cap"])
    if vals[1] < MIN_DISTANCE or np.diff(vals).min() < MIN_DISTANCE:
        raise NumericError(f"P={P} underflows double precision; shrink it")
    space = space_from_points(vals, "line")
    anchors = [a ** -(1 << k) for k in range(P + 1)]
    f = DynMap(_successor_map(vals, [0.0] + anchors), len(vals))
    known = {
        "h": KnownValue(0.0, "homeomorphism of a countable compact set"),
        "l": KnownValue(math.log(a), "geometric-chain runs stretch by a per step"),
        "h_l_lower": KnownValue(0.0, "cluster ladders contract harmonically, not geometrically"),
        "h_l_upper": KnownValue(0.0, "cluster ladders contract harmonically, not geometrically"),
        "dimh": KnownValue(0.0, "countable compact model"),
    }
    return space, f, known


def osc_steps(n_max: int, a: float, b: float) -> np.ndarray:
    """Partial sums s_1..s_n_max of the block-alternating step sequence.

    s_1 = 0, and the increment at index n is a on blocks [2^(2^(2k-2)),
    2^(2^(2k-1))) and b on blocks [2^(2^(2k-1)), 2^(2^(2k))). Exposed so the
    construction can be cross-checked against an independent evaluation.
    """
    s = np.zeros(n_max)
    for n in range(2, n_max + 1):
        j = 1
        while not n < 2 ** (2 ** j):
            j += 1
        s[n - 1] = s[n - 2] + (a if j % 2 == 1 else b)
    return s


def _build_osc(p):
    a, b, n_max = p["a"], p["b"], p["N_max"]
    if not a > b > 0:
        raise UsageError("osc needs a > b > 0")
    s = osc_steps(n_max, a, b)
    if s[-1] > -math.log(MIN_DISTANCE):
        safe = int(np.searchsorted(s, -math.log(MIN_DISTANCE)))
        raise NumericError(f"N_max={n_max} underflows double precision at these "
                           f"slopes; largest safe N_max is {safe}")
    t = np.exp(-s)  # t_1 = 1 doubles as the fixed endpoint
    vals = np.concatenate(([0.0], t))
    order = np.argsort(vals, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    image = np.arange(len(vals), dtype=np.int64)
    for n in range(2, n_max + 1):
        image[rank[n]] = rank[n - 1]  # t_n -> t_(n-1); 0 and t_1 = 1 stay put
    space = space_from_points(vals[order], "line")
    f = DynMap(image, len(vals))
    known = {
        "h": KnownValue(0.0, "single contraction chain"),
        "h_l_lower": KnownValue(b, "slow blocks dominate the liminf of s_n/n"),
        "h_l_upper": KnownValue(a, "fast blocks dominate the limsup of s_n/n"),
        "l": KnownValue(a, "fast blocks give arbitrarily long stretches at rate a"),
        "dimh": KnownValue(0.0, "countable compact model"),
    }
    return space, f, known


def _build_cylinder(p):
    gx, q = 1 << p["m"], p["q"]
    if q < 2:
        raise UsageError("cylinder needs at least 2 levels")
    xs = np.arange(gx) / gx
    ys = np.arange(q) / (q - 1)
    pts = np.column_stack([np.repeat(xs, q), np.tile(ys, gx)])
    space = space_from_points(pts, "max", wraps=[True, False])
    i = np.repeat(np.arange(gx, dtype=np.int64), q)
    j = np.tile(np.arange(q, dtype=np.int64), gx)
    nxt = np.where(2 * i < gx, 2 * i, 0)
    f = DynMap(nxt * q + j, gx * q)
    known = {
        "h_l_lower": KnownValue(LN2, "the x coordinate doubles until the collapse"),
        "h_l_upper": KnownValue(LN2, "the x coordinate doubles until the collapse"),
        "L": KnownValue(2.0, "coordinate doubling, wraparound included"),
    }
    return space, f, known


def _build_shift(p):
    k, L = p["k"], p["L"]
    if k != 2:
        raise UsageError("only the binary shift is modelled (k=2)")
    if L < 2 or L > 12:
        raise UsageError("word length must be in 2..12")
    n = 1 << L
    words = np.arange(n, dtype=np.int64)
    # symbol j of word w is the bit at position L-1-j, so index order is
    # lexicographic in the symbols
    sym = ((words[:, None] >> (L - 1 - np.arange(L))) & 1).astype(np.int8)
    diff = sym[:, None, :] != sym[None, :, :]
    first = np.where(diff.any(axis=2), diff.argmax(axis=2), L)
    D = np.where(first >= L, 0.0, 2.0 ** -first)
    space = FiniteMetricSpace(matrix=D)
    f = DynMap((words << 1) & (n - 1), n)  # drop the leading symbol, pad with 0
    known = {
        "h": KnownValue(LN2, "binary words: separated sets double per step"),
        "h_l_lower": KnownValue(LN2, "the shift exactly doubles word distances"),
        "h_l_upper": KnownValue(LN2, "the shift exactly doubles word distances"),
        "l": KnownValue(LN2, "the shift exactly doubles word distances"),
        "L": KnownValue(2.0, "the shift exactly doubles word distances"),
        "dimb": KnownValue(1.0, "covering numbers double per halved scale"),
        "dimh": KnownValue(1.0, "covering numbers double per halved scale"),
    }
    return space, f, known


def _build_product(p):
    left = generate_system(SystemSpec(p["left_family"], dict(p["left_params"])))
    right = generate_system(SystemSpec(p["right_family"], dict(p["right_params"])))
    nl, nr = left.space.point_count, right.space.point_count
    if nl * nr > 3000:
        raise UsageError(f"product would have {nl * nr} points; keep it at or "
                         f"below 3000")
    Dl, Dr = left.space.matrix(), right.space.matrix()
    if Dl is None or Dr is None:
        raise UsageError("product factors must fit the distance-matrix cache")
    # max metric on the product: point (i, j) sits at index i*nr + j
    D = np.maximum(Dl[:, None, :, None], Dr[None, :, None, :]).reshape(
        nl * nr, nl * nr)
    space = FiniteMetricSpace(matrix=D)
    image = (left.map.image[:, None] * nr + right.map.image[None, :]).reshape(-1)
    f = DynMap(image, nl * nr)

    def comb(key, how):
        a = left.known.get(key)
        b = right.known.get(key)
        if a is None or b is None:
            return None
        return KnownValue(how(a.value, b.value), f"combined from the factors: {how.__name__}")

    known = {}
    for key, how in (("h", _sum), ("dimh", _sum), ("dimb", _sum),
                     ("l", max), ("L", max),
                     ("h_l_lower", max), ("h_l_upper", max)):
        kv = comb(key, how)
        if kv is not None:
            known[key] = kv
    return space, f, known


def _sum(x, y):
    return x + y


_FAMILIES: dict[str, FamilyInfo] = {}
_BUILDERS = {}


def _family(name, summary, params, defaults, mesh_radii, horizon, basis, builder):
    _FAMILIES[name] = FamilyInfo(name, summary, params, defaults,
                                 tuple(mesh_radii), horizon, basis)
    _BUILDERS[name] = builder


_family("doubling", "x -> 2x mod 1 on a 2^m-point circle grid",
        {"m": "grid exponent, 4..14"}, {"m": 10},
        (1 / 16, 1 / 32, 1 / 64), 8,
        "standard expanding test system", _build_doubling)
_family("rotation", "x -> x + steps/g on a g-point circle grid",
        {"g": "grid size >= 3", "steps": "rotation amount"}, {"g": 97, "steps": 13},
        (1 / 8, 1 / 16), 8,
        "isometry: all decay rates vanish", _build_rotation)
_family("sqrt", "square-root chain: f(2^(-2^k)) = 2^(-2^(k-1)), 1/2 -> 1",
        {"K": "chain depth, 1..9"}, {"K": 6},
        (0.07, 0.02), 6,
        "preimages of 1/2 collapse super-exponentially: unbounded decay rate",
        _build_sqrt)
_family("involution", "x -> sqrt(1 - x^2) on symmetric pairs",
        {"xs": "anchor points in (0, 1/sqrt(2))"},
        {"xs": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)},
        (0.25, 0.1), 6,
        "period-two map: iterated covers repeat, all rates vanish",
        _build_involution)
_family("ladder_ex3", "doubling ladder {2^-m} with fixed rungs at 2^(-2^k)",
        {"M": "ladder depth, 4..996"}, {"M": 64},
        (0.01, 0.003), 8,
        "long stretching runs with zero cover decay: l(f) > 0 while h_L+ = 0",
        _build_ladder)
_family("xab", "successor map on the cluster set X_{a,b}",
        {"a": "chain ratio, a >= b", "b": "ladder ratio > 1", "P": "anchor depth",
         "q_below": "harmonic cluster size", "q_above": "geometric ladder size"},
        {"a": 4.0, "b": 2.0, "P": 6, "q_below": 50, "q_above": 40},
        (3e-3, 1e-3), 12,
        "stretching rate log(a) with cover decay rate log(b)", _build_xab)
_family("xa", "successor map on the one-parameter cluster set X_a",
        {"a": "chain ratio > 1", "P": "anchor depth", "q_cap": "cluster size"},
        {"a": 4.0, "P": 6, "q_cap": 50},
        (0.1, 0.04), 16,
        "stretching rate log(a) with zero cover decay", _build_xa)
_family("osc", "contraction chain t_n = exp(-s_n), block-alternating slopes",
        {"a": "fast slope", "b": "slow slope < a", "N_max": "chain length"},
        {"a": 1.0, "b": 0.5, "N_max": 700},
        (0.05, 0.02), 650,
        "upper rate a on fast blocks, lower rate b on slow blocks", _build_osc)
_family("cylinder", "(x, y) -> (2x, y) with collapse to the x = 0 column",
        {"m": "x-grid exponent", "q": "number of y levels"}, {"m": 9, "q": 16},
        (1 / 16, 1 / 32), 8,
        "preimage distances never shrink on the invariant column, yet covers decay",
        _build_cylinder)
_family("shift", "truncated binary full shift with the 2^(-j) word metric",
        {"k": "alphabet size (2)", "L": "word length, 2..12"}, {"k": 2, "L": 10},
        (1 / 4, 1 / 8), 5,
        "standard symbolic test system", _build_shift)
_family("product", "coordinate product of two factor systems, max metric",
        {"left_family": "factor family", "left_params": "factor params",
         "right_family": "factor family", "right_params": "factor params"},
        {"left_family": "xa", "left_params": {"a": 4.0, "P": 4, "q_cap": 20},
         "right_family": "rotation", "right_params": {"g": 5, "steps": 0}},
        (0.05, 0.02), 8,
        "adds an interval-like factor: Hausdorff bound beats the Lipschitz bound",
        _build_product)


def list_families() -> tuple[FamilyInfo, ...]:
    """Static catalog of the generator families, defaults included."""
    return tuple(_FAMILIES.values())


def _resolve_params(family: str, given: dict) -> dict:
    info = _FAMILIES[family]
    params = dict(info.defaults)
    for key, val in (given or {}).items():
        if key not in params:
            raise UsageError(f"unknown parameter {key!r} for family {family!r}; "
                             f"expected one of {sorted(params)}")
        params[key] = val
    return params


def generate_system(spec: SystemSpec, validate: bool = False) -> SystemBundle:
    """Build the space, map, mesh covers and known values for a spec.

    Generation is pure; pass validate=True to re-run the metric axioms on the
    synthesized space (the builders are exact, so this is a debugging aid).
    """
    if spec.family not in _BUILDERS:
        near = difflib.get_close_matches(spec.family, _BUILDERS, n=1)
        hint = f"; closest match: {near[0]!r}" if near else ""
        raise UsageError(f"unknown family {spec.family!r}{hint}")
    params = _resolve_params(spec.family, spec.params)
    info = _FAMILIES[spec.family]
    radii = tuple(spec.mesh_radii) or info.mesh_radii
    horizon = int(spec.horizon) or info.horizon
    space, f, known = _BUILDERS[spec.family](params)
    if space.point_count > 1 and space.min_gap < MIN_DISTANCE:
        raise NumericError("generated space has distances below 1e-300; "
                           "shrink the truncation parameters")
    if validate:
        bad = validate_space(space, full_limit=600, samples=200_000)
        if bad:
            raise NumericError(f"generated space fails validation: {bad[0]}")
    covers = tuple((f"mesh:{r:g}", mesh_cover(space, r)) for r in radii)
    full = SystemSpec(spec.family, params, radii, horizon)
    return SystemBundle(full, space, f, covers, known)


def estimate_bundle(bundle: SystemBundle, budget: int | None = None) -> EstimateSet:
    """Measure every estimate the bundle's size permits, plus its known values.

    Expensive exact passes (cover entropy, minimum-subcover enumeration) are
    attempted only under the size limits above and are dropped silently when
    the node budget runs out; the cheap rate estimators always run.
    """
    space, f = bundle.space, bundle.map
    radii = bundle.spec.mesh_radii
    N = bundle.spec.horizon
    measured: dict[str, float] = {}
    tags: dict[str, str] = {}

    try:
        hl = hl_estimates(space, f, radii, N)
    except UsageError:
        hl = None  # every delta sits on the resolution floor at these radii
    if hl is not None:
        measured["h_l_lower"] = hl.lower
        measured["h_l_upper"] = hl.upper

    se = sep_entropy(space, f, sorted(set(radii), reverse=True), N)
    eps, est, exact, _ = se.per_eps[-1]
    measured["h_sep"] = est
    if not exact:
        tags["h_sep"] = "lower"

    n_rate = min(N, 12)
    if n_rate >= 1:
        ir = iterate_rate(space, f, n_rate)
        measured["l"] = ir.l_estimate
    L = lipschitz_constant(space, f)
    if L > 0:
        measured["ln_L"] = math.log(L)

    gammas = sorted(set(radii), reverse=True)
    while len(gammas) < 3:
        gammas.append(gammas[-1] / 2)
    dim = box_dim_estimate(space, gammas, budget=budget)
    measured["dimb"] = dim.slope

    if space.point_count <= ENTROPY_POINT_LIMIT:
        try:
            ce = cover_entropy(space, f, bundle.covers[0][1], max(2, min(N, 6)),
                               budget=budget)
            measured["h_cover"] = ce.estimate
            if not ce.exact:
                tags["h_cover"] = "upper"
        except BudgetError:
            pass
    if space.point_count <= DELTA_ENUM_POINT_LIMIT:
        try:
            hd = hl_delta_estimate(space, f, bundle.covers[0][1],
                                   max(2, min(N, 4)), budget=budget)
            measured["h_l_delta"] = hd.slope
        except BudgetError:
            pass

    if len(eventual_image(space, f)) >= 2:
        try:
            lbd = lbd_lower_bound(space, f, max(2, min(N, 8)))
            measured["lbd_lower"] = lbd.lower
            measured["lbd_upper"] = lbd.upper
        except (UsageError, NumericError):
            pass

    analytic = {key: kv.value for key, kv in bundle.known.items()}
    if "L" in analytic:
        Lval = analytic.pop("L")
        if Lval > 0:
            analytic["ln_L"] = math.log(Lval)
    return EstimateSet(measured=measured, analytic=analytic,
                       bound_tags=tags, system=bundle.spec.family)
