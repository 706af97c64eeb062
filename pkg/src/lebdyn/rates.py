"""Finite-horizon rate estimation and the inequality verifier.

Estimator convention: liminf/limsup are replaced by min/max over a tail window
(default: the second half of the usable horizon). All three reported numbers
are anchored at the window start n0: with y_n = -ln delta_n, the per-n
exponents are alpha_n = (y_n - y_n0)/(n - n0), the lower/upper rates their
min/max, and the slope a least-squares line through the anchor, which is a
convex combination of the alpha_n. Anchoring makes every output invariant
under metric scaling (a constant shift of y cancels in the differences) and
guarantees lower <= slope <= upper identically.

The raw exponents -ln(delta_n)/n remain available as RateSequence.a_n; they
carry an O(1/n) offset from the cover's initial Lebesgue number, which is why
the window estimators do not use them directly.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .cover_calc import (Cover, delta_minimal_subcovers, mesh_cover,
                         min_subcover)
from .dynamics import (DynMap, RateSequence, delta_sequence, iterated_covers,
                       max_separated)
from .errors import BudgetError, NumericError, UsageError
from .metric_core import FiniteMetricSpace

SLOPE_SLACK = 1e-12


@dataclass(frozen=True)
class RateEstimate:
    lower_rate: float
    upper_rate: float
    slope: float
    window: tuple[int, int]
    method: str


@dataclass(frozen=True)
class PrefixMaxRates:
    seq_rate: float
    prefix_rate: float
    window: tuple[int, int]


@dataclass(frozen=True)
class CoverEntropy:
    estimate: float
    per_n: tuple[tuple[int, int, float, bool], ...]  # (n, S, ln(S)/n, exact)
    window: tuple[int, int]
    exact: bool


@dataclass(frozen=True)
class SepEntropy:
    # per (eps): (eps, estimate, exact on window, window used)
    per_eps: tuple[tuple[float, float, bool, tuple[int, int]], ...]
    table: tuple[tuple[float, int, int, float, bool], ...]  # (eps, n, s_n, rate, exact)


@dataclass(frozen=True)
class HLReport:
    per_radius: tuple[tuple[float, RateEstimate], ...]
    lower: float
    upper: float


@dataclass(frozen=True)
class InequalityRow:
    name: str
    lhs: float | None
    rhs: float | None
    slack: float | None
    tol: float
    passed: bool | None  # None = skipped
    lhs_src: str
    rhs_src: str
    note: str = ""


@dataclass(frozen=True)
class InequalityReport:
    rows: tuple[InequalityRow, ...]

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(f"{r.name}[{r.lhs_src}/{r.rhs_src}]"
                     for r in self.rows if r.passed is False)

    @property
    def all_pass(self) -> bool:
        return not self.failed


@dataclass(frozen=True)
class VerifyConfig:
    tolerance: float = 0.15
    analytic_tolerance: float = 1e-9


@dataclass
class EstimateSet:
    """Measured and analytic values feeding the inequality rows.

    measured keys: dimb, h_l_lower, h_l_upper, h_l_delta, h_sep, h_cover, l,
    ln_L, lbd_lower, lbd_upper. analytic keys: dimb, dimh, h, l, h_l_lower,
    h_l_upper, ln_L. bound_tags marks measured keys that are one-sided bounds
    ("upper"/"lower"); a row is not failed when the failing comparison leans on
    an upper-bound right side or a lower-bound left side.
    """

    measured: dict[str, float] = field(default_factory=dict)
    analytic: dict[str, float] = field(default_factory=dict)
    bound_tags: dict[str, str] = field(default_factory=dict)
    system: str = ""


def _tail_window(n_a: int, n_b: int) -> tuple[int, int]:
    m = n_b - n_a + 1
    if m < 2:
        raise UsageError("need at least 2 usable entries for a rate window")
    return (min(n_a + m // 2, n_b - 1), n_b)


def _anchored(ns: np.ndarray, ys: np.ndarray,
              window: tuple[int, int]) -> tuple[float, float, float]:
    lo, hi = window
    sel = (ns > lo) & (ns <= hi)
    anchor = np.flatnonzero(ns == lo)
    if anchor.size != 1 or not sel.any():
        raise UsageError(f"window {lo}:{hi} not resolvable on the sequence")
    y0 = ys[anchor[0]]
    gaps = (ns[sel] - lo).astype(np.float64)
    alphas = (ys[sel] - y0) / gaps
    w = gaps * gaps
    slope = float((w * alphas).sum() / w.sum())
    lower = float(alphas.min())
    upper = float(alphas.max())
    if not (lower - SLOPE_SLACK <= slope <= upper + SLOPE_SLACK):
        raise NumericError("slope escaped the [lower, upper] bracket")
    return lower, upper, slope


def rate_bounds(seq: RateSequence, window: tuple[int, int] | None = None) -> RateEstimate:
    """Windowed decay-rate estimate of a Lebesgue-number sequence.

    The window (n_min, n_max) must contain no capped entries and at least two
    points; default is the second half of the uncapped range.
    """
    ns = seq.n_values
    usable = np.flatnonzero(~seq.capped)
    if usable.size == 0:
        raise UsageError("every entry of the sequence is capped")
    if window is None:
        window = _tail_window(int(ns[usable[0]]), int(ns[usable[-1]]))
    lo, hi = int(window[0]), int(window[1])
    if not 1 <= lo < hi <= seq.horizon:
        raise UsageError(f"window {lo}:{hi} needs 1 <= n_min < n_max <= {seq.horizon}")
    if seq.capped[lo - 1:hi].any():
        raise UsageError(f"window {lo}:{hi} overlaps capped entries")
    lower, upper, slope = _anchored(ns, -np.log(seq.values), (lo, hi))
    return RateEstimate(lower, upper, slope, (lo, hi), "anchored")


def prefix_max_rate_check(values, window: tuple[int, int] | None = None) -> PrefixMaxRates:
    """Windowed upper rates of v_n/n and of its prefix-max b_n/n.

    Finite-horizon consistency check: a sequence bounded below and its running
    maximum share the same upper rate in the limit; callers compare the two
    with a window-resolution tolerance.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise UsageError("need a nonempty 1-d value sequence")
    N = v.size
    lo, hi = window if window is not None else _tail_window(1, N)
    if not 1 <= lo <= hi <= N:
        raise UsageError(f"window {lo}:{hi} outside 1..{N}")
    ns = np.arange(1, N + 1, dtype=np.float64)
    b = np.maximum.accumulate(v)
    s = slice(lo - 1, hi)
    return PrefixMaxRates(float((v[s] / ns[s]).max()),
                          float((b[s] / ns[s]).max()), (lo, hi))


def cover_entropy(space: FiniteMetricSpace, f: DynMap, cover: Cover, N: int,
                  mode: str | None = None, window: tuple[int, int] | None = None,
                  budget: int | None = None) -> CoverEntropy:
    """Growth rate of minimum subcover sizes S(U_f^n).

    Greedy S values are upper bounds, so the estimate is then an upper bound;
    the exact flag reports whether every window entry was solved exactly.
    """
    if N < 2:
        raise UsageError("cover entropy needs N >= 2")
    per_n = []
    sizes = np.empty(N, dtype=np.float64)
    for n, it in enumerate(iterated_covers(space, f, cover, N), start=1):
        sub = min_subcover(space, it, mode=mode, budget=budget)
        sizes[n - 1] = sub.size
        per_n.append((n, sub.size, math.log(sub.size) / n, sub.exact))
    win = window if window is not None else _tail_window(1, N)
    _, _, slope = _anchored(np.arange(1, N + 1), np.log(sizes), win)
    exact = all(row[3] for row in per_n if win[0] <= row[0] <= win[1])
    return CoverEntropy(slope, tuple(per_n), win, exact)


def sep_entropy(space: FiniteMetricSpace, f: DynMap, eps_list, N: int,
                mode: str | None = None, window: tuple[int, int] | None = None,
                budget: int | None = None) -> SepEntropy:
    """Growth rate of maximal (n, eps)-separated set sizes, per eps.

    Greedy counts are lower bounds on s_n. eps values must be positive and
    strictly decreasing; the last (finest) eps is the headline estimate.
    On a finite model the counts are resolution-limited: once s_n is within a
    small factor of the point count, the separated points are forced down to a
    spacing of a few resolution cells and the growth stalls well before the
    hard saturation at s_n = |X|. The default window therefore keeps only
    entries with s_n below a quarter of the point count, falling back to the
    below-saturation range and then to the plain tail when that leaves fewer
    than two entries; an explicit window overrides the trimming.
    """
    eps_vals = [float(e) for e in eps_list]
    if not eps_vals or any(not e > 0 for e in eps_vals):
        raise UsageError("eps values must be positive")
    if any(b >= a for a, b in zip(eps_vals, eps_vals[1:])):
        raise UsageError("eps values must be strictly decreasing")
    if N < 2:
        raise UsageError("separated-set entropy needs N >= 2")
    table = []
    per_eps = []
    exacts = np.empty(N, dtype=np.bool_)
    for eps in eps_vals:
        counts = np.empty(N, dtype=np.float64)
        for n in range(1, N + 1):
            rep = max_separated(space, f, n, eps, mode=mode, budget=budget)
            counts[n - 1] = rep.count
            exacts[n - 1] = rep.exact
            table.append((eps, n, rep.count, math.log(rep.count) / n, rep.exact))
        if window is not None:
            win = window
        else:
            win = _tail_window(1, N)
            for usable in (np.flatnonzero(counts * 4 < space.point_count),
                           np.flatnonzero(counts < space.point_count)):
                if usable.size >= 2:
                    win = _tail_window(int(usable[0]) + 1, int(usable[-1]) + 1)
                    break
        _, _, slope = _anchored(np.arange(1, N + 1), np.log(counts), win)
        exact_all = bool(exacts[win[0] - 1:win[1]].all())
        per_eps.append((eps, slope, exact_all, win))
    return SepEntropy(tuple(per_eps), tuple(table))


def hl_estimates(space: FiniteMetricSpace, f: DynMap, radii, N: int) -> HLReport:
    """Lebesgue decay rates across mesh covers of decreasing radius.

    Each radius gets a delta sequence trimmed to entries strictly above the
    space's smallest positive distance (finite models stall there: once the
    Lebesgue number reaches the resolution floor it cannot shrink further and
    the tail would dilute the rate). The finest radius supplies the reported
    (lower, upper) pair.
    """
    rads = sorted({float(r) for r in radii}, reverse=True)
    if len(rads) < 2:
        raise UsageError("need at least 2 distinct mesh radii")
    if any(not r > 0 for r in rads):
        raise UsageError("mesh radii must be positive")
    floor = space.min_gap
    out = []
    for r in rads:
        seq = delta_sequence(space, f, mesh_cover(space, r), N, name=f"r={r:g}")
        usable = np.flatnonzero((~seq.capped) & (seq.values > floor))
        if usable.size < 2:
            raise UsageError(f"mesh radius {r:g}: fewer than 2 entries above "
                             f"the resolution floor {floor:g}")
        win = _tail_window(int(usable[0]) + 1, int(usable[-1]) + 1)
        out.append((r, rate_bounds(seq, win)))
    finest = out[-1][1]
    return HLReport(tuple(out), finest.lower_rate, finest.upper_rate)


def hl_delta_estimate(space: FiniteMetricSpace, f: DynMap, cover: Cover, N: int,
                      window: tuple[int, int] | None = None,
                      budget: int | None = None) -> RateEstimate:
    """Decay rate of the best-Lebesgue-number-over-minimum-subcovers sequence.

    Enumerates every minimum subcover of each iterated cover, so it is only
    viable where that enumeration fits the node budget; the per-n values are
    asserted to never exceed the plain Lebesgue numbers. The default window is
    trimmed to entries above the resolution floor, exactly as in hl_estimates.
    """
    if N < 1:
        raise UsageError("needs N >= 1")
    dseq = delta_sequence(space, f, cover, N)
    vals = np.empty(N, dtype=np.float64)
    capped = np.zeros(N, dtype=np.bool_)
    for n, it in enumerate(iterated_covers(space, f, cover, N), start=1):
        try:
            rep = delta_minimal_subcovers(space, it, budget=budget)
        except BudgetError as e:
            raise BudgetError(
                f"{e} (minimum-subcover enumeration at n={n}; the plain "
                f"delta-sequence rates from hl_estimates remain available)") from e
        vals[n - 1] = rep.value
        capped[n - 1] = rep.capped
        if (not rep.capped and not dseq.capped[n - 1]
                and rep.value > dseq.values[n - 1]):
            raise NumericError(f"subcover value exceeded delta_{n}")
    if window is None:
        usable = np.flatnonzero(~capped & (vals > space.min_gap))
        if usable.size >= 2:
            window = _tail_window(int(usable[0]) + 1, int(usable[-1]) + 1)
    est = rate_bounds(RateSequence("delta_minimal", vals, capped), window)
    return dataclasses.replace(est, method="anchored-subcover")


# -- inequality verification -------------------------------------------------

# (name, lhs keys, rhs keys); a side's value is the product of its resolved
# keys, ":pos" clamping at zero. "dimh" only exists analytically and may join
# a measured side; "h_sep"/"h_cover" read the analytic "h".
_ROW_SPECS: tuple[tuple[str, tuple[str, ...], tuple[str, ...]], ...] = (
    ("rate_order", ("h_l_upper",), ("h_l_lower",)),
    ("upper_rate_cap", ("ln_L:pos",), ("h_l_upper",)),
    ("iterated_cap", ("l:pos",), ("h_l_upper",)),
    ("boxdim_delta_rate_entropy", ("dimb", "h_l_delta"), ("h_cover",)),
    ("boxdim_lower_rate_entropy", ("dimb", "h_l_lower"), ("h_sep",)),
    ("hausdorff_upper_rate_entropy", ("dimh", "h_l_upper"), ("h_sep",)),
    ("hausdorff_lipschitz_entropy", ("dimh", "l"), ("h_sep",)),
    ("boxdim_lipschitz_entropy", ("dimb", "ln_L:pos"), ("h_sep",)),
)

_ANALYTIC_ALIAS = {"h_sep": "h", "h_cover": "h"}
_ANALYTIC_ONLY = {"dimh"}


def _resolve_side(est: EstimateSet, keys: tuple[str, ...], src: str):
    """Product of key values under one provenance; None when unavailable."""
    value = 1.0
    bases = []
    any_measured = False
    for key in keys:
        base, _, mod = key.partition(":")
        if src == "measured":
            if base in est.measured:
                v = est.measured[base]
                any_measured = True
            elif base in _ANALYTIC_ONLY and base in est.analytic:
                v = est.analytic[base]
            else:
                return None
        else:
            name = _ANALYTIC_ALIAS.get(base, base)
            if name not in est.analytic:
                return None
            v = est.analytic[name]
        if mod == "pos":
            v = max(v, 0.0)
        value *= v
        bases.append(base)
    if src == "measured" and not any_measured:
        return None
    return value, tuple(bases)


def verify_inequalities(est: EstimateSet,
                        config: VerifyConfig | None = None) -> InequalityReport:
    """Check every proved inequality on the available estimates.

    Emits one row per inequality and provenance pairing (measured/analytic per
    side). A row passes when lhs - rhs >= -tol; tol is the analytic tolerance
    only when both sides are fully analytic. Rows whose inputs are missing, or
    whose failure would lean on a one-sided bound in the unsound direction,
    are marked skipped (passed None) instead of failed.
    """
    cfg = config or VerifyConfig()
    rows: list[InequalityRow] = []
    for name, lhs_keys, rhs_keys in _ROW_SPECS:
        emitted = False
        for lhs_src in ("measured", "analytic"):
            lhs = _resolve_side(est, lhs_keys, lhs_src)
            if lhs is None:
                continue
            for rhs_src in ("measured", "analytic"):
                rhs = _resolve_side(est, rhs_keys, rhs_src)
                if rhs is None:
                    continue
                tol = (cfg.analytic_tolerance
                       if lhs_src == "analytic" and rhs_src == "analytic"
                       else cfg.tolerance)
                slack = lhs[0] - rhs[0]
                passed: bool | None = slack >= -tol
                note = ""
                if not passed:
                    unsound = [b for b in rhs[1] if rhs_src == "measured"
                               and est.bound_tags.get(b) == "upper"]
                    unsound += [b for b in lhs[1] if lhs_src == "measured"
                                and est.bound_tags.get(b) == "lower"]
                    if unsound:
                        passed = None
                        note = ("failure not sound: " + ", ".join(sorted(set(unsound)))
                                + " is a one-sided bound")
                rows.append(InequalityRow(name, lhs[0], rhs[0], slack, tol,
                                          passed, lhs_src, rhs_src, note))
                emitted = True
        if not emitted:
            missing = sorted({k.partition(":")[0] for k in lhs_keys + rhs_keys}
                             - set(est.measured) - set(est.analytic))
            rows.append(InequalityRow(name, None, None, None, cfg.tolerance,
                                      None, "none", "none",
                                      "missing: " + ", ".join(missing)))
    return InequalityReport(tuple(rows))
