"""Rate estimators, entropy counters and the inequality checker."""

import math

import numpy as np
import pytest

from lebdyn import (
    DynMap,
    EstimateSet,
    NumericError,
    UsageError,
    VerifyConfig,
    circle_grid,
    cover_entropy,
    delta_sequence,
    hl_delta_estimate,
    hl_estimates,
    iterated_cover,
    max_separated,
    mesh_cover,
    min_subcover,
    prefix_max_rate_check,
    rate_bounds,
    sep_entropy,
    verify_inequalities,
)
from lebdyn.dynamics import RateSequence


def geometric_sequence(c: float, rho: float, N: int) -> RateSequence:
    values = c * rho ** np.arange(1, N + 1, dtype=np.float64)
    return RateSequence("geo", values, np.zeros(N, dtype=bool))


def test_rate_bounds_exact_on_geometric_decay():
    seq = geometric_sequence(0.3, 0.5, 8)
    est = rate_bounds(seq)
    assert est.method == "anchored"
    assert est.window == (5, 8)
    assert est.lower_rate == pytest.approx(math.log(2), rel=1e-12)
    assert est.upper_rate == pytest.approx(math.log(2), rel=1e-12)
    assert est.slope == pytest.approx(math.log(2), rel=1e-12)


def test_rate_bounds_scale_invariance():
    seq = geometric_sequence(0.3, 0.7, 10)
    scaled = RateSequence("geo", 13.7 * seq.values, seq.capped)
    a = rate_bounds(seq, window=(4, 10))
    b = rate_bounds(scaled, window=(4, 10))
    # the anchor cancels the scale; only log rounding is left
    assert a.lower_rate == pytest.approx(b.lower_rate, rel=1e-12)
    assert a.upper_rate == pytest.approx(b.upper_rate, rel=1e-12)
    assert a.slope == pytest.approx(b.slope, rel=1e-12)


def test_rate_bounds_brackets_slope():
    rng = np.random.default_rng(3)
    values = np.exp(-np.cumsum(rng.uniform(0.2, 1.5, size=12)))
    seq = RateSequence("mix", values, np.zeros(12, dtype=bool))
    est = rate_bounds(seq, window=(3, 12))
    assert est.lower_rate <= est.slope <= est.upper_rate
    assert est.lower_rate < est.upper_rate


def test_rate_bounds_window_validation():
    seq = geometric_sequence(1.0, 0.5, 6)
    with pytest.raises(UsageError):
        rate_bounds(seq, window=(4, 4))
    with pytest.raises(UsageError):
        rate_bounds(seq, window=(0, 3))
    with pytest.raises(UsageError):
        rate_bounds(seq, window=(3, 9))
    capped = RateSequence("c", seq.values, np.array([0, 0, 0, 0, 1, 1], bool))
    with pytest.raises(UsageError):
        rate_bounds(capped, window=(3, 6))
    all_capped = RateSequence("c", seq.values, np.ones(6, dtype=bool))
    with pytest.raises(UsageError):
        rate_bounds(all_capped)


def test_prefix_max_rate_check():
    v = 0.4 * np.arange(1, 13, dtype=np.float64)
    out = prefix_max_rate_check(v)
    assert out.seq_rate == pytest.approx(0.4, rel=1e-12)
    assert out.prefix_rate == pytest.approx(0.4, rel=1e-12)
    dip = v.copy()
    dip[7] = 0.1
    out = prefix_max_rate_check(dip, window=(6, 12))
    assert out.prefix_rate >= out.seq_rate


def doubling_system(g: int):
    space = circle_grid(g)
    f = DynMap([(2 * i) % g for i in range(g)])
    return space, f


def test_cover_entropy_counts_match_direct_min_subcovers():
    space, f = doubling_system(16)
    cov = mesh_cover(space, 3 / 16)
    ce = cover_entropy(space, f, cov, 4, mode="exact")
    assert ce.exact
    for n, count, rate, exact in ce.per_n:
        it = iterated_cover(space, f, cov, n)
        assert count == min_subcover(space, it, mode="exact").size
        assert rate == pytest.approx(math.log(count) / n, rel=1e-12)
        assert exact


def test_sep_entropy_counts_match_direct_max_separated():
    space, f = doubling_system(16)
    se = sep_entropy(space, f, [3 / 16], 4, mode="exact")
    (eps, estimate, exact, window) = se.per_eps[0]
    assert eps == pytest.approx(3 / 16)
    assert exact
    for row_eps, n, s_n, rate, row_exact in se.table:
        rep = max_separated(space, f, n, row_eps, mode="exact")
        assert s_n == rep.count
        assert rate == pytest.approx(math.log(s_n) / n, rel=1e-12)
    lo, hi = window
    assert 1 <= lo < hi <= 4


def test_sep_entropy_grows_on_expanding_map():
    space, f = doubling_system(32)
    se = sep_entropy(space, f, [4 / 32], 4, mode="exact")
    counts = [s for _, _, s, _, _ in se.table]
    assert counts == sorted(counts)
    assert counts[-1] > counts[0]


def test_hl_estimates_on_doubling_grid():
    space, f = doubling_system(64)
    hl = hl_estimates(space, f, (1 / 8, 1 / 16), 6)
    assert len(hl.per_radius) == 2
    assert hl.lower <= hl.upper
    # doubling decays the Lebesgue number by a factor 2 each step
    assert hl.lower == pytest.approx(math.log(2), abs=0.2)


def test_hl_estimates_needs_two_radii():
    space, f = doubling_system(32)
    with pytest.raises(UsageError):
        hl_estimates(space, f, (1 / 8,), 6)
    with pytest.raises(UsageError):
        hl_estimates(space, f, (1 / 8, 1 / 8), 6)


def test_hl_estimates_rejects_resolution_floor_radii():
    space, f = doubling_system(16)
    # balls below the grid step are singletons; delta pins to the min gap
    with pytest.raises(UsageError):
        hl_estimates(space, f, (1 / 64, 1 / 128), 6)


def test_hl_delta_estimate_runs_on_small_grid():
    space, f = doubling_system(16)
    cov = mesh_cover(space, 3 / 16)
    est = hl_delta_estimate(space, f, cov, 4)
    assert est.lower_rate <= est.slope <= est.upper_rate


def full_estimate_set() -> EstimateSet:
    return EstimateSet(
        measured={"dimb": 1.0, "h_l_lower": 0.69, "h_l_upper": 0.70,
                  "h_l_delta": 0.69, "h_sep": 0.66, "h_cover": 0.69,
                  "l": 0.693, "ln_L": 0.693},
        analytic={"dimb": 1.0, "dimh": 1.0, "h": 0.6931, "l": 0.6931,
                  "h_l_lower": 0.6931, "h_l_upper": 0.6931, "ln_L": 0.6931},
        system="test")


def test_verify_inequalities_all_pass_on_consistent_set():
    rep = verify_inequalities(full_estimate_set())
    assert rep.all_pass
    assert rep.failed == ()
    # every provenance pairing resolved: no missing-input rows
    assert all(r.lhs_src != "none" for r in rep.rows)


def test_verify_inequalities_names_failing_rows():
    est = full_estimate_set()
    est.analytic["h"] = 5.0
    rep = verify_inequalities(est)
    assert not rep.all_pass
    assert "boxdim_lower_rate_entropy[measured/analytic]" in rep.failed
    for r in rep.rows:
        if r.passed is False:
            assert r.slack < -r.tol


def test_verify_inequalities_tristate_skip_on_one_sided_bound():
    est = EstimateSet(measured={"dimb": 1.0, "h_l_lower": 0.1, "h_sep": 0.9},
                      bound_tags={"h_sep": "upper"})
    rep = verify_inequalities(est)
    row = next(r for r in rep.rows if r.name == "boxdim_lower_rate_entropy"
               and r.lhs_src == "measured" and r.rhs_src == "measured")
    assert row.passed is None
    assert "one-sided" in row.note
    assert rep.all_pass  # skips never fail the report


def test_verify_inequalities_missing_inputs_are_skipped():
    rep = verify_inequalities(EstimateSet())
    assert rep.all_pass
    assert all(r.passed is None for r in rep.rows)
    assert all(r.note.startswith("missing") for r in rep.rows)


def test_verify_analytic_rows_use_tight_tolerance():
    est = EstimateSet(analytic={"h_l_lower": 0.5, "h_l_upper": 0.5 - 1e-8})
    rep = verify_inequalities(est, VerifyConfig())
    row = next(r for r in rep.rows if r.name == "rate_order"
               and r.lhs_src == "analytic")
    assert row.passed is False
    assert row.tol == pytest.approx(1e-9)


def test_verify_tolerance_override():
    est = EstimateSet(measured={"h_l_lower": 0.5, "h_l_upper": 0.4})
    tight = verify_inequalities(est, VerifyConfig(tolerance=0.01))
    loose = verify_inequalities(est, VerifyConfig(tolerance=0.5))
    name = "rate_order[measured/measured]"
    assert name in tight.failed
    assert name not in loose.failed


def test_verify_dimh_falls_back_to_analytic_on_measured_side():
    est = EstimateSet(measured={"l": 0.7, "h_sep": 0.6},
                      analytic={"dimh": 1.0})
    rep = verify_inequalities(est)
    row = next(r for r in rep.rows if r.name == "hausdorff_lipschitz_entropy"
               and r.lhs_src == "measured" and r.rhs_src == "measured")
    assert row.lhs == pytest.approx(0.7)
    assert row.passed is True


def test_negative_ln_l_is_clamped_in_cap_rows():
    est = EstimateSet(measured={"ln_L": -0.5, "h_l_upper": 0.0})
    rep = verify_inequalities(est)
    row = next(r for r in rep.rows if r.name == "upper_rate_cap"
               and r.lhs_src == "measured" and r.rhs_src == "measured")
    # a contraction gives ln L < 0; the cap row compares max(ln L, 0)
    assert row.lhs == 0.0
    assert row.passed is True


def test_delta_sequence_feeds_rate_bounds_end_to_end():
    # grid fine enough that the window stays above the resolution floor
    space, f = doubling_system(512)
    cov = mesh_cover(space, 1 / 8)
    seq = delta_sequence(space, f, cov, 6)
    est = rate_bounds(seq)
    assert est.slope == pytest.approx(math.log(2), abs=0.05)
