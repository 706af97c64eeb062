"""Covers and Lebesgue numbers, checked against subset-enumeration oracles."""

import math

import numpy as np
import pytest

from lebdyn import (
    Cover,
    UsageError,
    circle_grid,
    cover_diam,
    delta_minimal_subcovers,
    is_finer,
    join,
    lebesgue_at_point,
    lebesgue_number,
    mesh_cover,
    min_subcover,
    validate_cover,
)
from lebdyn.cover_calc import dedup_masks

from conftest import random_cover, random_space
from oracles import (
    brute_best_delta_min_subcover,
    brute_join,
    brute_lebesgue,
    brute_min_subcover_size,
    dist_matrix,
)


def test_cover_constructor_sorts_and_validates():
    cov = Cover([(2, 0), (1, 2)], 3)
    assert cov.members[0].ids == (0, 2)
    with pytest.raises(UsageError):
        Cover([(0, 5)], 3)
    with pytest.raises(UsageError):
        Cover([()], 3)


def test_from_masks_round_trip():
    masks = np.array([[True, True, False], [False, True, True]])
    cov = Cover.from_masks(masks)
    assert cov.point_count == 3
    assert [m.ids for m in cov.members] == [(0, 1), (1, 2)]


def test_validate_cover_reports_uncovered_points():
    g = circle_grid(5)
    cov = Cover([(0, 1), (2, 3)], 5)
    violations = validate_cover(g, cov)
    assert any(4 in v.points for v in violations)
    good = Cover([(0, 1, 2), (3, 4)], 5)
    assert validate_cover(g, good) == []


# circle_grid(8), members {0..3} and {3..7}: each seam point (0, 3, 7) sits
# one step from the complement of its only deep member, so delta = 1/8;
# interior point 1 is two steps from {4..7} via 7
def test_lebesgue_number_hand_value():
    g = circle_grid(8)
    cov = Cover([(0, 1, 2, 3), (3, 4, 5, 6, 7)], 8)
    rep = lebesgue_number(g, cov)
    assert not rep.capped
    assert rep.delta == pytest.approx(1 / 8)
    assert lebesgue_at_point(g, cov, 0).value == pytest.approx(1 / 8)
    assert lebesgue_at_point(g, cov, 1).value == pytest.approx(2 / 8)


@pytest.mark.parametrize("seed", range(30))
def test_lebesgue_number_matches_brute_force(seed):
    rng = np.random.default_rng(1000 + seed)
    space = random_space(rng, max_pts=25)
    cov = random_cover(rng, space)
    D = dist_matrix(space)
    rep = lebesgue_number(space, cov)
    assert rep.delta == pytest.approx(brute_lebesgue(D, cov.masks), rel=1e-12)
    # the reported argmin attains the minimum
    v = lebesgue_at_point(space, cov, rep.argmin)
    assert v.value == pytest.approx(rep.delta, rel=1e-12)


def test_lebesgue_per_point_agrees_with_scalar():
    rng = np.random.default_rng(42)
    space = random_space(rng, max_pts=20)
    cov = random_cover(rng, space)
    rep = lebesgue_number(space, cov, per_point=True)
    assert rep.per_point is not None
    assert float(rep.per_point.min()) == pytest.approx(rep.delta, rel=1e-12)
    for x in range(space.point_count):
        assert rep.per_point[x] == pytest.approx(
            lebesgue_at_point(space, cov, x).value, rel=1e-12)


def test_whole_space_member_caps_delta_at_diameter():
    g = circle_grid(6)
    cov = Cover([tuple(range(6)), (0, 1)], 6)
    rep = lebesgue_number(g, cov)
    assert rep.capped
    assert rep.delta == g.diameter
    assert rep.argmin is None
    assert lebesgue_at_point(g, cov, 0).infinite


@pytest.mark.parametrize("seed", range(10))
def test_join_matches_brute_force(seed):
    rng = np.random.default_rng(2000 + seed)
    space = random_space(rng, max_pts=15)
    u = random_cover(rng, space, max_members=5)
    v = random_cover(rng, space, max_members=5)
    got = join(u, v)
    want = brute_join(u.masks, v.masks)
    got_set = {tuple(row) for row in got.masks}
    want_set = {tuple(row) for row in want}
    assert got_set == want_set


def test_join_is_finer_than_both_factors():
    rng = np.random.default_rng(9)
    space = random_space(rng, max_pts=12)
    u = random_cover(rng, space, max_members=4)
    v = random_cover(rng, space, max_members=4)
    w = join(u, v)
    assert is_finer(w, u)
    assert is_finer(w, v)
    assert is_finer(u, u)


def test_is_finer_detects_non_refinement():
    u = Cover([(0, 1), (2,)], 3)
    v = Cover([(0,), (1, 2)], 3)
    assert not is_finer(u, v)


def test_cover_diam():
    g = circle_grid(8)
    cov = Cover([(0, 1, 2), (4,), (3, 5, 6, 7)], 8)
    # member {3,5,6,7}: 3 to 7 is 4/8 around either way, the max pair
    assert cover_diam(g, cov) == pytest.approx(4 / 8)
    singletons = Cover([(i,) for i in range(8)], 8)
    assert cover_diam(g, singletons) == 0.0


def test_mesh_cover_covers_and_respects_radius():
    rng = np.random.default_rng(13)
    space = random_space(rng, max_pts=30)
    r = space.diameter / 3
    cov = mesh_cover(space, r)
    assert validate_cover(space, cov) == []
    assert cover_diam(space, cov) <= 2 * r
    rep = lebesgue_number(space, cov)
    assert rep.delta > 0


def test_dedup_masks():
    masks = np.array([[1, 0], [1, 0], [0, 1]], dtype=bool)
    out = dedup_masks(masks)
    assert out.shape == (2, 2)


@pytest.mark.parametrize("seed", range(20))
def test_min_subcover_exact_matches_brute_force(seed):
    rng = np.random.default_rng(3000 + seed)
    space = random_space(rng, max_pts=18)
    cov = random_cover(rng, space, max_members=7)
    rep = min_subcover(space, cov, mode="exact")
    assert rep.exact
    assert rep.size == brute_min_subcover_size(cov.masks)
    assert validate_cover(space, rep.witness) == []


def test_greedy_subcover_is_upper_bound():
    rng = np.random.default_rng(31)
    space = random_space(rng, max_pts=20)
    cov = random_cover(rng, space, max_members=8)
    exact = min_subcover(space, cov, mode="exact")
    greedy = min_subcover(space, cov, mode="greedy")
    assert greedy.size >= exact.size
    assert validate_cover(space, greedy.witness) == []


@pytest.mark.parametrize("seed", range(15))
def test_delta_minimal_subcovers_matches_brute_force(seed):
    rng = np.random.default_rng(4000 + seed)
    space = random_space(rng, max_pts=14)
    cov = random_cover(rng, space, max_members=6)
    rep = delta_minimal_subcovers(space, cov)
    D = dist_matrix(space)
    assert rep.value == pytest.approx(
        brute_best_delta_min_subcover(D, cov.masks), rel=1e-12)
    # no subcover can beat the full family
    assert rep.value <= lebesgue_number(space, cov).delta + 1e-15


def test_join_rejects_mismatched_point_counts():
    u = Cover([(0,)], 1)
    v = Cover([(0, 1)], 2)
    with pytest.raises(UsageError):
        join(u, v)
