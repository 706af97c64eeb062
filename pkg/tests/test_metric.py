"""Metric-space core: construction, validation, balls, covering numbers."""

import math

import numpy as np
import pytest

from lebdyn import (
    PointSet,
    UsageError,
    ball,
    box_dim_estimate,
    circle_grid,
    covering_number,
    dist_to_complement,
    scale_metric,
    space_from_matrix,
    space_from_points,
    validate_space,
)

from conftest import random_space
from oracles import brute_covering_number, dist_matrix


def test_circle_grid_distances():
    g = circle_grid(8)
    assert g.point_count == 8
    assert g.dist(0, 1) == pytest.approx(1 / 8)
    assert g.dist(0, 4) == pytest.approx(1 / 2)
    # wraparound beats the straight path
    assert g.dist(0, 7) == pytest.approx(1 / 8)
    assert g.diameter == pytest.approx(1 / 2)
    assert g.min_gap == pytest.approx(1 / 8)


def test_matrix_and_points_agree():
    rng = np.random.default_rng(7)
    pts = rng.random((12, 2))
    s1 = space_from_points(pts, metric="euclidean")
    s2 = space_from_matrix(dist_matrix(s1))
    for x in range(12):
        assert np.allclose(s1.dist_row(x), s2.dist_row(x))


def test_scale_metric_scales_everything():
    rng = np.random.default_rng(3)
    space = random_space(rng, max_pts=15)
    scaled = scale_metric(space, 2.5)
    assert scaled.diameter == pytest.approx(2.5 * space.diameter)
    assert scaled.min_gap == pytest.approx(2.5 * space.min_gap)
    x, y = 0, space.point_count - 1
    assert scaled.dist(x, y) == pytest.approx(2.5 * space.dist(x, y))


def test_scale_metric_rejects_nonpositive():
    space = circle_grid(5)
    with pytest.raises(UsageError):
        scale_metric(space, 0.0)
    with pytest.raises(UsageError):
        scale_metric(space, -1.0)


def test_validate_space_catches_broken_axioms():
    D = np.array([[0.0, 1.0, 3.0],
                  [1.0, 0.0, 1.0],
                  [3.0, 1.0, 0.0]])
    # 3 > 1 + 1 breaks the triangle inequality
    space = space_from_matrix(D, validate=False)
    violations = validate_space(space)
    assert any(v.axiom == "triangle" for v in violations)

    with pytest.raises(UsageError):
        space_from_matrix(D)

    bad = np.array([[0.0, -1.0], [-1.0, 0.0]])
    with pytest.raises(UsageError):
        space_from_matrix(bad)


def test_validate_space_accepts_good_spaces():
    rng = np.random.default_rng(11)
    for seed in range(5):
        space = random_space(np.random.default_rng(seed), max_pts=20)
        assert validate_space(space) == []
    assert rng is not None


def test_ball_is_strictly_open():
    g = circle_grid(8)
    b = ball(g, 0, 1 / 8)
    assert b.ids == (0,)
    b = ball(g, 0, 1 / 8 + 1e-12)
    assert b.ids == (0, 1, 7)


def test_dist_to_complement():
    g = circle_grid(8)
    s = PointSet((0, 1, 7))
    v = dist_to_complement(g, s, 0)
    assert not v.infinite
    # nearest outside point is 2 (or 6), one step past the set edge
    assert v.value == pytest.approx(2 / 8)
    whole = PointSet(range(8))
    assert dist_to_complement(g, whole, 3).infinite


@pytest.mark.parametrize("seed", range(12))
def test_covering_number_matches_brute_force(seed):
    rng = np.random.default_rng(200 + seed)
    space = random_space(rng, max_pts=14, min_pts=5)
    D = dist_matrix(space)
    gamma = float(rng.uniform(0.3, 1.2)) * space.diameter / 2 + space.min_gap
    got = covering_number(space, gamma, mode="exact")
    assert got.exact
    assert got.count == brute_covering_number(D, gamma)
    # the witness actually covers
    union = np.zeros(space.point_count, dtype=bool)
    for c in got.centers:
        union |= D[c] < gamma
    assert union.all()


def test_greedy_covering_number_is_upper_bound():
    rng = np.random.default_rng(77)
    space = random_space(rng, max_pts=18, min_pts=8)
    gamma = space.diameter / 3
    exact = covering_number(space, gamma, mode="exact")
    greedy = covering_number(space, gamma, mode="greedy")
    assert not greedy.exact
    assert greedy.count >= exact.count


def test_box_dim_of_interval_grid_is_about_one():
    pts = np.linspace(0.0, 1.0, 257)[:, None]
    space = space_from_points(pts, metric="max")
    dim = box_dim_estimate(space, [1 / 8, 1 / 16, 1 / 32, 1 / 64])
    assert 0.9 <= dim.slope <= 1.1
    counts = [c for _, c, _ in dim.per_scale]
    # per_scale runs finest gamma first; coarser scales never need more balls
    assert counts == sorted(counts, reverse=True)


def test_box_dim_input_validation():
    space = circle_grid(16)
    with pytest.raises(UsageError):
        box_dim_estimate(space, [0.1, 0.2])
    with pytest.raises(UsageError):
        box_dim_estimate(space, [0.1, 0.2, 0.2])
    with pytest.raises(UsageError):
        box_dim_estimate(space, [0.1, 0.2, -0.3])


def test_duplicate_points_fail_validation():
    pts = np.array([[0.0], [0.5], [0.5]])
    space = space_from_points(pts)
    violations = validate_space(space)
    assert any(v.axiom == "distinct_points" for v in violations)


def test_dist_row_matches_dist():
    rng = np.random.default_rng(5)
    space = random_space(rng, max_pts=10)
    for x in range(space.point_count):
        row = space.dist_row(x)
        assert row[x] == 0.0
        for y in range(space.point_count):
            assert row[y] == pytest.approx(space.dist(x, y))
            assert space.dist(x, y) == pytest.approx(space.dist(y, x))
