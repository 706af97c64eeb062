"""Maps, pullbacks, iterated covers and orbit-distance machinery."""

import math

import numpy as np
import pytest

from lebdyn import (
    Cover,
    DynMap,
    PointSet,
    UsageError,
    bowen_dist,
    circle_grid,
    delta_sequence,
    eventual_image,
    is_finer,
    iterate_rate,
    iterated_cover,
    lebesgue_number,
    lipschitz_constant,
    map_power,
    max_separated,
    preimage_gap,
    pullback_cover,
)
from lebdyn.dynamics import bowen_block_length

from conftest import random_cover, random_map, random_space
from oracles import (
    brute_bowen_dist,
    brute_iterated,
    brute_lebesgue,
    brute_max_separated,
    brute_pullback,
    dist_matrix,
)


def test_dynmap_validation():
    f = DynMap([1, 2, 0])
    assert f.point_count == 3
    assert f.apply(0) == 1
    with pytest.raises(UsageError):
        DynMap([0, 3], 2)
    with pytest.raises(UsageError):
        DynMap([0, -1])


def test_map_power_composes():
    f = DynMap([1, 2, 3, 0])
    assert list(map_power(f, 2).image) == [2, 3, 0, 1]
    assert map_power(f, 0) == DynMap([0, 1, 2, 3])
    assert map_power(f, 4) == DynMap([0, 1, 2, 3])


@pytest.mark.parametrize("seed", range(10))
def test_pullback_matches_brute_force(seed):
    rng = np.random.default_rng(500 + seed)
    space = random_space(rng, max_pts=20)
    cov = random_cover(rng, space)
    f = random_map(rng, space.point_count)
    got = pullback_cover(space, f, cov)
    want = brute_pullback(cov.masks, f.image)
    keep = want.any(axis=1)
    assert {tuple(r) for r in got.masks} == {tuple(r) for r in want[keep]}


@pytest.mark.parametrize("seed", range(10))
def test_iterated_cover_matches_brute_force(seed):
    rng = np.random.default_rng(600 + seed)
    space = random_space(rng, max_pts=15)
    cov = random_cover(rng, space, max_members=5)
    f = random_map(rng, space.point_count, surjective=True)
    n = int(rng.integers(2, 5))
    got = iterated_cover(space, f, cov, n)
    want = brute_iterated(cov.masks, f.image, n)
    keep = want.any(axis=1)
    assert {tuple(r) for r in got.masks} == {tuple(r) for r in want[keep]}


@pytest.mark.parametrize("seed", range(15))
def test_delta_sequence_pullback_equals_direct(seed):
    rng = np.random.default_rng(700 + seed)
    space = random_space(rng, max_pts=25)
    cov = random_cover(rng, space, max_members=6)
    f = random_map(rng, space.point_count, surjective=True)
    fast = delta_sequence(space, f, cov, 4, method="pullback")
    slow = delta_sequence(space, f, cov, 4, method="direct")
    assert np.array_equal(fast.values, slow.values)
    assert np.array_equal(fast.capped, slow.capped)


def test_delta_sequence_is_nonincreasing():
    rng = np.random.default_rng(8)
    space = random_space(rng, max_pts=30)
    cov = random_cover(rng, space)
    f = random_map(rng, space.point_count)
    seq = delta_sequence(space, f, cov, 5)
    assert (np.diff(seq.values) <= 1e-15).all()
    assert seq.horizon == 5
    assert np.array_equal(seq.n_values, np.arange(1, 6))


def test_delta_sequence_a_n_definition():
    g = circle_grid(8)
    cov = Cover([(0, 1, 2, 3), (3, 4, 5, 6, 7), (6, 7, 0, 1)], 8)
    f = DynMap([(2 * i) % 8 for i in range(8)])
    seq = delta_sequence(g, f, cov, 3)
    for i in range(3):
        assert seq.a_n[i] == pytest.approx(-math.log(seq.values[i]) / (i + 1))


def test_identity_map_delta_sequence_constant():
    g = circle_grid(12)
    cov = Cover([tuple(range(0, 7)), tuple(range(6, 12)) + (0,)], 12)
    ident = DynMap(list(range(12)))
    seq = delta_sequence(g, ident, cov, 6)
    assert (seq.values == seq.values[0]).all()


@pytest.mark.parametrize("seed", range(10))
def test_bowen_dist_matches_brute_force(seed):
    rng = np.random.default_rng(900 + seed)
    space = random_space(rng, max_pts=15)
    f = random_map(rng, space.point_count)
    D = dist_matrix(space)
    n = int(rng.integers(1, 5))
    for _ in range(10):
        x, y = rng.integers(0, space.point_count, size=2)
        assert bowen_dist(space, f, n, int(x), int(y)) == pytest.approx(
            brute_bowen_dist(D, f.image, n, int(x), int(y)), rel=1e-12)


def test_bowen_dist_n1_is_plain_distance():
    rng = np.random.default_rng(1)
    space = random_space(rng, max_pts=10)
    f = random_map(rng, space.point_count)
    assert bowen_dist(space, f, 1, 0, 1) == pytest.approx(space.dist(0, 1))


@pytest.mark.parametrize("seed", range(12))
def test_max_separated_matches_brute_force(seed):
    rng = np.random.default_rng(1100 + seed)
    space = random_space(rng, max_pts=10, min_pts=5)
    f = random_map(rng, space.point_count)
    D = dist_matrix(space)
    n = int(rng.integers(1, 4))
    eps = float(rng.uniform(0.2, 0.8)) * space.diameter
    rep = max_separated(space, f, n, eps, mode="exact")
    assert rep.exact
    assert rep.count == brute_max_separated(D, f.image, n, eps)
    # the witness really is eps-separated
    ids = list(rep.points.ids)
    for i, x in enumerate(ids):
        for y in ids[i + 1:]:
            assert bowen_dist(space, f, n, x, y) > eps


def test_greedy_separated_is_lower_bound():
    rng = np.random.default_rng(21)
    space = random_space(rng, max_pts=12, min_pts=6)
    f = random_map(rng, space.point_count)
    eps = space.diameter / 3
    exact = max_separated(space, f, 2, eps, mode="exact")
    greedy = max_separated(space, f, 2, eps, mode="greedy")
    assert not greedy.exact
    assert greedy.count <= exact.count


def test_lipschitz_constant_definition():
    rng = np.random.default_rng(17)
    space = random_space(rng, max_pts=15)
    f = random_map(rng, space.point_count)
    D = dist_matrix(space)
    n = space.point_count
    want = 0.0
    for x in range(n):
        for y in range(x + 1, n):
            want = max(want, D[f.image[x], f.image[y]] / D[x, y])
    assert lipschitz_constant(space, f) == pytest.approx(want, rel=1e-12)


def test_lipschitz_constant_of_isometry_is_one():
    g = circle_grid(10)
    rot = DynMap([(i + 3) % 10 for i in range(10)])
    assert lipschitz_constant(g, rot) == pytest.approx(1.0)


def test_iterate_rate_is_min_over_n():
    g = circle_grid(64)
    f = DynMap([(2 * i) % 64 for i in range(64)])
    ir = iterate_rate(g, f, 4)
    logs = [math.log(lipschitz_constant(g, map_power(f, n))) / n
            for n in range(1, 5)]
    assert ir.l_estimate == pytest.approx(min(logs), rel=1e-12)
    assert ir.l_estimate == pytest.approx(math.log(2), rel=1e-12)
    assert len(ir.per_n) == 4


def test_eventual_image():
    # 0 -> 1 -> 2 -> 2, 3 -> 2: everything funnels into the fixed point
    f = DynMap([1, 2, 2, 2])
    space = circle_grid(4)
    assert eventual_image(space, f).ids == (2,)
    perm = DynMap([1, 0, 3, 2])
    assert eventual_image(space, perm).ids == (0, 1, 2, 3)


def test_preimage_gap():
    g = circle_grid(8)
    f = DynMap([(2 * i) % 8 for i in range(8)])
    # f^-1(0) = {0, 4}, f^-1(4) = {2, 6}; nearest cross pair is 2/8 apart
    v = preimage_gap(g, f, 1, 0, 4)
    assert not v.infinite
    assert v.value == pytest.approx(2 / 8)
    assert preimage_gap(g, f, 0, 0, 4).value == pytest.approx(4 / 8)
    # 1 has no preimage under doubling on this grid
    assert preimage_gap(g, f, 1, 1, 0).infinite


def test_bowen_block_length():
    g = circle_grid(8)
    cov = Cover([(0, 1, 2, 3), (3, 4, 5, 6, 7), (6, 7, 0, 1)], 8)
    ident = DynMap(list(range(8)))
    rep = bowen_block_length(g, ident, cov, PointSet((0, 1)), 5)
    assert rep.capped and rep.length == 5
    f = DynMap([(i + 1) % 8 for i in range(8)])
    rep = bowen_block_length(g, f, cov, PointSet((0, 1, 2)), 10)
    # {0,1,2} -> {1,2,3} still fit the first member; {2,3,4} fits nothing
    assert not rep.capped
    assert rep.length == 2


def test_iterated_cover_is_finer_each_step():
    rng = np.random.default_rng(33)
    space = random_space(rng, max_pts=12)
    cov = random_cover(rng, space, max_members=4)
    f = random_map(rng, space.point_count, surjective=True)
    prev = None
    for n in range(1, 4):
        cur = iterated_cover(space, f, cov, n)
        if prev is not None:
            assert is_finer(cur, prev)
        prev = cur


def test_delta_of_iterated_cover_monotone_under_refinement():
    rng = np.random.default_rng(55)
    space = random_space(rng, max_pts=20)
    cov = random_cover(rng, space, max_members=5)
    f = random_map(rng, space.point_count, surjective=True)
    D = dist_matrix(space)
    deltas = []
    for n in range(1, 4):
        it = iterated_cover(space, f, cov, n)
        deltas.append(brute_lebesgue(D, it.masks))
    assert deltas[0] >= deltas[1] >= deltas[2]
    seq = delta_sequence(space, f, cov, 3)
    assert np.allclose(seq.values, deltas, rtol=1e-12)
