"""Brute-force reference implementations.

Everything here trades speed for obviousness: plain loops over the distance
matrix and itertools over subsets. Tests compare the package's optimized
paths against these on small instances, so a bug would have to appear in two
independent implementations at once to slip through.
"""

from __future__ import annotations

import itertools

import numpy as np


def dist_matrix(space) -> np.ndarray:
    n = space.point_count
    return np.array([[space.dist(i, j) for j in range(n)] for i in range(n)])


def brute_dist_to_complement(D: np.ndarray, member: np.ndarray, x: int) -> float:
    """min over y outside the member of d(x, y); inf when it covers everything."""
    outside = ~member
    if not outside.any():
        return np.inf
    return float(D[x, outside].min())


def brute_lebesgue(D: np.ndarray, masks: np.ndarray) -> float:
    """delta(U) = min over x of max over members containing x of d(x, X \\ U)."""
    n = D.shape[0]
    worst = np.inf
    for x in range(n):
        best = 0.0
        for member in masks:
            if member[x]:
                best = max(best, brute_dist_to_complement(D, member, x))
        worst = min(worst, best)
    return worst


def brute_min_subcover_size(masks: np.ndarray) -> int:
    """Smallest covering subfamily, by trying every subset size in order."""
    m = len(masks)
    for size in range(1, m + 1):
        for idx in itertools.combinations(range(m), size):
            if np.logical_or.reduce(masks[list(idx)]).all():
                return size
    raise AssertionError("family does not cover")


def brute_best_delta_min_subcover(D: np.ndarray, masks: np.ndarray) -> float:
    """max of delta(W) over all minimum-size subcovers W."""
    m = len(masks)
    size = brute_min_subcover_size(masks)
    best = -np.inf
    for idx in itertools.combinations(range(m), size):
        sel = masks[list(idx)]
        if np.logical_or.reduce(sel).all():
            best = max(best, brute_lebesgue(D, sel))
    return best


def brute_bowen_dist(D: np.ndarray, image: np.ndarray, n: int,
                     x: int, y: int) -> float:
    """max over 0 <= k < n of d(f^k x, f^k y)."""
    best = 0.0
    for _ in range(n):
        best = max(best, float(D[x, y]))
        x, y = int(image[x]), int(image[y])
    return best


def brute_max_separated(D: np.ndarray, image: np.ndarray, n: int,
                        eps: float) -> int:
    """Largest S with pairwise Bowen distance > eps, by subset enumeration."""
    pts = D.shape[0]
    sep = np.zeros((pts, pts), dtype=bool)
    for x in range(pts):
        for y in range(x + 1, pts):
            sep[x, y] = sep[y, x] = brute_bowen_dist(D, image, n, x, y) > eps
    best = 1 if pts else 0
    for size in range(2, pts + 1):
        found = False
        for idx in itertools.combinations(range(pts), size):
            if all(sep[a, b] for a, b in itertools.combinations(idx, 2)):
                found = True
                break
        if not found:
            break
        best = size
    return best


def brute_pullback(masks: np.ndarray, image: np.ndarray) -> np.ndarray:
    """f^-1(U) member by member: x lands in the member iff f(x) does."""
    return np.stack([member[image] for member in masks])


def brute_join(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """All nonempty pairwise intersections, duplicates kept."""
    rows = [a & b for a in u for b in v if (a & b).any()]
    return np.stack(rows)


def brute_iterated(masks: np.ndarray, image: np.ndarray, n: int) -> np.ndarray:
    cur = masks
    pull = masks
    for _ in range(1, n):
        pull = brute_pullback(pull, image)
        cur = brute_join(cur, pull)
    return cur


def brute_covering_number(D: np.ndarray, gamma: float) -> int:
    """N(gamma): fewest open gamma-balls covering the space."""
    balls = np.stack([D[i] < gamma for i in range(D.shape[0])])
    return brute_min_subcover_size(balls)
