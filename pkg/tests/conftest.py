"""Shared fixtures and randomized-instance generators.

Expensive system bundles are session scoped so the behavioral tests and the
acceptance suite compute them once. Random instances are always built from an
explicit seed; a failure report names the seed, so every run is replayable.
"""

from __future__ import annotations

import numpy as np
import pytest

from lebdyn import (
    Cover,
    DynMap,
    SystemSpec,
    estimate_bundle,
    generate_system,
    scale_metric,
    space_from_matrix,
    space_from_points,
)


def random_space(rng: np.random.Generator, max_pts: int = 40,
                 min_pts: int = 4):
    """A small space in one of the supported flavors, distances all distinct
    enough to keep min_gap positive."""
    n = int(rng.integers(min_pts, max_pts + 1))
    kind = rng.integers(0, 4)
    dim = int(rng.integers(1, 4))
    pts = rng.random((n, dim))
    # spread points so no pair collides
    pts += rng.normal(scale=1e-3, size=pts.shape)
    if kind == 0:
        return space_from_points(pts, metric="euclidean")
    if kind == 1:
        wraps = [bool(rng.integers(0, 2)) for _ in range(dim)]
        return space_from_points(np.mod(pts, 1.0), metric="max", wraps=wraps)
    if kind == 2:
        base = space_from_points(pts, metric="euclidean")
        return scale_metric(base, float(rng.uniform(0.2, 5.0)))
    D = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2)
    return space_from_matrix(D, validate=False)


def random_cover(rng: np.random.Generator, space, max_members: int = 8,
                 allow_whole: bool = False) -> Cover:
    """Random covering family; members trimmed away from the whole space
    unless asked for, uncovered points patched into random members."""
    n = space.point_count
    m = int(rng.integers(2, max_members + 1))
    masks = rng.random((m, n)) < rng.uniform(0.2, 0.7)
    for i in range(m):
        if not masks[i].any():
            masks[i, rng.integers(0, n)] = True
        if masks[i].all() and not allow_whole:
            masks[i, rng.integers(0, n)] = False
    uncovered = np.flatnonzero(~masks.any(axis=0))
    for x in uncovered:
        masks[rng.integers(0, m), x] = True
    return Cover.from_masks(masks)


def random_map(rng: np.random.Generator, n: int,
               surjective: bool = False) -> DynMap:
    if surjective:
        image = rng.permutation(n)
    else:
        image = rng.integers(0, n, size=n)
    return DynMap(image.astype(np.int64))


@pytest.fixture(scope="session")
def doubling_bundle():
    return generate_system(SystemSpec("doubling", {}))


@pytest.fixture(scope="session")
def doubling_estimates(doubling_bundle):
    return estimate_bundle(doubling_bundle)


@pytest.fixture(scope="session")
def cylinder_bundle():
    return generate_system(SystemSpec("cylinder", {}))


@pytest.fixture(scope="session")
def cylinder_estimates(cylinder_bundle):
    return estimate_bundle(cylinder_bundle)
