"""Pure-numpy kernel implementations.

Reference semantics for the numba build in `_kernels_numba`: every function here
produces bitwise-identical output to its JIT twin (the numba versions only add
sound pruning, never different arithmetic). This backend is the fallback when
numba is unavailable and the baseline for the kernel benchmark.

Coordinate metrics: `mode` 0 is Euclidean, `mode` 1 is the max (sup) metric over
dimensions where each wrapped dimension uses circle distance with period 1.
`scale` multiplies every distance (metric_core.scale_metric plumbs it).
"""

from __future__ import annotations

import numpy as np

MODE_EUCLIDEAN = 0
MODE_MAX = 1

_CHUNK = 512


def _coord_block(points, wraps, mode, scale, rows, cols):
    """Distance block d(rows x cols) for coordinate metrics."""
    a = points[rows][:, None, :]
    b = points[cols][None, :, :]
    if mode == MODE_EUCLIDEAN:
        out = np.sqrt(((a - b) ** 2).sum(axis=-1))
    else:
        d = np.abs(a - b)
        for t in range(points.shape[1]):
            if wraps[t]:
                np.minimum(d[:, :, t], 1.0 - d[:, :, t], out=d[:, :, t])
        out = d.max(axis=-1)
    return scale * out


def pairwise_matrix(points, wraps, mode, scale):
    n = points.shape[0]
    D = np.empty((n, n), dtype=np.float64)
    idx = np.arange(n)
    for start in range(0, n, _CHUNK):
        rows = idx[start:start + _CHUNK]
        D[rows] = _coord_block(points, wraps, mode, scale, rows, idx)
    return D


def extremes_matrix(D):
    n = D.shape[0]
    if n < 2:
        return 0.0, 0.0
    iu = np.triu_indices(n, k=1)
    vals = D[iu]
    return float(vals.max()), float(vals.min())


def extremes_coords(points, wraps, mode, scale):
    n = points.shape[0]
    if n < 2:
        return 0.0, 0.0
    diam = 0.0
    gap = np.inf
    idx = np.arange(n)
    for start in range(0, n, _CHUNK):
        rows = idx[start:start + _CHUNK]
        block = _coord_block(points, wraps, mode, scale, rows, idx)
        # mask the diagonal entries that fall inside this block
        for local, i in enumerate(rows):
            block[local, i] = np.inf
        gap = min(gap, float(block.min()))
        block[np.isinf(block)] = 0.0
        diam = max(diam, float(block.max()))
    return diam, gap


def ball_masks_matrix(D, r):
    return D < r


def ball_masks_coords(points, wraps, mode, scale, r):
    n = points.shape[0]
    out = np.empty((n, n), dtype=np.bool_)
    idx = np.arange(n)
    for start in range(0, n, _CHUNK):
        rows = idx[start:start + _CHUNK]
        out[rows] = _coord_block(points, wraps, mode, scale, rows, idx) < r
    return out


def dtc_rows_matrix(D, masks):
    """Per member, per point distance to the member's complement."""
    m, n = masks.shape
    T = np.zeros((m, n), dtype=np.float64)
    for i in range(m):
        comp = ~masks[i]
        T[i] = D[:, comp].min(axis=1)
    return T


def dtc_rows_coords(points, wraps, mode, scale, masks):
    m, n = masks.shape
    T = np.empty((m, n), dtype=np.float64)
    idx = np.arange(n)
    for i in range(m):
        comp = idx[~masks[i]]
        best = np.full(n, np.inf)
        for start in range(0, comp.size, _CHUNK):
            cols = comp[start:start + _CHUNK]
            block = _coord_block(points, wraps, mode, scale, idx, cols)
            np.minimum(best, block.min(axis=1), out=best)
        T[i] = best
    return T


def _delta_from_rows(T, masks):
    per_point = np.where(masks, T, 0.0).max(axis=0)
    arg = int(per_point.argmin())
    return float(per_point[arg]), arg, per_point


def delta_min_matrix(D, masks):
    delta, arg, _ = _delta_from_rows(dtc_rows_matrix(D, masks), masks)
    return delta, arg


def delta_min_coords(points, wraps, mode, scale, masks):
    T = dtc_rows_coords(points, wraps, mode, scale, masks)
    delta, arg, _ = _delta_from_rows(T, masks)
    return delta, arg


def greedy_set_cover(masks, pt_indptr, pt_members):
    """Greedy minimum set cover, largest-uncovered-gain first, lowest index on ties.

    Returns (selection, ok); ok is False when some point is in no set.
    """
    m, n = masks.shape
    covered = np.zeros(n, dtype=np.bool_)
    sel = []
    while not covered.all():
        gain = (masks & ~covered).sum(axis=1)
        best = int(gain.argmax())
        if gain[best] <= 0:
            return np.array(sel, dtype=np.int64), False
        sel.append(best)
        covered |= masks[best]
    return np.array(sel, dtype=np.int64), True


def bowen_matrix(D, orbits):
    """B[x, y] = max over rows k of D[orbits[k, x], orbits[k, y]]."""
    B = D[np.ix_(orbits[0], orbits[0])].copy()
    for k in range(1, orbits.shape[0]):
        np.maximum(B, D[np.ix_(orbits[k], orbits[k])], out=B)
    return B


def greedy_separated_matrix(B, eps):
    n = B.shape[0]
    chosen = []
    for x in range(n):
        row = B[x]
        if all(row[c] > eps for c in chosen):
            chosen.append(x)
    return np.array(chosen, dtype=np.int64)


def greedy_separated_coords(points, wraps, mode, scale, orbits, eps):
    n = points.shape[0]
    chosen: list[int] = []
    for x in range(n):
        ok = True
        for c in chosen:
            dmax = 0.0
            for k in range(orbits.shape[0]):
                d = float(_coord_block(points, wraps, mode, scale,
                                       np.array([orbits[k, x]]),
                                       np.array([orbits[k, c]]))[0, 0])
                if d > dmax:
                    dmax = d
                    if dmax > eps:
                        break
            if dmax <= eps:
                ok = False
                break
        if ok:
            chosen.append(x)
    return np.array(chosen, dtype=np.int64)


def lipschitz_matrix(D, image):
    n = D.shape[0]
    best = 0.0
    for i in range(n):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = D[image[i], image[i + 1:]] / D[i, i + 1:]
        if r.size:
            best = max(best, float(np.nanmax(r)))
    return best


def lipschitz_coords(points, wraps, mode, scale, image):
    n = points.shape[0]
    idx = np.arange(n)
    best = 0.0
    for i in range(n):
        cols = idx[i + 1:]
        if cols.size == 0:
            continue
        num = _coord_block(points, wraps, mode, scale,
                           np.array([image[i]]), image[cols])[0]
        den = _coord_block(points, wraps, mode, scale, np.array([i]), cols)[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = num / den
        best = max(best, float(np.nanmax(r)))
    return best


def pair_min_matrix(D, A, B):
    return float(D[np.ix_(A, B)].min())


def pair_min_coords(points, wraps, mode, scale, A, B):
    return float(_coord_block(points, wraps, mode, scale, A, B).min())


def triangle_check_matrix(D, tol):
    """Full triangle sweep. Returns (violations, worst excess, i, j, k)."""
    n = D.shape[0]
    count = 0
    worst = 0.0
    wi = wj = wk = -1
    for k in range(n):
        excess = D - (D[:, k][:, None] + D[k][None, :])
        bad = excess > tol
        c = int(bad.sum())
        if c:
            count += c
            flat = int(excess.argmax())
            i, j = divmod(flat, n)
            if excess[i, j] > worst:
                worst = float(excess[i, j])
                wi, wj, wk = int(i), int(j), k
    return count, worst, wi, wj, wk


def triangle_check_triples_matrix(D, triples, tol):
    i, j, k = triples[:, 0], triples[:, 1], triples[:, 2]
    excess = D[i, j] - (D[i, k] + D[k, j])
    bad = excess > tol
    count = int(bad.sum())
    if count:
        t = int(excess.argmax())
        return count, float(excess[t]), int(i[t]), int(j[t]), int(k[t])
    return 0, 0.0, -1, -1, -1


def triangle_check_triples_coords(points, wraps, mode, scale, triples, tol):
    i, j, k = triples[:, 0], triples[:, 1], triples[:, 2]

    # elementwise distances for index vectors
    def dv(a, b):
        res = np.empty(a.size, dtype=np.float64)
        for s in range(0, a.size, _CHUNK):
            sl = slice(s, s + _CHUNK)
            aa = points[a[sl]]
            bb = points[b[sl]]
            if mode == MODE_EUCLIDEAN:
                res[sl] = scale * np.sqrt(((aa - bb) ** 2).sum(axis=-1))
            else:
                dd = np.abs(aa - bb)
                for t in range(points.shape[1]):
                    if wraps[t]:
                        np.minimum(dd[:, t], 1.0 - dd[:, t], out=dd[:, t])
                res[sl] = scale * dd.max(axis=-1)
        return res
    excess = dv(i, j) - (dv(i, k) + dv(k, j))
    bad = excess > tol
    count = int(bad.sum())
    if count:
        t = int(excess.argmax())
        return count, float(excess[t]), int(i[t]), int(j[t]), int(k[t])
    return 0, 0.0, -1, -1, -1
