"""Numba builds of the hot kernels.

Same contracts and bitwise-identical outputs as `_kernels_numpy`; the JIT builds
add sound pruning (never different arithmetic). See that module for the metric
mode conventions.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MODE_EUCLIDEAN = 0
MODE_MAX = 1


@njit(cache=True)
def _dist(points, wraps, mode, scale, i, j):
    if mode == MODE_EUCLIDEAN:
        s = 0.0
        for t in range(points.shape[1]):
            df = points[i, t] - points[j, t]
            s += df * df
        return scale * np.sqrt(s)
    best = 0.0
    for t in range(points.shape[1]):
        df = abs(points[i, t] - points[j, t])
        if wraps[t]:
            w = 1.0 - df
            if w < df:
                df = w
        if df > best:
            best = df
    return scale * best


@njit(cache=True)
def pairwise_matrix(points, wraps, mode, scale):
    n = points.shape[0]
    D = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        D[i, i] = 0.0
        for j in range(i + 1, n):
            d = _dist(points, wraps, mode, scale, i, j)
            D[i, j] = d
            D[j, i] = d
    return D


@njit(cache=True)
def extremes_matrix(D):
    n = D.shape[0]
    if n < 2:
        return 0.0, 0.0
    diam = 0.0
    gap = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            d = D[i, j]
            if d > diam:
                diam = d
            if d < gap:
                gap = d
    return diam, gap


@njit(cache=True)
def extremes_coords(points, wraps, mode, scale):
    n = points.shape[0]
    if n < 2:
        return 0.0, 0.0
    diam = 0.0
    gap = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            d = _dist(points, wraps, mode, scale, i, j)
            if d > diam:
                diam = d
            if d < gap:
                gap = d
    return diam, gap


@njit(cache=True)
def ball_masks_matrix(D, r):
    return D < r


@njit(cache=True)
def ball_masks_coords(points, wraps, mode, scale, r):
    n = points.shape[0]
    out = np.empty((n, n), dtype=np.bool_)
    for i in range(n):
        out[i, i] = 0.0 < r
        for j in range(i + 1, n):
            inside = _dist(points, wraps, mode, scale, i, j) < r
            out[i, j] = inside
            out[j, i] = inside
    return out


@njit(cache=True)
def dtc_rows_matrix(D, masks):
    m, n = masks.shape
    T = np.empty((m, n), dtype=np.float64)
    for i in range(m):
        for x in range(n):
            best = np.inf
            for y in range(n):
                if not masks[i, y]:
                    d = D[x, y]
                    if d < best:
                        best = d
            T[i, x] = best
    return T


@njit(cache=True)
def dtc_rows_coords(points, wraps, mode, scale, masks):
    m, n = masks.shape
    T = np.empty((m, n), dtype=np.float64)
    for i in range(m):
        for x in range(n):
            best = np.inf
            for y in range(n):
                if not masks[i, y]:
                    d = _dist(points, wraps, mode, scale, x, y)
                    if d < best:
                        best = d
            T[i, x] = best
    return T


@njit(cache=True)
def _exact_delta_matrix(D, masks, x):
    m, n = masks.shape
    v = 0.0
    for i in range(m):
        if not masks[i, x]:
            continue
        # distance from x to the complement of member i, abandoned as soon as
        # it provably cannot raise v; scanning outward from x reaches a close
        # outside point (and with it the abort) quickly
        lo = np.inf
        aborted = False
        for off in range(1, n):
            done = True
            y = x - off
            if y >= 0:
                done = False
                if not masks[i, y]:
                    d = D[x, y]
                    if d < lo:
                        lo = d
                        if lo <= v:
                            aborted = True
                            break
            y = x + off
            if y < n:
                done = False
                if not masks[i, y]:
                    d = D[x, y]
                    if d < lo:
                        lo = d
                        if lo <= v:
                            aborted = True
                            break
            if done:
                break
        if not aborted and lo > v:
            v = lo
    return v


@njit(cache=True)
def _member_lists(masks):
    # CSR transpose: for each point, the indices of the members containing it
    m, n = masks.shape
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(m):
        for y in range(n):
            if masks[i, y]:
                indptr[y + 1] += 1
    for y in range(n):
        indptr[y + 1] += indptr[y]
    mids = np.empty(indptr[n], dtype=np.int64)
    pos = indptr[:n].copy()
    for i in range(m):
        for y in range(n):
            if masks[i, y]:
                mids[pos[y]] = i
                pos[y] += 1
    return indptr, mids


@njit(cache=True)
def delta_min_matrix(D, masks):
    # threshold-and-verify: solve a spread sample exactly, then skip every
    # point whose open t-ball sits inside one of its members (delta(x) >= t);
    # only the remaining points, exactly those with delta(x) < t, are solved
    m, n = masks.shape
    step = n // 16
    if step < 1:
        step = 1
    sampled = np.zeros(n, dtype=np.bool_)
    vals = np.zeros(n, dtype=np.float64)
    t = np.inf
    for x in range(0, n, step):
        vals[x] = _exact_delta_matrix(D, masks, x)
        sampled[x] = True
        if vals[x] < t:
            t = vals[x]
    if not (0.0 < t < np.inf) or step == 1:
        best = np.inf
        arg = -1
        for x in range(n):
            v = vals[x] if sampled[x] else _exact_delta_matrix(D, masks, x)
            if v < best:
                best = v
                arg = x
        return best, arg
    indptr = np.zeros(n + 1, dtype=np.int64)
    for x in range(n):
        c = 0
        for y in range(n):
            if y != x and D[x, y] < t:
                c += 1
        indptr[x + 1] = indptr[x] + c
    if indptr[n] > 16_000_000:
        best = np.inf
        arg = -1
        for x in range(n):
            v = vals[x] if sampled[x] else _exact_delta_matrix(D, masks, x)
            if v < best:
                best = v
                arg = x
        return best, arg
    ids = np.empty(indptr[n], dtype=np.int64)
    pos = 0
    for x in range(n):
        for y in range(n):
            if y != x and D[x, y] < t:
                ids[pos] = y
                pos += 1
    mt_indptr, mids = _member_lists(masks)
    best = np.inf
    arg = -1
    for x in range(n):
        if sampled[x]:
            continue
        safe = False
        for q in range(mt_indptr[x], mt_indptr[x + 1]):
            i = mids[q]
            ok = True
            for p in range(indptr[x], indptr[x + 1]):
                if not masks[i, ids[p]]:
                    ok = False
                    break
            if ok:
                safe = True
                break
        if not safe:
            vals[x] = _exact_delta_matrix(D, masks, x)
            sampled[x] = True
            if vals[x] < best:
                best = vals[x]
                arg = x
    if best < t:
        return best, arg
    # nothing under the sampled minimum, so the answer is t; the first
    # attainer is the first point whose closed t-ball escapes every member
    for x in range(n):
        if sampled[x]:
            if vals[x] == t:
                return t, x
            continue
        tie = True
        for q in range(mt_indptr[x], mt_indptr[x + 1]):
            i = mids[q]
            ok = True
            for p in range(indptr[x], indptr[x + 1]):
                if not masks[i, ids[p]]:
                    ok = False
                    break
            if ok:
                for y in range(n):
                    if y != x and not masks[i, y] and D[x, y] == t:
                        ok = False
                        break
            if ok:
                tie = False
                break
        if tie:
            return t, x
    return t, -1


@njit(cache=True)
def _dist_row(points, wraps, mode, scale, x, out):
    # one row of the pairwise table, same arithmetic as _dist pair by pair
    n = points.shape[0]
    k = points.shape[1]
    if mode == MODE_EUCLIDEAN:
        for y in range(n):
            s = 0.0
            for t in range(k):
                df = points[x, t] - points[y, t]
                s += df * df
            out[y] = scale * np.sqrt(s)
    else:
        for y in range(n):
            best = 0.0
            for t in range(k):
                df = abs(points[x, t] - points[y, t])
                if wraps[t]:
                    w = 1.0 - df
                    if w < df:
                        df = w
                if df > best:
                    best = df
            out[y] = scale * best


@njit(cache=True)
def _exact_delta_coords(points, wraps, mode, scale, masks, x):
    m, n = masks.shape
    v = 0.0
    for i in range(m):
        if not masks[i, x]:
            continue
        lo = np.inf
        aborted = False
        for off in range(1, n):
            done = True
            y = x - off
            if y >= 0:
                done = False
                if not masks[i, y]:
                    d = _dist(points, wraps, mode, scale, x, y)
                    if d < lo:
                        lo = d
                        if lo <= v:
                            aborted = True
                            break
            y = x + off
            if y < n:
                done = False
                if not masks[i, y]:
                    d = _dist(points, wraps, mode, scale, x, y)
                    if d < lo:
                        lo = d
                        if lo <= v:
                            aborted = True
                            break
            if done:
                break
        if not aborted and lo > v:
            v = lo
    return v


@njit(cache=True)
def delta_min_coords(points, wraps, mode, scale, masks):
    m, n = masks.shape
    step = n // 16
    if step < 1:
        step = 1
    sampled = np.zeros(n, dtype=np.bool_)
    vals = np.zeros(n, dtype=np.float64)
    t = np.inf
    for x in range(0, n, step):
        vals[x] = _exact_delta_coords(points, wraps, mode, scale, masks, x)
        sampled[x] = True
        if vals[x] < t:
            t = vals[x]
    if not (0.0 < t < np.inf) or step == 1:
        best = np.inf
        arg = -1
        for x in range(n):
            v = vals[x] if sampled[x] else _exact_delta_coords(
                points, wraps, mode, scale, masks, x)
            if v < best:
                best = v
                arg = x
        return best, arg
    indptr = np.zeros(n + 1, dtype=np.int64)
    cap = 4 * n
    ids = np.empty(cap, dtype=np.int64)
    pos = 0
    row = np.empty(n, dtype=np.float64)
    overflow = False
    for x in range(n):
        _dist_row(points, wraps, mode, scale, x, row)
        for y in range(n):
            if y != x and row[y] < t:
                if pos == cap:
                    cap *= 2
                    if cap > 16_000_000:
                        overflow = True
                        break
                    grown = np.empty(cap, dtype=np.int64)
                    grown[:pos] = ids[:pos]
                    ids = grown
                ids[pos] = y
                pos += 1
        if overflow:
            break
        indptr[x + 1] = pos
    if overflow:
        best = np.inf
        arg = -1
        for x in range(n):
            v = vals[x] if sampled[x] else _exact_delta_coords(
                points, wraps, mode, scale, masks, x)
            if v < best:
                best = v
                arg = x
        return best, arg
    mt_indptr, mids = _member_lists(masks)
    best = np.inf
    arg = -1
    for x in range(n):
        if sampled[x]:
            continue
        safe = False
        for q in range(mt_indptr[x], mt_indptr[x + 1]):
            i = mids[q]
            ok = True
            for p in range(indptr[x], indptr[x + 1]):
                if not masks[i, ids[p]]:
                    ok = False
                    break
            if ok:
                safe = True
                break
        if not safe:
            vals[x] = _exact_delta_coords(points, wraps, mode, scale, masks, x)
            sampled[x] = True
            if vals[x] < best:
                best = vals[x]
                arg = x
    if best < t:
        return best, arg
    for x in range(n):
        if sampled[x]:
            if vals[x] == t:
                return t, x
            continue
        tie = True
        for q in range(mt_indptr[x], mt_indptr[x + 1]):
            i = mids[q]
            ok = True
            for p in range(indptr[x], indptr[x + 1]):
                if not masks[i, ids[p]]:
                    ok = False
                    break
            if ok:
                for y in range(n):
                    if (y != x and not masks[i, y]
                            and _dist(points, wraps, mode, scale, x, y) == t):
                        ok = False
                        break
            if ok:
                tie = False
                break
        if tie:
            return t, x
    return t, -1


@njit(cache=True)
def greedy_set_cover(masks, pt_indptr, pt_members):
    m, n = masks.shape
    alive = np.zeros(m, dtype=np.int64)
    for i in range(m):
        c = 0
        for x in range(n):
            if masks[i, x]:
                c += 1
        alive[i] = c
    covered = np.zeros(n, dtype=np.bool_)
    ncov = 0
    sel = np.empty(m, dtype=np.int64)
    nsel = 0
    while ncov < n:
        best = -1
        bc = 0
        for i in range(m):
            if alive[i] > bc:
                bc = alive[i]
                best = i
        if best < 0:
            return sel[:nsel], False
        sel[nsel] = best
        nsel += 1
        for x in range(n):
            if masks[best, x] and not covered[x]:
                covered[x] = True
                ncov += 1
                for t in range(pt_indptr[x], pt_indptr[x + 1]):
                    alive[pt_members[t]] -= 1
    return sel[:nsel], True


@njit(cache=True)
def bowen_matrix(D, orbits):
    steps, n = orbits.shape
    B = np.empty((n, n), dtype=np.float64)
    for x in range(n):
        for y in range(n):
            best = 0.0
            for k in range(steps):
                d = D[orbits[k, x], orbits[k, y]]
                if d > best:
                    best = d
            B[x, y] = best
    return B


@njit(cache=True)
def greedy_separated_matrix(B, eps):
    n = B.shape[0]
    chosen = np.empty(n, dtype=np.int64)
    cnt = 0
    for x in range(n):
        ok = True
        for t in range(cnt):
            if B[x, chosen[t]] <= eps:
                ok = False
                break
        if ok:
            chosen[cnt] = x
            cnt += 1
    return chosen[:cnt]


@njit(cache=True)
def greedy_separated_coords(points, wraps, mode, scale, orbits, eps):
    n = points.shape[0]
    steps = orbits.shape[0]
    chosen = np.empty(n, dtype=np.int64)
    cnt = 0
    for x in range(n):
        ok = True
        for t in range(cnt):
            c = chosen[t]
            dmax = 0.0
            for k in range(steps):
                d = _dist(points, wraps, mode, scale, orbits[k, x], orbits[k, c])
                if d > dmax:
                    dmax = d
                    if dmax > eps:
                        break
            if dmax <= eps:
                ok = False
                break
        if ok:
            chosen[cnt] = x
            cnt += 1
    return chosen[:cnt]


@njit(cache=True, error_model="numpy")
def lipschitz_matrix(D, image):
    n = D.shape[0]
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            r = D[image[i], image[j]] / D[i, j]
            if r > best:
                best = r
    return best


@njit(cache=True, error_model="numpy")
def lipschitz_coords(points, wraps, mode, scale, image):
    n = points.shape[0]
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            num = _dist(points, wraps, mode, scale, image[i], image[j])
            den = _dist(points, wraps, mode, scale, i, j)
            r = num / den
            if r > best:
                best = r
    return best


@njit(cache=True)
def pair_min_matrix(D, A, B):
    best = np.inf
    for a in A:
        for b in B:
            d = D[a, b]
            if d < best:
                best = d
    return best


@njit(cache=True)
def pair_min_coords(points, wraps, mode, scale, A, B):
    best = np.inf
    for a in A:
        for b in B:
            d = _dist(points, wraps, mode, scale, a, b)
            if d < best:
                best = d
    return best


@njit(cache=True)
def triangle_check_matrix(D, tol):
    n = D.shape[0]
    count = 0
    worst = 0.0
    wi = -1
    wj = -1
    wk = -1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                excess = D[i, j] - (D[i, k] + D[k, j])
                if excess > tol:
                    count += 1
                    if excess > worst:
                        worst = excess
                        wi = i
                        wj = j
                        wk = k
    return count, worst, wi, wj, wk


@njit(cache=True)
def triangle_check_triples_matrix(D, triples, tol):
    count = 0
    worst = -np.inf
    wi = -1
    wj = -1
    wk = -1
    for t in range(triples.shape[0]):
        i = triples[t, 0]
        j = triples[t, 1]
        k = triples[t, 2]
        excess = D[i, j] - (D[i, k] + D[k, j])
        if excess > tol:
            count += 1
        if excess > worst:
            worst = excess
            wi = i
            wj = j
            wk = k
    if count == 0:
        return 0, 0.0, -1, -1, -1
    return count, worst, wi, wj, wk


@njit(cache=True)
def triangle_check_triples_coords(points, wraps, mode, scale, triples, tol):
    count = 0
    worst = -np.inf
    wi = -1
    wj = -1
    wk = -1
    for t in range(triples.shape[0]):
        i = triples[t, 0]
        j = triples[t, 1]
        k = triples[t, 2]
        excess = (_dist(points, wraps, mode, scale, i, j)
                  - (_dist(points, wraps, mode, scale, i, k)
                     + _dist(points, wraps, mode, scale, k, j)))
        if excess > tol:
            count += 1
        if excess > worst:
            worst = excess
            wi = i
            wj = j
            wk = k
    if count == 0:
        return 0, 0.0, -1, -1, -1
    return count, worst, wi, wj, wk
