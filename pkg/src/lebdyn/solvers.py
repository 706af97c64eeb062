"""Exact combinatorial searches on small set systems.

Deterministic branch-and-bound over Python-int bitmasks: minimum set cover,
maximum independent set, and enumeration of all minimum-cardinality covers.
Every search counts visited nodes against a budget and raises BudgetError when
it runs out, so callers can fall back to greedy bounds. Optimal witnesses are
lexicographically least, which keeps reports reproducible across platforms.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import BudgetError, UsageError

DEFAULT_BUDGET = 1_000_000
_ENV_BUDGET = "LEBDYN_BUDGET"


def resolve_budget(budget: int | None) -> int:
    """Explicit argument wins, then the LEBDYN_BUDGET env var, then the default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get(_ENV_BUDGET)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"{_ENV_BUDGET} must be an integer, got {env!r}") from exc
    return DEFAULT_BUDGET


class _Budget:
    __slots__ = ("left", "total")

    def __init__(self, total: int):
        self.left = int(total)
        self.total = int(total)

    def spend(self) -> None:
        self.left -= 1
        if self.left < 0:
            raise BudgetError(
                f"exact search exceeded its node budget ({self.total}); "
                f"raise {_ENV_BUDGET} or use greedy mode")


def masks_to_bits(masks) -> list[int]:
    """Pack boolean member rows into int bitmasks keyed by point id."""
    out = []
    for row in np.asarray(masks, dtype=bool):
        v = 0
        for x in np.flatnonzero(row):
            v |= 1 << int(x)
        out.append(v)
    return out


def masks_transpose(masks):
    """CSR transpose (point -> containing members) for the greedy kernels."""
    arr = np.asarray(masks, dtype=bool)
    n = arr.shape[1]
    pts, mems = np.nonzero(arr.T)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(pts, minlength=n), out=indptr[1:])
    return indptr, mems.astype(np.int64)


def greedy_cover_bits(bits: list[int], universe: int) -> list[int]:
    sel = []
    uncovered = universe
    while uncovered:
        best_gain = 0
        best = -1
        for i, b in enumerate(bits):
            g = (b & uncovered).bit_count()
            if g > best_gain:
                best_gain = g
                best = i
        if best < 0:
            break
        sel.append(best)
        uncovered &= ~bits[best]
    return sel


def _prepare(masks):
    arr = np.asarray(masks, dtype=bool)
    if arr.ndim != 2:
        raise UsageError("masks must be a 2-d boolean array")
    m, n = arr.shape
    bits = masks_to_bits(arr)
    universe = (1 << n) - 1
    union = 0
    for b in bits:
        union |= b
    if union != universe:
        raise UsageError("family does not cover all points")
    covers_of = [[i for i in range(m) if (bits[i] >> e) & 1] for e in range(n)]
    maxpop = max((b.bit_count() for b in bits), default=0)
    return bits, universe, covers_of, maxpop


def _can_cover(bits, covers_of, uncovered, k, lo, banned, maxpop, bud) -> bool:
    """Decide whether `uncovered` has a cover of at most k members of index >= lo.

    Partition branching on the uncovered point with the fewest available
    members: alternative j commits the j-th candidate and bans the earlier
    ones, so no subfamily is tried twice. Points with a single candidate are
    forced without branching; only branch nodes spend budget.
    """
    while True:
        if uncovered == 0:
            return True
        if k <= 0 or k * maxpop < uncovered.bit_count():
            return False
        best_cands = None
        forced = -1
        u = uncovered
        while u:
            e = (u & -u).bit_length() - 1
            u &= u - 1
            cands = [i for i in covers_of[e] if i >= lo and not (banned >> i) & 1]
            if not cands:
                return False
            if len(cands) == 1:
                forced = cands[0]
                break
            if best_cands is None or len(cands) < len(best_cands):
                best_cands = cands
        if forced >= 0:
            uncovered &= ~bits[forced]
            banned |= 1 << forced
            k -= 1
            continue
        bud.spend()
        ban = banned
        for i in best_cands:
            if _can_cover(bits, covers_of, uncovered & ~bits[i], k - 1, lo,
                          ban | (1 << i), maxpop, bud):
                return True
            ban |= 1 << i
        return False


def exact_set_cover(masks, budget: int | None = None) -> list[int]:
    """Minimum-cardinality cover of all points; lexicographically least witness.

    Returns member indices, ascending. Raises UsageError when the family is not
    a cover and BudgetError when the search budget runs out.
    """
    bits, universe, covers_of, maxpop = _prepare(masks)
    if universe == 0:
        return []
    bud = _Budget(resolve_budget(budget))
    size = len(greedy_cover_bits(bits, universe))
    while size > 1 and _can_cover(bits, covers_of, universe, size - 1, 0, 0,
                                  maxpop, bud):
        size -= 1
    sel: list[int] = []
    uncovered = universe
    k = size
    lo = 0
    while uncovered:
        for i in range(lo, len(bits)):
            if bits[i] & uncovered == 0:
                continue
            if _can_cover(bits, covers_of, uncovered & ~bits[i], k - 1, i + 1,
                          0, maxpop, bud):
                sel.append(i)
                uncovered &= ~bits[i]
                k -= 1
                lo = i + 1
                break
        else:  # pragma: no cover - the size certificate guarantees progress
            raise RuntimeError("cover witness reconstruction failed")
    return sel


def iter_minimum_covers(masks, budget: int | None = None):
    """Minimum subcover size plus a lazy stream of every minimum cover.

    Returns (size, iterator of sorted index tuples). The stream follows the
    partition branching (each subfamily exactly once) but is not globally
    sorted; one node budget pays for both the size certificate and whatever
    part of the stream the caller consumes.
    """
    bits, universe, covers_of, maxpop = _prepare(masks)
    if universe == 0:
        return 0, iter([()])
    bud = _Budget(resolve_budget(budget))
    size = len(greedy_cover_bits(bits, universe))
    while size > 1 and _can_cover(bits, covers_of, universe, size - 1, 0, 0,
                                  maxpop, bud):
        size -= 1
    stack: list[int] = []

    def rec(uncovered: int, k: int, banned: int):
        pushed = 0
        while True:
            if uncovered == 0:
                yield tuple(sorted(stack))
                break
            if k <= 0 or k * maxpop < uncovered.bit_count():
                break
            best_cands = None
            forced = -1
            dead = False
            u = uncovered
            while u:
                e = (u & -u).bit_length() - 1
                u &= u - 1
                cands = [i for i in covers_of[e] if not (banned >> i) & 1]
                if not cands:
                    dead = True
                    break
                if len(cands) == 1:
                    forced = cands[0]
                    break
                if best_cands is None or len(cands) < len(best_cands):
                    best_cands = cands
            if dead:
                break
            if forced >= 0:
                stack.append(forced)
                pushed += 1
                uncovered &= ~bits[forced]
                banned |= 1 << forced
                k -= 1
                continue
            bud.spend()
            ban = banned
            for i in best_cands:
                stack.append(i)
                yield from rec(uncovered & ~bits[i], k - 1, ban | (1 << i))
                stack.pop()
                ban |= 1 << i
            break
        for _ in range(pushed):
            stack.pop()

    return size, rec(universe, size, 0)


def min_cover_enumerate(masks, budget: int | None = None):
    """All minimum-cardinality subcovers as sorted index tuples, sorted."""
    size, stream = iter_minimum_covers(masks, budget=budget)
    return size, sorted(stream)


def greedy_independent_bits(adj: list[int]) -> list[int]:
    chosen_mask = 0
    chosen = []
    for v in range(len(adj)):
        if adj[v] & chosen_mask == 0:
            chosen.append(v)
            chosen_mask |= 1 << v
    return chosen


def _mis_best(adj, cand, cur, best, bud) -> int:
    if cand == 0:
        return max(best, cur)
    if cur + cand.bit_count() <= best:
        return best
    bud.spend()
    v = (cand & -cand).bit_length() - 1
    vbit = 1 << v
    best = _mis_best(adj, cand & ~vbit & ~adj[v], cur + 1, best, bud)
    if adj[v] & cand:
        best = _mis_best(adj, cand & ~vbit, cur, best, bud)
    return best


def _mis_can(adj, cand, need, bud) -> bool:
    """Decide whether cand contains an independent set of size need."""
    if need <= 0:
        return True
    if cand.bit_count() < need:
        return False
    bud.spend()
    v = (cand & -cand).bit_length() - 1
    vbit = 1 << v
    if _mis_can(adj, cand & ~vbit & ~adj[v], need - 1, bud):
        return True
    if adj[v] & cand == 0:
        return False
    return _mis_can(adj, cand & ~vbit, need, bud)


def exact_max_independent(adj: list[int], budget: int | None = None) -> list[int]:
    """Maximum independent set; lexicographically least optimal witness.

    adj[v] is the neighbor bitmask of vertex v (irreflexive, symmetric).
    """
    n = len(adj)
    if n == 0:
        return []
    bud = _Budget(resolve_budget(budget))
    full = (1 << n) - 1
    best = _mis_best(adj, full, 0, len(greedy_independent_bits(adj)), bud)
    sel: list[int] = []
    cand = full
    need = best
    while need:
        v = (cand & -cand).bit_length() - 1
        inner = cand & ~(1 << v) & ~adj[v]
        if _mis_can(adj, inner, need - 1, bud):
            sel.append(v)
            need -= 1
            cand = inner
        else:
            cand &= ~(1 << v)
    return sel
