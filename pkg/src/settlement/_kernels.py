"""Compiled inner loops.

Everything here works on flat row-major 0-based grids: either a ``uint8`` array
of length ``m * n`` or an ``int64`` bitmask whose bit ``r * n + c`` is lot
``(r + 1, c + 1)``.  The pure-Python predicates in :mod:`settlement.grid` are
the reference these are tested against.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _occ(grid, m, n, r, c):
    if r < 0 or r >= m or c < 0 or c >= n:
        return False
    return grid[r * n + c] != 0


@njit(**_JIT)
def can_build_flat(grid, m, n, idx):
    r = idx // n
    c = idx - r * n
    west = _occ(grid, m, n, r, c - 1)
    east = _occ(grid, m, n, r, c + 1)
    south = _occ(grid, m, n, r + 1, c)
    if west and east and south:
        return False
    if west and _occ(grid, m, n, r, c - 2) and _occ(grid, m, n, r + 1, c - 1):
        return False
    if east and _occ(grid, m, n, r, c + 2) and _occ(grid, m, n, r + 1, c + 1):
        return False
    if _occ(grid, m, n, r - 1, c) and _occ(grid, m, n, r - 1, c - 1) and _occ(grid, m, n, r - 1, c + 1):
        return False
    return True


@njit(**_JIT)
def build_order(order, m, n, grid):
    """Run the sequential builder over ``order`` on a zeroed ``grid``; return the house count."""
    count = 0
    for p in range(order.shape[0]):
        idx = order[p]
        if can_build_flat(grid, m, n, idx):
            grid[idx] = 1
            count += 1
    return count


@njit(**_JIT)
def build_trace(order, m, n, grid, accepted):
    count = 0
    for p in range(order.shape[0]):
        idx = order[p]
        if can_build_flat(grid, m, n, idx):
            grid[idx] = 1
            accepted[p] = 1
            count += 1
        else:
            accepted[p] = 0
    return count


@njit(**_JIT)
def _bit(mask, m, n, r, c):
    if r < 0 or r >= m or c < 0 or c >= n:
        return False
    return (mask >> (r * n + c)) & 1 == 1


@njit(**_JIT)
def can_build_mask(mask, m, n, idx):
    r = idx // n
    c = idx - r * n
    west = _bit(mask, m, n, r, c - 1)
    east = _bit(mask, m, n, r, c + 1)
    south = _bit(mask, m, n, r + 1, c)
    if west and east and south:
        return False
    if west and _bit(mask, m, n, r, c - 2) and _bit(mask, m, n, r + 1, c - 1):
        return False
    if east and _bit(mask, m, n, r, c + 2) and _bit(mask, m, n, r + 1, c + 1):
        return False
    if _bit(mask, m, n, r - 1, c) and _bit(mask, m, n, r - 1, c - 1) and _bit(mask, m, n, r - 1, c + 1):
        return False
    return True


@njit(**_JIT)
def census_range(perm, count, m, n, counts):
    """Push ``count`` consecutive lexicographic permutations through the builder.

    ``perm`` is the first permutation of the range and is advanced in place.
    ``counts[mask]`` is incremented once per permutation.  The builder state
    after every prefix is cached, so after a lexicographic step only the
    changed suffix is replayed.  Returns the number of permutations processed
    (smaller than ``count`` only if the last permutation was reached).
    """
    total = perm.shape[0]
    states = np.zeros(total + 1, dtype=np.int64)
    k = 0
    done = 0
    while done < count:
        s = states[k]
        for p in range(k, total):
            idx = perm[p]
            if can_build_mask(s, m, n, idx):
                s |= np.int64(1) << idx
            states[p + 1] = s
        counts[s] += 1
        done += 1
        # lexicographic successor
        i = total - 2
        while i >= 0 and perm[i] >= perm[i + 1]:
            i -= 1
        if i < 0:
            break
        j = total - 1
        while perm[j] <= perm[i]:
            j -= 1
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
        a = i + 1
        b = total - 1
        while a < b:
            tmp = perm[a]
            perm[a] = perm[b]
            perm[b] = tmp
            a += 1
            b -= 1
        k = i
    return done


@njit(**_JIT)
def mask_is_maximal(mask, m, n):
    """Row-bitwise maximality test for a bitmask configuration."""
    full = (np.int64(1) << n) - 1
    prev = np.int64(0)
    for r in range(m):
        row = (mask >> (r * n)) & full
        if r + 1 < m:
            nxt = (mask >> ((r + 1) * n)) & full
        else:
            nxt = np.int64(0)
        west = (row << 1) & full
        east = row >> 1
        if row & west & east & nxt:
            return False
        self_blocked = west & east & nxt
        blocks_west = ((row & west & nxt) << 1) & full
        blocks_east = (row & east & nxt) >> 1
        blocks_north = prev & (prev << 1) & (prev >> 1)
        if ~row & full & ~(self_blocked | blocks_west | blocks_east | blocks_north):
            return False
        prev = row
    return True


@njit(**_JIT)
def subset_maximal_masks(m, n):
    out = np.empty(64, dtype=np.int64)
    found = 0
    limit = np.int64(1) << (m * n)
    mask = np.int64(0)
    while mask < limit:
        if mask_is_maximal(mask, m, n):
            if found == out.shape[0]:
                bigger = np.empty(out.shape[0] * 2, dtype=np.int64)
                bigger[:found] = out[:found]
                out = bigger
            out[found] = mask
            found += 1
        mask += 1
    return out[:found]


@njit(**_JIT)
def build_draws(draws, m, n, grid, processed, done, target):
    """Consume uniform lot draws, skipping lots already processed.

    ``processed`` is a bit set over lots.  Stops once ``done`` reaches
    ``target``; returns ``(done, houses_added, draws_used)``.
    """
    added = 0
    used = 0
    for p in range(draws.shape[0]):
        if done >= target:
            break
        used += 1
        idx = draws[p]
        byte = idx >> 3
        bit = np.uint8(1) << np.uint8(idx & 7)
        if processed[byte] & bit:
            continue
        processed[byte] |= bit
        done += 1
        if can_build_flat(grid, m, n, idx):
            grid[idx] = 1
            added += 1
    return done, added, used


@njit(**_JIT)
def unprocessed_lots(processed, cells, out):
    k = 0
    for idx in range(cells):
        if not (processed[idx >> 3] >> (idx & 7)) & 1:
            out[k] = idx
            k += 1
    return k
