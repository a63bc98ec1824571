"""Compiled inner loops (numba) for graph routines.

The eccentricity kernels run level-synchronous BFS from up to 64 sources
at once, one bit per source in a uint64 mask per vertex. Pushing masks is
an unconditional OR along edges of active vertices; a full commit scan per
level costs only n and keeps the push loop branch-free. Feeding batches
with spatially co-located sources keeps their wavefronts overlapping, so
each vertex is active for O(1) levels per batch.
"""

import numpy as np
from numba import njit

U64_ONE = np.uint64(1)
U64_ZERO = np.uint64(0)


@njit(cache=True)
def _lowbit_u64(x):
    i = 0
    while (x >> np.uint64(i)) & U64_ONE == U64_ZERO:
        i += 1
    return i


@njit(cache=True)
def _lowbit_i64(x):
    i = 0
    while (x >> i) & 1 == 0:
        i += 1
    return i


@njit(cache=True)
def ecc_batch(indptr, indices, sources):
    """Eccentricities of <= 64 source vertices (graph must be connected)."""
    n = indptr.shape[0] - 1
    k = sources.shape[0]
    reach = np.zeros(n, np.uint64)
    pend = np.zeros(n, np.uint64)
    fresh = np.zeros(n, np.uint64)
    active = np.empty(n, np.int32)
    active2 = np.empty(n, np.int32)
    ecc = np.zeros(k, np.int32)
    na = 0
    for b in range(k):
        s = sources[b]
        bit = U64_ONE << np.uint64(b)
        if fresh[s] == U64_ZERO:
            active[na] = s
            na += 1
        fresh[s] |= bit
        reach[s] |= bit
    level = 0
    while na > 0:
        level += 1
        for t in range(na):
            u = active[t]
            mu = fresh[u]
            for e in range(indptr[u], indptr[u + 1]):
                pend[indices[e]] |= mu
        nn = 0
        orb = U64_ZERO
        for v in range(n):
            pd = pend[v]
            if pd != U64_ZERO:
                pend[v] = U64_ZERO
                nb = pd & ~reach[v]
                if nb != U64_ZERO:
                    reach[v] |= nb
                    fresh[v] = nb
                    active2[nn] = v
                    nn += 1
                    orb |= nb
        while orb != U64_ZERO:
            ecc[_lowbit_u64(orb)] = level
            orb &= orb - U64_ONE
        tmp = active
        active = active2
        active2 = tmp
        na = nn
    return ecc


@njit(cache=True)
def dist_batch(indptr, indices, sources):
    """Full BFS distance rows (int16) for <= 64 sources, plus eccentricities."""
    n = indptr.shape[0] - 1
    k = sources.shape[0]
    reach = np.zeros(n, np.uint64)
    pend = np.zeros(n, np.uint64)
    fresh = np.zeros(n, np.uint64)
    active = np.empty(n, np.int32)
    active2 = np.empty(n, np.int32)
    dist = np.zeros((k, n), np.int16)
    ecc = np.zeros(k, np.int32)
    na = 0
    for b in range(k):
        s = sources[b]
        bit = U64_ONE << np.uint64(b)
        if fresh[s] == U64_ZERO:
            active[na] = s
            na += 1
        fresh[s] |= bit
        reach[s] |= bit
    level = 0
    while na > 0:
        level += 1
        for t in range(na):
            u = active[t]
            mu = fresh[u]
            for e in range(indptr[u], indptr[u + 1]):
                pend[indices[e]] |= mu
        nn = 0
        for v in range(n):
            pd = pend[v]
            if pd != U64_ZERO:
                pend[v] = U64_ZERO
                nb = pd & ~reach[v]
                if nb != U64_ZERO:
                    reach[v] |= nb
                    fresh[v] = nb
                    active2[nn] = v
                    nn += 1
                    while nb != U64_ZERO:
                        b = _lowbit_u64(nb)
                        dist[b, v] = level
                        ecc[b] = level
                        nb &= nb - U64_ONE
        tmp = active
        active = active2
        active2 = tmp
        na = nn
    return dist, ecc


@njit(cache=True)
def hamilton_cycle_dp(nv, adj_bits):
    """Subset DP (Held-Karp reachability) for a Hamilton cycle, nv <= 20.

    adj_bits[v] is the adjacency of v as an int64 bitmask. dp[mask] holds
    the set of possible endpoints of paths that start at vertex 0 and cover
    exactly `mask`. Returns the cycle as an int32 array, empty if none.
    """
    out = np.empty(nv, np.int32)
    if nv == 1:
        out[0] = 0
        return out
    full = (1 << nv) - 1
    dp = np.zeros(1 << nv, np.int64)
    dp[1] = 1
    for mask in range(1, full + 1, 2):
        lasts = dp[mask]
        if lasts == 0:
            continue
        w_set = full & ~mask
        while w_set != 0:
            wbit = w_set & (-w_set)
            w = _lowbit_i64(wbit)
            if adj_bits[w] & lasts != 0:
                dp[mask | wbit] |= wbit
            w_set ^= wbit
    closers = dp[full] & adj_bits[0] & ~1
    if closers == 0:
        return np.empty(0, np.int32)
    mask = full
    last = _lowbit_i64(closers & (-closers))
    for pos in range(nv - 1, 0, -1):
        out[pos] = last
        mask ^= 1 << last
        prevs = dp[mask] & adj_bits[last]
        last = _lowbit_i64(prevs & (-prevs))
    out[0] = 0
    return out


@njit(cache=True)
def dsatur_colors(indptr, indices):
    """Greedy DSATUR coloring; ties by higher degree then lower vertex id."""
    n = indptr.shape[0] - 1
    deg = np.empty(n, np.int64)
    maxdeg = 0
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
        if deg[v] > maxdeg:
            maxdeg = deg[v]
    words = (maxdeg + 2 + 63) // 64
    satbits = np.zeros((n, words), np.uint64)
    satcount = np.zeros(n, np.int32)
    colors = np.full(n, -1, np.int32)
    todo = np.empty(n, np.int32)
    for v in range(n):
        todo[v] = v
    n_todo = n
    for _ in range(n):
        bi = 0
        best = todo[0]
        for t in range(1, n_todo):
            v = todo[t]
            if (satcount[v] > satcount[best]
                    or (satcount[v] == satcount[best]
                        and (deg[v] > deg[best]
                             or (deg[v] == deg[best] and v < best)))):
                best = v
                bi = t
        n_todo -= 1
        todo[bi] = todo[n_todo]
        c = 0
        while (satbits[best, c >> 6] >> np.uint64(c & 63)) & U64_ONE != U64_ZERO:
            c += 1
        colors[best] = c
        w_word = c >> 6
        w_bit = U64_ONE << np.uint64(c & 63)
        for e in range(indptr[best], indptr[best + 1]):
            w = indices[e]
            if colors[w] < 0 and (satbits[w, w_word] & w_bit) == U64_ZERO:
                satbits[w, w_word] |= w_bit
                satcount[w] += 1
    return colors
