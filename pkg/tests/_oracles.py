"""Independent reference implementations used only to check the package.

Everything here is written the dumb-but-obviously-correct way (all-pairs
scans, exhaustive subset enumeration, textbook DP) and stays separate from
the library code paths it validates.
"""

from functools import lru_cache

import numpy as np
from scipy.sparse.csgraph import floyd_warshall


def rgg_edges_bruteforce(points, r):
    """All unordered pairs at wrapped distance <= r, by checking every pair."""
    pts = np.asarray(points)
    d = np.abs(pts[:, None, :] - pts[None, :, :])
    d = np.minimum(d, 1.0 - d)
    dist = np.hypot(d[..., 0], d[..., 1])
    iu, iv = np.nonzero(np.triu(dist <= r, k=1))
    return set(zip(iu.tolist(), iv.tolist()))


def _adj_bitmasks(adj_sets):
    return [sum(1 << w for w in nbrs) for nbrs in adj_sets]


def max_clique_exhaustive(adj_sets):
    """(size, witness set) by scanning all 2^n subsets; n <= 18."""
    n = len(adj_sets)
    adj = _adj_bitmasks(adj_sets)
    is_clique = bytearray(1 << n)
    is_clique[0] = 1
    best_mask, best_size = 0, 0
    for mask in range(1, 1 << n):
        v = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << v)
        ok = is_clique[rest] and (adj[v] & rest) == rest
        is_clique[mask] = ok
        if ok:
            size = mask.bit_count()
            if size > best_size:
                best_size, best_mask = size, mask
    return best_size, {v for v in range(n) if best_mask >> v & 1}


def max_independent_exhaustive(adj_sets):
    """(size, witness set) by scanning all 2^n subsets; n <= 18."""
    n = len(adj_sets)
    adj = _adj_bitmasks(adj_sets)
    is_ind = bytearray(1 << n)
    is_ind[0] = 1
    best_mask, best_size = 0, 0
    for mask in range(1, 1 << n):
        v = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << v)
        ok = is_ind[rest] and (adj[v] & rest) == 0
        is_ind[mask] = ok
        if ok:
            size = mask.bit_count()
            if size > best_size:
                best_size, best_mask = size, mask
    return best_size, {v for v in range(n) if best_mask >> v & 1}


def chromatic_number_exact(adj_sets):
    """Exact chromatic number by iterative-deepening backtracking; n <= 14."""
    n = len(adj_sets)
    if n == 0:
        return 0
    order = sorted(range(n), key=lambda v: -len(adj_sets[v]))
    colors = [-1] * n

    def backtrack(i, k, used):
        if i == n:
            return True
        v = order[i]
        taken = {colors[w] for w in adj_sets[v] if colors[w] >= 0}
        for c in range(min(used + 1, k)):
            if c in taken:
                continue
            colors[v] = c
            if backtrack(i + 1, k, max(used, c + 1)):
                return True
        colors[v] = -1
        return False

    for k in range(1, n + 1):
        for v in range(n):
            colors[v] = -1
        if backtrack(0, k, 0):
            return k
    return n


def is_hamiltonian_dp(adj_sets):
    """Hamilton cycle existence by memoized path DP; n <= ~16."""
    n = len(adj_sets)
    if n == 1:
        return True
    if n == 2:
        return False
    adj = _adj_bitmasks(adj_sets)
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def path_exists(mask, last):
        # simple path from 0 over `mask`, ending at `last` (!= 0)
        if mask == (1 << last) | 1:
            return bool(adj[0] >> last & 1)
        prev = mask ^ (1 << last)
        return any(
            adj[last] >> j & 1 and path_exists(prev, j)
            for j in range(1, n)
            if prev >> j & 1
        )

    try:
        return any(
            adj[0] >> last & 1 and path_exists(full, last) for last in range(1, n)
        )
    finally:
        path_exists.cache_clear()


def diameter_floyd_warshall(graph):
    """Exact diameter via scipy's Floyd-Warshall; graph must be connected."""
    mat = floyd_warshall(graph.to_scipy(), directed=False, unweighted=True)
    assert np.isfinite(mat).all(), "graph is disconnected"
    return int(mat.max())


def components_matrix_power(adj_sets):
    """Vertex partition via boolean reachability matrix powers; n <= ~300."""
    n = len(adj_sets)
    reach = np.eye(n, dtype=bool)
    for v, nbrs in enumerate(adj_sets):
        for w in nbrs:
            reach[v, w] = True
    power = 1
    while power < n:
        reach = reach @ reach
        power *= 2
    seen = set()
    comps = []
    for v in range(n):
        if v not in seen:
            members = frozenset(np.nonzero(reach[v])[0].tolist())
            comps.append(members)
            seen |= members
    return comps


def random_gnp_adj_sets(n, p, rng):
    """Erdos-Renyi adjacency sets for oracle-vs-solver comparisons."""
    adj = [set() for _ in range(n)]
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                adj[u].add(v)
                adj[v].add(u)
    return adj


def adj_sets_to_edges(adj_sets):
    u, v = [], []
    for a, nbrs in enumerate(adj_sets):
        for b in sorted(nbrs):
            if a < b:
                u.append(a)
                v.append(b)
    return np.array(u, np.int32), np.array(v, np.int32)
