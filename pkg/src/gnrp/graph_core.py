"""Core graph structure and exact structural queries.

Graphs are immutable CSR adjacency (sorted neighbor lists) built from
canonical (u < v) edge arrays. Exact diameter computes every vertex
eccentricity with the bit-parallel BFS kernel; when a spatial clustering
of the vertices is available, certified landmark bounds prune most BFS
sources first without giving up exactness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from gnrp import _kernels


class DisconnectedError(ValueError):
    """Raised when an operation requires a connected graph."""


class Graph:
    """Undirected simple graph over vertices 0..n-1, CSR adjacency."""

    __slots__ = ("n", "indptr", "indices", "csr_edge_id", "_degrees")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray,
                 csr_edge_id: np.ndarray | None = None):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        # maps CSR entry -> index into the doubled edge array [u;v],[v;u]
        self.csr_edge_id = csr_edge_id
        self._degrees = None

    @classmethod
    def from_edges(cls, n: int, u: np.ndarray, v: np.ndarray) -> "Graph":
        """Build from canonical edge arrays (each unordered pair once, u < v)."""
        u = np.asarray(u, dtype=np.int32)
        v = np.asarray(v, dtype=np.int32)
        if len(u) and not (u < v).all():
            raise ValueError("edges must be canonical: u < v, no self-loops")
        if len(u) and (int(u.min()) < 0 or int(v.max()) >= n):
            raise ValueError("edge endpoint out of range")
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        key = src.astype(np.int64) << 32 | dst.astype(np.int64)
        order = np.argsort(key, kind="stable")
        indices = dst[order]
        counts = np.bincount(src, minlength=n)
        indptr = np.zeros(n + 1, np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(n, indptr, indices, order.astype(np.int32))

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            self._degrees = np.diff(self.indptr).astype(np.int64)
        return self._degrees

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, a: int, b: int) -> bool:
        row = self.neighbors(a)
        i = np.searchsorted(row, b)
        return i < len(row) and row[i] == b

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Canonical (u < v) edge arrays recovered from the CSR form."""
        src = np.repeat(np.arange(self.n, dtype=np.int32), np.diff(self.indptr))
        mask = src < self.indices
        return src[mask], self.indices[mask].copy()

    def subgraph(self, vertices: np.ndarray) -> tuple["Graph", np.ndarray]:
        """Induced subgraph; returns (graph, original_ids). Vertex k of the
        subgraph is original_ids[k] (ids sorted ascending)."""
        vs = np.unique(np.asarray(vertices, dtype=np.int32))
        remap = np.full(self.n, -1, np.int32)
        remap[vs] = np.arange(len(vs), dtype=np.int32)
        eu, ev = [], []
        for new_u, old_u in enumerate(vs):
            nb = remap[self.neighbors(old_u)]
            nb = nb[nb > new_u]
            eu.append(np.full(len(nb), new_u, np.int32))
            ev.append(nb)
        eu = np.concatenate(eu) if eu else np.empty(0, np.int32)
        ev = np.concatenate(ev) if ev else np.empty(0, np.int32)
        return Graph.from_edges(len(vs), eu, ev), vs

    def adjacency_sets(self) -> list[set[int]]:
        return [set(self.neighbors(v).tolist()) for v in range(self.n)]

    def to_scipy(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), np.uint8)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def validate(self) -> None:
        """Structural sanity: sorted rows, symmetry, no self-loops or dups."""
        for v in range(self.n):
            row = self.neighbors(v)
            assert np.all(np.diff(row) > 0), f"row {v} not strictly sorted"
            assert v not in row, f"self-loop at {v}"
            for w in row:
                assert self.has_edge(int(w), v), f"missing reverse edge {w}->{v}"


def components(g: Graph) -> list[np.ndarray]:
    """Connected components as sorted vertex arrays, ordered by first vertex."""
    if g.n_edges == 0:
        return [np.array([v], np.int32) for v in range(g.n)]
    ncomp, labels = _cc(g.to_scipy(), directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(ncomp + 1))
    return [np.sort(order[bounds[c]:bounds[c + 1]]).astype(np.int32)
            for c in range(ncomp)]


def is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    if g.n_edges == 0:
        return False
    ncomp, _ = _cc(g.to_scipy(), directed=False)
    return ncomp == 1


def isolated_count(g: Graph) -> int:
    return int((g.degrees == 0).sum())


def diameter_exact(g: Graph, cell_ids: np.ndarray | None = None) -> int:
    """Exact diameter: the maximum BFS eccentricity over all sources.

    Raises DisconnectedError on disconnected input. With `cell_ids` (a
    spatial clustering label per vertex) landmark BFS rows certify upper
    bounds max_{u in A, v in B} d(u,v) <= min_s [max_A d(s,.) + max_B d(s,.)]
    per cluster pair, and only clusters that might exceed the running lower
    bound get the full treatment; the result is exact either way.
    """
    if g.n == 0:
        raise ValueError("diameter of an empty graph is undefined")
    if not is_connected(g):
        raise DisconnectedError("graph is disconnected; diameter is infinite")
    if g.n <= 2:
        return g.n - 1
    if cell_ids is not None and g.n > 4096:
        return _diameter_pruned(g, np.asarray(cell_ids))
    # modest sizes: eccentricities of everyone, batched 64 at a time
    row, _ = _kernels.dist_batch(g.indptr, g.indices, np.zeros(1, np.int32))
    order = np.argsort(row[0], kind="stable").astype(np.int32)  # BFS-coherent
    best = 0
    for lo in range(0, g.n, 64):
        ecc = _kernels.ecc_batch(g.indptr, g.indices, order[lo:lo + 64])
        best = max(best, int(ecc.max()))
    return best


def _diameter_pruned(g: Graph, cell_ids: np.ndarray) -> int:
    cells = np.unique(cell_ids)
    compact = np.searchsorted(cells, cell_ids)  # labels -> 0..n_cells-1
    by_cell = np.argsort(compact, kind="stable").astype(np.int32)
    sorted_ids = compact[by_cell]
    starts = np.searchsorted(sorted_ids, np.arange(len(cells)))
    ends = np.append(starts[1:], len(by_cell))
    n_cells = len(cells)

    # landmarks: first vertex of up to 64 evenly spread clusters
    pick = np.unique(np.linspace(0, n_cells - 1, num=min(64, n_cells)).astype(int))
    landmarks = by_cell[starts[pick]]
    dist, ecc = _kernels.dist_batch(g.indptr, g.indices, landmarks.astype(np.int32))
    d_lb = int(ecc.max())

    # per-landmark, per-cluster max distance
    dist_sorted = dist[:, by_cell].astype(np.int32)
    cell_max = np.maximum.reduceat(dist_sorted, starts, axis=1)  # (L, n_cells)

    # certified bound for every cluster pair, folded to a per-cluster max
    pub = np.empty(n_cells, np.int32)
    for lo in range(0, n_cells, 64):
        hi = min(lo + 64, n_cells)
        block = cell_max[:, lo:hi, None] + cell_max[:, None, :]
        pub[lo:hi] = block.min(axis=0).max(axis=1)

    # BFS the survivors, largest bound first, re-pruning as the bound grows
    cand = [c for c in np.argsort(-pub) if pub[c] > d_lb]
    queue: list[int] = []
    for c in cand:
        queue.extend(by_cell[starts[c]:ends[c]].tolist())
    pos = 0
    while pos < len(queue):
        batch = np.array(queue[pos:pos + 64], np.int32)
        pos += 64
        keep = pub[compact[batch]] > d_lb
        batch = batch[keep]
        if len(batch) == 0:
            continue
        ecc = _kernels.ecc_batch(g.indptr, g.indices, batch)
        d_lb = max(d_lb, int(ecc.max()))
    return d_lb


def diameter_lower_sampled(g: Graph, n_sources: int, seed: int) -> int:
    """Lower bound on the diameter from BFS at random sources (a bound, not
    the diameter; intended for graphs too large for the exact routine)."""
    if not is_connected(g):
        raise DisconnectedError("graph is disconnected; diameter is infinite")
    rng = np.random.default_rng(seed)
    srcs = rng.choice(g.n, size=min(n_sources, g.n), replace=False).astype(np.int32)
    best = 0
    for lo in range(0, len(srcs), 64):
        ecc = _kernels.ecc_batch(g.indptr, g.indices, srcs[lo:lo + 64])
        best = max(best, int(ecc.max()))
    return best


@dataclass(frozen=True)
class DegreeReport:
    min_degree: int
    max_degree: int
    mean_degree: float
    delta: float
    band_lo: float
    band_hi: float
    within_band: bool

    def as_dict(self) -> dict:
        return {
            "min_degree": self.min_degree,
            "max_degree": self.max_degree,
            "mean_degree": self.mean_degree,
            "delta": self.delta,
            "band_lo": self.band_lo,
            "band_hi": self.band_hi,
            "within_band": self.within_band,
        }


def degree_report(g: Graph, params_or_q) -> DegreeReport:
    """Degree summary against the concentration band (1 +- delta)(n-1)q
    with delta = sqrt(4 ln n / (n q))."""
    q = params_or_q.q if hasattr(params_or_q, "q") else float(params_or_q)
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    n = g.n
    deg = g.degrees
    delta = math.sqrt(4.0 * math.log(n) / (n * q)) if n > 1 else 0.0
    target = (n - 1) * q
    lo, hi = (1.0 - delta) * target, (1.0 + delta) * target
    dmin, dmax = int(deg.min()), int(deg.max())
    return DegreeReport(
        min_degree=dmin,
        max_degree=dmax,
        mean_degree=float(deg.mean()),
        delta=delta,
        band_lo=lo,
        band_hi=hi,
        within_band=bool(lo <= dmin and dmax <= hi),
    )


@dataclass(frozen=True)
class OccupancyReport:
    min_count: int
    max_count: int
    counts: np.ndarray  # (m, m), counts[i][j] for cell (i, j)


def cell_occupancy(points: np.ndarray, grid) -> OccupancyReport:
    ids = grid.cell_ids(points)
    m = grid.cells_per_axis
    flat = np.bincount(ids, minlength=m * m).astype(np.int64)
    counts = flat.reshape(m, m)
    return OccupancyReport(int(flat.min()), int(flat.max()), counts)
