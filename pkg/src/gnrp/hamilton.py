"""Constructive Hamiltonicity.

The construction tiles the torus with cells of side at most r/sqrt(5),
finds a Hamilton cycle inside every populous cell using only channel-1
edges (any two points of a cell are within r, so the geometric layer is
complete there), then walks the cells in snake order and merges each new
cell cycle into the running cycle with a splice: one edge is removed from
each cycle and two crossing channel-2 edges are added. Two side-sharing
cells have diameter exactly r, so the crossing pairs are geometrically
available. The result is a single cycle through all n vertices, verified
edge-by-edge before it is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from .geometry import GridMode, build_grid, group_by_cell, snake_order, torus_distance
from .graph_core import Graph
from ._kernels import hamilton_cycle_dp

_EXACT_CUTOFF = 20  # below this, cell cycles come from the subset DP


class TooSmallError(ValueError):
    """cell_hamilton needs at least 3 vertices."""


class TooLargeError(ValueError):
    """hamilton_exact_small is limited to 20 vertices."""


class HamStage(Enum):
    EMPTY_CELL = "EMPTY_CELL"
    CELL_CYCLE = "CELL_CYCLE"
    SPLICE = "SPLICE"


@dataclass(frozen=True)
class HamiltonCertificate:
    order: np.ndarray  # cyclic permutation of all n vertices
    splice_edges: tuple[tuple[int, int], ...]
    empty_cells: int
    degenerate_cells: int

    def to_json_list(self) -> list[int]:
        return [int(v) for v in self.order]


@dataclass(frozen=True)
class HamFailure:
    stage: HamStage
    where: int  # cell id (or -1)
    details: str
    empty_cells: int = 0
    degenerate_cells: int = 0


def hamilton_exact_small(g: Graph) -> bool:
    """Exact Hamiltonicity by dynamic programming over vertex subsets."""
    if g.n > _EXACT_CUTOFF:
        raise TooLargeError(f"exact decision limited to n <= {_EXACT_CUTOFF}")
    if g.n == 2:
        return False  # a simple cycle cannot reuse the single edge
    adj = np.zeros(g.n, np.int64)
    for v in range(g.n):
        bits = 0
        for w in g.neighbors(v).tolist():
            bits |= 1 << w
        adj[v] = bits
    return len(hamilton_cycle_dp(g.n, adj)) > 0


def _posa_cycle(
    adj: list[np.ndarray], stream: np.random.Generator, max_rotations: int
) -> Optional[list[int]]:
    """Rotation-extension search for a Hamilton cycle; None when the
    rotation budget runs out."""
    n = len(adj)
    rotations = 0
    while rotations <= max_rotations:
        # fresh attempt from a random start with a reshuffled neighbor order
        shuffled = [stream.permutation(a) for a in adj]
        path = [int(stream.integers(n))]
        pos = np.full(n, -1, np.int32)
        pos[path[0]] = 0
        stalled = 0
        while rotations <= max_rotations:
            end = path[-1]
            ext = -1
            for w in shuffled[end]:
                if pos[w] < 0:
                    ext = int(w)
                    break
            if ext >= 0:
                pos[ext] = len(path)
                path.append(ext)
                stalled = 0
                continue
            if len(path) == n and (adj[end] == path[0]).any():
                return path
            # rotate around a random neighbor already on the path
            nb = shuffled[end]
            if len(nb) == 0:
                break
            u = int(nb[stream.integers(len(nb))])
            i = int(pos[u])
            rotations += 1
            stalled += 1
            if stalled > n * n:
                break  # going in circles, restart from a fresh vertex
            if i >= len(path) - 2:
                continue  # predecessor or endpoint itself: rotation is a no-op
            tail = path[i + 1 :]
            tail.reverse()
            path[i + 1 :] = tail
            for k in range(i + 1, len(path)):
                pos[path[k]] = k
    return None


def cell_hamilton(
    sub: Graph, stream: np.random.Generator, restarts: int = 20
) -> Optional[np.ndarray]:
    """Hamilton cycle of a (small) graph, as an array of its vertex ids in
    cyclic order, or None when none was found.

    Below 20 vertices the answer is exact (subset DP); above, rotation-
    extension with a budget of restarts * n^2 rotations.
    """
    n = sub.n
    if n < 3:
        raise TooSmallError(f"need at least 3 vertices, got {n}")
    if n < _EXACT_CUTOFF:
        adj = np.zeros(n, np.int64)
        for v in range(n):
            bits = 0
            for w in sub.neighbors(v).tolist():
                bits |= 1 << w
            adj[v] = bits
        cyc = hamilton_cycle_dp(n, adj)
        return cyc if len(cyc) else None
    adj_lists = [sub.neighbors(v) for v in range(n)]
    path = _posa_cycle(adj_lists, stream, restarts * n * n)
    return np.asarray(path, np.int32) if path is not None else None


def verify_hamilton(inst, cert: HamiltonCertificate) -> bool:
    """True iff cert.order is a permutation of [n] and every cyclic
    consecutive pair is a kept edge of the instance."""
    order = np.asarray(cert.order, np.int64)
    n = inst.params.n
    if order.shape != (n,):
        return False
    if not np.array_equal(np.sort(order), np.arange(n)):
        return False
    if n == 1:
        return True
    if n == 2:
        return False
    u = order
    v = np.roll(order, -1)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    pair_keys = (lo << 32) | hi
    kept_keys = (inst.kept_u.astype(np.int64) << 32) | inst.kept_v.astype(np.int64)
    idx = np.searchsorted(kept_keys, pair_keys)
    idx = np.clip(idx, 0, len(kept_keys) - 1)
    return bool(len(kept_keys) > 0 and (kept_keys[idx] == pair_keys).all())


def _edge_channel_lookup(g: Graph, csr_channel: np.ndarray):
    indptr, indices = g.indptr, g.indices

    def channel_of(u: int, v: int) -> int:
        lo, hi = indptr[u], indptr[u + 1]
        k = lo + np.searchsorted(indices[lo:hi], v)
        if k < hi and indices[k] == v:
            return int(csr_channel[k])
        return 0

    return channel_of


def _host_edges(verts: np.ndarray, nxt: np.ndarray, alternate_only: bool):
    vset = set(verts.tolist())
    out = [(int(v), int(nxt[v])) for v in verts.tolist() if int(nxt[v]) in vset]
    if alternate_only:
        used: set[int] = set()
        picked = []
        for x, y in out:
            if x not in used and y not in used:
                picked.append((x, y))
                used.update((x, y))
        return picked
    return out


def _cycle_edge_list(cyc: np.ndarray, alternate_only: bool):
    k = len(cyc)
    edges = [(int(cyc[i]), int(cyc[(i + 1) % k])) for i in range(k)]
    if alternate_only:
        edges = [edges[i] for i in range(0, k - 1, 2)]
    return edges


class _Assembler:
    """Running cycle held as next/prev pointer arrays over global ids."""

    def __init__(self, inst, alternate_only: bool):
        self.inst = inst
        self.alt = alternate_only
        n = inst.params.n
        self.nxt = np.full(n, -1, np.int64)
        self.prv = np.full(n, -1, np.int64)
        self.channel_of = _edge_channel_lookup(inst.graph, inst.csr_channel)
        self.splices: list[tuple[int, int]] = []
        self.r = inst.params.r

    def _check_cross(self, a: int, b: int) -> bool:
        if not self.channel_of(a, b) & 2:
            return False
        d = torus_distance(self.inst.points[a], self.inst.points[b])
        if d > self.r + 1e-9:
            raise AssertionError(
                f"splice edge ({a},{b}) spans distance {d} > r; "
                "grid construction violated"
            )
        return True

    def link_cycle(self, cyc: np.ndarray) -> None:
        k = len(cyc)
        for i in range(k):
            a, b = int(cyc[i]), int(cyc[(i + 1) % k])
            self.nxt[a] = b
            self.prv[b] = a

    def splice(self, host_verts: np.ndarray, cyc: np.ndarray) -> bool:
        """Merge the freshly linked cycle `cyc` into the running cycle using
        a host edge whose endpoints lie in host_verts."""
        hosts = _host_edges(host_verts, self.nxt, self.alt)
        new_edges = _cycle_edge_list(cyc, self.alt)
        for x, y in hosts:
            for c, d in new_edges:
                # pairing 1: x->d ... c->y, O(1) rewire along B's direction
                if self._check_cross(x, d) and self._check_cross(c, y):
                    self.nxt[x] = d
                    self.prv[d] = x
                    self.nxt[c] = y
                    self.prv[y] = c
                    self.splices.extend([(x, d), (c, y)])
                    return True
                # pairing 2: x->c ... d->y, walks B against its direction
                if self._check_cross(x, c) and self._check_cross(d, y):
                    seg = [c]
                    while seg[-1] != d:
                        seg.append(int(self.prv[seg[-1]]))
                    self.nxt[x] = c
                    self.prv[c] = x
                    for a, b in zip(seg, seg[1:]):
                        self.nxt[a] = b
                        self.prv[b] = a
                    self.nxt[d] = y
                    self.prv[y] = d
                    self.splices.extend([(x, c), (d, y)])
                    return True
        return False

    def insert_points(self, host_verts: np.ndarray, pts: list[int]) -> bool:
        """Absorb one or two vertices into the running cycle via channel-2
        edges to a host edge (degenerate cells)."""
        if len(pts) == 2:
            a, b = pts
            intra = self.channel_of(a, b)
            want = 1 if self.alt else 3
            if intra & want:
                for x, y in _host_edges(host_verts, self.nxt, self.alt):
                    for c, d in ((a, b), (b, a)):
                        if self._check_cross(x, c) and self._check_cross(d, y):
                            self.nxt[x] = c
                            self.nxt[c] = d
                            self.nxt[d] = y
                            self.prv[y] = d
                            self.prv[d] = c
                            self.prv[c] = x
                            self.splices.extend([(x, c), (d, y)])
                            return True
            return self.insert_points(host_verts, [a]) and self.insert_points(
                host_verts, [b]
            )
        (a,) = pts
        for x, y in _host_edges(host_verts, self.nxt, self.alt):
            if self._check_cross(x, a) and self._check_cross(a, y):
                self.nxt[x] = a
                self.nxt[a] = y
                self.prv[y] = a
                self.prv[a] = x
                self.splices.extend([(x, a), (a, y)])
                return True
        return False

    def serialize(self) -> np.ndarray:
        n = self.inst.params.n
        order = np.empty(n, np.int32)
        v = 0
        for i in range(n):
            order[i] = v
            v = int(self.nxt[v])
        return order


def hamilton_constructive(
    inst,
    restarts: int = 20,
    seed: int = 0,
    alternate_edges_only: bool = False,
) -> Union[HamiltonCertificate, HamFailure]:
    """Build and verify a Hamilton cycle per the cell construction.

    Cell cycles use only channel-1 edges; merges use only channel-2 edges.
    alternate_edges_only restricts both sides of every splice search to
    vertex-disjoint ("every other") edges, the stricter variant; the default
    searches all edge pairs of the two cycles.

    Returns a HamiltonCertificate (always verified) or a HamFailure naming
    the first stage that failed.
    """
    n = inst.params.n
    if n == 1:
        return HamiltonCertificate(np.zeros(1, np.int32), (), 0, 0)
    grid = build_grid(inst.params.r / math.sqrt(5.0), GridMode.AT_MOST)
    cells, order_pts, starts = group_by_cell(inst.points, grid)
    m = grid.cells_per_axis
    snake = [i * m + j for i, j in snake_order(grid)]

    # channel-1 edges with both ends in the same cell, bucketed by cell
    ku, kv, ch = inst.kept_u, inst.kept_v, inst.channel
    sel = ((ch & 1) > 0) & (cells[ku] == cells[kv])
    su, sv = ku[sel], kv[sel]
    sc = cells[su]
    eorder = np.argsort(sc, kind="stable")
    estarts = np.searchsorted(sc[eorder], np.arange(grid.n_cells + 1))

    nonempty = [int(c) for c in snake if starts[c + 1] > starts[c]]
    empty_cells = grid.n_cells - len(nonempty)
    degenerate_cells = 0

    asm = _Assembler(inst, alternate_edges_only)
    snake_pos = {c: i for i, c in enumerate(snake)}
    running = False
    prev_verts: Optional[np.ndarray] = None
    prev_cell = -1
    pending: list[list[int]] = []

    for c in nonempty:
        verts = np.sort(order_pts[starts[c] : starts[c + 1]]).astype(np.int32)
        occ = len(verts)
        if occ < 3:
            degenerate_cells += 1
            if not running:
                pending.append([int(v) for v in verts])
                continue
            if not asm.insert_points(prev_verts, [int(v) for v in verts]):
                return HamFailure(
                    HamStage.SPLICE,
                    c,
                    f"no channel-2 host for degenerate cell {c}",
                    empty_cells,
                    degenerate_cells,
                )
            continue
        rows = eorder[estarts[c] : estarts[c + 1]]
        lu = np.searchsorted(verts, su[rows]).astype(np.int32)
        lv = np.searchsorted(verts, sv[rows]).astype(np.int32)
        lo = np.minimum(lu, lv)
        hi = np.maximum(lu, lv)
        key = np.argsort(lo.astype(np.int64) << 32 | hi, kind="stable")
        sub = Graph.from_edges(occ, lo[key], hi[key])
        stream = np.random.default_rng(np.random.SeedSequence([seed, int(c)]))
        local = cell_hamilton(sub, stream, restarts)
        if local is None:
            return HamFailure(
                HamStage.CELL_CYCLE,
                c,
                f"no channel-1 Hamilton cycle in cell {c} ({occ} points)",
                empty_cells,
                degenerate_cells,
            )
        cyc = verts[local]
        asm.link_cycle(cyc)
        if not running:
            running = True
        else:
            if not asm.splice(prev_verts, cyc):
                gap = snake_pos[c] - snake_pos[prev_cell]
                stage = HamStage.EMPTY_CELL if gap > 1 else HamStage.SPLICE
                return HamFailure(
                    stage,
                    c,
                    f"no channel-2 splice between cells {prev_cell} and {c}"
                    + (f" (snake gap {gap}, empty cells between)" if gap > 1 else ""),
                    empty_cells,
                    degenerate_cells,
                )
        while pending:
            if not asm.insert_points(verts, pending[0]):
                return HamFailure(
                    HamStage.SPLICE,
                    c,
                    "no channel-2 host for points preceding the first cycle",
                    empty_cells,
                    degenerate_cells,
                )
            pending.pop(0)
        prev_verts = verts
        prev_cell = c

    if not running:
        return HamFailure(
            HamStage.CELL_CYCLE,
            -1,
            "no cell holds 3 or more points; nothing can seed a cycle",
            empty_cells,
            degenerate_cells,
        )
    cert = HamiltonCertificate(
        asm.serialize(), tuple(asm.splices), empty_cells, degenerate_cells
    )
    if not verify_hamilton(inst, cert):
        raise AssertionError("constructed cycle failed verification")
    return cert
