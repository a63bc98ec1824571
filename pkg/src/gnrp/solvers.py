"""Clique, independent set, and coloring solvers.

Exact searches are branch-and-bound over Python-int bitsets with a greedy
coloring bound and a node-expansion budget (wall-clock-free, so results are
reproducible). The cell-based constructions exploit the geometry: points in
a cell of side r/sqrt(2) are pairwise within r, cells of a side-r grid that
are two apart share no edges, and so on. Every witness is re-checked by an
independent verifier before it is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .geometry import GridMode, build_grid, build_grid_even, group_by_cell
from .graph_core import Graph
from ._kernels import dsatur_colors

DEFAULT_BUDGET = 5_000_000


class BudgetExceeded(RuntimeError):
    """Raised when an exact search exceeds its node-expansion budget."""


class CliqueMethod(Enum):
    EXACT = "EXACT"
    DENSE_CELL_LOWER = "DENSE_CELL_LOWER"


class IndependenceKind(Enum):
    EXACT = "EXACT"
    SPACED_CELLS_LOWER = "SPACED_CELLS_LOWER"
    CELLSUM_UPPER = "CELLSUM_UPPER"


class ColoringKind(Enum):
    EXACT = "EXACT"
    DSATUR = "DSATUR"
    PALETTE = "PALETTE"


@dataclass(frozen=True)
class CliqueResult:
    size: int
    witness: tuple[int, ...]
    method: CliqueMethod


@dataclass(frozen=True)
class IndependenceResult:
    size: int
    witness: Optional[tuple[int, ...]]  # None for CELLSUM_UPPER
    kind: IndependenceKind
    value: int
    # False when any per-cell subproblem fell back to a greedy set or an
    # occupancy bound after exhausting its budget
    fully_exact: bool = True


@dataclass(frozen=True)
class ColoringResult:
    num_colors: int
    assignment: np.ndarray
    kind: ColoringKind


# ---------------------------------------------------------------------------
# verifiers (independent of the search code; every result passes through one)


def verify_clique(g: Graph, vertices) -> bool:
    vs = sorted(int(v) for v in vertices)
    if len(set(vs)) != len(vs):
        return False
    for i, u in enumerate(vs):
        for v in vs[i + 1 :]:
            if not g.has_edge(u, v):
                return False
    return True


def verify_independent(g: Graph, vertices) -> bool:
    vs = np.asarray(sorted(int(v) for v in vertices), dtype=np.int64)
    if len(vs) != len(np.unique(vs)):
        return False
    if len(vs) == 0:
        return True
    mark = np.zeros(g.n, dtype=bool)
    mark[vs] = True
    src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.indptr))
    bad = mark[src] & mark[g.indices]
    return not bad.any()


def verify_coloring(g: Graph, assignment: np.ndarray) -> bool:
    a = np.asarray(assignment)
    if a.shape != (g.n,) or (a < 0).any():
        return False
    src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.indptr))
    return bool((a[src] != a[g.indices]).all())


# ---------------------------------------------------------------------------
# bitset branch-and-bound core


class _Budget:
    __slots__ = ("left",)

    def __init__(self, limit: int):
        self.left = int(limit)

    def spend(self) -> None:
        self.left -= 1
        if self.left < 0:
            raise BudgetExceeded("node-expansion budget exhausted")


def _adjacency_bitsets(g: Graph) -> list[int]:
    adj = [0] * g.n
    for v in range(g.n):
        bits = 0
        for w in g.neighbors(v).tolist():
            bits |= 1 << w
        adj[v] = bits
    return adj


def _bits_to_list(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


def _max_clique_bits(adj: list[int], cand: int, budget: _Budget) -> tuple[int, int]:
    """Maximum clique within the candidate bitset.

    Branch and bound in the style of Tomita: candidates are greedily colored,
    explored in decreasing color-bound order, and a branch is cut as soon as
    the bound cannot beat the incumbent.
    """
    best_size = 0
    best_bits = 0

    def expand(r_size: int, r_bits: int, p: int) -> None:
        nonlocal best_size, best_bits
        # greedy coloring of p; verts come out grouped by color class
        order: list[int] = []
        bounds: list[int] = []
        q = p
        color = 0
        while q:
            color += 1
            avail = q
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                avail &= ~adj[v]
                avail ^= low
                q ^= low
                order.append(v)
                bounds.append(color)
        for i in range(len(order) - 1, -1, -1):
            if r_size + bounds[i] <= best_size:
                return
            budget.spend()
            v = order[i]
            vbit = 1 << v
            np_ = p & adj[v]
            if np_:
                expand(r_size + 1, r_bits | vbit, np_)
            elif r_size + 1 > best_size:
                best_size = r_size + 1
                best_bits = r_bits | vbit
            p &= ~vbit

    if cand:
        expand(0, 0, cand)
    return best_size, best_bits


def _components_bits(adj: list[int], mask: int) -> list[int]:
    comps = []
    rest = mask
    while rest:
        seed = rest & -rest
        comp = seed
        frontier = seed
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= adj[low.bit_length() - 1]
                f ^= low
            nxt &= rest & ~comp
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        rest &= ~comp
    return comps


def _mis_bits(adj: list[int], mask: int, budget: _Budget) -> tuple[int, int]:
    """Maximum independent set within mask: per connected component, a maximum
    clique of the component's complement."""
    total = 0
    witness = 0
    for comp in _components_bits(adj, mask):
        verts = _bits_to_list(comp)
        k = len(verts)
        if k == 1:
            total += 1
            witness |= comp
            continue
        local = {v: i for i, v in enumerate(verts)}
        co_adj = [0] * k
        full = (1 << k) - 1
        for v in verts:
            i = local[v]
            nb = 0
            rem = comp & adj[v]
            while rem:
                low = rem & -rem
                nb |= 1 << local[low.bit_length() - 1]
                rem ^= low
            co_adj[i] = full & ~nb & ~(1 << i)
        size, bits = _max_clique_bits(co_adj, full, budget)
        total += size
        for i in _bits_to_list(bits):
            witness |= 1 << verts[i]
    return total, witness


def _greedy_mis_bits(adj: list[int], mask: int) -> tuple[int, int]:
    """Deterministic min-degree greedy independent set (fallback)."""
    live = mask
    chosen = 0
    size = 0
    while live:
        best_v, best_deg = -1, 1 << 62
        rem = live
        while rem:
            low = rem & -rem
            v = low.bit_length() - 1
            deg = (adj[v] & live).bit_count()
            if deg < best_deg:
                best_deg, best_v = deg, v
            rem ^= low
        chosen |= 1 << best_v
        size += 1
        live &= ~adj[best_v]
        live &= ~(1 << best_v)
    return size, chosen


# ---------------------------------------------------------------------------
# whole-graph exact solvers


def max_clique_exact(g: Graph, budget: int = DEFAULT_BUDGET) -> CliqueResult:
    if g.n == 0:
        return CliqueResult(0, (), CliqueMethod.EXACT)
    adj = _adjacency_bitsets(g)
    size, bits = _max_clique_bits(adj, (1 << g.n) - 1, _Budget(budget))
    witness = tuple(_bits_to_list(bits))
    if not verify_clique(g, witness) or len(witness) != size:
        raise AssertionError("clique witness failed verification")
    return CliqueResult(size, witness, CliqueMethod.EXACT)


def mis_exact(g: Graph, budget: int = DEFAULT_BUDGET) -> IndependenceResult:
    if g.n == 0:
        return IndependenceResult(0, (), IndependenceKind.EXACT, 0)
    adj = _adjacency_bitsets(g)
    size, bits = _mis_bits(adj, (1 << g.n) - 1, _Budget(budget))
    witness = tuple(_bits_to_list(bits))
    if not verify_independent(g, witness) or len(witness) != size:
        raise AssertionError("independent-set witness failed verification")
    return IndependenceResult(size, witness, IndependenceKind.EXACT, size)


# ---------------------------------------------------------------------------
# cell constructions


def _subgraph_bitsets(g: Graph, vertices: np.ndarray) -> list[int]:
    """Adjacency bitsets of the induced subgraph, in local indices."""
    vs = np.asarray(vertices, dtype=np.int32)
    local = {int(v): i for i, v in enumerate(vs)}
    adj = [0] * len(vs)
    for v in vs.tolist():
        bits = 0
        for w in g.neighbors(v).tolist():
            j = local.get(w)
            if j is not None:
                bits |= 1 << j
        adj[local[v]] = bits
    return adj


def clique_lower_dense_cell(
    inst, budget: int = DEFAULT_BUDGET
) -> CliqueResult:
    """Maximum clique of the most populous r/sqrt(2) cell.

    Such a cell has diameter <= r, so its induced subgraph keeps every
    geometric pair and the clique found is a clique of the whole graph,
    hence a lower bound on its clique number. Computed as a maximum
    independent set of the cell subgraph's complement, which decomposes
    into tiny components when edges survive densely.
    """
    g = inst.graph
    r = inst.params.r
    grid = build_grid(r / math.sqrt(2.0), GridMode.AT_MOST)
    ids = grid.cell_ids(inst.points)
    occupancy = np.bincount(ids, minlength=grid.cells_per_axis**2)
    cell = int(occupancy.argmax())
    verts = np.nonzero(ids == cell)[0].astype(np.int32)
    k = len(verts)
    adj = _subgraph_bitsets(g, verts)
    full = (1 << k) - 1
    co_adj = [full & ~adj[i] & ~(1 << i) for i in range(k)]
    size, bits = _mis_bits(co_adj, full, _Budget(budget))
    witness = tuple(int(verts[i]) for i in _bits_to_list(bits))
    if not verify_clique(g, witness) or len(witness) != size:
        raise AssertionError("dense-cell clique witness failed verification")
    return CliqueResult(size, witness, CliqueMethod.DENSE_CELL_LOWER)


def clique_block_scan(inst, budget: int = DEFAULT_BUDGET) -> CliqueResult:
    """Exact clique number via 2x2 windows of a side->=r grid.

    A clique's points lie pairwise within r, so each wrapped coordinate
    spans an arc of length <= r <= cell side; the clique therefore sits
    inside some 2x2 window of cells (with wraparound), and the max over
    all windows is exact.
    """
    g = inst.graph
    r = inst.params.r
    grid = build_grid(r, GridMode.AT_LEAST)
    m = grid.cells_per_axis
    best = CliqueResult(0, (), CliqueMethod.EXACT)
    if m <= 2:
        windows = [np.arange(g.n, dtype=np.int32)]
    else:
        _, order, starts = group_by_cell(inst.points, grid)
        windows = []
        for i in range(m):
            i2 = (i + 1) % m
            for j in range(m):
                j2 = (j + 1) % m
                cells = (i * m + j, i * m + j2, i2 * m + j, i2 * m + j2)
                parts = [order[starts[c] : starts[c + 1]] for c in cells]
                windows.append(np.concatenate(parts))
    for verts in windows:
        if len(verts) <= best.size:
            continue
        verts = np.sort(verts).astype(np.int32)
        adj = _subgraph_bitsets(g, verts)
        size, bits = _max_clique_bits(adj, (1 << len(verts)) - 1, _Budget(budget))
        if size > best.size:
            witness = tuple(int(verts[i]) for i in _bits_to_list(bits))
            best = CliqueResult(size, witness, CliqueMethod.EXACT)
    if best.size > 0 and not verify_clique(g, best.witness):
        raise AssertionError("block-scan clique witness failed verification")
    if g.n > 0 and best.size == 0:
        best = CliqueResult(1, (0,), CliqueMethod.EXACT)
    return best


def alpha_lower_spaced_cells(
    inst, budget: int = DEFAULT_BUDGET
) -> IndependenceResult:
    """Independent set from even-indexed rows and columns of a side->=r grid.

    Kept cells are separated by at least one full cell (>= r) in every
    axis, wrapping included, so vertices of different kept cells are never
    adjacent; the union of per-cell independent sets is independent in G.
    Per cell the set is a maximum independent set when the budget allows,
    else a deterministic greedy one (flagged via fully_exact).
    """
    g = inst.graph
    grid = build_grid_even(inst.params.r, GridMode.AT_LEAST)
    m = grid.cells_per_axis
    ids_sorted, order, starts = group_by_cell(inst.points, grid)
    witness: list[int] = []
    fully_exact = True
    for i in range(0, m, 2):
        for j in range(0, m, 2):
            c = i * m + j
            verts = np.sort(order[starts[c] : starts[c + 1]]).astype(np.int32)
            if len(verts) == 0:
                continue
            adj = _subgraph_bitsets(g, verts)
            full = (1 << len(verts)) - 1
            try:
                _, bits = _mis_bits(adj, full, _Budget(budget))
            except BudgetExceeded:
                _, bits = _greedy_mis_bits(adj, full)
                fully_exact = False
            witness.extend(int(verts[i_]) for i_ in _bits_to_list(bits))
    witness_t = tuple(sorted(witness))
    if not verify_independent(g, witness_t):
        raise AssertionError("spaced-cells witness failed verification")
    return IndependenceResult(
        len(witness_t),
        witness_t,
        IndependenceKind.SPACED_CELLS_LOWER,
        len(witness_t),
        fully_exact,
    )


def alpha_upper_cellsum(inst, budget: int = DEFAULT_BUDGET) -> IndependenceResult:
    """Upper bound on the independence number by summing per-cell exact MIS
    over an r/sqrt(2) grid.

    Any independent set restricted to one cell is independent in that
    cell's induced subgraph, so the sum of per-cell maxima dominates the
    global maximum. Cells whose exact search blows the budget contribute
    their occupancy instead (still an upper bound, flagged).
    """
    g = inst.graph
    grid = build_grid(inst.params.r / math.sqrt(2.0), GridMode.AT_MOST)
    ids_sorted, order, starts = group_by_cell(inst.points, grid)
    total = 0
    fully_exact = True
    for c in range(grid.cells_per_axis**2):
        verts = np.sort(order[starts[c] : starts[c + 1]]).astype(np.int32)
        if len(verts) == 0:
            continue
        if len(verts) == 1:
            total += 1
            continue
        adj = _subgraph_bitsets(g, verts)
        try:
            size, _ = _mis_bits(adj, (1 << len(verts)) - 1, _Budget(budget))
        except BudgetExceeded:
            size = len(verts)
            fully_exact = False
        total += size
    return IndependenceResult(
        total, None, IndependenceKind.CELLSUM_UPPER, total, fully_exact
    )


# ---------------------------------------------------------------------------
# coloring


def dsatur(g: Graph) -> ColoringResult:
    """Saturation-degree greedy coloring; an upper bound on the chromatic
    number, proper by construction (and re-verified)."""
    if g.n == 0:
        return ColoringResult(0, np.zeros(0, np.int32), ColoringKind.DSATUR)
    colors = dsatur_colors(g.indptr, g.indices)
    num = int(colors.max()) + 1
    if not verify_coloring(g, colors):
        raise AssertionError("dsatur produced an improper coloring")
    return ColoringResult(num, colors, ColoringKind.DSATUR)


def palette_coloring(inst) -> ColoringResult:
    """Proper coloring from four disjoint palettes on a side->=r grid.

    Cells are classed by (row parity, column parity); same-class cells are
    >= r apart (the grid has an even number of cells per axis, so parity
    survives the wraparound) and can share a palette. Each cell is
    DSATUR-colored within its class palette; palettes are disjoint, so the
    union is proper. Total colors = sum over palettes of the largest
    per-cell color count.
    """
    g = inst.graph
    grid = build_grid_even(inst.params.r, GridMode.AT_LEAST)
    m = grid.cells_per_axis
    ids_sorted, order, starts = group_by_cell(inst.points, grid)
    local_colors = np.zeros(g.n, np.int32)
    palette_of = np.zeros(g.n, np.int32)
    palette_size = [0, 0, 0, 0]
    for c in range(m * m):
        verts = np.sort(order[starts[c] : starts[c + 1]]).astype(np.int32)
        if len(verts) == 0:
            continue
        pal = (c // m % 2) * 2 + (c % m % 2)
        sub, orig = inst.graph.subgraph(verts)
        cols = dsatur_colors(sub.indptr, sub.indices)
        local_colors[orig] = cols
        palette_of[orig] = pal
        palette_size[pal] = max(palette_size[pal], int(cols.max()) + 1)
    base = np.cumsum([0] + palette_size[:-1])
    assignment = (base[palette_of] + local_colors).astype(np.int32)
    num = int(sum(palette_size))
    if not verify_coloring(g, assignment):
        raise AssertionError("palette coloring is improper")
    return ColoringResult(num, assignment, ColoringKind.PALETTE)


def chromatic_sandwich(inst, budget: int = DEFAULT_BUDGET) -> tuple[int, int]:
    """(lower, upper) bounds on the chromatic number.

    lower: max of ceil(n / alpha_upper) (valid since the cell-sum dominates
    the true independence number) and the dense-cell clique size.
    upper: min of whole-graph DSATUR and the palette construction.
    """
    n = inst.graph.n
    alpha_up = alpha_upper_cellsum(inst, budget)
    omega_lo = clique_lower_dense_cell(inst, budget)
    lower = max(math.ceil(n / alpha_up.value), omega_lo.size)
    upper = min(dsatur(inst.graph).num_colors, palette_coloring(inst).num_colors)
    return lower, upper
