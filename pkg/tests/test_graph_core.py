import math

import numpy as np
import pytest

from gnrp.generator import ModelParams, generate
from gnrp.geometry import build_grid, GridMode
from gnrp.graph_core import (
    DisconnectedError,
    Graph,
    cell_occupancy,
    components,
    degree_report,
    diameter_exact,
    diameter_lower_sampled,
    is_connected,
    isolated_count,
    _diameter_pruned,
)

from _oracles import (
    adj_sets_to_edges,
    components_matrix_power,
    diameter_floyd_warshall,
    random_gnp_adj_sets,
)


def path_graph(n):
    u = np.arange(n - 1, dtype=np.int32)
    return Graph.from_edges(n, u, u + 1)


def cycle_graph(n):
    u = np.arange(n, dtype=np.int32)
    v = (u + 1) % n
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    return Graph.from_edges(n, lo, hi)


def test_from_edges_validation():
    with pytest.raises(ValueError):
        Graph.from_edges(3, np.array([1], np.int32), np.array([0], np.int32))
    with pytest.raises(ValueError):
        Graph.from_edges(3, np.array([0], np.int32), np.array([3], np.int32))
    with pytest.raises(ValueError):
        Graph.from_edges(3, np.array([1], np.int32), np.array([1], np.int32))
    g = Graph.from_edges(3, np.array([], np.int32), np.array([], np.int32))
    assert g.n == 3 and g.n_edges == 0


def test_csr_structure_matches_adjacency():
    rng = np.random.default_rng(0)
    adj = random_gnp_adj_sets(60, 0.1, rng)
    u, v = adj_sets_to_edges(adj)
    g = Graph.from_edges(60, u, v)
    assert g.adjacency_sets() == adj
    for a in range(60):
        assert sorted(g.neighbors(a).tolist()) == sorted(adj[a])
        assert g.degrees[a] == len(adj[a])
    assert g.has_edge(*next(iter(zip(u.tolist(), v.tolist()))))
    assert not g.has_edge(0, 0)


def test_edge_arrays_round_trip():
    rng = np.random.default_rng(1)
    adj = random_gnp_adj_sets(40, 0.15, rng)
    u, v = adj_sets_to_edges(adj)
    g = Graph.from_edges(40, u, v)
    gu, gv = g.edge_arrays()
    assert np.array_equal(gu, u) and np.array_equal(gv, v)


def test_subgraph_induced():
    rng = np.random.default_rng(2)
    adj = random_gnp_adj_sets(50, 0.2, rng)
    u, v = adj_sets_to_edges(adj)
    g = Graph.from_edges(50, u, v)
    keep = np.array(sorted(rng.choice(50, size=20, replace=False)), np.int32)
    sub, orig_ids = g.subgraph(keep)
    assert np.array_equal(orig_ids, keep)
    pos = {int(orig): i for i, orig in enumerate(keep)}
    want = [set() for _ in range(20)]
    for orig in keep.tolist():
        for w in adj[orig]:
            if w in pos:
                want[pos[orig]].add(pos[w])
    assert sub.adjacency_sets() == want


def test_components_vs_matrix_power():
    rng = np.random.default_rng(3)
    for _ in range(12):
        n = int(rng.integers(10, 90))
        adj = random_gnp_adj_sets(n, float(rng.uniform(0.01, 0.08)), rng)
        u, v = adj_sets_to_edges(adj)
        g = Graph.from_edges(n, u, v)
        got = {frozenset(c.tolist()) for c in components(g)}
        want = set(components_matrix_power(adj))
        assert got == want


def test_components_ordering():
    g = Graph.from_edges(5, np.array([1], np.int32), np.array([3], np.int32))
    comps = components(g)
    assert [c.tolist() for c in comps] == [[0], [1, 3], [2], [4]]


def test_is_connected_and_isolated():
    assert is_connected(path_graph(10))
    g = Graph.from_edges(4, np.array([0], np.int32), np.array([1], np.int32))
    assert not is_connected(g)
    assert isolated_count(g) == 2
    assert isolated_count(path_graph(2)) == 0


def test_diameter_frozen_cases():
    assert diameter_exact(path_graph(10)) == 9
    assert diameter_exact(cycle_graph(12)) == 6
    assert diameter_exact(cycle_graph(13)) == 6
    assert diameter_exact(path_graph(1)) == 0
    assert diameter_exact(path_graph(2)) == 1
    k4_u = np.array([0, 0, 0, 1, 1, 2], np.int32)
    k4_v = np.array([1, 2, 3, 2, 3, 3], np.int32)
    assert diameter_exact(Graph.from_edges(4, k4_u, k4_v)) == 1


def test_diameter_disconnected_raises():
    g = Graph.from_edges(4, np.array([0], np.int32), np.array([1], np.int32))
    with pytest.raises(DisconnectedError):
        diameter_exact(g)


def test_diameter_vs_floyd_warshall():
    rng = np.random.default_rng(4)
    done = 0
    while done < 15:
        n = int(rng.integers(8, 140))
        adj = random_gnp_adj_sets(n, float(rng.uniform(0.05, 0.3)), rng)
        u, v = adj_sets_to_edges(adj)
        g = Graph.from_edges(n, u, v)
        if not is_connected(g):
            continue
        assert diameter_exact(g) == diameter_floyd_warshall(g)
        done += 1


def test_diameter_pruned_path_matches_plain():
    # the cell-based pruning must not change the answer, only the work done
    inst = generate(ModelParams(n=6000, r=0.08, p=0.8, seed=10))
    g = inst.graph
    assert is_connected(g)
    grid = build_grid(0.04, GridMode.AT_MOST)
    cells = grid.cell_ids(inst.points)
    plain = diameter_exact(g)
    assert diameter_exact(g, cell_ids=cells) == plain
    assert _diameter_pruned(g, cells) == plain


def test_diameter_pruned_small_instances():
    rng = np.random.default_rng(6)
    done = 0
    while done < 6:
        seed = int(rng.integers(0, 2**31))
        inst = generate(ModelParams(n=400, r=0.12, p=0.9, seed=seed))
        g = inst.graph
        if not is_connected(g):
            continue
        grid = build_grid(0.06, GridMode.AT_MOST)
        cells = grid.cell_ids(inst.points)
        assert _diameter_pruned(g, cells) == diameter_floyd_warshall(g)
        done += 1


def test_diameter_lower_sampled_is_lower_bound():
    rng = np.random.default_rng(5)
    for _ in range(5):
        n = int(rng.integers(30, 120))
        adj = random_gnp_adj_sets(n, 0.15, rng)
        u, v = adj_sets_to_edges(adj)
        g = Graph.from_edges(n, u, v)
        if not is_connected(g):
            continue
        exact = diameter_exact(g)
        lower = diameter_lower_sampled(g, n_sources=8, seed=1)
        assert lower <= exact
        assert diameter_lower_sampled(g, n_sources=n, seed=2) == exact


def test_degree_report_triangle():
    u = np.array([0, 0, 1], np.int32)
    v = np.array([1, 2, 2], np.int32)
    g = Graph.from_edges(3, u, v)
    rep = degree_report(g, 0.5)
    assert rep.min_degree == 2 and rep.max_degree == 2
    assert rep.mean_degree == pytest.approx(2.0)
    delta = math.sqrt(4.0 * math.log(3) / (3 * 0.5))
    assert rep.delta == pytest.approx(delta)
    # band is (1 +- delta) * (n-1) q with (n-1) q = 1 here
    assert rep.band_lo == pytest.approx(1.0 - delta)
    assert rep.band_hi == pytest.approx(1.0 + delta)
    assert rep.within_band


def test_degree_report_statistics():
    inst = generate(ModelParams(n=4000, r=0.05, p=0.5, seed=8))
    rep = degree_report(inst.graph, inst.params.q)
    mean_expect = (4000 - 1) * inst.params.q
    assert abs(rep.mean_degree - mean_expect) / mean_expect < 0.05
    assert rep.min_degree <= rep.mean_degree <= rep.max_degree


def test_cell_occupancy():
    grid = build_grid(0.25, GridMode.AT_MOST)
    pts = np.array([[0.1, 0.1]])
    rep = cell_occupancy(pts, grid)
    assert rep.max_count == 1
    assert rep.min_count == 0
    assert np.count_nonzero(rep.counts) == 1
    pts = np.array([[0.1, 0.1], [0.12, 0.1], [0.9, 0.9]])
    rep = cell_occupancy(pts, grid)
    assert rep.max_count == 2
    assert np.count_nonzero(rep.counts) == 2
    assert rep.counts.shape == (4, 4)
    assert rep.counts.sum() == 3
