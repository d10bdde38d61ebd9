import math

import numpy as np
import pytest

from starcut.flowgraph import INF, FlowGraph, InfeasibleCutError, min_st_cut

from oracles import cut_capacity, edmonds_karp, min_cut_enumeration


def build(n, s, t, edges):
    g = FlowGraph(n, s, t)
    for u, v, c in edges:
        g.add_edge(u, v, c)
    return g


def random_graph(rng, max_nodes=12, max_edges=20, cap_range=9):
    n = int(rng.integers(2, max_nodes + 3))  # includes the two terminals
    s, t = 0, 1
    m = int(rng.integers(0, max_edges + 1))
    edges = []
    for _ in range(m):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        edges.append((u, v, float(rng.integers(0, cap_range + 1))))
    return n, s, t, edges


def test_single_path_bottleneck():
    g = build(3, 0, 1, [(0, 2, 3.0), (2, 1, 5.0)])
    res = min_st_cut(g)
    assert res.flow_value == 3.0
    assert res.source_side[0]
    assert not res.source_side[1]
    assert not res.source_side[2]  # v sits on the sink side: s->v is saturated


def test_empty_graph():
    g = FlowGraph(5, 0, 4)
    res = min_st_cut(g)
    assert res.flow_value == 0.0
    assert res.source_side.tolist() == [True, False, False, False, False]


def test_classic_instance():
    edges = [
        (0, 2, 16), (0, 3, 13), (2, 3, 10), (3, 2, 4), (2, 4, 12),
        (4, 3, 9), (3, 5, 14), (5, 4, 7), (4, 1, 20), (5, 1, 4),
    ]
    res = min_st_cut(build(6, 0, 1, edges))
    assert res.flow_value == 23.0


def test_parallel_edges_are_additive():
    g = build(3, 0, 2, [(0, 1, 2.0), (0, 1, 3.0), (1, 2, 10.0)])
    assert min_st_cut(g).flow_value == 5.0


def test_infeasible_cut_reported():
    g = build(3, 0, 2, [(0, 1, INF), (1, 2, INF)])
    with pytest.raises(InfeasibleCutError):
        min_st_cut(g)
    # a finite bottleneck on the only path keeps things feasible
    g2 = build(3, 0, 2, [(0, 1, INF), (1, 2, 7.0)])
    assert min_st_cut(g2).flow_value == 7.0


def test_validation_errors():
    with pytest.raises(ValueError):
        FlowGraph(3, 1, 1)
    with pytest.raises(ValueError):
        FlowGraph(3, 0, 3)
    g = FlowGraph(3, 0, 2)
    with pytest.raises(ValueError):
        g.add_edge(0, 1, -1.0)
    with pytest.raises(ValueError):
        g.add_edge(0, 5, 1.0)


def test_matches_oracles_on_random_graphs():
    rng = np.random.default_rng(10)
    for _ in range(300):
        n, s, t, edges = random_graph(rng)
        res = min_st_cut(build(n, s, t, edges))
        oracle_flow, _ = edmonds_karp(n, s, t, edges)
        assert res.flow_value == oracle_flow
        enum_cut, _ = min_cut_enumeration(n, s, t, edges)
        assert res.flow_value == enum_cut
        # duality: capacity across the returned partition equals the flow
        assert cut_capacity(n, edges, res.source_side) == res.flow_value
        assert res.source_side[s] and not res.source_side[t]


def test_monotonicity_adding_edges():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n, s, t, edges = random_graph(rng, max_nodes=6, max_edges=10)
        base = min_st_cut(build(n, s, t, edges)).flow_value
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        bigger = edges + [(u, v, float(rng.integers(1, 10)))]
        assert min_st_cut(build(n, s, t, bigger)).flow_value >= base


def test_scaling_on_unique_minimum_cuts():
    rng = np.random.default_rng(12)
    checked = 0
    for _ in range(200):
        n, s, t, edges = random_graph(rng, max_nodes=5, max_edges=10)
        if not edges:
            continue
        value, n_optimal = min_cut_enumeration(n, s, t, edges)
        if n_optimal != 1 or value == 0.0:
            continue
        base = min_st_cut(build(n, s, t, edges))
        for lam in (0.5, 3.0):
            scaled_edges = [(u, v, c * lam) for u, v, c in edges]
            scaled = min_st_cut(build(n, s, t, scaled_edges))
            assert scaled.flow_value == base.flow_value * lam
            assert np.array_equal(scaled.source_side, base.source_side)
        checked += 1
    assert checked >= 20


def test_deterministic_for_fixed_edge_order():
    rng = np.random.default_rng(13)
    n, s, t, edges = random_graph(rng, max_nodes=10, max_edges=18)
    a = min_st_cut(build(n, s, t, edges))
    b = min_st_cut(build(n, s, t, edges))
    assert a.flow_value == b.flow_value
    assert np.array_equal(a.source_side, b.source_side)


def test_minimal_source_side_tie_break():
    # two equal cuts: {s} vs {s, v}; the source-reachable one is the smaller
    g = build(3, 0, 2, [(0, 1, 5.0), (1, 2, 5.0)])
    res = min_st_cut(g)
    assert res.source_side.tolist() == [True, False, False]


def test_deep_chain():
    n = 600
    edges = [(i, i + 1, 10.0 + (i % 3)) for i in range(n - 1)]
    res = min_st_cut(build(n, 0, n - 1, edges))
    assert res.flow_value == 10.0


def test_zero_capacity_edges_are_inert():
    g = build(4, 0, 3, [(0, 1, 0.0), (1, 3, 4.0), (0, 2, 2.0), (2, 3, 2.0)])
    res = min_st_cut(g)
    assert res.flow_value == 2.0
    assert not res.source_side[1]  # unreachable through a zero edge


def test_bulk_add_edges_matches_single_adds():
    us = np.array([0, 0, 1, 2])
    vs = np.array([1, 2, 3, 3])
    cs = np.array([2.0, 3.0, 2.0, 3.0])
    g1 = FlowGraph(4, 0, 3)
    g1.add_edges(us, vs, cs)
    g2 = build(4, 0, 3, list(zip(us.tolist(), vs.tolist(), cs.tolist())))
    r1, r2 = min_st_cut(g1), min_st_cut(g2)
    assert r1.flow_value == r2.flow_value == 5.0
    assert np.array_equal(r1.source_side, r2.source_side)


def test_dump_round_trip():
    g = build(4, 0, 3, [(0, 1, 2.5), (1, 3, INF), (0, 2, 1.0), (2, 3, 4.0)])
    text = g.dump()
    assert text.splitlines()[0] == "n 4"
    assert "e 1 3 INF" in text
    g2 = FlowGraph.from_dump(text)
    r1, r2 = min_st_cut(g), min_st_cut(g2)
    assert r1.flow_value == r2.flow_value
    assert np.array_equal(r1.source_side, r2.source_side)


def test_float_capacities_duality_within_tolerance():
    rng = np.random.default_rng(14)
    for _ in range(100):
        n, s, t, edges = random_graph(rng, max_nodes=8, max_edges=16)
        edges = [(u, v, c + float(rng.uniform(0, 1))) for u, v, c in edges]
        res = min_st_cut(build(n, s, t, edges))
        cap = cut_capacity(n, edges, res.source_side)
        assert math.isclose(cap, res.flow_value, rel_tol=1e-9, abs_tol=1e-9)
