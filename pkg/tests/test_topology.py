import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xynet.topology import (
    NetworkGraph,
    OddCycleError,
    Resonance,
    Topology,
    classify_topology,
    graph_from_json,
    graph_to_json,
    make_named_topology,
    parity_signs,
    resonance_check,
    validate_graph,
)


def small_graphs(nmax=7):
    for G in nx.graph_atlas_g()[1:]:
        n = G.number_of_nodes()
        if 2 <= n <= nmax and nx.is_connected(G):
            yield NetworkGraph.from_edges(n, [(a + 1, b + 1) for a, b in G.edges()])


def brute_force_bipartite(g):
    # any proper 2-coloring; fix vertex 1 to color 0
    for colors in itertools.product((0, 1), repeat=g.n - 1):
        c = (0,) + colors
        if all(c[k - 1] != c[l - 1] for k, l in g.edges):
            return True
    return False


def test_validate_chain_ok():
    assert validate_graph(make_named_topology("chain", 3)).ok


def test_validate_disconnected():
    g = NetworkGraph.from_edges(4, [(1, 2), (3, 4)])
    res = validate_graph(g)
    assert not res.ok
    assert "disconnected" in res.violations


def test_validate_negative_rate():
    g = NetworkGraph.from_edges(3, [(1, 2), (2, 3)], gamma=[1.0, -0.5])
    res = validate_graph(g)
    assert any("nonpositive decay rate" in v for v in res.violations)


def test_validate_reports_structure_problems():
    g = NetworkGraph(3, ((1, 1), (1, 2), (2, 3), (2, 3)), 1.0, 1.0, (0, 0, 0))
    v = validate_graph(g).violations
    assert any("self-loop" in x for x in v)
    assert any("duplicate" in x for x in v)
    assert not validate_graph(NetworkGraph(1, (), 1.0, 1.0, (0.0,))).ok


@pytest.mark.parametrize("kind,n,expected", [
    ("ring", 4, Topology.BIPARTITE),
    ("ring", 3, Topology.ODD_CYCLE),
    ("chain", 2, Topology.BIPARTITE),
    ("chain", 7, Topology.BIPARTITE),
    ("star", 5, Topology.BIPARTITE),
    ("complete", 3, Topology.ODD_CYCLE),
])
def test_classify_named(kind, n, expected):
    assert classify_topology(make_named_topology(kind, n)).kind is expected


def test_triangle_witness():
    t = classify_topology(make_named_topology("ring", 3))
    assert len(t.witness) == 3
    assert sorted(t.witness) == [1, 2, 3]


def test_classify_matches_brute_force_all_graphs_n_le_7():
    count = 0
    for g in small_graphs(7):
        topo = classify_topology(g)
        assert topo.bipartite == brute_force_bipartite(g)
        if not topo.bipartite:
            w = topo.witness
            assert len(w) % 2 == 1 and len(set(w)) == len(w)
            for a, b in zip(w, w[1:] + w[:1]):
                assert (min(a, b), max(a, b)) in g.edges
        count += 1
    assert count == 995  # 1 + 2 + 6 + 21 + 112 + 853 connected graphs on 2..7 vertices


def test_parity_signs_examples():
    assert parity_signs(make_named_topology("chain", 3)).signs == (1, -1, 1)
    assert parity_signs(make_named_topology("ring", 4)).signs == (1, -1, 1, -1)
    with pytest.raises(OddCycleError) as exc:
        parity_signs(make_named_topology("ring", 3))
    assert len(exc.value.witness) == 3


def test_parity_signs_consistent_on_all_bipartite_graphs():
    for g in small_graphs(7):
        if classify_topology(g).bipartite:
            s = parity_signs(g)
            assert s[1] == 1
            assert all(s[k] * s[l] == -1 for k, l in g.edges)


@pytest.mark.parametrize("omega,kind,d", [
    ((1, 2, 1), Resonance.DEGENERATE, (0, 0, 0)),
    ((2, 3, 2), Resonance.RESONANT_NONZERO, (1, 1, 1)),
    ((1, 1, 1), Resonance.OFF_RESONANT, (0, -1, 0)),
])
def test_resonance_examples(omega, kind, d):
    g = NetworkGraph.from_edges(3, [(1, 2), (2, 3)], J=1.0, omega=list(omega))
    rep = resonance_check(g)
    assert rep.kind is kind
    np.testing.assert_allclose(rep.per_vertex, d)


def test_named_topology_omegas():
    assert make_named_topology("chain", 4).omega == (1, 2, 2, 1)
    assert make_named_topology("ring", 4).omega == (2, 2, 2, 2)
    assert make_named_topology("chain", 4, omega=3.0).omega == (3, 3, 3, 3)
    for kind in ("chain", "ring", "star", "complete"):
        g = make_named_topology(kind, 5, J=0.7)
        assert resonance_check(g).kind is Resonance.DEGENERATE


@pytest.mark.parametrize("kind,n", [("chain", 1), ("ring", 2), ("blob", 3)])
def test_named_topology_errors(kind, n):
    with pytest.raises(ValueError):
        make_named_topology(kind, n)


@settings(max_examples=60, deadline=None)
@given(st.permutations(list(range(1, 7))), st.sampled_from(["chain", "ring", "star", "complete"]),
       st.floats(-2, 2))
def test_resonance_invariant_under_relabeling(perm, kind, shift):
    g = make_named_topology(kind, 6, J=0.9)
    g = NetworkGraph(g.n, g.edges, g.J, g.gamma, tuple(w + shift for w in g.omega))
    h = g.relabel(perm)
    assert resonance_check(h).kind is resonance_check(g).kind
    assert classify_topology(h).kind is classify_topology(g).kind


def test_graph_json_roundtrip():
    g = NetworkGraph.from_edges(4, [(1, 2), (2, 3), (3, 4)], J=[1, 2, 3], gamma=0.5)
    assert graph_from_json(graph_to_json(g)) == g
    h = graph_from_json({"n": 3, "edges": [[1, 2], [2, 3]], "J": 1, "gamma": 1,
                         "omega": {"mode": "degenerate"}})
    assert h.omega == (1, 2, 1)
    named = graph_from_json({"kind": "ring", "n": 4})
    assert named == make_named_topology("ring", 4)
