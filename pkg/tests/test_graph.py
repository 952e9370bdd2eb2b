import math

import networkx as nx
import numpy as np
import pytest

from maxplus.core import MaxPlusError, identity
from maxplus.graph import (CircuitCapError, WeightedDigraph, canonical_circuit,
                           elementary_circuits, path_stats, precedence_graph,
                           scc_and_cyclicity, strongly_connected_components)

from helpers import A1, A3, NEG, brute_circuits, random_matrix, reach_closure


def graph_of(k, arcs):
    return WeightedDigraph(k, {a: 0.0 for a in arcs})


def test_precedence_graph_examples():
    assert len(precedence_graph(A3).arcs) == 4
    assert precedence_graph(identity(2)).arcs == {(0, 0): 0.0, (1, 1): 0.0}
    assert precedence_graph([[NEG, 1], [NEG, NEG]]).arcs == {(0, 1): 1.0}


def test_circuits_examples():
    assert elementary_circuits(precedence_graph(np.zeros((2, 2)))) == [(0,), (0, 1), (1,)]
    assert len(elementary_circuits(precedence_graph(np.zeros((3, 3))))) == 8
    assert elementary_circuits(graph_of(2, [(0, 1)])) == []


@pytest.mark.parametrize("k", range(1, 6))
def test_complete_graph_circuit_count(k):
    expected = sum(math.comb(k, i) * math.factorial(i - 1) for i in range(1, k + 1))
    assert len(elementary_circuits(precedence_graph(np.zeros((k, k))))) == expected


def test_circuits_match_oracles():
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = int(rng.integers(1, 7))
        A = random_matrix(rng, k, p_finite=0.5)
        G = precedence_graph(A)
        got = elementary_circuits(G)
        assert got == brute_circuits(A)
        nxg = nx.DiGraph(list(G.arcs))
        assert sorted(canonical_circuit(c) for c in nx.simple_cycles(nxg)) == got


def test_circuits_are_elementary_and_canonical():
    rng = np.random.default_rng(1)
    A = random_matrix(rng, 6, p_finite=0.6)
    G = precedence_graph(A)
    for c in elementary_circuits(G):
        assert len(set(c)) == len(c)
        assert all(arc in G.arcs for arc in zip(c, c[1:] + c[:1]))
        assert c[0] == min(c)
        for r in range(len(c)):
            assert canonical_circuit(c[r:] + c[:r]) == c


def test_circuit_cap():
    with pytest.raises(CircuitCapError, match="non-enumerative"):
        elementary_circuits(precedence_graph(np.zeros((13, 13))))
    assert len(elementary_circuits(precedence_graph(np.zeros((3, 3))), cap=3)) == 8


def test_path_stats_examples():
    s = path_stats(A1, [0, 1, 0])
    assert (s.weight, s.length, s.average_weight) == (2, 2, 1)
    s = path_stats(A1, [1, 1])
    assert (s.weight, s.length, s.average_weight) == (1, 1, 1)
    assert path_stats([[0, NEG], [0, 0]], [0, 1, 1]).weight == NEG
    with pytest.raises(MaxPlusError):
        path_stats(A1, [0])


def test_scc_examples():
    r = scc_and_cyclicity(graph_of(2, [(0, 1), (1, 0), (1, 1)]))
    assert r.components == [(0, 1)] and r.per_component_cyclicity == [1] and r.global_cyclicity == 1
    r = scc_and_cyclicity(graph_of(2, [(0, 0), (1, 1)]))
    assert r.components == [(0,), (1,)] and r.per_component_cyclicity == [1, 1]
    assert r.global_cyclicity == 1
    r = scc_and_cyclicity(graph_of(2, [(0, 1), (1, 0)]))
    assert r.global_cyclicity == 2


def test_no_circuit_has_no_cyclicity():
    r = scc_and_cyclicity(graph_of(3, [(0, 1), (1, 2)]))
    assert r.global_cyclicity is None
    assert r.per_component_cyclicity == [None, None, None]


def test_lcm_of_components():
    r = scc_and_cyclicity(graph_of(5, [(0, 1), (1, 0), (2, 3), (3, 4), (4, 2)]))
    assert sorted(c for c in r.per_component_cyclicity if c) == [2, 3]
    assert r.global_cyclicity == 6


def test_scc_matches_reachability_oracle():
    rng = np.random.default_rng(2)
    for _ in range(200):
        k = int(rng.integers(1, 7))
        A = random_matrix(rng, k, p_finite=0.35)
        R = reach_closure(A > NEG)
        mutual = R & R.T
        expected = sorted({tuple(np.flatnonzero(mutual[i])) for i in range(k)})
        assert strongly_connected_components(precedence_graph(A)) == [list(c) for c in expected]


def test_cyclicity_matches_circuit_gcd():
    rng = np.random.default_rng(3)
    for _ in range(200):
        k = int(rng.integers(1, 7))
        A = random_matrix(rng, k, p_finite=0.35)
        G = precedence_graph(A)
        rep = scc_and_cyclicity(G)
        circuits = brute_circuits(A)
        for comp, cyc in zip(rep.components, rep.per_component_cyclicity):
            lengths = [len(c) for c in circuits if set(c) <= set(comp)]
            assert cyc == (math.gcd(*lengths) if lengths else None)


@pytest.mark.parametrize("n", range(1, 8))
def test_cycle_cyclicity(n):
    arcs = [(i, (i + 1) % n) for i in range(n)]
    assert scc_and_cyclicity(graph_of(n, arcs)).global_cyclicity == n
    assert scc_and_cyclicity(graph_of(n, arcs + [(0, 0)])).global_cyclicity == 1
