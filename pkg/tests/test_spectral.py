import itertools

import numpy as np
import pytest

from maxplus import graph as g
from maxplus.core import classify_matrix, identity, mat_power, otimes, proportional, rank1
from maxplus.spectral import (PreconditionError, TransientCapError, a_plus,
                              critical_eigenvectors, critical_summary, crossing_transient,
                              limit_power, normalize, rank1_power, rho_max, stabilized_power)

from helpers import (A1, A2, A3, NEG, brute_circuits, brute_rho, circuit_avg,
                     floyd_best_paths, integer_normalized, random_matrix)


def test_rho_examples():
    assert rho_max(A1) == 1
    assert rho_max(identity(2)) == 0
    assert rho_max(A3) == 2
    with pytest.raises(PreconditionError):
        rho_max([[NEG, 1], [NEG, NEG]])


def test_rho_matches_circuit_oracle():
    rng = np.random.default_rng(0)
    n = 0
    while n < 300:
        A = random_matrix(rng, int(rng.integers(2, 7)))
        ref = brute_rho(A)
        if ref is None:
            continue
        assert rho_max(A) == pytest.approx(ref, abs=1e-9)
        assert rho_max(normalize(A)) == pytest.approx(0, abs=1e-9)
        n += 1


def test_normalize_examples():
    np.testing.assert_array_equal(normalize(A1), [[-1, 2], [-2, 0]])
    np.testing.assert_array_equal(normalize(A3), [[0, -2], [-2, -5]])
    np.testing.assert_array_equal(normalize(identity(2)), identity(2))


def test_critical_summary_examples():
    s = critical_summary(A1)
    assert s.critical_nodes == (0, 1)
    assert set(s.critical_graph.arcs) == {(0, 1), (1, 0), (1, 1)}
    assert (s.type_label, s.c_A, s.kappa) == ("scs1-cyc1", (0, 1), 0)
    s = critical_summary(A3)
    assert s.critical_nodes == (0,) and set(s.critical_graph.arcs) == {(0, 0)}
    assert (s.type_label, s.c_A, s.kappa) == ("scs1-cyc1", (0,), 0)
    assert critical_summary(identity(2)).type_label == "scs2-cyc1"


def test_critical_graph_matches_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(300):
        A = random_matrix(rng, int(rng.integers(2, 6)), p_finite=0.7, low=-3, high=3, integer=True)
        cs = brute_circuits(A)
        if not cs:
            continue
        rho = max(circuit_avg(A, c) for c in cs)
        crit = [c for c in cs if abs(circuit_avg(A, c) - rho) <= 1e-9]
        arcs = {a for c in crit for a in zip(c, c[1:] + c[:1])}
        s = critical_summary(A)
        assert set(s.critical_graph.arcs) == arcs
        assert s.c_A == min(crit)
        assert s.kappa == min(s.c_A)
        lab = g.scc_and_cyclicity(s.critical_graph, s.critical_nodes)
        assert s.type_label == f"scs{len(lab.components)}-cyc{lab.global_cyclicity}"


def test_a_plus_examples():
    np.testing.assert_array_equal(a_plus([[-1, 2], [-2, 0]]), [[0, 2], [-2, 0]])
    np.testing.assert_array_equal(a_plus([[0, -2], [-2, -5]]), [[0, -2], [-2, -4]])
    with pytest.raises(PreconditionError):
        a_plus(A3)


def test_a_plus_matches_floyd():
    rng = np.random.default_rng(2)
    for _ in range(200):
        A = random_matrix(rng, int(rng.integers(2, 6)), p_finite=0.6)
        try:
            At = normalize(A)
        except PreconditionError:
            At = A
        np.testing.assert_allclose(a_plus(At), floyd_best_paths(At), atol=1e-9)


def test_eigenvector_examples():
    At1 = normalize(A1)
    vecs = dict(critical_eigenvectors(At1))
    np.testing.assert_array_equal(vecs[0], [0, -2])
    np.testing.assert_array_equal(otimes(At1, vecs[0]), [0, -2])
    np.testing.assert_array_equal(vecs[1], [2, 0])
    assert proportional(vecs[1], vecs[0]) == 2
    np.testing.assert_array_equal(dict(critical_eigenvectors(normalize(A3)))[0], [0, -2])
    with pytest.raises(PreconditionError):
        critical_eigenvectors(A3)


def _in_span(b, S):
    """Residuation oracle: b in span(S) iff S ⊗ x = b for x_j = min_i (b_i - S_ij)."""
    x = []
    for j in range(S.shape[1]):
        terms = [b[i] - S[i, j] for i in range(len(b)) if S[i, j] > NEG and b[i] > NEG]
        if any(S[i, j] > NEG and b[i] == NEG for i in range(len(b))):
            x.append(NEG)
        else:
            x.append(min(terms) if terms else NEG)
    return np.array_equal(otimes(S, np.array(x)), b)


def test_eigenvector_propositions():
    rng = np.random.default_rng(3)
    checked_vi = 0
    for _ in range(300):
        At = integer_normalized(rng, int(rng.integers(2, 6)), p_finite=0.6)
        if At is None:
            continue
        s = critical_summary(At)
        vecs = dict(critical_eigenvectors(At))
        for i, v in vecs.items():
            np.testing.assert_array_equal(otimes(At, v), v)
        for comp in s.critical_components:
            for i, j in itertools.combinations(comp, 2):
                assert proportional(vecs[i], vecs[j]) is not None
        for comp in s.critical_components:
            others = [j for c in s.critical_components if c != comp for j in c]
            if not others:
                continue
            S = np.column_stack([vecs[j] for j in others])
            for i in comp:
                assert not _in_span(vecs[i], S)
                checked_vi += 1
    assert checked_vi > 20


def test_stabilized_power_examples():
    sp = stabilized_power(normalize(A1))
    assert sp.transient == 2
    np.testing.assert_array_equal(sp.limit, [[0, 2], [-2, 0]])
    np.testing.assert_array_equal(limit_power(normalize(A1)), sp.limit)
    sp = stabilized_power([[0.0]])
    assert sp.transient == 1
    with pytest.raises(PreconditionError):
        stabilized_power(identity(2))
    with pytest.raises(PreconditionError):
        stabilized_power(A3)
    with pytest.raises(PreconditionError):
        stabilized_power([[NEG, 0], [0, NEG]])


def test_stabilized_power_cap_is_named():
    with pytest.raises(TransientCapError, match="max_steps=1"):
        stabilized_power(normalize(A1), max_steps=1)


def test_rank1_power_examples():
    n, P = rank1_power(A1)
    assert n == 2
    np.testing.assert_array_equal(P, [[2, 4], [0, 2]])
    n, P = rank1_power(A3)
    assert n == 2
    np.testing.assert_array_equal(P, [[4, 2], [2, 0]])
    assert rank1_power(A2)[0] == 1
    with pytest.raises(PreconditionError, match="scs2-cyc1"):
        rank1_power(np.array([[0.0, -5], [-5, 0]]))


def test_rank1_power_is_minimal():
    rng = np.random.default_rng(4)
    for _ in range(100):
        A = rng.integers(-6, 7, size=(3, 3)).astype(float)
        if critical_summary(A).type_label != "scs1-cyc1":
            continue
        n, P = rank1_power(A)
        np.testing.assert_allclose(P, mat_power(A, n))
        assert rank1(P) is not None
        assert all(rank1(mat_power(A, m)) is None for m in range(1, n))


def _brute_crossing_ok(At, crit, n):
    """All maximizing paths of length n cross a critical node (path enumeration)."""
    k = At.shape[0]
    P = mat_power(At, n)
    for path in itertools.product(range(k), repeat=n + 1):
        w = sum(At[a, b] for a, b in zip(path, path[1:]))
        if w == NEG or abs(w - P[path[0], path[-1]]) > 1e-9:
            continue
        if not set(path) & set(crit):
            return False
    return True


def test_crossing_examples():
    assert crossing_transient(normalize(A3)).exact_N == 2
    assert crossing_transient([[4.0]]).exact_N == 1
    assert crossing_transient([[0.0, -4], [0, -5]]).exact_N == 2
    with pytest.raises(PreconditionError):
        crossing_transient([[NEG, 0], [0, NEG]])


def test_crossing_matches_path_enumeration():
    rng = np.random.default_rng(5)
    done = 0
    while done < 40:
        A = random_matrix(rng, 3, p_finite=0.8, low=-4, high=4, integer=True)
        if not classify_matrix(A).primitive:
            continue
        ct = crossing_transient(A)
        if ct.exact_N > 7:
            continue
        At = normalize(A)
        crit = critical_summary(A).critical_nodes
        for n in range(1, ct.exact_N + 3):
            assert _brute_crossing_ok(At, crit, n) == (n >= ct.exact_N or
                                                      all(_brute_crossing_ok(At, crit, m)
                                                          for m in range(n, ct.exact_N)))
        if ct.exact_N > 1:
            assert not _brute_crossing_ok(At, crit, ct.exact_N - 1)
        done += 1


def test_crossing_without_avoiding_circuits():
    ct = crossing_transient(np.zeros((3, 3)))
    assert ct.epsilon == np.inf
    assert ct.exact_N == 1 and ct.proof_bound_N == ct.primitivity_index
