"""Shared matrices, random generators and brute-force oracles for the tests."""

import itertools
import math
from fractions import Fraction

import numpy as np

NEG = -np.inf

A1 = np.array([[0.0, 3.0], [-1.0, 1.0]])
A2 = np.array([[0.0, 3.0], [-1.0, 2.0]])
A3 = np.array([[2.0, 0.0], [0.0, -3.0]])
B = np.array([[0.0, 5.0], [1.0, 0.0]])
G1 = np.array([[0.0, 2.0], [3.0, 1.0]])
G2 = np.array([[1.0, 2.0], [3.0, 2.0]])


def random_matrix(rng, k, p_finite=0.8, low=-10, high=10, integer=False):
    if integer:
        A = rng.integers(low, high + 1, size=(k, k)).astype(float)
    else:
        A = rng.uniform(low, high, size=(k, k))
    A[rng.random((k, k)) >= p_finite] = NEG
    return A


def brute_circuits(A):
    """Elementary circuits of the graph of A by checking every node sequence."""
    k = A.shape[0]
    out = []
    for r in range(1, k + 1):
        for perm in itertools.permutations(range(k), r):
            if perm[0] != min(perm):
                continue
            arcs = list(zip(perm, perm[1:] + perm[:1]))
            if all(A[i, j] > NEG for i, j in arcs):
                out.append(perm)
    return sorted(out)


def circuit_avg(A, c):
    arcs = list(zip(c, c[1:] + c[:1]))
    return sum(A[i, j] for i, j in arcs) / len(c)


def brute_rho(A):
    cs = brute_circuits(A)
    return max(circuit_avg(A, c) for c in cs) if cs else None


def exact_rho(A):
    """rho_max as a Fraction, for integer matrices."""
    best = None
    for c in brute_circuits(A):
        arcs = list(zip(c, c[1:] + c[:1]))
        v = Fraction(int(sum(A[i, j] for i, j in arcs)), len(c))
        best = v if best is None or v > best else best
    return best


def naive_otimes(A, B):
    n, m = A.shape[0], B.shape[1]
    out = np.full((n, m), NEG)
    for i in range(n):
        for j in range(m):
            for l in range(A.shape[1]):
                out[i, j] = max(out[i, j], A[i, l] + B[l, j])
    return out


def floyd_best_paths(A):
    """Best weight of a nonempty path i -> j (valid when no circuit is positive)."""
    k = A.shape[0]
    D = A.copy()
    for l in range(k):
        for i in range(k):
            for j in range(k):
                D[i, j] = max(D[i, j], D[i, l] + D[l, j])
    return D


def reach_closure(adj):
    k = adj.shape[0]
    R = adj.copy() | np.eye(k, dtype=bool)
    for l in range(k):
        R = R | (R[:, [l]] & R[[l], :])
    return R


def lcm_upto(k):
    return math.lcm(*range(1, k + 1))


def integer_normalized(rng, k, low=-5, high=5, p_finite=0.8):
    """Integer matrix with rho_max = 0: scale by lcm(1..k), then subtract rho."""
    A = random_matrix(rng, k, p_finite=p_finite, low=low, high=high, integer=True)
    rho = exact_rho(A)
    if rho is None:
        return None
    L = lcm_upto(k)
    return A * L - int(rho * L)
