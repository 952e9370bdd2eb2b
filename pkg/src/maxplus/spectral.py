"""Max-plus spectral theory of a single matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import graph as g
from .core import (BOTTOM, MaxPlusError, as_matrix, classify_matrix,
                   mat_power, otimes, rank1, resolve_tol)


class PreconditionError(MaxPlusError):
    pass


class TransientCapError(MaxPlusError):
    pass


@dataclass(frozen=True)
class SpectralSummary:
    rho_max: float
    critical_graph: g.WeightedDigraph
    critical_nodes: Tuple[int, ...]
    critical_components: List[Tuple[int, ...]]
    cyclicity: int
    c_A: g.Circuit
    kappa: int

    @property
    def critical_scc_count(self) -> int:
        return len(self.critical_components)

    @property
    def type_label(self) -> str:
        return f"scs{self.critical_scc_count}-cyc{self.cyclicity}"


@dataclass(frozen=True)
class StabilizedPower:
    transient: int
    limit: np.ndarray


@dataclass(frozen=True)
class CrossingTransient:
    exact_N: int
    proof_bound_N: int
    epsilon: float
    M1: float
    M2: float
    primitivity_index: int


def _karp(A: np.ndarray, comp: List[int]) -> float:
    """Maximum cycle mean of the strongly connected block ``comp`` (Karp)."""
    sub = A[np.ix_(comp, comp)]
    n = len(comp)
    D = np.full((n + 1, n), BOTTOM)
    D[0, 0] = 0.0
    for step in range(1, n + 1):
        D[step] = otimes(sub.T, D[step - 1])
    best = BOTTOM
    for v in range(n):
        if D[n, v] == BOTTOM:
            continue
        worst = math.inf
        for step in range(n):
            if D[step, v] != BOTTOM:
                worst = min(worst, (D[n, v] - D[step, v]) / (n - step))
        best = max(best, worst)
    return best


def rho_max(A) -> float:
    """Largest average weight of a circuit of the precedence graph."""
    A = as_matrix(A)
    G = g.precedence_graph(A)
    best = BOTTOM
    for comp in g.strongly_connected_components(G):
        if len(comp) == 1 and A[comp[0], comp[0]] == BOTTOM:
            continue
        best = max(best, _karp(A, comp))
    if best == BOTTOM:
        raise PreconditionError("the precedence graph has no circuit; rho_max is undefined")
    return float(best)


def normalize(A) -> np.ndarray:
    A = as_matrix(A)
    return A - rho_max(A)


def _plus(A: np.ndarray) -> np.ndarray:
    k = A.shape[0]
    acc = A.copy()
    P = A
    for _ in range(k - 1):
        P = otimes(P, A)
        acc = np.maximum(acc, P)
    return acc


def a_plus(A, tol: Optional[float] = None) -> np.ndarray:
    """``A+ = A ⊕ A^2 ⊕ ... ⊕ A^k``; requires ``rho_max(A) <= 0``."""
    tol = resolve_tol(tol)
    A = as_matrix(A)
    try:
        rho = rho_max(A)
    except PreconditionError:
        rho = BOTTOM
    if rho > tol:
        raise PreconditionError(f"a_plus needs rho_max <= 0, got {rho:g}")
    return _plus(A)


def _critical_arcs(At: np.ndarray, tol: float) -> dict:
    """Arcs of the normalized matrix lying on a zero-weight circuit."""
    k = At.shape[0]
    P = _plus(At)
    arcs = {}
    for i in range(k):
        for j in range(k):
            if At[i, j] == BOTTOM:
                continue
            back = 0.0 if i == j else P[j, i]
            if back == BOTTOM:
                continue
            if At[i, j] + back >= -tol:
                arcs[(i, j)] = At[i, j]
    return arcs


def _smallest_circuit(G: g.WeightedDigraph) -> g.Circuit:
    """Lexicographically smallest elementary circuit, found greedily."""
    start = min(G.nodes_with_arcs)
    path = [start]
    while True:
        v = path[-1]
        if (v, start) in G.arcs:
            return tuple(path)
        visited = set(path)
        for w in G.successors(v):
            if w in visited:
                continue
            # w must still reach start through unvisited nodes
            R = g.reachability(G, set(range(G.k)) - visited)
            if any(R[w, u] and (u, start) in G.arcs for u in range(G.k)):
                path.append(w)
                break
        else:  # pragma: no cover - every critical node lies on a circuit
            raise MaxPlusError("critical graph has a dead end")


def critical_summary(A, tol: Optional[float] = None) -> SpectralSummary:
    tol = resolve_tol(tol)
    A = as_matrix(A)
    rho = rho_max(A)
    At = A - rho
    arcs = {a: float(A[a]) for a in _critical_arcs(At, tol)}
    Gc = g.WeightedDigraph(A.shape[0], arcs)
    nodes = tuple(Gc.nodes_with_arcs)
    report = g.scc_and_cyclicity(Gc, nodes)
    c_A = _smallest_circuit(Gc)
    return SpectralSummary(rho, Gc, nodes, report.components,
                           report.global_cyclicity, c_A, min(c_A))


def critical_eigenvectors(A, tol: Optional[float] = None) -> List[Tuple[int, np.ndarray]]:
    """Columns ``A+[:, i]`` for critical ``i``; each is an eigenvector for 0."""
    tol = resolve_tol(tol)
    A = as_matrix(A)
    rho = rho_max(A)
    if abs(rho) > tol:
        raise PreconditionError(f"critical_eigenvectors needs rho_max = 0, got {rho:g}; normalize first")
    P = _plus(A)
    summary = critical_summary(A, tol)
    return [(i, P[:, i].copy()) for i in summary.critical_nodes]


def limit_power(A, tol: Optional[float] = None) -> np.ndarray:
    """``Q[i, j] = max over critical l of A+[i, l] + A+[l, j]``."""
    A = as_matrix(A)
    P = _plus(A)
    crit = list(critical_summary(A, tol).critical_nodes)
    return otimes(P[:, crit], P[crit, :])


def _close(X: np.ndarray, Y: np.ndarray, tol: float) -> bool:
    bx, by = X == BOTTOM, Y == BOTTOM
    if not np.array_equal(bx, by):
        return False
    return bool(np.all(np.abs(X[~bx] - Y[~bx]) <= tol))


def stabilized_power(A, tol: Optional[float] = None, max_steps: Optional[int] = None) -> StabilizedPower:
    """Smallest ``N`` with ``A^N = A^(N+1) = Q``.

    Requires a strongly connected precedence graph, ``rho_max = 0`` and
    cyclicity 1.
    """
    tol = resolve_tol(tol)
    A = as_matrix(A)
    if not g.is_strongly_connected(A):
        raise PreconditionError("stabilized_power needs a strongly connected precedence graph")
    rho = rho_max(A)
    if abs(rho) > tol:
        raise PreconditionError(f"stabilized_power needs rho_max = 0, got {rho:g}")
    summary = critical_summary(A, tol)
    if summary.cyclicity != 1:
        raise PreconditionError(f"stabilized_power needs cyclicity 1, got {summary.type_label}")
    Q = limit_power(A, tol)
    cap = _default_cap(A, summary) if max_steps is None else max_steps
    P = A.copy()
    for n in range(1, cap + 1):
        if _close(P, Q, tol):
            nxt = otimes(A, P)
            if _close(nxt, Q, tol):
                return StabilizedPower(n, Q)
        P = otimes(A, P)
    raise TransientCapError(f"powers did not stabilize within max_steps={cap}")


def rank1_power(A, tol: Optional[float] = None, max_steps: Optional[int] = None) -> Tuple[int, np.ndarray]:
    """Smallest ``n`` such that ``A^n`` has rank 1, for finite scs1-cyc1 ``A``."""
    tol = resolve_tol(tol)
    A = as_matrix(A)
    if (A == BOTTOM).any():
        raise PreconditionError("rank1_power needs a matrix with finite entries")
    summary = critical_summary(A, tol)
    if summary.type_label != "scs1-cyc1":
        raise PreconditionError(f"rank1_power needs type scs1-cyc1, got {summary.type_label}")
    At = A - summary.rho_max
    cap = _default_cap(At, summary) if max_steps is None else max_steps
    P = At.copy()
    for n in range(1, cap + 1):
        if rank1(P, tol) is not None:
            return n, P + n * summary.rho_max
        P = otimes(At, P)
    raise TransientCapError(f"no rank-1 power within max_steps={cap}")


def _avoiding(At: np.ndarray, nodes) -> np.ndarray:
    Z = At.copy()
    idx = list(nodes)
    Z[idx, :] = BOTTOM
    Z[:, idx] = BOTTOM
    return Z


def _safe_crossing(At: np.ndarray, crit, N1: int, L: int) -> tuple:
    """``(eps, N)``: past length ``N`` no maximizing path avoids ``crit``.

    For n >= 2*N1, A^n >= 2*low by routing through a critical circuit of
    length L, while an avoiding path weighs at most k|M2| - eps*(n - k).
    """
    k = At.shape[0]
    try:
        eps = -rho_max(_avoiding(At, crit))
    except PreconditionError:
        return math.inf, 1
    M2 = float(At.max())
    low = min(float(mat_power(At, N1 + r).min()) for r in range(L))
    return eps, max(2 * N1 + 1, math.floor((k * (abs(M2) + eps) - 2 * low) / eps) + 2)


def _default_cap(At: np.ndarray, summary: SpectralSummary) -> int:
    """Step cap for power iterations: crossing time on both ends plus a
    Wielandt-sized stretch inside the critical graph."""
    k = At.shape[0]
    cls = classify_matrix(At)
    if not cls.primitive:
        return 4 * k ** 3
    _, N = _safe_crossing(At, summary.critical_nodes, cls.primitivity_index, len(summary.c_A))
    return max(4 * k ** 3, 2 * N + k * k + 1)


def crossing_transient(A, tol: Optional[float] = None, max_steps: int = 10_000) -> CrossingTransient:
    """Length after which every maximizing path crosses the critical graph.

    ``exact_N`` is found by comparing best path weights with the best
    weights of paths that avoid critical nodes. ``proof_bound_N`` is the
    closed-form bound ``k(|M2| + eps) - N eps < 2 M1``.
    """
    tol = resolve_tol(tol)
    A = as_matrix(A)
    k = A.shape[0]
    cls = classify_matrix(A)
    if not cls.primitive:
        raise PreconditionError("crossing_transient needs a primitive matrix")
    N1 = cls.primitivity_index
    summary = critical_summary(A, tol)
    At = A - summary.rho_max
    crit = summary.critical_nodes
    Z = _avoiding(At, crit)
    eps, safe = _safe_crossing(At, crit, N1, len(summary.c_A))
    M1 = float(mat_power(At, N1).min())
    M2 = float(At.max())
    if math.isinf(eps):
        bound = N1
    else:
        bound = max(1, math.floor((k * (abs(M2) + eps) - 2 * M1) / eps) + 1)
    horizon = min(max(safe, bound) + k, max_steps)

    last_bad = 0
    P = At.copy()
    W = Z.copy()
    for n in range(1, horizon + 1):
        bad = (W != BOTTOM) & (W >= P - tol)
        if bad.any():
            last_bad = n
        P = otimes(P, At)
        W = otimes(W, Z)
    return CrossingTransient(last_bad + 1, int(bound), float(eps), M1, M2, N1)
