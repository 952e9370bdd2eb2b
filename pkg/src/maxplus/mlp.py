"""Memory loss property: reductions, genericity diagnostics and certificates.

A word lists generator indices in application order: ``word[0]`` is
``A(1)``. Its product is ``A(n) ⊗ ... ⊗ A(1)``.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import graph as g
from .core import (BOTTOM, MaxPlusError, as_matrix, classify_matrix, mat_power,
                   normalize_max, otimes, product, rank1, resolve_tol)
from .spectral import (PreconditionError, a_plus, critical_summary,
                       crossing_transient, rank1_power, rho_max)


@dataclass(frozen=True)
class ReductionPair:
    c_A: g.Circuit
    kappa: int
    conjugator: np.ndarray
    A_bar: np.ndarray
    B_hat: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ReducednessReport:
    reduced: bool
    strictly_reduced: bool
    zero_positions: List[List[int]]


@dataclass
class GenericityReport:
    e1_ok: bool
    gc_strongly_connected: bool
    a_bar_strictly_reduced: bool
    eqANB_ok: bool
    crossing_N: int
    eqANB_matrix: np.ndarray
    violations: List[dict] = field(default_factory=list)
    exhaustive_forms_checked: Optional[Dict[str, int]] = None
    exhaustive_forms_vanishing: Optional[Dict[str, int]] = None

    @property
    def all_ok(self) -> bool:
        ok = self.e1_ok and self.gc_strongly_connected and self.a_bar_strictly_reduced and self.eqANB_ok
        if self.exhaustive_forms_vanishing is not None:
            ok = ok and not any(self.exhaustive_forms_vanishing.values())
        return ok


@dataclass(frozen=True)
class MlpCertificate:
    word: Tuple[int, ...]
    product: np.ndarray
    decomposition: Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class ConstructionResult:
    found: bool
    m: Optional[int]
    p: Optional[int]
    M: Optional[np.ndarray]
    # smallest critical node count seen over the searched (m, p), for diagnostics
    best_critical_nodes: Optional[int] = None
    best_mp: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class NeighborhoodCertificate:
    center: np.ndarray
    epsilon: float
    n: int
    l: int
    N_inner: int
    gap: float
    M: float


@dataclass
class NeighborhoodReport:
    trials: int
    rank1_count: int
    failures: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.rank1_count == self.trials


class NoWitnessError(MaxPlusError):
    """No certificate within the search bounds; a legitimate outcome."""


def reducedness(A, tol: Optional[float] = None) -> ReducednessReport:
    tol = resolve_tol(tol)
    A = as_matrix(A)
    nonpos = bool(np.all(A <= tol))
    zeros = [[int(j) for j in np.flatnonzero(np.abs(row) <= tol)] for row in A]
    reduced = nonpos and all(zeros)
    strict = nonpos and all(len(z) == 1 for z in zeros)
    return ReducednessReport(reduced, strict, zeros)


def reduce_pair(A, B=None, tol: Optional[float] = None) -> ReductionPair:
    """Conjugate ``A - rho`` (and ``B``) by the column ``Ã+[:, kappa]``."""
    tol = resolve_tol(tol)
    A = as_matrix(A)
    if not g.is_strongly_connected(A):
        raise PreconditionError("reduce_pair needs a strongly connected precedence graph")
    summary = critical_summary(A, tol)
    At = A - summary.rho_max
    col = a_plus(At, tol)[:, summary.kappa]
    shift = col[None, :] - col[:, None]
    A_bar = At + shift
    B_hat = None
    if B is not None:
        B = as_matrix(B)
        if B.shape != A.shape:
            raise MaxPlusError(f"B has shape {B.shape}, expected {A.shape}")
        B_hat = B + shift
    return ReductionPair(summary.c_A, summary.kappa, col, A_bar, B_hat)


def _column_collisions(C: np.ndarray, tol: float) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    """Pairs of finite entries in different columns that are equal within tol."""
    entries = sorted((float(C[i, j]), i, j) for i in range(C.shape[0])
                     for j in range(C.shape[1]) if C[i, j] != BOTTOM)
    hits = []
    for a in range(len(entries)):
        for b in range(a + 1, len(entries)):
            if entries[b][0] - entries[a][0] > tol:
                break
            if entries[a][2] != entries[b][2]:
                hits.append(((entries[a][1], entries[a][2]), (entries[b][1], entries[b][2])))
    return hits


def genericity_report(A, B, exhaustive: bool = False, tol: Optional[float] = None,
                      value_budget: int = 2_000_000) -> GenericityReport:
    """Check the conditions that drive the construction of a certificate for ``(A, B)``."""
    tol = resolve_tol(tol)
    A = as_matrix(A)
    B = as_matrix(B)
    if not classify_matrix(A).primitive:
        raise PreconditionError("genericity_report needs a primitive A")
    if not classify_matrix(B).in_Mk:
        raise PreconditionError("genericity_report needs B without a bottom row")
    violations: List[dict] = []

    circuits = g.elementary_circuits(g.precedence_graph(A))
    avgs = sorted((g.circuit_average(A, c), c) for c in circuits)
    e1_ok = True
    for (w1, c1), (w2, c2) in zip(avgs, avgs[1:]):
        if w2 - w1 <= tol:
            e1_ok = False
            violations.append({"kind": "E1", "circuits": [list(c1), list(c2)], "average": w1})

    summary = critical_summary(A, tol)
    gc_sc = summary.critical_scc_count == 1
    if not gc_sc:
        violations.append({"kind": "critical-graph", "components": [list(c) for c in summary.critical_components]})

    red = reduce_pair(A, B, tol)
    rr = reducedness(red.A_bar, tol)
    if not rr.strictly_reduced:
        violations.append({"kind": "strictly-reduced", "zero_positions": rr.zero_positions})

    N = crossing_transient(red.A_bar, tol).exact_N
    C = otimes(mat_power(red.A_bar, N), red.B_hat)
    hits = _column_collisions(C, tol)
    for (p, q) in hits[:10]:
        violations.append({"kind": "eqANB", "entries": [list(p), list(q)], "value": float(C[p])})

    report = GenericityReport(e1_ok, gc_sc, rr.strictly_reduced, not hits, N, C, violations)
    if exhaustive:
        checked, vanishing, witnesses = exhaustive_forms(A, B, tol, value_budget)
        report.exhaustive_forms_checked = checked
        report.exhaustive_forms_vanishing = vanishing
        report.violations.extend(witnesses)
    return report


def _elementary_paths(k: int, src: int, dst: int) -> List[Tuple[int, ...]]:
    """Elementary paths ``src -> dst`` (``src != dst``) on the complete digraph."""
    out = []
    others = [v for v in range(k) if v not in (src, dst)]
    for r in range(len(others) + 1):
        for mid in itertools.permutations(others, r):
            out.append((src,) + mid + (dst,))
    return out


def _complete_circuits(k: int) -> List[g.Circuit]:
    out = []
    for r in range(1, k + 1):
        for nodes in itertools.combinations(range(k), r):
            first, rest = nodes[0], nodes[1:]
            for perm in itertools.permutations(rest):
                out.append((first,) + perm)
    return sorted(out)


def _walk_weight(A: np.ndarray, nodes: Sequence[int]) -> float:
    return float(sum(A[a, b] for a, b in zip(nodes[:-1], nodes[1:])))


def exhaustive_forms(A, B, tol: Optional[float] = None, value_budget: int = 2_000_000):
    """Evaluate every E1, E2 form at ``A`` and every E3 form at ``(A, B)``.

    Paths live on the complete digraph, so ``A`` and ``B`` must be finite.
    E3 walks ``i -> j`` have length at most ``2k|c|`` for the circuit ``c``
    through ``kappa``. Their weights are grouped into value sets, so the
    comparison is exact; ``value_budget`` bounds the size of those sets.
    """
    tol = resolve_tol(tol)
    A = as_matrix(A)
    B = as_matrix(B)
    k = A.shape[0]
    if k > 4:
        raise PreconditionError("exhaustive form enumeration is limited to k <= 4")
    if (A == BOTTOM).any() or (B == BOTTOM).any():
        raise PreconditionError("exhaustive form enumeration needs finite A and B")
    circuits = _complete_circuits(k)
    avg = {c: g.circuit_average(A, c) for c in circuits}
    checked = {"E1": 0, "E2": 0, "E3": 0}
    vanishing = {"E1": 0, "E2": 0, "E3": 0}
    witnesses: List[dict] = []

    for c1, c2 in itertools.combinations(circuits, 2):
        checked["E1"] += 1
        if abs(avg[c1] - avg[c2]) <= tol:
            vanishing["E1"] += 1
            witnesses.append({"kind": "E1-form", "circuits": [list(c1), list(c2)]})

    elem = {(i, j): _elementary_paths(k, i, j) for i in range(k) for j in range(k) if i != j}
    for (i, kap), paths in elem.items():
        through = [c for c in circuits if kap in c]
        for p1, p2 in itertools.combinations(paths, 2):
            w1, w2 = _walk_weight(A, p1), _walk_weight(A, p2)
            l1, l2 = len(p1) - 1, len(p2) - 1
            for c in through:
                checked["E2"] += 1
                if abs((w1 - l1 * avg[c]) - (w2 - l2 * avg[c])) <= tol:
                    vanishing["E2"] += 1
                    witnesses.append({"kind": "E2-form", "paths": [list(p1), list(p2)], "circuit": list(c)})

    for kap in range(k):
        for c in (c for c in circuits if kap in c):
            a = avg[c]
            Ash = A - a
            L = 2 * k * len(c)
            walks = _walk_value_sets(Ash, L, tol, value_budget)
            # elementary i -> kappa paths; the trivial path when i == kappa
            to_kap = {i: ([0.0] if i == kap else sorted({round(_walk_weight(Ash, p) / tol) * tol
                                                         for p in elem[(i, kap)]}))
                      for i in range(k)}
            tagged: List[Tuple[float, int]] = []
            for i1 in range(k):
                for j1 in range(k):
                    for m1 in range(k):
                        base = B[j1, m1]
                        for wv in walks[i1][j1]:
                            for e_i in to_kap[i1]:
                                for e_m in to_kap[m1]:
                                    tagged.append((base + wv - e_i + e_m, m1))
            if len(tagged) > value_budget:
                raise MaxPlusError(f"E3 value set exceeds value_budget={value_budget}")
            checked["E3"] += len(tagged)
            tagged.sort()
            hits = 0
            for x in range(len(tagged)):
                for y in range(x + 1, len(tagged)):
                    if tagged[y][0] - tagged[x][0] > tol:
                        break
                    if tagged[y][1] != tagged[x][1]:
                        hits += 1
                        if len(witnesses) < 50:
                            witnesses.append({"kind": "E3-form", "kappa": kap, "circuit": list(c),
                                              "value": tagged[x][0], "columns": [tagged[x][1], tagged[y][1]]})
            vanishing["E3"] += hits
    return checked, vanishing, witnesses


def _walk_value_sets(A: np.ndarray, max_len: int, tol: float, budget: int):
    """Distinct weights (rounded to tol) of walks ``i -> j`` of length 1..max_len."""
    k = A.shape[0]
    cur = [[{round(A[i, j] / tol)} for j in range(k)] for i in range(k)]
    total = [[set(cur[i][j]) for j in range(k)] for i in range(k)]
    step = [[round(A[i, j] / tol) for j in range(k)] for i in range(k)]
    for _ in range(max_len - 1):
        nxt = [[set() for _ in range(k)] for _ in range(k)]
        for i in range(k):
            for l in range(k):
                src = cur[i][l]
                for j in range(k):
                    s = step[l][j]
                    nxt[i][j].update(v + s for v in src)
        cur = nxt
        size = 0
        for i in range(k):
            for j in range(k):
                total[i][j] |= cur[i][j]
                size += len(total[i][j])
        if size > budget:
            raise MaxPlusError(f"walk value sets exceed value_budget={budget}")
    return [[sorted(v * tol for v in total[i][j]) for j in range(k)] for i in range(k)]


def _critical_node_count(M: np.ndarray, tol: float) -> int:
    return len(critical_summary(M, tol).critical_nodes)


def construct_scs1cyc1(A, B, m_max: Optional[int] = None, p_max: Optional[int] = None,
                       tol: Optional[float] = None) -> ConstructionResult:
    """Search ``M = A^m ⊗ B ⊗ A^p`` (``m, p >= 1``) that is finite with one critical node.

    Pairs are tried by increasing ``m + p``, then ``m``.
    """
    tol = resolve_tol(tol)
    A = as_matrix(A)
    B = as_matrix(B)
    if not classify_matrix(A).primitive:
        raise PreconditionError("construct_scs1cyc1 needs a primitive A")
    if B.shape != A.shape or not classify_matrix(B).in_Mk:
        raise PreconditionError("construct_scs1cyc1 needs B in M_k with the shape of A")
    k = A.shape[0]
    m_max = 3 * k * k if m_max is None else m_max
    p_max = 3 * k * k if p_max is None else p_max
    # powers of A shifted by rho to keep magnitudes small; shifts do not move the critical graph
    rho = rho_max(A)
    At = A - rho
    pw = [None, At]
    for _ in range(max(m_max, p_max) - 1):
        pw.append(otimes(pw[-1], At))
    best = None
    for total in range(2, m_max + p_max + 1):
        for m in range(max(1, total - p_max), min(m_max, total - 1) + 1):
            p = total - m
            Mt = otimes(otimes(pw[m], B), pw[p])
            if (Mt == BOTTOM).any():
                continue
            count = _critical_node_count(Mt, tol)
            if best is None or count < best[0]:
                best = (count, (m, p))
            if count == 1:
                M = Mt + (m + p) * rho
                return ConstructionResult(True, m, p, M, 1, (m, p))
    if best is None:
        return ConstructionResult(False, None, None, None)
    return ConstructionResult(False, None, None, None, best[0], best[1])


def mlp_construct(A, B, m_max: Optional[int] = None, p_max: Optional[int] = None,
                  tol: Optional[float] = None) -> MlpCertificate:
    """Certificate over generators ``(A, B)`` (indices 0 and 1)."""
    tol = resolve_tol(tol)
    A = as_matrix(A)
    B = as_matrix(B)
    for idx, G in enumerate((A, B)):
        dec = rank1(G, tol)
        if dec is not None:
            return MlpCertificate((idx,), G.copy(), dec)
    res = construct_scs1cyc1(A, B, m_max, p_max, tol)
    if not res.found:
        raise NoWitnessError(
            f"no (m, p) within bounds gives a single critical node "
            f"(best: {res.best_critical_nodes} nodes at {res.best_mp})")
    n, P = rank1_power(res.M, tol)
    block = (0,) * res.p + (1,) + (0,) * res.m
    word = block * n
    prod = product([A if w == 0 else B for w in word])
    dec = rank1(prod, tol)
    if dec is None:  # pragma: no cover - guaranteed by the construction
        raise MaxPlusError("constructed product failed the rank-1 check")
    return MlpCertificate(word, prod, dec)


def _key(P: np.ndarray, tol: float) -> tuple:
    Q = normalize_max(P)
    return tuple(None if x == BOTTOM else int(round(x / tol)) for x in Q.ravel())


def mlp_certificate_search(generators: Sequence, max_depth: int = 10, node_cap: int = 200_000,
                           tol: Optional[float] = None) -> Optional[MlpCertificate]:
    """Breadth-first search for a word whose product has rank 1.

    Products are compared up to an additive constant, so each projective
    class is expanded once.
    """
    tol = resolve_tol(tol)
    gens = [as_matrix(G) for G in generators]
    if not gens:
        raise MaxPlusError("no generators")
    k = gens[0].shape[0]
    for G in gens:
        if G.shape != (k, k) or not classify_matrix(G).in_Mk:
            raise PreconditionError("generators must all be in M_k with the same k")
    seen = set()
    queue = deque()
    for idx, G in enumerate(gens):
        key = _key(G, tol)
        if key in seen:
            continue
        seen.add(key)
        queue.append(((idx,), normalize_max(G)))
    while queue:
        word, P = queue.popleft()
        if rank1(P, tol) is not None:
            prod = product([gens[w] for w in word])
            dec = rank1(prod, tol)
            if dec is not None:
                return MlpCertificate(word, prod, dec)
        if len(word) >= max_depth:
            continue
        for idx, G in enumerate(gens):
            Q = normalize_max(otimes(G, P))
            key = _key(Q, tol)
            if key in seen:
                continue
            if len(seen) >= node_cap:
                return None
            seen.add(key)
            queue.append((word + (idx,), Q))
    return None


def rank1_neighborhood(A, tol: Optional[float] = None) -> NeighborhoodCertificate:
    """Sup-norm ball around ``A`` where every product of length ``n`` has rank 1.

    ``A`` must be finite with a single critical node ``l``.
    """
    tol = resolve_tol(tol)
    A = as_matrix(A)
    if (A == BOTTOM).any():
        raise PreconditionError("rank1_neighborhood needs a finite matrix")
    summary = critical_summary(A, tol)
    if len(summary.critical_nodes) != 1:
        raise PreconditionError(
            f"rank1_neighborhood needs a single critical node, got {len(summary.critical_nodes)}")
    l = summary.critical_nodes[0]
    k = A.shape[0]
    # best average over circuits other than the loop at l
    without = A.copy()
    without[l, l] = BOTTOM
    try:
        runner_up = rho_max(without)
    except PreconditionError:
        runner_up = -math.inf
    gap = float(A[l, l] - runner_up)
    if math.isinf(gap):
        return NeighborhoodCertificate(A.copy(), 1.0, 1, l, 0, gap, float(np.abs(A).max()) + 1.0)
    eps = gap / 4
    M = float(np.abs(A).max()) + eps
    N = math.floor(k + (2 * k + 2) * M / eps) + 1
    return NeighborhoodCertificate(A.copy(), eps, 2 * N + 1, l, N, gap, M)


def _neighborhood_trial(cert: NeighborhoodCertificate, seed: int, trial: int, tol: float):
    rng = np.random.default_rng([seed, trial])
    k = cert.center.shape[0]
    P = None
    for _ in range(cert.n):
        X = cert.center + rng.uniform(-cert.epsilon, cert.epsilon, size=(k, k))
        P = X if P is None else normalize_max(otimes(P, X))
    return rank1(P, tol) is not None, P


def verify_neighborhood(cert: NeighborhoodCertificate, trials: int = 1000, seed: int = 0,
                        tol: Optional[float] = None, threads: int = 1,
                        max_witnesses: int = 5) -> NeighborhoodReport:
    """Sample products of ``cert.n`` matrices from the ball and check rank 1.

    Trial ``t`` draws from a stream keyed by ``(seed, t)``, so the outcome does
    not depend on ``threads``.
    """
    tol = resolve_tol(tol)
    idx = range(trials)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda t: _neighborhood_trial(cert, seed, t, tol), idx))
    else:
        results = [_neighborhood_trial(cert, seed, t, tol) for t in idx]
    report = NeighborhoodReport(trials, 0)
    for t, (ok, P) in enumerate(results):
        if ok:
            report.rank1_count += 1
        elif len(report.failures) < max_witnesses:
            report.failures.append({"trial": t, "product": P})
    return report
