"""Weighted precedence graphs of max-plus matrices.

Nodes are ``0..k-1``. Circuits are tuples of distinct nodes rotated so the
smallest node comes first; the closing arc is implicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import BOTTOM, MaxPlusError, as_matrix

DEFAULT_CIRCUIT_CAP = 12

Circuit = Tuple[int, ...]


class CircuitCapError(MaxPlusError):
    pass


@dataclass(frozen=True)
class WeightedDigraph:
    k: int
    arcs: Dict[Tuple[int, int], float]

    def successors(self, i: int) -> List[int]:
        return sorted(j for (a, j) in self.arcs if a == i)

    def adjacency(self) -> List[List[int]]:
        adj: List[List[int]] = [[] for _ in range(self.k)]
        for i, j in sorted(self.arcs):
            adj[i].append(j)
        return adj

    def subgraph(self, nodes: Iterable[int]) -> "WeightedDigraph":
        keep = set(nodes)
        return WeightedDigraph(self.k, {a: w for a, w in self.arcs.items()
                                        if a[0] in keep and a[1] in keep})

    @property
    def nodes_with_arcs(self) -> List[int]:
        return sorted({i for arc in self.arcs for i in arc})


@dataclass(frozen=True)
class PathStats:
    weight: float
    length: int
    average_weight: float


@dataclass(frozen=True)
class SccReport:
    components: List[Tuple[int, ...]]
    per_component_cyclicity: List[Optional[int]]
    global_cyclicity: Optional[int]

    @property
    def nontrivial(self) -> List[Tuple[int, ...]]:
        return [c for c, cyc in zip(self.components, self.per_component_cyclicity)
                if cyc is not None]


def precedence_graph(A) -> WeightedDigraph:
    A = as_matrix(A)
    k = A.shape[0]
    arcs = {(i, j): float(A[i, j]) for i in range(k) for j in range(k) if A[i, j] != BOTTOM}
    return WeightedDigraph(k, arcs)


def canonical_circuit(nodes: Sequence[int]) -> Circuit:
    nodes = list(nodes)
    if not nodes:
        raise MaxPlusError("empty circuit")
    r = nodes.index(min(nodes))
    return tuple(nodes[r:] + nodes[:r])


def elementary_circuits(G: WeightedDigraph, cap: int = DEFAULT_CIRCUIT_CAP) -> List[Circuit]:
    """All elementary circuits of ``G``, canonical and sorted lexicographically.

    Johnson's algorithm: for each start node ``s`` search the strongly
    connected component containing ``s`` in the subgraph of nodes ``>= s``.
    """
    if G.k > cap:
        raise CircuitCapError(
            f"circuit enumeration capped at k={cap} (got k={G.k}); "
            "use the non-enumerative spectral routines instead")
    adj = G.adjacency()
    found: List[Circuit] = []
    for s in range(G.k):
        allowed = set(range(s, G.k))
        comp = _component_of(s, adj, allowed)
        if comp is None:
            continue
        found.extend(_circuits_from(s, adj, comp))
    return sorted(found)


def _component_of(s: int, adj, allowed) -> Optional[set]:
    sub = {i: [j for j in adj[i] if j in allowed] for i in allowed}
    for comp in _tarjan(sorted(allowed), sub):
        if s in comp:
            if len(comp) == 1 and s not in sub[s]:
                return None
            return set(comp)
    return None


def _circuits_from(s: int, adj, comp: set) -> List[Circuit]:
    out: List[Circuit] = []
    blocked = set()
    B: Dict[int, set] = {v: set() for v in comp}
    path = [s]
    blocked.add(s)
    stack = [(s, iter([w for w in adj[s] if w in comp]))]
    closed = [False]

    def unblock(u):
        todo = [u]
        while todo:
            x = todo.pop()
            if x in blocked:
                blocked.discard(x)
                todo.extend(B[x])
                B[x].clear()

    while stack:
        v, it = stack[-1]
        advanced = False
        for w in it:
            if w == s:
                out.append(tuple(path))
                closed[-1] = True
            elif w not in blocked:
                path.append(w)
                blocked.add(w)
                closed.append(False)
                stack.append((w, iter([x for x in adj[w] if x in comp])))
                advanced = True
                break
        if advanced:
            continue
        stack.pop()
        path.pop()
        got = closed.pop()
        if got:
            unblock(v)
        else:
            for w in adj[v]:
                if w in comp:
                    B[w].add(v)
        if closed:
            closed[-1] = closed[-1] or got
    return out


def _tarjan(nodes: Sequence[int], adj) -> List[List[int]]:
    """Iterative Tarjan; components come out in reverse topological order."""
    index: Dict[int, int] = {}
    low: Dict[int, int] = {}
    on_stack = set()
    stack: List[int] = []
    comps: List[List[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            succ = adj[v]
            recurse = False
            while pos < len(succ):
                w = succ[pos]
                pos += 1
                if w not in index:
                    work.append((v, pos))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def path_stats(A, pth: Sequence[int]) -> PathStats:
    """Weight, length and average weight of the node sequence ``pth``."""
    A = as_matrix(A)
    if len(pth) < 2:
        raise MaxPlusError("a path needs at least one arc")
    n = len(pth) - 1
    w = 0.0
    for a, b in zip(pth[:-1], pth[1:]):
        if A[a, b] == BOTTOM:
            w = BOTTOM
            break
        w += A[a, b]
    return PathStats(w, n, w / n if w != BOTTOM else BOTTOM)


def circuit_weight(A, c: Circuit) -> float:
    return path_stats(A, list(c) + [c[0]]).weight


def circuit_average(A, c: Circuit) -> float:
    return path_stats(A, list(c) + [c[0]]).average_weight


def strongly_connected_components(G: WeightedDigraph, nodes: Optional[Iterable[int]] = None):
    nodes = sorted(range(G.k) if nodes is None else set(nodes))
    keep = set(nodes)
    adj = {i: [j for j in G.successors(i) if j in keep] for i in nodes}
    return sorted(_tarjan(nodes, adj))


def component_cyclicity(G: WeightedDigraph, comp: Sequence[int]) -> Optional[int]:
    """gcd of circuit lengths inside one strongly connected component.

    Uses BFS levels: the gcd of ``level[u] + 1 - level[v]`` over internal
    arcs equals the gcd of circuit lengths. ``None`` when there is no arc.
    """
    members = set(comp)
    root = comp[0]
    level = {root: 0}
    queue = [root]
    for u in queue:
        for v in G.successors(u):
            if v in members and v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    g = 0
    has_arc = False
    for (u, v) in G.arcs:
        if u in members and v in members:
            has_arc = True
            g = math.gcd(g, abs(level[u] + 1 - level[v]))
    return g if has_arc else None


def scc_and_cyclicity(G: WeightedDigraph, nodes: Optional[Iterable[int]] = None) -> SccReport:
    comps = strongly_connected_components(G, nodes)
    cycs = [component_cyclicity(G, c) for c in comps]
    live = [c for c in cycs if c is not None]
    glob = reduce(lambda a, b: a * b // math.gcd(a, b), live) if live else None
    return SccReport([tuple(c) for c in comps], cycs, glob)


def is_strongly_connected(A) -> bool:
    G = precedence_graph(A)
    comps = strongly_connected_components(G)
    return len(comps) == 1


def circuit_less(c1: Circuit, c2: Circuit) -> bool:
    """Lexicographic order, a strict prefix comparing smaller (tuple order)."""
    return tuple(c1) < tuple(c2)


def reachability(G: WeightedDigraph, nodes: Optional[Iterable[int]] = None) -> np.ndarray:
    keep = set(range(G.k) if nodes is None else nodes)
    R = np.zeros((G.k, G.k), dtype=bool)
    for s in keep:
        seen = {s}
        todo = [s]
        while todo:
            u = todo.pop()
            for v in G.successors(u):
                if v in keep and v not in seen:
                    seen.add(v)
                    todo.append(v)
        for v in seen:
            R[s, v] = True
    return R
