"""Random max-plus recurrences ``x(n+1) = A(n) ⊗ x(n)``.

Every draw comes from a generator keyed by ``(seed, replica)``; the ``m``-th
draw of a replica is the matrix ``A(m)``. Results therefore depend only on
``(seed, replica, step)``, never on thread scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import (BOTTOM, MaxPlusError, as_matrix, as_vector, classify_matrix,
                   normalize_max, otimes, proportional, rank1, resolve_tol)


def production_matrix(gamma1_next: float, gamma2: float, t1: float, t2_prev: float) -> np.ndarray:
    """Matrix of the two-task, two-kart production line."""
    return np.array([[gamma1_next, gamma1_next + t2_prev],
                     [gamma2 + t1, gamma2]], dtype=float)


def nonmlp_matrix(c: float, gamma1: float, t: float) -> np.ndarray:
    """Member of the family ``[[g1, g1 + t], [g1 + c + t, g1 + c]]``."""
    g2 = gamma1 + c
    if gamma1 < 0 or g2 < 0 or t < abs(c):
        raise MaxPlusError("need gamma1 >= 0, gamma1 + c >= 0 and t >= |c|")
    return np.array([[gamma1, gamma1 + t], [g2 + t, g2]], dtype=float)


def sample_nonmlp(c: float, rng: np.random.Generator, gamma_span: float = 5.0,
                  t_span: float = 5.0) -> np.ndarray:
    """Draw from the non-MLP family: ``gamma1`` and ``t - |c|`` uniform on their spans."""
    g1 = max(0.0, -c) + rng.uniform(0.0, gamma_span)
    t = abs(c) + rng.uniform(0.0, t_span)
    return nonmlp_matrix(c, g1, t)


def _rng(seed: int, replica: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(replica)])


@dataclass
class StochasticModel:
    """Finitely many generators drawn i.i.d. with probabilities ``p``."""

    generators: List[np.ndarray]
    p: Optional[Sequence[float]] = None

    def __post_init__(self):
        self.generators = [as_matrix(G) for G in self.generators]
        if not self.generators:
            raise MaxPlusError("a model needs at least one generator")
        k = self.generators[0].shape[0]
        for G in self.generators:
            if G.shape != (k, k):
                raise MaxPlusError("generators must share one dimension")
            if not classify_matrix(G).in_Mk:
                raise MaxPlusError("generators must have no bottom row")
        n = len(self.generators)
        p = np.full(n, 1.0 / n) if self.p is None else np.asarray(self.p, dtype=float)
        if p.shape != (n,) or (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
            raise MaxPlusError("p must be a probability vector matching the generators")
        self.p = p

    @property
    def k(self) -> int:
        return self.generators[0].shape[0]

    def draw(self, rng: np.random.Generator, n: int) -> Tuple[List[int], List[np.ndarray]]:
        idx = rng.choice(len(self.generators), size=n, p=self.p) if n else np.empty(0, int)
        return [int(i) for i in idx], [self.generators[i] for i in idx]


@dataclass
class SamplerModel:
    """Continuous-support model given by a named sampler.

    ``uniform_perturbation``: ``base`` plus i.i.d. uniform ``[-radius, radius]``.
    ``production``: production-line matrix with durations uniform on
    ``gamma1``, ``gamma2``, ``t1``, ``t2`` ranges (pairs ``[lo, hi]``).
    ``nonmlp``: the non-MLP family with parameter ``c``.
    """

    sampler: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sampler not in ("uniform_perturbation", "production", "nonmlp"):
            raise MaxPlusError(f"unknown sampler {self.sampler!r}")
        if self.sampler == "uniform_perturbation":
            self.params = dict(self.params)
            self.params["base"] = as_matrix(self.params["base"])

    @property
    def k(self) -> int:
        if self.sampler == "uniform_perturbation":
            return self.params["base"].shape[0]
        return 2

    def one(self, rng: np.random.Generator) -> np.ndarray:
        prm = self.params
        if self.sampler == "uniform_perturbation":
            base = prm["base"]
            r = float(prm.get("radius", 1.0))
            return base + rng.uniform(-r, r, size=base.shape)
        if self.sampler == "production":
            def u(name, default):
                lo, hi = prm.get(name, default)
                return rng.uniform(lo, hi)
            return production_matrix(u("gamma1", (1, 2)), u("gamma2", (1, 2)),
                                     u("t1", (0, 1)), u("t2", (0, 1)))
        return sample_nonmlp(float(prm.get("c", 1.0)), rng,
                             float(prm.get("gamma_span", 5.0)), float(prm.get("t_span", 5.0)))

    def draw(self, rng: np.random.Generator, n: int) -> Tuple[List[int], List[np.ndarray]]:
        return [], [self.one(rng) for _ in range(n)]


@dataclass
class Trajectory:
    states: np.ndarray
    word: List[int]
    seed: int
    matrices: List[np.ndarray] = field(default_factory=list, repr=False)


@dataclass(frozen=True)
class LyapunovEstimate:
    point_estimate: float
    std_error: float
    horizon: int
    replicas: int


@dataclass
class CouplingStats:
    coupling_times: List[Optional[int]]
    fraction_coupled: float
    cap: int
    merge_ok: bool = True
    merge_violations: List[dict] = field(default_factory=list)

    @property
    def coupled_times(self) -> List[int]:
        return [t for t in self.coupling_times if t is not None]


def simulate(model, x0, n: int, seed: int = 0, replica: int = 0) -> Trajectory:
    x = as_vector(x0)
    if (x == BOTTOM).any():
        raise MaxPlusError("x0 must be finite")
    if x.shape[0] != model.k:
        raise MaxPlusError(f"x0 has length {x.shape[0]}, model has k={model.k}")
    if n < 0:
        raise MaxPlusError("n must be nonnegative")
    word, mats = model.draw(_rng(seed, replica), n)
    states = np.empty((n + 1, x.shape[0]))
    states[0] = x
    for m, M in enumerate(mats):
        states[m + 1] = otimes(M, states[m])
    return Trajectory(states, word, seed, mats)


def _replica_max(model, n: int, seed: int, replica: int) -> float:
    _, mats = model.draw(_rng(seed, replica), n)
    x = np.zeros(model.k)
    for M in mats:
        x = otimes(M, x)
    return float(x.max()) / n


def lyapunov(model, n: int, replicas: int = 1, seed: int = 0, threads: int = 1) -> LyapunovEstimate:
    """Mean over replicas of ``max_i x_i(n, 0) / n``, with its standard error."""
    if n < 1 or replicas < 1:
        raise MaxPlusError("need n >= 1 and replicas >= 1")
    vals = _map(lambda r: _replica_max(model, n, seed, r), range(replicas), threads)
    vals = np.asarray(vals)
    se = float(vals.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
    return LyapunovEstimate(float(vals.mean()), se, n, replicas)


def lyapunov_sweep(generators, p_grid, n: int, replicas: int = 1, seed: int = 0,
                   threads: int = 1) -> List[Tuple[np.ndarray, LyapunovEstimate]]:
    out = []
    for p in p_grid:
        model = StochasticModel(list(generators), p)
        out.append((np.asarray(p, dtype=float), lyapunov(model, n, replicas, seed, threads)))
    return out


def _map(fn, items, threads: int):
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def coupling_time(mats: Sequence[np.ndarray], tol: Optional[float] = None) -> Optional[int]:
    """First ``n`` with ``A(n) ⊗ ... ⊗ A(1)`` of rank 1, or ``None``."""
    tol = resolve_tol(tol)
    P = None
    for n, M in enumerate(mats, start=1):
        P = normalize_max(M if P is None else otimes(M, P))
        if rank1(P, tol) is not None:
            return n
    return None


def _all_equal(d: np.ndarray, tol: float) -> bool:
    return bool(np.ptp(d) <= tol)


def _couple_replica(model, cap, seed, r, x0, y0, tol):
    _, mats = model.draw(_rng(seed, r), cap)
    tau = coupling_time(mats, tol)
    bad = None
    if tau is not None:
        x, y = x0.copy(), y0.copy()
        for n, M in enumerate(mats, start=1):
            x = otimes(M, x)
            y = otimes(M, y)
            if n >= tau and not _all_equal(x - y, tol):
                bad = {"replica": r, "n": n, "difference": (x - y).tolist()}
                break
    return tau, bad


def coupling_analysis(model, replicas: int, cap: int, seed: int = 0, x0=None, y0=None,
                      tol: Optional[float] = None, threads: int = 1) -> CouplingStats:
    """Coupling times of the left products, and the merge check after coupling.

    Both initial conditions see the same matrices. After the coupling time
    the difference ``x(n, x0) - x(n, y0)`` must have all components equal.
    """
    tol = resolve_tol(tol)
    k = model.k
    x0 = np.zeros(k) if x0 is None else as_vector(x0)
    y0 = np.zeros(k) if y0 is None else as_vector(y0)
    if (x0 == BOTTOM).any() or (y0 == BOTTOM).any():
        raise MaxPlusError("initial conditions must be finite")
    results = _map(lambda r: _couple_replica(model, cap, seed, r, x0, y0, tol), range(replicas), threads)
    times = [t for t, _ in results]
    bad = [b for _, b in results if b is not None]
    frac = sum(t is not None for t in times) / replicas if replicas else 0.0
    return CouplingStats(times, frac, cap, not bad, bad)


def difference_samples(model, x0, n: int, seeds: Sequence[int], i: int = 0, j: int = 1) -> np.ndarray:
    """``x_i(n, x0) - x_j(n, x0)`` for each seed (replica 0)."""
    out = []
    for s in seeds:
        x = simulate(model, x0, n, s).states[-1]
        out.append(x[i] - x[j])
    return np.array(out)


def binned_tv(a: np.ndarray, b: np.ndarray, width: float) -> float:
    """Total-variation distance between two samples after binning at ``width``."""
    ka = np.floor(np.asarray(a) / width).astype(np.int64)
    kb = np.floor(np.asarray(b) / width).astype(np.int64)
    bins = np.union1d(ka, kb)
    pa = np.array([(ka == v).mean() for v in bins])
    pb = np.array([(kb == v).mean() for v in bins])
    return float(0.5 * np.abs(pa - pb).sum())


def maps_rays(P, c: float, tol: Optional[float] = None) -> bool:
    """Whether ``P`` sends the rays of ``u = (0, 0)`` and ``v = (0, c)`` onto both of them."""
    u = np.array([0.0, 0.0])
    v = np.array([0.0, c])

    def ray(x):
        if proportional(x, u, tol) is not None:
            return "u"
        if proportional(x, v, tol) is not None:
            return "v"
        return None

    images = {ray(otimes(P, u)), ray(otimes(P, v))}
    return images == {"u", "v"}
