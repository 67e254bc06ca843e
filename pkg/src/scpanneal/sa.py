"""Metropolis simulated annealing for Ising models.

One *sweep* is ``M`` single-spin proposals at uniformly random sites.  A run
starts from a uniformly random assignment and performs ``S`` sweeps while the
inverse temperature follows a schedule (linear in beta by default); the run
returns its final state.  Runtime is counted in sweeps:
``T(S) = ceil(log(1 - p) / log(1 - w(S))) * S`` for a target probability
``p``, with ``w(S)`` the fraction of runs that end in an optimal state.

The kernel works on the integer-scaled model (all coefficients multiplied by
their common denominator ``L``) so energy changes are exact; the inverse
temperature is divided by ``L`` to compensate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numba
import numpy as np
from scipy.stats import binomtest

from ._validation import check_assignment, check_count, check_probability, check_rng
from .exceptions import TargetUnreachableError


@numba.njit(cache=True)
def _metropolis(p, local, indptr, indices, data, betas, picks, uniforms):
    """Run ``len(betas)`` sweeps in place; ``picks``/``uniforms`` hold one draw per proposal."""
    M = p.size
    k = 0
    for step in range(betas.size):
        beta = betas[step]
        for _ in range(M):
            i = picks[k]
            u = uniforms[k]
            k += 1
            delta = -2.0 * p[i] * local[i]
            if delta <= 0.0 or u < math.exp(-beta * delta):
                shift = -2.0 * p[i]
                for ptr in range(indptr[i], indptr[i + 1]):
                    local[indices[ptr]] += data[ptr] * shift
                p[i] = -p[i]


class _SpinSystem:
    """Integer-scaled CSR form of an :class:`IsingModel`."""

    def __init__(self, model):
        L, h, J, off = model.integer_form()
        self.M = model.M
        self.scale = L
        self.h = np.asarray(h, dtype=float)
        self.offset = off
        rows = [[] for _ in range(model.M)]
        for (i, j), c in J.items():
            rows[i].append((j, c))
            rows[j].append((i, c))
        self.indptr = np.zeros(model.M + 1, dtype=np.int64)
        self.indptr[1:] = np.cumsum([len(r) for r in rows])
        self.indices = np.array([j for r in rows for j, _ in r], dtype=np.int64)
        self.data = np.array([c for r in rows for _, c in r], dtype=float)

    def local_fields(self, p):
        out = self.h.copy()
        for i in range(self.M):
            sl = slice(self.indptr[i], self.indptr[i + 1])
            out[i] += np.dot(self.data[sl], p[self.indices[sl]])
        return out

    def scaled_energy(self, p):
        """Energy times ``L``; an exact integer stored as float."""
        return self.offset + float(np.dot(self.h, p) + 0.5 * np.dot(p, self.local_fields(p) - self.h))

    def run(self, p, betas, rng):
        """Anneal ``p`` (a float array of +-1, modified in place) through ``betas``."""
        betas = np.asarray(betas, dtype=float) / self.scale
        n = betas.size * self.M
        picks = rng.integers(0, self.M, size=n) if self.M else np.zeros(0, dtype=np.int64)
        uniforms = rng.random(n)
        local = self.local_fields(p)
        _metropolis(p, local, self.indptr, self.indices, self.data, betas, picks, uniforms)
        return p


def _to_spins(s):
    return 1.0 - 2.0 * np.asarray(s, dtype=float)


def _to_bits(p):
    return ((1 - p) // 2).astype(np.uint8)


def sweep(model, s, beta, rng=None):
    """One sweep of ``M`` Metropolis proposals at inverse temperature ``beta``.

    ``beta=np.inf`` accepts only non-increasing moves.
    """
    s = check_assignment(s, model.M)
    system = _SpinSystem(model)
    p = _to_spins(s)
    system.run(p, [beta], check_rng(rng))
    return _to_bits(p)


@dataclass(frozen=True)
class SaConfig:
    sweeps: int = 100
    repetitions: int = 1
    beta_init: float = 0.1
    beta_final: float = 30.0
    seed: object = None

    def __post_init__(self):
        check_count(self.sweeps, "sweeps", minimum=1)
        check_count(self.repetitions, "repetitions", minimum=1)
        if not 0 <= self.beta_init <= self.beta_final:
            raise ValueError("schedule must satisfy 0 <= beta_init <= beta_final")

    def betas(self):
        if self.sweeps == 1:
            return np.array([self.beta_final])
        return np.linspace(self.beta_init, self.beta_final, self.sweeps)


def _seed_sequence(seed):
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def _run_many(model, cfg, runs, seed):
    """Final scaled energies and bit states of ``runs`` independent anneals."""
    system = _SpinSystem(model)
    betas = cfg.betas()
    children = _seed_sequence(seed).spawn(runs)
    energies = np.empty(runs)
    states = np.empty((runs, model.M), dtype=np.uint8)
    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        p = _to_spins(rng.integers(0, 2, size=model.M))
        system.run(p, betas, rng)
        energies[r] = system.scaled_energy(p)
        states[r] = _to_bits(p)
    return energies, states, system.scale


def anneal(model, cfg=None):
    """Best final state over ``cfg.repetitions`` runs of ``cfg.sweeps`` sweeps.

    Returns ``(assignment, energy)`` with the energy as an exact Fraction.
    """
    cfg = cfg or SaConfig()
    energies, states, scale = _run_many(model, cfg, cfg.repetitions, cfg.seed)
    best = int(np.argmin(energies))
    return states[best], Fraction(int(energies[best]), scale)


@dataclass(frozen=True)
class SaStats:
    w: float
    ci_low: float
    ci_high: float
    best_energy: Fraction
    energies: tuple = field(repr=False, default=())

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("w must lie in [0, 1]")


def estimate_success(model, sweeps, runs, optimal_energy, seed=None, cfg=None, accept=None):
    """Fraction of independent single runs that end at ``optimal_energy``.

    ``accept``, if given, replaces the energy test: it receives the final bit
    assignment and returns whether the run counts as a success.  The
    interval is the Wilson 95% score interval.
    """
    runs = check_count(runs, "runs", minimum=1)
    base = cfg or SaConfig()
    cfg = SaConfig(sweeps, 1, base.beta_init, base.beta_final, seed)
    energies, states, scale = _run_many(model, cfg, runs, seed)
    if accept is None:
        target = Fraction(optimal_energy) * scale
        if target.denominator != 1:
            raise ValueError("optimal_energy is not attainable on this model's coefficient lattice")
        hits = int(np.count_nonzero(energies == float(target)))
    else:
        hits = sum(bool(accept(s)) for s in states)
    ci = binomtest(hits, runs).proportion_ci(confidence_level=0.95, method="wilson")
    fractions = tuple(Fraction(int(e), scale) for e in energies)
    return SaStats(hits / runs, float(ci.low), float(ci.high), min(fractions), fractions)


def total_time(sweeps, w, p=0.25):
    """Repetitions and total sweeps needed to reach success probability ``p``.

    Returns ``(R, R * sweeps)``; ``w == 1`` gives ``R = 1``.
    """
    sweeps = check_count(sweeps, "sweeps", minimum=1)
    p = check_probability(p, "p")
    w = check_probability(w, "w", open_interval=False)
    if w == 0.0:
        raise TargetUnreachableError("w = 0: no number of repetitions reaches the target")
    if w == 1.0:
        return 1, sweeps
    R = max(1, math.ceil(math.log(1 - p) / math.log(1 - w)))
    return R, R * sweeps


@dataclass(frozen=True)
class SweepOptimum:
    S_star: int
    T_star: int
    curve: tuple

    def rows(self):
        return [dict(row) for row in self.curve]


def best_sweeps(grid, success, p=0.25):
    """Minimise ``T(S)`` over ``grid`` given ``success(S) -> (w, lo, hi)`` or ``w``."""
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    curve, best = [], None
    for S in grid:
        est = success(S)
        w, lo, hi = est if isinstance(est, tuple) else (est, est, est)
        row = {"S": S, "w": w, "w_ci_low": lo, "w_ci_high": hi, "R": None, "T": None}
        if w > 0:
            row["R"], row["T"] = total_time(S, w, p)
            if best is None or row["T"] < best[1]:
                best = (S, row["T"])
        curve.append(row)
    if best is None:
        raise TargetUnreachableError("success probability is zero at every grid point")
    return SweepOptimum(best[0], best[1], tuple(curve))


def optimize_sweeps(model, grid, runs, optimal_energy, seed=None, p=0.25, cfg=None):
    """Pick the sweep count minimising total runtime, estimating ``w(S)`` by sampling.

    Each grid point uses its own child seed, so results do not depend on
    the order or content of the rest of the grid.
    """
    root = _seed_sequence(seed)
    seeds = {S: np.random.SeedSequence(root.entropy, spawn_key=(int(S),)) for S in grid}

    def success(S):
        st = estimate_success(model, S, runs, optimal_energy, seed=seeds[S], cfg=cfg)
        return st.w, st.ci_low, st.ci_high

    return best_sweeps(grid, success, p)
