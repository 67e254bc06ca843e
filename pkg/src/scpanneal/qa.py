"""State-vector simulation of transverse-field quantum annealing.

The annealing Hamiltonian is

    H(s) = (1 - s) * H_driver + s * H_problem,   s = t / T,

with ``H_driver = -sum_i delta_i X_i``.  The minus sign makes the uniform
superposition the ground state of the driver, which is where the evolution
starts.  ``H_problem`` is diagonal and is applied through a precomputed table
of basis-state energies; the driver is applied by permuting amplitudes, so no
``2**M x 2**M`` matrix is ever built.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ._validation import check_count, check_probability
from .exceptions import CapacityError, IntegrationError, TargetUnreachableError
from .instance import minimum_covers

log = logging.getLogger("scpanneal.qa")

MAX_SIM_SPINS = 20


@dataclass
class WaveState:
    amplitudes: np.ndarray
    M: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.M,):
            raise ValueError(f"expected {2**self.M} amplitudes, got {self.amplitudes.shape}")

    @classmethod
    def uniform(cls, M):
        return cls(np.full(2**M, 2 ** (-M / 2), dtype=complex), M)

    @classmethod
    def basis(cls, M, index):
        amp = np.zeros(2**M, dtype=complex)
        amp[index] = 1.0
        return cls(amp, M)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class AnnealSchedule:
    T: int
    delta: np.ndarray | None = None

    def __post_init__(self):
        check_count(self.T, "T", minimum=1)

    def fields(self, M):
        if self.delta is None:
            return np.ones(M)
        delta = np.asarray(self.delta, dtype=float)
        if delta.shape != (M,):
            raise ValueError(f"delta must have {M} entries")
        return delta

    def s(self, t):
        return t / self.T


class AnnealingHamiltonian:
    """Matrix-free ``H(s)`` for one problem model.

    ``problem`` is an :class:`~scpanneal.ising.IsingModel` or an already
    computed energy table of length ``2**M``.
    """

    def __init__(self, problem, delta=None):
        if isinstance(problem, np.ndarray):
            energies = np.asarray(problem, dtype=float)
            M = int(round(np.log2(energies.size)))
            if 2**M != energies.size:
                raise ValueError("energy table length must be a power of two")
        else:
            M = problem.M
            if M > MAX_SIM_SPINS:
                raise CapacityError(f"state-vector simulation supports M <= {MAX_SIM_SPINS}, got {M}")
            energies = problem.energy_table()
        self.M = M
        self.energies = energies
        self.delta = np.ones(M) if delta is None else np.asarray(delta, dtype=float)
        if self.delta.shape != (M,):
            raise ValueError(f"delta must have {M} entries")

    def driver(self, psi):
        """``-sum_i delta_i X_i psi``."""
        out = np.zeros_like(psi)
        for i in range(self.M):
            flipped = psi.reshape(2 ** (self.M - 1 - i), 2, 2**i)[:, ::-1, :].reshape(-1)
            out -= self.delta[i] * flipped
        return out

    def apply(self, s, psi):
        psi = np.asarray(psi)
        if psi.shape != self.energies.shape:
            raise ValueError(f"state has shape {psi.shape}, expected {self.energies.shape}")
        out = s * self.energies * psi
        if s != 1:
            out += (1 - s) * self.driver(psi)
        return out

    def dense(self, s):
        """Explicit matrix of ``H(s)``; only for small reference checks."""
        dim = 2**self.M
        mat = np.diag(s * self.energies).astype(complex)
        for i in range(self.M):
            idx = np.arange(dim)
            mat[idx ^ (1 << i), idx] -= (1 - s) * self.delta[i]
        return mat


def apply_hamiltonian(model, delta, s, psi):
    """Return ``H(s) psi`` as a :class:`WaveState` (not renormalised)."""
    ham = AnnealingHamiltonian(model, delta)
    amps = psi.amplitudes if isinstance(psi, WaveState) else np.asarray(psi, dtype=complex)
    if amps.shape != (2**ham.M,):
        raise ValueError(f"state length {amps.shape} does not match M={ham.M}")
    return WaveState(ham.apply(s, amps), ham.M)


def evolve(model, sched, tol=1e-8, psi0=None, callback=None, method="DOP853", max_drift=1e-6, min_tol=1e-12):
    """Integrate ``i d/dt psi = H(t/T) psi`` from the uniform superposition.

    The interval ``[0, T]`` is integrated one unit of time at a time with an
    adaptive embedded Runge-Kutta stepper (``method``: ``"DOP853"`` or
    ``"RK45"``) at relative tolerance ``tol``.  The norm is checked, never
    corrected, at each unit boundary.  Drift beyond ``max_drift`` restarts
    the run at a ten times tighter tolerance, down to ``min_tol``, after
    which :class:`IntegrationError` is raised.  ``callback(t, psi)`` is called
    at every boundary if given; a restart calls it again from ``t = 1``.
    """
    ham = model if isinstance(model, AnnealingHamiltonian) else AnnealingHamiltonian(model, sched.fields(model.M))
    psi0 = WaveState.uniform(ham.M).amplitudes if psi0 is None else np.array(psi0, dtype=complex)
    while True:
        psi, failure = _integrate(ham, sched.T, psi0, tol, callback, method, max_drift)
        if failure is None:
            return WaveState(psi, ham.M)
        if tol / 10 < min_tol:
            raise IntegrationError(failure)
        tol /= 10
        log.info("%s; retrying at tol=%.0e", failure, tol)


def _integrate(ham, T, psi, tol, callback, method, max_drift):
    atol = tol * 2 ** (-ham.M / 2)

    def rhs(t, y):
        return -1j * ham.apply(t / T, y)

    for start in range(T):
        sol = solve_ivp(rhs, (start, start + 1), psi, method=method, rtol=tol, atol=atol)
        if not sol.success:
            raise IntegrationError(f"integration failed on [{start}, {start + 1}]: {sol.message}")
        psi = sol.y[:, -1]
        drift = abs(np.linalg.norm(psi) - 1.0)
        if drift > max_drift:
            return psi, f"norm drift {drift:.3e} at t={start + 1} exceeds {max_drift:.1e} (tol={tol:.0e})"
        if callback is not None:
            callback(start + 1, psi)
    return psi, None


@dataclass(frozen=True)
class SuccessSpec:
    """Basis states counted as success, and how the probability is formed.

    ``convention="squared"`` gives the Born-rule probability
    ``||P psi||^2``; ``"norm"`` gives ``||P psi||``.
    """

    support: np.ndarray
    M: int
    convention: str = "squared"
    patterns: tuple = field(default=())

    def __post_init__(self):
        if self.convention not in ("squared", "norm"):
            raise ValueError(f"unknown convention {self.convention!r}")


def build_success_spec(inst, layout, convention="squared"):
    """Support = every basis state whose cover bits form a minimum pair cover."""
    covers = minimum_covers(inst)
    patterns = tuple(sum(1 << (i - 1) for i in cover) for cover in covers)
    idx = np.arange(2**layout.M, dtype=np.int64)
    low = idx & ((1 << layout.m) - 1)
    support = idx[np.isin(low, patterns)]
    return SuccessSpec(support=support, M=layout.M, convention=convention, patterns=patterns)


def success_probability(psi, spec):
    if spec.support.size == 0:
        raise ValueError("success spec has empty support")
    amps = psi.amplitudes if isinstance(psi, WaveState) else np.asarray(psi)
    weight = float(np.sum(np.abs(amps[spec.support]) ** 2))
    return weight if spec.convention == "squared" else float(np.sqrt(weight))


def search_min_time(prob, target=0.25, t_max=4096):
    """Smallest integer ``T`` with ``prob(T) >= target`` by doubling, then bisection.

    ``prob`` is any callable ``T -> probability``.  Because success need not
    be monotone in ``T``, the guarantee is about the search path: the
    returned ``T`` satisfies the target and, when ``T > 1``, ``T - 1`` was
    either evaluated and failed or lies below a failing bracket end.

    Returns ``(T_star, p_at_T_star, evaluations)`` where ``evaluations`` maps
    every tried ``T`` to its probability.
    """
    target = check_probability(target, "target")
    t_max = check_count(t_max, "t_max", minimum=1)
    seen = {}

    def p(T):
        if T not in seen:
            seen[T] = float(prob(T))
        return seen[T]

    lo, hi = 0, None
    T = 1
    while T <= t_max:
        if p(T) >= target:
            hi = T
            break
        lo = T
        if T == t_max:
            break
        T = min(2 * T, t_max)
    if hi is None:
        best = max(seen.items(), key=lambda kv: kv[1])
        raise TargetUnreachableError(f"no T <= {t_max} reaches p >= {target}", best=best)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if p(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi, seen[hi], seen


def find_min_anneal_time(model, spec, target=0.25, t_max=4096, tol=1e-8, delta=None):
    """Minimum integer anneal time reaching ``target`` success probability.

    Returns ``(T_star, p_at_T_star, evaluations)``; see :func:`search_min_time`.
    """
    ham = AnnealingHamiltonian(model, delta)
    if spec.M != ham.M:
        raise ValueError("success spec and model disagree on M")

    def prob(T):
        return success_probability(evolve(ham, AnnealSchedule(T), tol=tol), spec)

    return search_min_time(prob, target=target, t_max=t_max)
