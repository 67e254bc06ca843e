import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from scpanneal.exceptions import CapacityError, IntegrationError, TargetUnreachableError
from scpanneal.instance import ScpInstance
from scpanneal.ising import IsingModel, reduce
from scpanneal.qa import (
    AnnealingHamiltonian,
    AnnealSchedule,
    SuccessSpec,
    WaveState,
    apply_hamiltonian,
    build_success_spec,
    evolve,
    search_min_time,
    success_probability,
)


def random_model(M, seed):
    rng = np.random.default_rng(seed)
    h = rng.integers(-4, 5, size=M) / 4
    J = {(i, j): rng.integers(-4, 5) / 4 for i in range(M) for j in range(i + 1, M)}
    return IsingModel(M, [float(x) for x in h], {k: float(v) for k, v in J.items()})


def dense_reference(model, T, dt=1e-3):
    """Midpoint matrix-exponential stepping of the full Hamiltonian."""
    ham = AnnealingHamiltonian(model)
    psi = WaveState.uniform(model.M).amplitudes
    steps = int(round(T / dt))
    for n in range(steps):
        s = (n + 0.5) * dt / T
        psi = expm(-1j * dt * ham.dense(s)) @ psi
    return psi


def test_diagonal_action(worked_model):
    model, _ = worked_model
    table = model.energy_table()
    for b in (0, 9, 2**14 - 1):
        out = apply_hamiltonian(model, None, 1.0, WaveState.basis(14, b))
        expected = np.zeros(2**14, dtype=complex)
        expected[b] = table[b]
        assert np.array_equal(out.amplitudes, expected)


def test_driver_flip_single_spin():
    out = apply_hamiltonian(IsingModel(1, [0], {}), None, 0.0, WaveState.basis(1, 0))
    assert np.allclose(out.amplitudes, [0, -1])


def test_matches_dense_product():
    rng = np.random.default_rng(1)
    model = random_model(2, 3)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    delta = np.array([0.7, 1.3])
    for s in (0.0, 0.3, 1.0):
        ham = AnnealingHamiltonian(model, delta)
        got = apply_hamiltonian(model, delta, s, psi).amplitudes
        assert np.max(np.abs(got - ham.dense(s) @ psi)) < 1e-12


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_hamiltonian(IsingModel(2, [0, 0], {}), None, 0.5, np.ones(8))
    with pytest.raises(ValueError):
        AnnealSchedule(3, delta=[1, 1]).fields(3)
    with pytest.raises(CapacityError):
        AnnealingHamiltonian(IsingModel(21, [0] * 21, {}))


def test_schedule():
    sched = AnnealSchedule(8)
    assert sched.s(0) == 0 and sched.s(8) == 1
    with pytest.raises(ValueError):
        AnnealSchedule(0)


@pytest.mark.parametrize("M,T,seed", [(1, 5, 0), (3, 4, 1), (4, 3, 2), (6, 2, 3)])
def test_evolve_matches_dense_oracle(M, T, seed):
    model = random_model(M, seed)
    psi = evolve(model, AnnealSchedule(T)).amplitudes
    ref = dense_reference(model, T)
    assert abs(np.vdot(ref, psi)) ** 2 >= 1 - 1e-6
    assert abs(np.linalg.norm(psi) - 1) <= 1e-6


def test_single_spin_adiabatic():
    psi = evolve(IsingModel(1, [1], {}), AnnealSchedule(64))
    assert abs(psi.amplitudes[1]) ** 2 > 0.9
    ref = dense_reference(IsingModel(1, [1], {}), 64)
    assert abs(np.vdot(ref, psi.amplitudes)) ** 2 >= 1 - 1e-6


def test_unitarity_every_boundary(worked_model):
    model, _ = worked_model
    drifts = []
    evolve(model, AnnealSchedule(6), callback=lambda t, psi: drifts.append(abs(np.linalg.norm(psi) - 1)))
    assert len(drifts) == 6 and max(drifts) <= 1e-6


def test_drift_check_raises():
    with pytest.raises(IntegrationError):
        evolve(random_model(3, 0), AnnealSchedule(2), tol=1e-3, max_drift=1e-15)


def test_drift_retries_at_tighter_tol():
    # a loose start must still end inside the drift bound
    model = random_model(3, 0)
    loose = evolve(model, AnnealSchedule(4), tol=1e-3, max_drift=1e-1)
    psi = evolve(model, AnnealSchedule(4), tol=1e-3, max_drift=1e-8)
    assert abs(np.linalg.norm(loose.amplitudes) - 1) > 1e-8
    assert abs(np.linalg.norm(psi.amplitudes) - 1) <= 1e-8
    ref = dense_reference(model, 4)
    assert abs(np.vdot(ref, psi.amplitudes)) ** 2 >= 1 - 1e-6


def test_energy_expectation_two_ways(worked_model):
    model, _ = worked_model
    rng = np.random.default_rng(5)
    psi = rng.normal(size=2**14) + 1j * rng.normal(size=2**14)
    psi /= np.linalg.norm(psi)
    via_apply = np.vdot(psi, apply_hamiltonian(model, None, 1.0, psi).amplitudes).real
    direct = np.sum(np.abs(psi) ** 2 * model.energy_table())
    assert abs(via_apply - direct) < 1e-10


def test_adiabatic_limit():
    inst = ScpInstance(1, 2, frozenset({(1, 1), (2, 1)}))
    model, layout = reduce(inst)
    spec = build_success_spec(inst, layout)
    assert success_probability(evolve(model, AnnealSchedule(512)), spec) >= 0.9
    model = random_model(5, 11)
    table = model.energy_table()
    ground = int(np.argmin(table))
    assert np.sum(table == table[ground]) == 1
    spec = SuccessSpec(np.array([ground]), 5)
    assert success_probability(evolve(model, AnnealSchedule(512)), spec) >= 0.9


def test_success_probability_examples(worked, worked_model):
    model, layout = worked_model
    spec = build_success_spec(worked, layout)
    assert spec.support.size == 2**10
    assert success_probability(WaveState.uniform(14), spec) == pytest.approx(1 / 16, abs=1e-15)
    assert success_probability(WaveState.basis(14, int(spec.support[3])), spec) == 1.0
    norm = build_success_spec(worked, layout, convention="norm")
    assert success_probability(WaveState.uniform(14), norm) == pytest.approx(1 / 4, abs=1e-15)
    with pytest.raises(ValueError):
        success_probability(WaveState.uniform(2), SuccessSpec(np.array([], dtype=int), 2))
    with pytest.raises(ValueError):
        SuccessSpec(np.array([0]), 1, convention="amplitude")


def test_uniform_probability_is_support_fraction():
    spec = SuccessSpec(np.array([1, 4, 6]), 3)
    assert success_probability(WaveState.uniform(3), spec) == pytest.approx(3 / 8, abs=1e-15)


def test_search_returns_one_when_immediate():
    assert search_min_time(lambda T: 0.9)[0] == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3000), st.integers(3000, 4096))
def test_search_monotone_matches_scan(threshold, t_max):
    prob = lambda T: 0.3 if T >= threshold else 0.1
    T, p, seen = search_min_time(prob, 0.25, t_max)
    assert T == next(t for t in range(1, t_max + 1) if prob(t) >= 0.25)
    assert p == 0.3


@settings(max_examples=100, deadline=None)
@given(st.lists(st.booleans(), min_size=64, max_size=64))
def test_search_path_condition_non_monotone(good):
    good[-1] = True
    prob = lambda T: 0.5 if good[T - 1] else 0.0
    T, p, seen = search_min_time(prob, 0.25, 64)
    assert p >= 0.25
    if T > 1:
        assert seen[T - 1] < 0.25


def test_search_unreachable():
    with pytest.raises(TargetUnreachableError) as info:
        search_min_time(lambda T: min(0.2, T / 1000), 0.25, 100)
    assert info.value.best == (100, 0.1)
