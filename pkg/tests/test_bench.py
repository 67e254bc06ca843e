import numpy as np
import pytest

from scpanneal.bench import fit_exponent, geometric_grid, median_by_size, run_bench, sample_ensemble, spin_count
from scpanneal.instance import ScpInstance
from scpanneal.ising import reduce


def test_fit_recovers_synthetic_exponent():
    Ms = np.arange(3, 16)
    slope, intercept = fit_exponent(Ms, 2 ** (0.3 * Ms + 1.5))
    assert slope == pytest.approx(0.30, abs=0.01)
    assert intercept == pytest.approx(1.5, abs=1e-9)
    with pytest.raises(ValueError):
        fit_exponent([3], [1.0])


def test_median_by_size():
    rows = [
        {"M": 4, "T_star": 3, "status": "ok"},
        {"M": 3, "T_star": 1, "status": "ok"},
        {"M": 3, "T_star": 5, "status": "ok"},
        {"M": 3, "status": "unreached"},
    ]
    assert median_by_size(rows) == [(3, 3.0, 2), (4, 3.0, 1)]


def test_spin_count_matches_reduction(worked):
    assert spin_count(worked) == reduce(worked)[0].M == 14


def test_ensemble_binning_is_deterministic():
    a, da = sample_ensemble(range(3, 9), 3, seed=5)
    b, db = sample_ensemble(range(3, 9), 3, seed=5)
    assert a == b and da == db
    for M, insts in a.items():
        assert len(insts) == 3
        assert all(spin_count(i) == M and i.feasible and i.dummy_free for i in insts)


def test_one_instance_one_backend():
    inst = ScpInstance(1, 2, frozenset({(1, 1), (2, 1)}))
    rows = run_bench({3: [inst]}, ["qa"], qa_opts={"t_max": 64})
    assert len(rows) == 1 and rows[0]["status"] == "ok" and rows[0]["M"] == 3


def test_rows_sorted_regardless_of_workers():
    bins, _ = sample_ensemble(range(3, 7), 2, seed=1)
    serial = run_bench(bins, ["qa", "sa"], qa_opts={"t_max": 64}, sa_opts={"grid": (5, 20), "runs": 50, "seed": 3})
    pooled = run_bench(bins, ["qa", "sa"], qa_opts={"t_max": 64}, sa_opts={"grid": (5, 20), "runs": 50, "seed": 3}, workers=2)
    assert serial == pooled
    keys = [(r["backend"], r["M"], r["instance_id"]) for r in serial]
    assert keys == sorted(keys)


def test_geometric_grid():
    g = geometric_grid(1, 1000, 10)
    assert g[0] == 1 and g[-1] == 1000 and list(g) == sorted(set(g))
