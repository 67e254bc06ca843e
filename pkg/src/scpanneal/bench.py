"""Scaling benchmarks: random ensembles binned by spin count, per-instance
runtimes for each backend, and the least-squares exponent of median runtime.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .exceptions import IntegrationError, TargetUnreachableError
from .instance import gen_random_dummy_free, pair_cover_map
from .ising import ground_states_exhaustive, reduce, MAX_EXHAUSTIVE_SPINS
from .qa import MAX_SIM_SPINS, build_success_spec, find_min_anneal_time
from .sa import SaConfig, optimize_sweeps

log = logging.getLogger("scpanneal.bench")

DEFAULT_SWEEPS_GRID = (1, 2, 3, 5, 8, 13, 20, 32, 50, 80, 128, 200, 320, 500, 800)


def spin_count(inst):
    """``M`` of the reduced model, computed without building it."""
    pcm = pair_cover_map(inst)
    return inst.m + sum(2 * pcm.r(k) - 1 for k in range(1, inst.n + 1))


def sample_ensemble(M_values, per_size, n_range=(1, 5), m_range=(2, 5), seed=None, max_draws=200_000):
    """Random feasible instances binned by ``M``.

    Each draw picks ``(n, m)`` uniformly from the inclusive ranges, generates a
    dummy-free instance, and files it under its spin count if that bin is
    still short.  Returns ``(bins, draws)``; bins that could not be filled
    within ``max_draws`` are returned short.
    """
    rng = np.random.default_rng(seed)
    want = sorted(set(M_values))
    bins = {M: [] for M in want}
    draws = 0
    while draws < max_draws and any(len(b) < per_size for b in bins.values()):
        draws += 1
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        m = int(rng.integers(m_range[0], m_range[1] + 1))
        inst = gen_random_dummy_free(n, m, rng)
        if not inst.feasible:
            continue
        M = spin_count(inst)
        if M in bins and len(bins[M]) < per_size:
            bins[M].append(inst)
    return bins, draws


def qa_runtime(inst, target=0.25, t_max=4096, tol=1e-8, convention="squared", alpha=None):
    model, layout = reduce(inst, _cfg(alpha))
    if model.M > MAX_SIM_SPINS:
        return {"status": "capacity"}
    spec = build_success_spec(inst, layout, convention)
    try:
        T, p, _ = find_min_anneal_time(model, spec, target=target, t_max=t_max, tol=tol)
    except TargetUnreachableError as exc:
        return {"status": "unreached", "best": list(exc.best) if exc.best else None}
    except IntegrationError as exc:
        return {"status": "integration", "error": str(exc)}
    return {"status": "ok", "T_star": T, "p_at_T_star": p}


def sa_runtime(inst, grid=DEFAULT_SWEEPS_GRID, runs=1000, target=0.25, seed=None, alpha=None, beta=None):
    model, _ = reduce(inst, _cfg(alpha))
    if model.M > MAX_EXHAUSTIVE_SPINS:
        return {"status": "capacity"}
    e0, _ = ground_states_exhaustive(model)
    cfg = SaConfig() if beta is None else SaConfig(beta_init=beta[0], beta_final=beta[1])
    try:
        opt = optimize_sweeps(model, grid, runs, e0, seed=seed, p=target, cfg=cfg)
    except TargetUnreachableError:
        return {"status": "unreached"}
    row = next(r for r in opt.curve if r["S"] == opt.S_star)
    return {"status": "ok", "S_star": opt.S_star, "T_star": opt.T_star, "w_at_S_star": row["w"]}


def _cfg(alpha):
    from .ising import ReductionConfig

    return ReductionConfig() if alpha is None else ReductionConfig(alpha=alpha)


def _task(args):
    backend, M, idx, inst, opts = args
    start = time.perf_counter()
    if backend == "qa":
        out = qa_runtime(inst, **opts)
    else:
        opts = dict(opts)
        opts["seed"] = np.random.SeedSequence(opts.pop("seed"), spawn_key=(M, idx))
        out = sa_runtime(inst, **opts)
    log.info("%s M=%d id=%d %s (%.1fs)", backend, M, idx, out, time.perf_counter() - start)
    return {"backend": backend, "M": M, "instance_id": idx, "n": inst.n, "m": inst.m, **out}


def run_bench(bins, backends, qa_opts=None, sa_opts=None, workers=1):
    """Runtime rows for every instance and backend, sorted by ``(backend, M, instance_id)``."""
    opts = {"qa": dict(qa_opts or {}), "sa": dict(sa_opts or {})}
    opts["sa"].setdefault("seed", 0)
    tasks = [
        (b, M, idx, inst, opts[b])
        for b in backends
        for M in sorted(bins)
        for idx, inst in enumerate(bins[M])
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_task, tasks))
    else:
        rows = [_task(t) for t in tasks]
    return sorted(rows, key=lambda r: (r["backend"], r["M"], r["instance_id"]))


def median_by_size(rows, key="T_star"):
    """``[(M, median, count)]`` over rows with status ok."""
    per = {}
    for r in rows:
        if r.get("status", "ok") == "ok":
            per.setdefault(r["M"], []).append(r[key])
    return [(M, float(np.median(v)), len(v)) for M, v in sorted(per.items())]


def fit_exponent(Ms, medians):
    """Least-squares slope and intercept of ``log2(median)`` against ``M``."""
    Ms = np.asarray(Ms, dtype=float)
    y = np.log2(np.asarray(medians, dtype=float))
    if Ms.size < 2:
        raise ValueError("need at least two sizes to fit an exponent")
    slope, intercept = np.polyfit(Ms, y, 1)
    return float(slope), float(intercept)


def geometric_grid(lo, hi, count):
    """Distinct integers roughly evenly spaced in log between ``lo`` and ``hi``."""
    vals = np.unique(np.round(np.geomspace(lo, hi, count)).astype(int))
    return tuple(int(v) for v in vals if v >= 1) or (max(1, math.ceil(lo)),)
