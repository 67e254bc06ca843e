"""Estimator-style wrappers around the functional API.

Each class keeps its configuration in ``__init__`` arguments (so
``get_params``/``set_params``/``clone`` work) and stores results in
trailing-underscore attributes after ``fit``.  The input to ``fit`` is one
:class:`~scpanneal.instance.ScpInstance`, not a sample matrix.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .instance import CoverSolution, ScpInstance, solve_exact, verify_cover
from .ising import ReductionConfig, decode, ground_states_exhaustive, reduce
from .qa import AnnealSchedule, build_success_spec, evolve, find_min_anneal_time
from .sa import SaConfig, anneal, optimize_sweeps


def _check_instance(inst):
    if not isinstance(inst, ScpInstance):
        raise TypeError(f"expected ScpInstance, got {type(inst).__name__}")
    return inst


class IsingReducer(TransformerMixin, BaseEstimator):
    """Instance -> Ising model.  ``transform`` returns the model; the layout is kept in ``layout_``."""

    def __init__(self, alpha=0.25, enforce_top=True):
        self.alpha = alpha
        self.enforce_top = enforce_top

    def fit(self, inst, y=None):
        inst = _check_instance(inst)
        self.model_, self.layout_ = reduce(inst, ReductionConfig(self.alpha, self.enforce_top))
        self.n_spins_ = self.model_.M
        return self

    def transform(self, inst):
        check_is_fitted(self, "model_")
        model, _ = reduce(_check_instance(inst), ReductionConfig(self.alpha, self.enforce_top))
        return model


class ExactCoverSolver(BaseEstimator):
    def fit(self, inst, y=None):
        self.cover_ = solve_exact(_check_instance(inst))
        return self

    def predict(self, inst=None):
        check_is_fitted(self, "cover_")
        return self.cover_


class QuantumAnnealer(BaseEstimator):
    """Minimum anneal time to reach ``target_p`` and the cover read off at that time.

    The predicted cover is the cover-bit pattern with the largest marginal
    probability in the final state.
    """

    def __init__(self, target_p=0.25, t_max=4096, tol=1e-8, convention="squared", alpha=0.25):
        self.target_p = target_p
        self.t_max = t_max
        self.tol = tol
        self.convention = convention
        self.alpha = alpha

    def fit(self, inst, y=None):
        inst = _check_instance(inst)
        model, layout = reduce(inst, ReductionConfig(self.alpha))
        spec = build_success_spec(inst, layout, self.convention)
        self.T_star_, self.p_star_, self.evaluations_ = find_min_anneal_time(
            model, spec, target=self.target_p, t_max=self.t_max, tol=self.tol
        )
        psi = evolve(model, AnnealSchedule(self.T_star_), tol=self.tol)
        probs = np.abs(psi.amplitudes) ** 2
        low = np.arange(probs.size) & ((1 << layout.m) - 1)
        marginal = np.bincount(low, weights=probs, minlength=1 << layout.m)
        best = int(np.argmax(marginal))
        self.cover_ = CoverSolution(i + 1 for i in range(layout.m) if best >> i & 1)
        self.cover_probability_ = float(marginal[best])
        self.n_spins_ = model.M
        return self

    def predict(self, inst=None):
        check_is_fitted(self, "cover_")
        return self.cover_


class SimulatedAnnealer(BaseEstimator):
    """Optimal sweep count over ``sweeps_grid`` and the best cover found.

    Success is judged against the exhaustive ground-state energy, so the
    model must be small enough to enumerate.
    """

    def __init__(self, sweeps_grid=(10, 20, 50, 100, 200, 500), runs=1000, target_p=0.25,
                 beta_init=0.1, beta_final=30.0, alpha=0.25, seed=None):
        self.sweeps_grid = sweeps_grid
        self.runs = runs
        self.target_p = target_p
        self.beta_init = beta_init
        self.beta_final = beta_final
        self.alpha = alpha
        self.seed = seed

    def fit(self, inst, y=None):
        inst = _check_instance(inst)
        model, layout = reduce(inst, ReductionConfig(self.alpha))
        e0, _ = ground_states_exhaustive(model)
        cfg = SaConfig(beta_init=self.beta_init, beta_final=self.beta_final)
        root = np.random.SeedSequence(self.seed)
        opt = optimize_sweeps(model, self.sweeps_grid, self.runs, e0, seed=root, p=self.target_p, cfg=cfg)
        self.S_star_, self.T_star_, self.curve_ = opt.S_star, opt.T_star, opt.rows()
        R = next(r["R"] for r in self.curve_ if r["S"] == opt.S_star)
        bits, energy = anneal(model, SaConfig(opt.S_star, R, self.beta_init, self.beta_final, root.spawn(1)[0]))
        self.energy_ = energy
        self.optimal_energy_ = e0
        self.cover_ = decode(layout, bits)
        self.n_spins_ = model.M
        return self

    def predict(self, inst=None):
        check_is_fitted(self, "cover_")
        return self.cover_

    def score(self, inst, y=None):
        """1.0 if the fitted cover is valid for ``inst``, else 0.0."""
        return float(verify_cover(inst, self.predict()))
