"""Level-crossing solvers on the stacked system ``y' = sign(phi' a')``.

Iterates are augmented vectors ``[a; t]`` whose tail ``t`` (one slot per
level) is pinned to -1 by projection after every step.
"""

from __future__ import annotations

from dataclasses import asdict

import numpy as np

from .errors import InvalidArgument
from .sampling import MeasurementEnsemble
from .solvers import (
    Bsl0Params,
    SolveTrace,
    _check_biht_args,
    _require,
    _snapshot,
    biht_step,
    consistency_cost,
    f_sigma,
    hard_threshold,
    run_bsl0,
    sign_consistency,
)


def project_onto_c(a_prime, n_coeffs: int) -> np.ndarray:
    """Euclidean projection onto ``{a' : a'[n_coeffs:] == -1}``."""
    a_prime = np.array(a_prime, dtype=float)
    if not 0 <= n_coeffs <= a_prime.size:
        raise InvalidArgument(f"n_coeffs={n_coeffs} outside [0, {a_prime.size}]")
    a_prime[n_coeffs:] = -1.0
    return a_prime


def _check_lc(ensemble):
    _require(ensemble, "LC")
    n_cols = ensemble.n_coeffs + ensemble.n_levels
    if ensemble.phi.shape[1] != n_cols:
        raise InvalidArgument(f"phi' has {ensemble.phi.shape[1]} columns, expected {n_cols}")


def _lc_trace(a, ensemble, iterations, converged, params, history, extra_costs=None):
    n = ensemble.n_coeffs
    costs = {"J": consistency_cost(a, ensemble.phi, ensemble.signs)}
    costs.update(extra_costs or {})
    return SolveTrace(
        estimate=a[:n].copy(),
        iterations=iterations,
        cost_terms=costs,
        sign_consistency=sign_consistency(a, ensemble.phi, ensemble.signs),
        converged=converged,
        params={**params, "L": ensemble.n_levels - 1, "levels": [float(v) for v in ensemble.levels]},
        augmented=a,
        history=history,
    )


def biht_lc(ensemble: MeasurementEnsemble, K: int, mu: float = 0.7, epsilon: float = 0.0005,
            iter_max: int = 50, normalize_step=True, verbose=False) -> SolveTrace:
    """BIHT with the level-slot constraint.

    Each step: gradient step on the whole augmented vector, best-K
    thresholding of the coefficient head, then reset of the tail to -1.
    The head is returned unnormalised.
    """
    _check_lc(ensemble)
    n = ensemble.n_coeffs
    _check_biht_args(K, mu, epsilon, iter_max, n)
    phi, y = ensemble.phi, ensemble.signs
    a = project_onto_c(np.zeros(phi.shape[1]), n)
    a_prev = np.full_like(a, -100.0)
    k = 1
    history = []
    while np.linalg.norm(a - a_prev) > epsilon and k <= iter_max:
        step = biht_step(a, phi, y, mu, normalize_step)
        step[:n] = hard_threshold(step[:n], K)
        a_prev, a = a, project_onto_c(step, n)
        if verbose:
            history.append({"k": k, **_snapshot(a, phi, y, n, ensemble.n_levels)})
        k += 1
    converged = bool(np.linalg.norm(a - a_prev) <= epsilon)
    params = {"solver": "biht_lc", "K": int(K), "mu": mu, "epsilon": epsilon, "iter_max": int(iter_max),
              "normalize_step": bool(normalize_step)}
    return _lc_trace(a, ensemble, k - 1, converged, params, history)


def bsl0_lc(ensemble: MeasurementEnsemble, params: Bsl0Params | None = None, verbose=False) -> SolveTrace:
    """Smoothed-L0 descent with the level-slot constraint and no norm penalty."""
    _check_lc(ensemble)
    params = params or Bsl0Params()
    n = ensemble.n_coeffs
    a, iters, converged, history = run_bsl0(
        ensemble.phi, ensemble.signs, params, n,
        project=lambda v: project_onto_c(v, n), use_norm_penalty=False,
        n_blocks=ensemble.n_levels, verbose=verbose,
    )
    return _lc_trace(a, ensemble, iters, converged, {"solver": "bsl0_lc", **asdict(params)}, history,
                     {"F_sigma": f_sigma(a, params.sigma_min)})
