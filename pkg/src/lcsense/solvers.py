"""Zero-crossing (single level) solvers: BSL0 and BIHT, plus shared kernels."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidArgument
from .sampling import MeasurementEnsemble, sign_measure


# "sl0": the sparsity term is stepped by mu * sigma^2 / 2 (a <- a - mu a exp(-a^2/sigma^2)),
# as in basic SL0, and the sign term is averaged over level blocks (a no-op for ZC).
# "literal": the raw sub-gradient is stepped by mu; with the default mu and sigma0
# its sparsity part has gain 140 and the iteration diverges.
STEP_RULES = ("sl0", "literal")


@dataclass(frozen=True)
class Bsl0Params:
    """BSL0 hyperparameters; defaults are the reference experiment values.

    ``theta0`` and ``delta`` only affect the zero-crossing solver; the LC
    variant has no norm penalty.
    """

    sigma0: float = 0.1
    lambda0: float = 2.5e-4
    theta0: float = 0.3
    alpha: float = 0.9
    beta: float = 2.0
    delta: float = 2.0
    sigma_min: float = 0.001
    mu: float = 0.7
    epsilon: float = 0.0005
    iter_max: int = 50
    exact_penalty_gradient: bool = False
    continue_sigma: bool = False
    step_rule: str = "sl0"

    def __post_init__(self):
        for name in ("sigma0", "lambda0", "theta0", "sigma_min", "mu", "epsilon"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidArgument(f"{name} must be positive, got {v}")
        if not 0 < self.alpha < 1:
            raise InvalidArgument(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (self.beta > 1 and self.delta > 1):
            raise InvalidArgument("beta and delta must exceed 1")
        if not self.sigma_min < self.sigma0:
            raise InvalidArgument("sigma_min must be below sigma0")
        if int(self.iter_max) != self.iter_max or self.iter_max < 1:
            raise InvalidArgument(f"iter_max must be a positive integer, got {self.iter_max}")
        if self.step_rule not in STEP_RULES:
            raise InvalidArgument(f"step_rule must be one of {STEP_RULES}, got {self.step_rule!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "Bsl0Params":
        known = cls.__dataclass_fields__.keys()
        unknown = set(d) - set(known)
        if unknown:
            raise InvalidArgument(f"unknown BSL0 parameters: {sorted(unknown)}")
        return cls(**d)


@dataclass
class SolveTrace:
    """Result of one solver run.

    ``history`` is only filled when the solver is called with
    ``verbose=True``; each entry describes the iterate after one step.
    """

    estimate: np.ndarray
    iterations: int
    cost_terms: dict
    sign_consistency: float
    converged: bool
    params: dict = field(default_factory=dict)
    augmented: np.ndarray | None = None
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "estimate": [float(v) for v in self.estimate],
            "iterations": self.iterations,
            "cost_terms": self.cost_terms,
            "sign_consistency": self.sign_consistency,
            "converged": self.converged,
            "params": self.params,
        }
        if self.augmented is not None:
            out["augmented"] = [float(v) for v in self.augmented]
        if self.history:
            out["history"] = self.history
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def f_sigma(a, sigma: float) -> float:
    """Smoothed L0 surrogate ``sum(1 - exp(-a^2 / sigma^2))``."""
    if not sigma > 0:
        raise InvalidArgument(f"sigma must be positive, got {sigma}")
    a = np.asarray(a, dtype=float)
    return float(np.sum(-np.expm1(-(a * a) / sigma**2)))


def _check_dims(a, phi, y):
    a = np.asarray(a, dtype=float)
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if phi.ndim != 2 or phi.shape != (y.size, a.size):
        raise InvalidArgument(f"phi {phi.shape} incompatible with a {a.shape}, y {y.shape}")
    return a, phi, y


def consistency_cost(a, phi, y) -> float:
    """One-sided sign loss ``||[Y phi a]_-||_1``; zero iff sign-consistent."""
    a, phi, y = _check_dims(a, phi, y)
    return float(np.sum(np.maximum(0.0, -y * (phi @ a))))


def norm_penalty(a) -> float:
    a = np.asarray(a, dtype=float)
    return float((a @ a - 1.0) ** 2)


def sign_consistency(a, phi, y) -> float:
    a, phi, y = _check_dims(a, phi, y)
    return float(np.mean(sign_measure(phi @ a) == y))


def bsl0_gradient(a, phi, y, sigma, lam, theta, exact_penalty_gradient=False):
    """Sub-gradient of ``F_sigma + lam J + theta (||a||^2 - 1)^2``.

    By default the penalty term is ``theta (||a||^2 - 1) a``, the form used by
    the reference update; the true derivative is four times that and is
    selected with `exact_penalty_gradient`. Pass ``theta=0`` to drop it.
    """
    return sum(_gradient_terms(a, phi, y, sigma, lam, theta, exact_penalty_gradient))


def _gradient_terms(a, phi, y, sigma, lam, theta, exact_penalty_gradient=False):
    if not sigma > 0:
        raise InvalidArgument(f"sigma must be positive, got {sigma}")
    a, phi, y = _check_dims(a, phi, y)
    g_sparse = (2.0 / sigma**2) * np.exp(-(a * a) / sigma**2) * a
    g_sign = (lam / 2.0) * (phi.T @ (sign_measure(phi @ a) - y))
    scale = 4.0 if exact_penalty_gradient else 1.0
    g_norm = scale * theta * (a @ a - 1.0) * a if theta else np.zeros_like(a)
    return g_sparse, g_sign, g_norm


def hard_threshold(v, K: int) -> np.ndarray:
    """Keep the K largest-magnitude entries; ties go to the lower index."""
    v = np.asarray(v, dtype=float)
    if int(K) != K or not 0 <= K <= v.size:
        raise InvalidArgument(f"K={K} outside [0, {v.size}]")
    out = np.zeros_like(v)
    if K:
        keep = np.argsort(-np.abs(v), kind="stable")[:K]
        out[keep] = v[keep]
    return out


def _unit(a):
    n = np.linalg.norm(a)
    return a / n if n > 0 else a


def _snapshot(a, phi, y, n_coeffs, n_levels):
    entry = {"consistency": sign_consistency(a, phi, y), "head_nnz": int(np.count_nonzero(a[:n_coeffs]))}
    if n_levels:
        entry["feasible"] = bool(np.all(a[n_coeffs:] == -1.0))
    return entry


def run_bsl0(phi, y, params: Bsl0Params, n_coeffs: int, project=None, use_norm_penalty=True,
             n_blocks: int = 1, verbose=False):
    """Dual-loop smoothed-L0 descent shared by the ZC and LC solvers.

    Returns ``(a, iterations, converged, history)``. Iterations count single
    gradient steps and are capped at ``iter_max`` inside the inner loop.
    """
    a = np.zeros(phi.shape[1])
    if project is not None:
        a = project(a)
    a_prev = np.full_like(a, -100.0)
    k = 1
    lam = params.lambda0
    theta = params.theta0 if use_norm_penalty else 0.0
    sigma = params.sigma0
    history = []
    while np.linalg.norm(a - a_prev) > params.epsilon and k <= params.iter_max:
        if params.continue_sigma:
            sigma = max(sigma, params.sigma_min * (1 + 1e-12))
        while sigma > params.sigma_min and k <= params.iter_max:
            g_sparse, g_sign, g_norm = _gradient_terms(a, phi, y, sigma, lam, theta, params.exact_penalty_gradient)
            if params.step_rule == "sl0":
                g_sparse *= sigma**2 / 2.0
                g_sign /= n_blocks
            a_prev, a = a, a - params.mu * (g_sparse + g_sign + g_norm)
            if project is not None:
                a = project(a)
            if verbose:
                history.append({"k": k, "sigma": sigma, "lambda": lam, **_snapshot(a, phi, y, n_coeffs, phi.shape[1] - n_coeffs)})
            sigma *= params.alpha
            k += 1
        lam *= params.beta
        theta *= params.delta
        if not params.continue_sigma:
            sigma = params.sigma0
    converged = bool(np.linalg.norm(a - a_prev) <= params.epsilon)
    return a, k - 1, converged, history


def _require(ensemble: MeasurementEnsemble, kind: str):
    if ensemble.kind != kind:
        raise InvalidArgument(f"expected a {kind} ensemble, got {ensemble.kind}")


def _check_biht_args(K, mu, epsilon, iter_max, n_coeffs):
    if int(K) != K or not 1 <= K <= n_coeffs:
        raise InvalidArgument(f"K={K} outside [1, {n_coeffs}]")
    if not (mu > 0 and epsilon > 0):
        raise InvalidArgument("mu and epsilon must be positive")
    if int(iter_max) != iter_max or iter_max < 1:
        raise InvalidArgument(f"iter_max must be a positive integer, got {iter_max}")


def bsl0_zc(ensemble: MeasurementEnsemble, params: Bsl0Params | None = None, verbose=False) -> SolveTrace:
    """Binary smoothed-L0 reconstruction from zero-crossing signs.

    Sparsity is not needed. The returned estimate is scaled to unit norm.
    """
    _require(ensemble, "ZC")
    params = params or Bsl0Params()
    phi, y = ensemble.phi, ensemble.signs
    a, iters, converged, history = run_bsl0(phi, y, params, ensemble.n_coeffs, verbose=verbose)
    return SolveTrace(
        estimate=_unit(a),
        iterations=iters,
        cost_terms={
            "F_sigma": f_sigma(a, params.sigma_min),
            "J": consistency_cost(a, phi, y),
            "norm_penalty": norm_penalty(a),
        },
        sign_consistency=sign_consistency(a, phi, y),
        converged=converged,
        params={"solver": "bsl0", **asdict(params)},
        history=history,
    )


def biht_step(a, phi, y, mu, normalize=True):
    """Descent step on the sign loss; `normalize` divides `mu` by the row count."""
    if normalize:
        mu = mu / phi.shape[0]
    return a - mu * 0.5 * (phi.T @ (sign_measure(phi @ a) - y))


def biht_zc(ensemble: MeasurementEnsemble, K: int, mu: float = 0.7, epsilon: float = 0.0005,
            iter_max: int = 50, normalize_step=True, verbose=False) -> SolveTrace:
    """Binary iterative hard thresholding for zero-crossing signs.

    Returns a K-sparse unit-norm estimate.
    """
    _require(ensemble, "ZC")
    phi, y = ensemble.phi, ensemble.signs
    _check_biht_args(K, mu, epsilon, iter_max, ensemble.n_coeffs)
    a = np.zeros(phi.shape[1])
    a_prev = np.full_like(a, -100.0)
    k = 1
    history = []
    while np.linalg.norm(a - a_prev) > epsilon and k <= iter_max:
        a_prev, a = a, hard_threshold(biht_step(a, phi, y, mu, normalize_step), K)
        if verbose:
            history.append({"k": k, **_snapshot(a, phi, y, ensemble.n_coeffs, 0)})
        k += 1
    converged = bool(np.linalg.norm(a - a_prev) <= epsilon)
    return SolveTrace(
        estimate=_unit(a),
        iterations=k - 1,
        cost_terms={"J": consistency_cost(a, phi, y), "norm_penalty": norm_penalty(_unit(a))},
        sign_consistency=sign_consistency(a, phi, y),
        converged=converged,
        params={"solver": "biht", "K": int(K), "mu": mu, "epsilon": epsilon, "iter_max": int(iter_max),
                "normalize_step": bool(normalize_step)},
        history=history,
    )
