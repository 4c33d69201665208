"""Conventional compressive-sensing baseline from level-crossing instants.

Each crossing is treated as an exact amplitude measurement ``x(t_i) = l_i``
at the midpoint of the tick interval that brackets it, and the resulting
linear system is solved with orthogonal matching pursuit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, Underdetermined
from .sampling import LCEventStream, validate_stream
from .signal import SignalSpec


@dataclass(frozen=True)
class CrossingMeasurementSet:
    times: np.ndarray
    values: np.ndarray
    matrix: np.ndarray

    def __len__(self):
        return self.times.size


def crossing_measurements(stream: LCEventStream, spec: SignalSpec) -> CrossingMeasurementSet:
    validate_stream(stream)
    T = stream.sample_period
    if stream.events:
        ticks, idx, _ = (np.array(c) for c in zip(*stream.events))
    else:
        ticks = idx = np.zeros(0, dtype=int)
    times = ticks * T - T / 2
    values = np.asarray(stream.levels, dtype=float)[idx + stream.half_L] if idx.size else np.zeros(0)
    n = np.arange(spec.n_coeffs)
    matrix = np.cos(np.multiply.outer(times, n * spec.omega0))
    return CrossingMeasurementSet(times.astype(float), values, matrix)


@dataclass
class OmpResult:
    estimate: np.ndarray
    support: list
    residual_norms: list = field(default_factory=list)
    rank_deficient: bool = False


def omp_solve(measurements: CrossingMeasurementSet, K: int) -> OmpResult:
    """K greedy OMP iterations: select the column best correlated with the
    residual (lowest index on ties), refit by least squares on the active
    set, update the residual.

    ``residual_norms[0]`` is the norm of the measurement vector itself.
    """
    A = np.asarray(measurements.matrix, dtype=float)
    b = np.asarray(measurements.values, dtype=float)
    if int(K) != K or K < 1:
        raise InvalidArgument(f"K must be a positive integer, got {K}")
    if b.size == 0:
        raise InvalidArgument("no crossing measurements")
    if b.size < K:
        raise Underdetermined(f"{b.size} crossings cannot determine {K} coefficients")
    support: list[int] = []
    residual = b.copy()
    norms = [float(np.linalg.norm(residual))]
    coef = np.zeros(0)
    rank_deficient = False
    for _ in range(int(K)):
        corr = np.abs(A.T @ residual)
        corr[support] = -np.inf
        support.append(int(np.argmax(corr)))
        sub = A[:, support]
        coef, _, rank, _ = np.linalg.lstsq(sub, b, rcond=None)
        rank_deficient |= rank < len(support)
        residual = b - sub @ coef
        norms.append(float(np.linalg.norm(residual)))
    estimate = np.zeros(A.shape[1])
    estimate[support] = coef
    return OmpResult(estimate, support, norms, bool(rank_deficient))
