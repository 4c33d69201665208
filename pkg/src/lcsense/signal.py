"""Sparse harmonic signal model ``x(t) = sum_n a_n cos(n w0 t)``.

Coefficients are plain 1-D float arrays indexed ``a_0 .. a_N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

SNR_CAP_DB = 300.0


@dataclass(frozen=True)
class SignalSpec:
    """Harmonic order bound, fundamental, observation window and sampling grid.

    ``band`` is the inclusive harmonic index interval the support is drawn
    from. It defaults to ``(1, n_max)`` (DC excluded).
    """

    n_max: int
    omega0: float
    duration: float
    sample_period: float
    band: tuple[int, int] | None = None

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise InvalidArgument(f"n_max must be an integer >= 1, got {self.n_max}")
        for name in ("omega0", "duration", "sample_period"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidArgument(f"{name} must be positive and finite, got {v}")
        band = (1, self.n_max) if self.band is None else tuple(int(b) for b in self.band)
        if len(band) != 2 or not 0 <= band[0] <= band[1] <= self.n_max:
            raise InvalidArgument(f"band must satisfy 0 <= lo <= hi <= n_max, got {self.band}")
        object.__setattr__(self, "band", band)
        m = self.num_samples
        if abs((m - 1) * self.sample_period - self.duration) > 1e-9 * self.duration:
            raise InvalidArgument(
                f"duration {self.duration} is not a whole number of sample periods "
                f"{self.sample_period}"
            )

    @property
    def num_samples(self) -> int:
        """Sample count M, with ``(M - 1) * T == duration``."""
        return int(round(self.duration / self.sample_period)) + 1

    @property
    def n_coeffs(self) -> int:
        return self.n_max + 1

    @property
    def band_width(self) -> int:
        return self.band[1] - self.band[0] + 1

    def with_band(self, band) -> "SignalSpec":
        return SignalSpec(self.n_max, self.omega0, self.duration, self.sample_period, tuple(band))

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "omega0": self.omega0,
            "duration": self.duration,
            "sample_period": self.sample_period,
            "band": list(self.band),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SignalSpec":
        band = d.get("band")
        return cls(
            n_max=int(d["n_max"]),
            omega0=float(d["omega0"]),
            duration=float(d["duration"]),
            sample_period=float(d["sample_period"]),
            band=None if band is None else tuple(band),
        )


# Experimental setup used throughout the evaluation: N=500, d=2 s, T=0.5 ms, w0=10 rad/s.
DEFAULT_SPEC = SignalSpec(n_max=500, omega0=10.0, duration=2.0, sample_period=5e-4)


def random_sparse_coeffs(spec: SignalSpec, K: int, include_dc: bool = False, rng_seed: int = 0) -> np.ndarray:
    """Draw a unit-norm K-sparse coefficient vector.

    The support is drawn uniformly without replacement from ``spec.band``
    (minus index 0 unless `include_dc`), values are i.i.d. standard normal.
    """
    lo, hi = spec.band
    candidates = np.arange(lo, hi + 1)
    if not include_dc:
        candidates = candidates[candidates != 0]
    if candidates.size == 0:
        raise InvalidArgument("empty candidate band")
    if not 1 <= K <= candidates.size:
        raise InvalidArgument(f"K={K} outside [1, {candidates.size}]")
    rng = np.random.default_rng(rng_seed)
    support = np.sort(rng.choice(candidates, size=K, replace=False))
    values = rng.standard_normal(K)
    while not np.all(values):
        values = rng.standard_normal(K)
    a = np.zeros(spec.n_coeffs)
    a[support] = values / np.linalg.norm(values)
    return a


def evaluate(coeffs, omega0: float, t):
    """Evaluate ``sum_n a_n cos(n * omega0 * t)`` at scalar or array `t`."""
    coeffs = np.asarray(coeffs, dtype=float)
    t = np.asarray(t, dtype=float)
    n = np.arange(coeffs.size)
    out = np.cos(np.multiply.outer(t, n * omega0)) @ coeffs
    return float(out) if out.ndim == 0 else out


def sample_times(spec: SignalSpec) -> np.ndarray:
    return np.arange(spec.num_samples) * spec.sample_period


def uniform_sample(coeffs, spec: SignalSpec) -> np.ndarray:
    """Samples ``x[m] = x(m T)`` for ``m = 0 .. M-1``."""
    return evaluate(coeffs, spec.omega0, sample_times(spec))


def reconstruction_snr(reference, estimate, scale_invariant: bool) -> float:
    """Coefficient-domain reconstruction SNR in dB, clipped to +-300.

    In scale-invariant mode both vectors are projected to the unit sphere
    before differencing, so any positive rescaling of `estimate` gives the
    same value. An all-zero estimate there has no direction and scores -300.
    """
    ref = np.asarray(reference, dtype=float)
    est = np.asarray(estimate, dtype=float)
    if ref.shape != est.shape:
        raise InvalidArgument(f"shape mismatch {ref.shape} vs {est.shape}")
    ref_norm = np.linalg.norm(ref)
    if ref_norm == 0:
        raise InvalidArgument("reference must be nonzero")
    if scale_invariant:
        est_norm = np.linalg.norm(est)
        if est_norm == 0 or not np.isfinite(est_norm):
            return -SNR_CAP_DB
        num, err = 1.0, np.linalg.norm(ref / ref_norm - est / est_norm)
    else:
        num, err = ref_norm, np.linalg.norm(ref - est)
    if not np.isfinite(err):
        return -SNR_CAP_DB
    if err <= num * 10 ** (-SNR_CAP_DB / 20):
        return SNR_CAP_DB
    return float(np.clip(20 * np.log10(num / err), -SNR_CAP_DB, SNR_CAP_DB))


def dynamic_range(samples) -> tuple[float, float]:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise InvalidArgument("empty sample sequence")
    return float(x.min()), float(x.max())
