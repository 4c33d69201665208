"""Sign measurements for zero/level crossings and the LC event-stream format.

Level sets are ascending arrays ``l_{-L/2} .. l_{L/2}``. Stacked quantities
(``phi_prime`` rows, ``lc_measure`` output) are ordered highest level first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptStream, InvalidArgument
from .signal import SignalSpec, sample_times


def build_phi(spec: SignalSpec) -> np.ndarray:
    """Cosine sampling matrix, ``phi[m, n] = cos(n w0 m T)``, shape M x (N+1)."""
    t = sample_times(spec)
    n = np.arange(spec.n_coeffs)
    return np.cos(np.multiply.outer(t, n * spec.omega0))


def sign_measure(samples) -> np.ndarray:
    """Element-wise sign with ``sign(0) = +1``, as float +-1."""
    x = np.asarray(samples, dtype=float)
    return np.where(x >= 0, 1.0, -1.0)


def _check_levels(levels) -> np.ndarray:
    levels = np.atleast_1d(np.asarray(levels, dtype=float))
    if levels.ndim != 1 or levels.size == 0:
        raise InvalidArgument("levels must be a non-empty 1-D sequence")
    if levels.size % 2 != 1:
        raise InvalidArgument(f"need an odd number of levels (L even), got {levels.size}")
    if np.any(np.diff(levels) <= 0):
        raise InvalidArgument("levels must be strictly increasing")
    return levels


def uniform_levels(value_range, L: int) -> np.ndarray:
    """L+1 equispaced levels strictly inside ``(min, max)``.

    ``l_k = min + (k + L/2 + 1) (max - min) / (L + 2)`` for ``k = -L/2 .. L/2``.
    """
    lo, hi = (float(v) for v in value_range)
    if not lo < hi:
        raise InvalidArgument(f"empty range ({lo}, {hi})")
    if int(L) != L or L < 0 or L % 2:
        raise InvalidArgument(f"L must be a non-negative even integer, got {L}")
    L = int(L)
    k = np.arange(1, L + 2)
    return lo + k * (hi - lo) / (L + 2)


def build_phi_prime(phi, levels) -> np.ndarray:
    """Stack one copy of `phi` per level with a private level column.

    Block-row ``r`` belongs to ``levels[::-1][r]``; its level column is
    ``N + 1 + r`` and holds the constant level value. Multiplying by
    ``[a; -1, ..., -1]`` gives ``[phi a - l_{L/2}; ...; phi a - l_{-L/2}]``.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2:
        raise InvalidArgument("phi must be a matrix")
    levels = np.atleast_1d(np.asarray(levels, dtype=float))
    if levels.ndim != 1 or levels.size == 0:
        raise InvalidArgument("levels must be a non-empty 1-D sequence")
    M, n_coeffs = phi.shape
    n_levels = levels.size
    out = np.zeros((M * n_levels, n_coeffs + n_levels))
    for r, lev in enumerate(levels[::-1]):
        rows = slice(r * M, (r + 1) * M)
        out[rows, :n_coeffs] = phi
        out[rows, n_coeffs + r] = lev
    return out


def lc_measure(samples, levels) -> np.ndarray:
    """Stacked ``sign(x - l_i)``, highest level first."""
    x = np.asarray(samples, dtype=float)
    levels = _check_levels(levels)
    return np.concatenate([sign_measure(x - lev) for lev in levels[::-1]])


def augment(coeffs, n_levels: int) -> np.ndarray:
    """``[a; -1 * (L+1)]``, the feasible augmented vector for `coeffs`."""
    return np.concatenate([np.asarray(coeffs, dtype=float), -np.ones(n_levels)])


@dataclass(frozen=True)
class MeasurementEnsemble:
    """A sampling matrix together with the sign vector observed through it."""

    phi: np.ndarray
    signs: np.ndarray
    kind: str
    spec: SignalSpec
    levels: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.kind not in ("ZC", "LC"):
            raise InvalidArgument(f"kind must be ZC or LC, got {self.kind!r}")
        if self.phi.shape[0] != self.signs.size:
            raise InvalidArgument("signs length must equal phi row count")
        if not np.all(np.abs(self.signs) == 1):
            raise InvalidArgument("signs must be +-1")

    @property
    def n_levels(self) -> int:
        return self.levels.size if self.kind == "LC" else 0

    @property
    def n_coeffs(self) -> int:
        return self.spec.n_coeffs


def zc_ensemble(coeffs, spec: SignalSpec, phi=None) -> MeasurementEnsemble:
    phi = build_phi(spec) if phi is None else phi
    return MeasurementEnsemble(phi, sign_measure(phi @ coeffs), "ZC", spec)


def lc_ensemble(coeffs, spec: SignalSpec, L: int, phi=None) -> MeasurementEnsemble:
    """Level-crossing measurements with L+1 levels spread over the signal's range."""
    phi = build_phi(spec) if phi is None else phi
    x = phi @ coeffs
    levels = uniform_levels((x.min(), x.max()), L)
    return MeasurementEnsemble(build_phi_prime(phi, levels), lc_measure(x, levels), "LC", spec, levels)


@dataclass
class LCEventStream:
    """Crossing events on the sampling grid.

    Each event is ``(tick, level_index, direction)`` with ``tick`` in
    ``[1, M-1]``, ``level_index`` in ``[-L/2, L/2]`` and ``direction`` the
    new sign. ``initial_signs`` is ordered like `levels` (ascending).
    """

    levels: np.ndarray
    sample_period: float
    M: int
    initial_signs: np.ndarray
    events: list = field(default_factory=list)

    @property
    def half_L(self) -> int:
        return (len(self.levels) - 1) // 2

    def level_value(self, level_index: int) -> float:
        return float(self.levels[level_index + self.half_L])

    def dumps(self) -> str:
        lines = [
            "levels=" + ",".join(repr(float(v)) for v in self.levels),
            f"T={float(self.sample_period)!r}",
            f"M={int(self.M)}",
            "init=" + ",".join(str(int(s)) for s in self.initial_signs),
        ]
        lines += [f"{t},{i},{d}" for t, i, d in self.events]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "LCEventStream":
        header = {}
        events = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                key, _, value = line.partition("=")
                header[key.strip()] = value.strip()
                continue
            try:
                t, i, d = (int(p) for p in line.split(","))
            except ValueError:
                raise CorruptStream(f"line {lineno}: bad event {raw!r}") from None
            events.append((t, i, d))
        missing = {"levels", "T", "M", "init"} - header.keys()
        if missing:
            raise CorruptStream(f"missing header fields: {sorted(missing)}")
        try:
            levels = np.array([float(v) for v in header["levels"].split(",")])
            init = np.array([int(v) for v in header["init"].split(",")], dtype=float)
            stream = cls(levels, float(header["T"]), int(header["M"]), init, events)
        except ValueError as exc:
            raise CorruptStream(f"bad header: {exc}") from None
        return stream

    @classmethod
    def load(cls, path) -> "LCEventStream":
        return cls.loads(Path(path).read_text())


def encode_lc_events(samples, levels, sample_period: float = 1.0) -> LCEventStream:
    """Emulate a level-crossing A/D: one event per per-level sign change."""
    x = np.asarray(samples, dtype=float)
    levels = _check_levels(levels)
    if x.size == 0:
        raise InvalidArgument("empty sample sequence")
    signs = sign_measure(np.subtract.outer(x, levels).T)  # (L+1, M)
    half = (levels.size - 1) // 2
    ticks, rows = np.nonzero(np.diff(signs, axis=1).T)
    events = [(int(m) + 1, int(r) - half, int(signs[r, m + 1])) for m, r in zip(ticks, rows)]
    return LCEventStream(levels, sample_period, x.size, signs[:, 0].copy(), events)


def validate_stream(stream: LCEventStream) -> None:
    levels = np.asarray(stream.levels, dtype=float)
    if levels.size % 2 != 1 or np.any(np.diff(levels) <= 0):
        raise CorruptStream("levels must be an odd-length strictly increasing sequence")
    if np.asarray(stream.initial_signs).shape != levels.shape:
        raise CorruptStream("need one initial sign per level")
    if not np.all(np.abs(stream.initial_signs) == 1):
        raise CorruptStream("initial signs must be +-1")
    if stream.M < 1:
        raise CorruptStream(f"M must be positive, got {stream.M}")
    half = stream.half_L
    prev = None
    for t, i, d in stream.events:
        if not 1 <= t <= stream.M - 1:
            raise CorruptStream(f"tick {t} outside [1, {stream.M - 1}]")
        if not -half <= i <= half:
            raise CorruptStream(f"level index {i} outside [-{half}, {half}]")
        if d not in (-1, 1):
            raise CorruptStream(f"direction must be +-1, got {d}")
        key = (t, i)
        if prev is not None and key <= prev:
            raise CorruptStream(f"events not strictly sorted by (tick, level) at {key}")
        prev = key


def level_sign_sequences(stream: LCEventStream) -> np.ndarray:
    """Replay the stream into an (L+1) x M array of signs, ascending levels."""
    validate_stream(stream)
    half = stream.half_L
    out = np.empty((len(stream.levels), stream.M))
    current = np.asarray(stream.initial_signs, dtype=float).copy()
    by_level = [[] for _ in stream.levels]
    for t, i, d in stream.events:
        by_level[i + half].append((t, d))
    for r, evs in enumerate(by_level):
        start, sign = 0, current[r]
        for t, d in evs:
            if d == sign:
                raise CorruptStream(f"event at tick {t} level {r - half} does not flip the sign")
            out[r, start:t] = sign
            start, sign = t, d
        out[r, start:] = sign
    return out


def decode_lc_events(stream: LCEventStream) -> np.ndarray:
    """Recover the stacked sign vector, highest level first."""
    return level_sign_sequences(stream)[::-1].ravel()
