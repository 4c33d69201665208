"""Seeded Monte Carlo trials and parameter sweeps over the solvers."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .lc_solvers import biht_lc, bsl0_lc
from .omp import crossing_measurements, omp_solve
from .sampling import (
    MeasurementEnsemble,
    build_phi,
    build_phi_prime,
    encode_lc_events,
    lc_measure,
    sign_measure,
    uniform_levels,
)
from .signal import (
    DEFAULT_SPEC,
    SNR_CAP_DB,
    SignalSpec,
    dynamic_range,
    random_sparse_coeffs,
    reconstruction_snr,
)
from .solvers import Bsl0Params, biht_zc, bsl0_zc

log = logging.getLogger(__name__)

MODES = ("fig1_zc_sweep", "fig2_lc_sweep", "fig3_octave_band", "single")
MODE_ALIASES = {"fig1": "fig1_zc_sweep", "fig2": "fig2_lc_sweep", "fig3": "fig3_octave_band"}
ZC_SOLVERS = ("bsl0", "biht")
LC_SOLVERS = ("biht_lc", "bsl0_lc")
SOLVERS = ZC_SOLVERS + LC_SOLVERS + ("omp",)
OCTAVE_BAND = (201, 400)
CSV_HEADER = ["solver", "K", "L", "trial", "seed", "snr_db", "consistency", "iterations", "wall_time"]

_MODE_DEFAULTS = {
    "fig1_zc_sweep": {"K_list": [1, 2, 5, 10, 15, 20, 25, 30], "L_list": [0], "solvers": ["bsl0", "biht"]},
    "fig2_lc_sweep": {"K_list": [1, 2, 5, 10, 15, 20, 25, 30], "L_list": [2, 4, 8], "solvers": ["biht_lc", "bsl0_lc"]},
    "fig3_octave_band": {"K_list": [2, 5, 10, 20], "L_list": [4], "solvers": ["bsl0", "biht", "omp"]},
    "single": {"K_list": [10], "L_list": [4], "solvers": list(SOLVERS)},
}


@dataclass
class ExperimentConfig:
    mode: str = "single"
    spec: SignalSpec = DEFAULT_SPEC
    K_list: list = field(default_factory=lambda: [10])
    L_list: list = field(default_factory=lambda: [4])
    solvers: list = field(default_factory=lambda: list(SOLVERS))
    trials: int = 1
    master_seed: int = 0
    solver_params: dict = field(default_factory=dict)
    success_threshold_db: float = 20.0
    include_dc: bool = False

    def __post_init__(self):
        self.mode = MODE_ALIASES.get(self.mode, self.mode)
        if self.mode not in MODES:
            raise InvalidArgument(f"unknown mode {self.mode!r}")
        if self.mode == "fig3_octave_band" and self.spec.band != OCTAVE_BAND:
            self.spec = self.spec.with_band(OCTAVE_BAND)
        if self.mode == "fig1_zc_sweep":
            self.L_list = [0]
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidArgument(f"trials must be a positive integer, got {self.trials}")
        if not self.K_list or not self.L_list:
            raise InvalidArgument("K_list and L_list must be non-empty")
        for L in self.L_list:
            if int(L) != L or L < 0 or L % 2:
                raise InvalidArgument(f"levels count L must be even and >= 0, got {L}")
        for K in self.K_list:
            if int(K) != K or K < 1:
                raise InvalidArgument(f"K must be a positive integer, got {K}")
        unknown = set(self.solvers) - set(SOLVERS)
        if unknown:
            raise InvalidArgument(f"unknown solvers {sorted(unknown)}; choose from {SOLVERS}")
        if not math.isfinite(self.success_threshold_db):
            raise InvalidArgument("success threshold must be finite")
        for name in self.solver_params:
            if name not in SOLVERS:
                raise InvalidArgument(f"parameters given for unknown solver {name!r}")
        self.bsl0_params()  # validate early

    @classmethod
    def for_mode(cls, mode: str, **overrides) -> "ExperimentConfig":
        mode = MODE_ALIASES.get(mode, mode)
        if mode not in _MODE_DEFAULTS:
            raise InvalidArgument(f"unknown mode {mode!r}")
        kw = {k: list(v) for k, v in _MODE_DEFAULTS[mode].items()}
        kw.update(overrides)
        return cls(mode=mode, **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        mode = d.pop("mode", "single")
        if "spec" in d:
            d["spec"] = SignalSpec.from_dict(d["spec"])
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise InvalidArgument(f"unknown config fields: {sorted(unknown)}")
        return cls.for_mode(mode, **d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spec"] = self.spec.to_dict()
        return d

    def bsl0_params(self, solver="bsl0") -> Bsl0Params:
        return Bsl0Params.from_dict(self.solver_params.get(solver, {}))

    def biht_kwargs(self, solver="biht") -> dict:
        kw = {"mu": 0.7, "epsilon": 0.0005, "iter_max": 50}
        given = self.solver_params.get(solver, {})
        unknown = set(given) - set(kw) - {"normalize_step"}
        if unknown:
            raise InvalidArgument(f"unknown {solver} parameters: {sorted(unknown)}")
        kw.update(given)
        return kw


@dataclass
class TrialResult:
    trial: int
    seed: int
    K: int
    L: int
    solver: str
    snr_db: float
    sign_consistency: float
    iterations: int
    wall_time: float
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def trial_seed(master_seed: int, trial_index: int, K: int, L: int) -> int:
    """Stable 64-bit seed for one (trial, K, L) cell."""
    payload = struct.pack("<QQQQ", *(int(v) & (2**64 - 1) for v in (master_seed, trial_index, K, L)))
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass
class Instance:
    """Everything the solvers need for one generated signal."""

    coeffs: np.ndarray
    spec: SignalSpec
    L: int
    phi: np.ndarray
    samples: np.ndarray

    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def levels(self) -> np.ndarray:
        if "levels" not in self._cache:
            self._cache["levels"] = uniform_levels(dynamic_range(self.samples), self.L)
        return self._cache["levels"]

    def zc(self) -> MeasurementEnsemble:
        if "zc" not in self._cache:
            self._cache["zc"] = MeasurementEnsemble(self.phi, sign_measure(self.samples), "ZC", self.spec)
        return self._cache["zc"]

    def lc(self) -> MeasurementEnsemble:
        if "lc" not in self._cache:
            self._cache["lc"] = MeasurementEnsemble(
                build_phi_prime(self.phi, self.levels), lc_measure(self.samples, self.levels),
                "LC", self.spec, self.levels,
            )
        return self._cache["lc"]

    def events(self):
        return encode_lc_events(self.samples, self.levels, self.spec.sample_period)


def make_instance(spec: SignalSpec, K: int, L: int, seed: int, include_dc=False, phi=None) -> Instance:
    coeffs = random_sparse_coeffs(spec, K, include_dc=include_dc, rng_seed=seed)
    phi = build_phi(spec) if phi is None else phi
    return Instance(coeffs, spec, L, phi, phi @ coeffs)


def solve(solver: str, inst: Instance, K: int, config: ExperimentConfig, verbose=False):
    """Run one solver on one instance; returns ``(snr_db, consistency, iterations, trace)``.

    ZC solvers are scored scale-invariantly, the others on absolute error.
    For ``omp`` the trace is the OmpResult and consistency is measured on
    the LC signs of its estimate.
    """
    if solver == "bsl0":
        tr = bsl0_zc(inst.zc(), config.bsl0_params("bsl0"), verbose=verbose)
    elif solver == "biht":
        tr = biht_zc(inst.zc(), K, verbose=verbose, **config.biht_kwargs("biht"))
    elif solver == "bsl0_lc":
        tr = bsl0_lc(inst.lc(), config.bsl0_params("bsl0_lc"), verbose=verbose)
    elif solver == "biht_lc":
        tr = biht_lc(inst.lc(), K, verbose=verbose, **config.biht_kwargs("biht_lc"))
    elif solver == "omp":
        res = omp_solve(crossing_measurements(inst.events(), inst.spec), K)
        x_hat = inst.phi @ res.estimate
        consistency = float(np.mean(lc_measure(x_hat, inst.levels) == inst.lc().signs))
        snr = reconstruction_snr(inst.coeffs, res.estimate, scale_invariant=False)
        return snr, consistency, K, res
    else:
        raise InvalidArgument(f"unknown solver {solver!r}")
    snr = reconstruction_snr(inst.coeffs, tr.estimate, scale_invariant=solver in ZC_SOLVERS)
    return snr, tr.sign_consistency, tr.iterations, tr


def run_cell(config: ExperimentConfig, trial_index: int, K: int, L: int, phi=None, timing=True) -> list[TrialResult]:
    seed = trial_seed(config.master_seed, trial_index, K, L)
    rows = []
    if not config.solvers:
        return rows
    try:
        inst = make_instance(config.spec, K, L, seed, config.include_dc, phi)
    except Exception as exc:  # noqa: BLE001 - one bad cell must not abort a sweep
        return [TrialResult(trial_index, seed, K, L, s, -SNR_CAP_DB, 0.0, 0, 0.0, repr(exc)) for s in config.solvers]
    for solver in config.solvers:
        start = time.perf_counter()
        try:
            snr, consistency, iters, _ = solve(solver, inst, K, config)
            err = None
        except Exception as exc:  # noqa: BLE001
            log.warning("solver %s failed on trial %d (K=%d, L=%d): %r", solver, trial_index, K, L, exc)
            snr, consistency, iters, err = -SNR_CAP_DB, 0.0, 0, repr(exc)
        wall = time.perf_counter() - start if timing else 0.0
        rows.append(TrialResult(trial_index, seed, K, L, solver, snr, consistency, iters, wall, err))
    return rows


def run_trial(config: ExperimentConfig, trial_index: int, K: int | None = None, L: int | None = None) -> list[TrialResult]:
    """One row per configured solver for a single seeded trial.

    `K` and `L` default to the first entries of the config's sweep lists.
    """
    K = config.K_list[0] if K is None else K
    L = config.L_list[0] if L is None else L
    return run_cell(config, trial_index, K, L)


def _cell_worker(args):
    config, trial, K, L = args
    return run_cell(config, trial, K, L)


def sweep(config: ExperimentConfig, threads: int = 1, progress=None) -> list[TrialResult]:
    """Run the full ``K_list x L_list x trials`` grid.

    Rows come back ordered by (solver, K, L, trial) regardless of how many
    worker processes were used.
    """
    cells = [(config, t, K, L) for K in config.K_list for L in config.L_list for t in range(config.trials)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_cell_worker, cells, chunksize=max(1, len(cells) // (4 * threads))))
    else:
        phi = build_phi(config.spec)
        results = []
        for i, (_, t, K, L) in enumerate(cells):
            results.append(run_cell(config, t, K, L, phi))
            if progress:
                progress(i + 1, len(cells))
    rows = [r for cell in results for r in cell]
    order = {s: i for i, s in enumerate(config.solvers)}
    k_order = {K: i for i, K in enumerate(config.K_list)}
    l_order = {L: i for i, L in enumerate(config.L_list)}
    rows.sort(key=lambda r: (order[r.solver], k_order[r.K], l_order[r.L], r.trial))
    return rows


def success_probability(rows, threshold_db: float = 20.0) -> dict:
    """Fraction of rows with ``snr_db > threshold_db`` per (solver, K, L)."""
    if not rows:
        raise InvalidArgument("empty result table")
    groups: dict = {}
    for r in rows:
        hits, total = groups.get((r.solver, r.K, r.L), (0, 0))
        groups[(r.solver, r.K, r.L)] = (hits + (r.snr_db > threshold_db), total + 1)
    return {key: hits / total for key, (hits, total) in groups.items()}


def mean_snr(rows) -> dict:
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.solver, r.K, r.L), []).append(r.snr_db)
    return {key: float(np.mean(v)) for key, v in groups.items()}


def _fmt(v) -> str:
    return repr(float(v))


def rows_to_csv(rows, include_timing: bool = False) -> str:
    """CSV text with the fixed header.

    ``wall_time`` is left blank unless `include_timing`, so re-runs with the
    same seed are byte-identical.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.solver, r.K, r.L, r.trial, r.seed, _fmt(r.snr_db), _fmt(r.sign_consistency),
                    r.iterations, _fmt(r.wall_time) if include_timing else ""])
    return buf.getvalue()


def read_csv(path) -> list[TrialResult]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise InvalidArgument(f"unexpected CSV header {reader.fieldnames}")
        for d in reader:
            rows.append(TrialResult(
                trial=int(d["trial"]), seed=int(d["seed"]), K=int(d["K"]), L=int(d["L"]),
                solver=d["solver"], snr_db=float(d["snr_db"]), sign_consistency=float(d["consistency"]),
                iterations=int(d["iterations"]), wall_time=float(d["wall_time"]) if d["wall_time"] else 0.0,
            ))
    return rows


