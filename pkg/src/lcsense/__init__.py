"""Sparse harmonic signal reconstruction from zero and level crossings."""

from .errors import CorruptStream, InvalidArgument, Underdetermined
from .lc_solvers import biht_lc, bsl0_lc, project_onto_c
from .omp import CrossingMeasurementSet, OmpResult, crossing_measurements, omp_solve
from .sampling import (
    LCEventStream,
    MeasurementEnsemble,
    augment,
    build_phi,
    build_phi_prime,
    decode_lc_events,
    encode_lc_events,
    lc_ensemble,
    lc_measure,
    sign_measure,
    uniform_levels,
    zc_ensemble,
)
from .signal import (
    DEFAULT_SPEC,
    SignalSpec,
    dynamic_range,
    evaluate,
    random_sparse_coeffs,
    reconstruction_snr,
    uniform_sample,
)
from .solvers import (
    Bsl0Params,
    SolveTrace,
    biht_zc,
    bsl0_gradient,
    bsl0_zc,
    consistency_cost,
    f_sigma,
    hard_threshold,
)

__version__ = "0.1.0"
