import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcsense import CorruptStream, InvalidArgument
from lcsense.sampling import (
    LCEventStream,
    augment,
    build_phi,
    build_phi_prime,
    decode_lc_events,
    encode_lc_events,
    lc_ensemble,
    lc_measure,
    level_sign_sequences,
    sign_measure,
    uniform_levels,
)
from lcsense.signal import SignalSpec, random_sparse_coeffs, uniform_sample

from oracles import phi_entrywise, sign0


def small_spec(seed, n_max=None):
    rng = np.random.default_rng(seed)
    n_max = n_max or int(rng.integers(2, 51))
    T = float(rng.choice([0.002, 0.005, 0.01]))
    M = int(rng.integers(20, 120))
    return SignalSpec(n_max, float(rng.uniform(1, 20)), (M - 1) * T, T)


def test_phi_quarter_turn():
    spec = SignalSpec(2, math.pi / 2, 2.0, 1.0)
    want = [[1, 1, 1], [1, 0, -1], [1, -1, 1]]
    assert np.allclose(build_phi(spec), want, atol=1e-15)


def test_phi_pointwise():
    spec = SignalSpec(17, 7.3, 0.49, 0.007)
    phi = build_phi(spec)
    assert phi.shape == (spec.num_samples, 18)
    assert np.all(phi[:, 0] == 1)
    want = phi_entrywise(17, 7.3, 0.007, spec.num_samples)
    assert np.allclose(phi, want, rtol=0, atol=1e-12)


def test_sign_measure():
    assert sign_measure([0.5, 0, -2]).tolist() == [1, 1, -1]
    assert sign_measure(-np.arange(1, 6)).tolist() == [-1] * 5


def test_sign_of_samples_matches_product():
    spec = SignalSpec(30, 4.0, 1.0, 0.01)
    a = random_sparse_coeffs(spec, 4, rng_seed=2)
    phi = phi_entrywise(30, 4.0, 0.01, spec.num_samples)
    want = [sign0(sum(p * c for p, c in zip(row, a))) for row in phi]
    assert sign_measure(uniform_sample(a, spec)).tolist() == want


def test_uniform_levels():
    assert uniform_levels((-1, 1), 2).tolist() == [-0.5, 0.0, 0.5]
    assert uniform_levels((-1, 1), 0).tolist() == [0.0]
    got = uniform_levels((0, 10), 4)
    assert np.allclose(got, [10 / 6 * k for k in range(1, 6)], rtol=0, atol=1e-12)
    assert np.allclose(got, [1.6667, 3.3333, 5, 6.6667, 8.3333], atol=5e-5)
    for bad in [((1, 1), 2), ((2, 1), 2), ((0, 1), 3), ((0, 1), -2)]:
        with pytest.raises(InvalidArgument):
            uniform_levels(*bad)


@settings(max_examples=40, deadline=None)
@given(lo=st.floats(-100, 100), width=st.floats(1e-3, 100), half=st.integers(0, 10))
def test_levels_strictly_interior(lo, width, half):
    lev = uniform_levels((lo, lo + width), 2 * half)
    assert lev.size == 2 * half + 1
    assert np.all(np.diff(lev) > 0)
    assert lev[0] > lo and lev[-1] < lo + width


def test_phi_prime_single_zero_level():
    phi = build_phi(SignalSpec(3, 1.0, 1.0, 0.25))
    assert np.array_equal(build_phi_prime(phi, [0.0]), np.hstack([phi, np.zeros((phi.shape[0], 1))]))


def test_phi_prime_block_multiplication():
    phi = np.array([[1.0, 0.3], [1.0, -0.7]])  # M=2, N=1
    levels = [-1.0, 0.0, 1.0]
    pp = build_phi_prime(phi, levels)
    assert pp.shape == (6, 5)
    a = np.array([0.4, 2.0])
    got = pp @ np.array([0.4, 2.0, -1, -1, -1])
    pa = [a[0] * 1 + a[1] * 0.3, a[0] * 1 + a[1] * -0.7]
    want = [pa[0] - 1, pa[1] - 1, pa[0] - 0, pa[1] - 0, pa[0] + 1, pa[1] + 1]
    assert np.allclose(got, want, rtol=0, atol=1e-15)


@pytest.mark.parametrize("L", [0, 2, 4, 8])
def test_phi_prime_structure(L):
    spec = small_spec(L)
    phi = build_phi(spec)
    levels = uniform_levels((-1.3, 0.9), L)
    pp = build_phi_prime(phi, levels)
    M, n = phi.shape
    assert pp.shape == (M * (L + 1), n + L + 1)
    assert all(np.count_nonzero(pp[:, n + j]) == M for j in range(L + 1))
    assert np.array_equal(pp[:, :n], np.vstack([phi] * (L + 1)))


def test_phi_prime_dimension_errors():
    with pytest.raises(InvalidArgument):
        build_phi_prime(np.ones(4), [0.0])
    with pytest.raises(InvalidArgument):
        build_phi_prime(np.ones((3, 2)), [])


def test_lc_measure_examples():
    assert lc_measure(np.full(5, 0.2), [1.0, 2.0, 3.0]).tolist() == [-1] * 15
    x = np.random.default_rng(0).standard_normal(40)
    assert np.array_equal(lc_measure(x, [0.0]), sign_measure(x))
    with pytest.raises(InvalidArgument):
        lc_measure(x, [1.0, 0.0, 2.0])


def test_lc_measure_ordering():
    x = np.array([0.0, 1.5])
    # highest level (1) first: sign(x - 1), then sign(x - 0), then sign(x + 1)
    assert lc_measure(x, [-1.0, 0.0, 1.0]).tolist() == [-1, 1, 1, 1, 1, 1]


def test_eq4_identity_random():
    for seed in range(100):
        spec = small_spec(seed)
        L = (2, 4, 8)[seed % 3]
        a = random_sparse_coeffs(spec, min(3, spec.band_width), rng_seed=seed)
        ens = lc_ensemble(a, spec, L)
        assert np.array_equal(ens.signs, sign_measure(ens.phi @ augment(a, L + 1)))


def test_monotone_single_crossing():
    x = np.linspace(-1, 1, 11)
    stream = encode_lc_events(x, [0.05])
    assert stream.events == [(6, 0, 1)]
    assert stream.initial_signs.tolist() == [-1]


def test_constant_samples_no_events():
    stream = encode_lc_events(np.full(9, 0.3), [-1.0, 0.0, 1.0])
    assert stream.events == []
    assert stream.initial_signs.tolist() == [1, 1, -1]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), half=st.integers(0, 4), M=st.integers(1, 80))
def test_event_roundtrip(seed, half, M):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(M)
    x[rng.random(M) < 0.1] = 0.0  # exact hits on a level
    levels = np.sort(rng.choice(np.linspace(-2, 2, 41), 2 * half + 1, replace=False))
    stream = encode_lc_events(x, levels, 0.01)
    assert np.array_equal(decode_lc_events(stream), lc_measure(x, levels))
    keys = [(t, i) for t, i, _ in stream.events]
    assert keys == sorted(set(keys))
    again = LCEventStream.loads(stream.dumps())
    assert np.array_equal(decode_lc_events(again), lc_measure(x, levels))


def test_decode_empty_events():
    stream = LCEventStream(np.array([-1.0, 0.0, 1.0]), 0.1, 4, np.array([-1.0, 1.0, 1.0]))
    assert level_sign_sequences(stream).tolist() == [[-1] * 4, [1] * 4, [1] * 4]
    assert decode_lc_events(stream).tolist() == [1] * 4 + [1] * 4 + [-1] * 4


@pytest.mark.parametrize("events", [
    [(4, 0, -1)],           # tick >= M
    [(0, 0, -1)],           # tick 0 is the initial state
    [(1, 2, -1)],           # level index out of range
    [(2, 0, -1), (2, 0, 1)],  # duplicate (tick, level)
    [(3, 0, -1), (2, 0, 1)],  # unsorted
    [(2, 0, 1)],            # does not flip the current sign
    [(2, 0, 0)],            # not a direction
])
def test_corrupt_streams(events):
    stream = LCEventStream(np.array([0.0]), 0.1, 4, np.array([1.0]), events)
    with pytest.raises(CorruptStream):
        decode_lc_events(stream)


def test_stream_text_format(tmp_path):
    stream = encode_lc_events(np.array([0.1, -0.4, 0.6, 0.6]), [-0.5, 0.0, 0.5], 0.001)
    text = stream.dumps()
    lines = text.splitlines()
    assert lines[0] == "levels=-0.5,0.0,0.5"
    assert lines[1] == "T=0.001"
    assert lines[2] == "M=4"
    assert lines[3] == "init=1,1,-1"
    assert lines[4:] == ["1,0,-1", "2,0,1", "2,1,1"]
    stream.save(tmp_path / "s.lcs")
    loaded = LCEventStream.load(tmp_path / "s.lcs")
    assert loaded.events == stream.events and loaded.M == 4


@pytest.mark.parametrize("text", ["levels=0\nT=1\nM=3\n", "levels=0\nT=1\nM=3\ninit=1\n1,0\n", "levels=x\nT=1\nM=3\ninit=1\n"])
def test_malformed_stream_text(text):
    with pytest.raises(CorruptStream):
        LCEventStream.loads(text)
