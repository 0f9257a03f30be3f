import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfspace_omd.errors import BandExhausted, InvalidArgument
from halfspace_omd.sampling import (KINDS, MarginalSpec, SampleStream, band_acceptance,
                                    default_max_attempts, gaussian_band_mass, make_rng,
                                    sample_band, sample_marginal)


def test_unknown_kind_and_bad_dimension():
    with pytest.raises(InvalidArgument):
        MarginalSpec("cauchy", 3)
    with pytest.raises(InvalidArgument):
        MarginalSpec("gaussian", 0)


@pytest.mark.parametrize("kind", KINDS)
def test_marginals_are_isotropic(kind):
    X = MarginalSpec(kind, 4).draw(make_rng(1), 400_000)
    assert np.allclose(X.mean(axis=0), 0.0, atol=0.01)
    # fourth moment of the centred exponential is 9, so its variance estimate is the noisiest
    assert np.allclose(np.cov(X.T), np.eye(4), atol=0.03)


def test_same_seed_same_draws():
    spec = MarginalSpec("product_laplace", 5)
    assert np.array_equal(spec.draw(make_rng(9), 10), spec.draw(make_rng(9), 10))
    assert sample_marginal(spec, make_rng(3)).shape == (5,)


def test_gaussian_band_mass_value():
    # Pr(0 < z <= 0.1) = Phi(0.1) - 1/2
    assert gaussian_band_mass(0.1) == pytest.approx(0.0398278, abs=1e-6)


def test_gaussian_band_acceptance_matches_closed_form():
    w = np.ones(6) / math.sqrt(6)
    rate, se = band_acceptance(MarginalSpec("gaussian", 6), w, 0.1, 200_000, 4)
    assert abs(rate - gaussian_band_mass(0.1)) <= 3 * se


def test_sample_band_lands_in_band_and_counts_attempts():
    spec = MarginalSpec("gaussian", 8)
    w = np.zeros(8)
    w[2] = 1.0
    rng = make_rng(0)
    for _ in range(50):
        x, attempts = sample_band(spec, w, 0.05, rng, 10_000)
        assert 0.0 < x @ w <= 0.05
        assert attempts >= 1


def test_sample_band_rejects_bad_arguments():
    spec = MarginalSpec("gaussian", 2)
    with pytest.raises(InvalidArgument):
        sample_band(spec, np.array([1.0, 1.0]), 0.1, make_rng(0), 10)
    with pytest.raises(InvalidArgument):
        sample_band(spec, np.array([1.0, 0.0]), 0.0, make_rng(0), 10)


def test_sample_band_exhausts():
    spec = MarginalSpec("product_uniform", 1)
    # a band of width 1e-12 is practically unreachable in 500 draws
    with pytest.raises(BandExhausted) as info:
        sample_band(spec, np.array([1.0]), 1e-12, make_rng(0), 500)
    assert info.value.attempts == 500


def test_default_max_attempts_formula():
    assert default_max_attempts(0.1, 100, 0.01) == 200 + math.ceil(10 * math.log(1e4) / 0.1)


def test_stream_single_and_block_reads_share_sequence():
    spec = MarginalSpec("gaussian", 3)
    a = SampleStream(spec, 11)
    b = SampleStream(spec, 11)
    rows = np.array([a.next() for _ in range(5000)])
    assert np.array_equal(rows, b.take(5000))


@given(st.integers(0, 2**32), st.floats(0.02, 0.5))
@settings(max_examples=30, deadline=None)
def test_stream_band_scan_equals_sequential_scan(seed, b):
    spec = MarginalSpec("gaussian", 4)
    w = np.array([0.5, 0.5, 0.5, 0.5])
    s1 = SampleStream(spec, seed)
    s2 = SampleStream(spec, seed)
    for _ in range(5):
        x, used, consumed = s1.next_in_band(w, b, 100_000, keep_rejected=True)
        seq = [s2.next() for _ in range(used)]
        assert np.array_equal(seq[-1], x)
        assert np.array_equal(np.array(seq), consumed)
        assert all(not (0.0 < r @ w <= b) for r in seq[:-1])


def test_stream_band_exhausted_counts_budget():
    s = SampleStream(MarginalSpec("gaussian", 2), 0)
    with pytest.raises(BandExhausted) as info:
        s.next_in_band(np.array([1.0, 0.0]), 1e-14, 9000)
    assert info.value.attempts == 9000
