import math

import numpy as np
import pytest

from halfspace_omd.errors import InvalidArgument
from halfspace_omd.metrics import (disagreement, disagreement_mc, err_d, f_estimate,
                                   gaussian_band_potential_reversed, label_correlation)
from halfspace_omd.oracle import NoiseModel, Oracle
from halfspace_omd.sampling import MarginalSpec


def _rotated(u, theta, rng):
    """Unit vector at angle theta from unit u."""
    r = rng.standard_normal(u.shape[0])
    r -= (r @ u) * u
    r /= np.linalg.norm(r)
    return math.cos(theta) * u + math.sin(theta) * r


def test_gaussian_closed_form_quarter():
    spec = MarginalSpec("gaussian", 5)
    u = np.eye(5)[0]
    w = _rotated(u, math.pi / 4, np.random.default_rng(0))
    est = disagreement(w, u, spec)
    assert est.method == "closed_form" and est.value == pytest.approx(0.25)
    mc = disagreement_mc(w, u, spec, 100_000, rng=1)
    assert abs(mc.value - 0.25) <= 3 * mc.stderr


def test_disagreement_extremes():
    spec = MarginalSpec("gaussian", 3)
    u = np.array([0.0, 1.0, 0.0])
    assert disagreement(u, u, spec).value == 0.0
    assert disagreement(-u, u, spec).value == pytest.approx(1.0)
    lap = MarginalSpec("product_laplace", 3)
    assert disagreement(u, u, lap, 10_000).value == 0.0
    assert disagreement(-u, u, lap, 10_000).value == 1.0


@pytest.mark.parametrize("theta", [0.1, math.pi / 8, math.pi / 3, 2.0])
def test_closed_form_matches_monte_carlo_on_grid(theta):
    spec = MarginalSpec("gaussian", 6)
    u = np.ones(6) / math.sqrt(6)
    w = _rotated(u, theta, np.random.default_rng(2))
    mc = disagreement_mc(w, u, spec, 100_000, rng=3)
    assert abs(mc.value - theta / math.pi) <= 3 * mc.stderr


def test_err_d_examples():
    clean = Oracle.build("gaussian", 8, 3, NoiseModel("realizable"), 0)
    est = err_d(clean.u, clean, 50_000)
    assert est.value == 0.0 and est.stderr == 0.0
    noisy = Oracle.build("gaussian", 8, 3, NoiseModel("random_flip", 0.2), 0)
    est = err_d(noisy.u, noisy, 100_000)
    assert abs(est.value - 0.2) <= 3 * est.stderr
    assert noisy.counters.ex_calls == 0
    with pytest.raises(InvalidArgument):
        err_d(noisy.u, noisy, 0)


def test_err_d_triangle_relation():
    o = Oracle.build("gaussian", 8, 3, NoiseModel("margin_flip", 0.1), 4)
    rng = np.random.default_rng(5)
    for _ in range(5):
        w = rng.standard_normal(8)
        e_w = err_d(w, o, 100_000)
        e_u = err_d(o.u, o, 100_000)
        dis = disagreement(w, o.u, o.spec)
        assert e_w.value <= e_u.value + dis.value + 3 * (e_w.stderr + e_u.stderr)


def test_f_estimate_zero_at_target():
    spec = MarginalSpec("gaussian", 5)
    u = np.eye(5)[1]
    est = f_estimate(u, u, 0.1, spec, 20_000, rng=0)
    assert est.value == 0.0


def test_f_estimate_reversed_target_matches_truncated_normal():
    spec = MarginalSpec("gaussian", 5)
    u = np.eye(5)[2]
    ref = gaussian_band_potential_reversed(0.1)
    assert ref == pytest.approx(0.0499, abs=1e-4)
    est = f_estimate(-u, u, 0.1, spec, 100_000, rng=1)
    assert abs(est.value - ref) <= 3 * est.stderr


def test_f_estimate_increases_with_angle():
    spec = MarginalSpec("gaussian", 5)
    u = np.eye(5)[0]
    rng = np.random.default_rng(7)
    vals = [f_estimate(_rotated(u, t, rng), u, 0.1, spec, 50_000, rng=8).value
            for t in (math.pi / 8, math.pi / 4, math.pi / 2)]
    assert vals[0] < vals[1] < vals[2]


def test_f_estimate_argument_checks():
    spec = MarginalSpec("gaussian", 2)
    with pytest.raises(InvalidArgument):
        f_estimate(np.ones(2), np.ones(2), 0.0, spec, 10)


def test_label_correlation_gaussian_identity():
    o = Oracle.build("gaussian", 10, 4, NoiseModel("realizable"), 2)
    est = label_correlation(o, 100_000)
    # E[sign(u.x) u.x] = E|z| = sqrt(2/pi)
    assert abs(est.value - math.sqrt(2 / math.pi)) <= 3 * est.stderr
