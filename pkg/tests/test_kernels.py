"""The numba and numpy backends must agree on every kernel."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from halfspace_omd import kernels
from halfspace_omd.vecmath import PNormParams

NB = kernels.get_backend("numba")
NP = kernels.get_backend("numpy")

elems = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def vecs(min_d=1, max_d=40):
    return st.integers(min_d, max_d).flatmap(lambda d: arrays(np.float64, d, elements=elems))


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_flag_selects_numpy():
    env = dict(os.environ, **{kernels.ENV_FLAG: "numpy"})
    out = subprocess.run([sys.executable, "-c",
                          "from halfspace_omd import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


@given(vecs(), st.floats(1.05, 2.0))
@settings(max_examples=150, deadline=None)
def test_pnorm_and_links_agree(z, p):
    assert NB.pnorm(z, p) == pytest.approx(NP.pnorm(z, p), rel=1e-12, abs=1e-300)
    assert np.allclose(NB.grad_phi(z, p), NP.grad_phi(z, p), rtol=1e-11, atol=1e-13)
    assert np.allclose(NB.grad_phi_star(z, p), NP.grad_phi_star(z, p), rtol=1e-11, atol=1e-13)


@given(st.integers(0, 2**32), st.integers(1, 20), st.floats(0.01, 1.0))
@settings(max_examples=60, deadline=None)
def test_band_first_agrees(seed, d, b):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((300, d))
    w = rng.standard_normal(d)
    w /= np.linalg.norm(w)
    start = int(rng.integers(0, 300))
    i = NB.band_first(X, start, w, b)
    assert i == NP.band_first(X, start, w, b)
    if i >= 0:
        assert 0.0 < X[i] @ w <= b and i >= start


@given(st.integers(0, 2**64 - 1), st.integers(1, 8))
@settings(max_examples=60, deadline=None)
def test_hash_uniform_agrees(seed, d):
    X = np.random.default_rng(seed % 2**32).standard_normal((50, d))
    a = NB.hash_uniform(X, seed)
    assert np.array_equal(a, NP.hash_uniform(X, seed))
    assert np.all((a >= 0.0) & (a < 1.0))


def test_hash_uniform_is_roughly_uniform():
    X = np.random.default_rng(0).standard_normal((100_000, 3))
    u = NB.hash_uniform(X, 7)
    counts = np.histogram(u, bins=10, range=(0, 1))[0]
    assert np.all(np.abs(counts - 10_000) < 500)


@given(vecs(2, 30), st.floats(0.0, 20.0))
@settings(max_examples=150, deadline=None)
def test_solve_shifted_agrees_and_solves(r, beta):
    p = PNormParams.for_dim(r.shape[0]).p
    a = NB.solve_shifted(r, beta, p)
    b = NP.solve_shifted(r, beta, p)
    scale = max(1.0, np.abs(r).max())
    assert np.allclose(a, b, rtol=1e-8, atol=1e-10 * scale)
    resid = NP.grad_phi(a, p) + beta * a - r
    assert np.abs(resid).max() <= 1e-7 * scale


def _random_constraint(rng, d):
    c = rng.standard_normal(d)
    c *= 0.8 / np.linalg.norm(c)
    a = rng.standard_normal(d)
    a /= np.linalg.norm(a)
    return c, 0.5, a, 0.05


@given(st.integers(0, 2**32), st.integers(2, 12), st.booleans(), st.booleans())
@settings(max_examples=60, deadline=None)
def test_dykstra_agrees(seed, d, has_ball, has_half):
    rng = np.random.default_rng(seed)
    c, R1, a, zeta = _random_constraint(rng, d)
    if has_ball:
        zeta = -1.0  # keep the intersection nonempty when both are active
    y = 3.0 * rng.standard_normal(d)
    xa, _, oka, _ = NB.dykstra(y, 1.0, c, R1, a, zeta, has_ball, has_half, 1e-12, 20_000)
    xb, _, okb, _ = NP.dykstra(y, 1.0, c, R1, a, zeta, has_ball, has_half, 1e-12, 20_000)
    assert oka and okb
    assert np.allclose(xa, xb, atol=1e-9)


@given(st.integers(0, 2**32), st.integers(2, 12), st.booleans())
@settings(max_examples=60, deadline=None)
def test_mirror_polish_agrees(seed, d, ball):
    rng = np.random.default_rng(seed)
    p = PNormParams.for_dim(d).p
    if ball:
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        c, R1, a, zeta, hb, hh = v, 0.4, np.zeros(d), 0.0, True, False
    else:
        a = rng.standard_normal(d)
        a /= np.linalg.norm(a)
        v = 0.1 * a
        c, R1, zeta, hb, hh = np.zeros(d), 0.0, 0.1, False, True
    theta = 3.0 * rng.standard_normal(d)
    za, _, _, oka = NB.mirror_polish(theta, v, 1.0, c, R1, a, zeta, hb, hh, p, 1e-10, 10_000)
    zb, _, _, okb = NP.mirror_polish(theta, v, 1.0, c, R1, a, zeta, hb, hh, p, 1e-10, 10_000)
    assert oka and okb
    assert np.allclose(za, zb, atol=1e-7)
