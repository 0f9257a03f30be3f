"""Ground-truth measurements: disagreement, error rate, and band potentials.

All Monte-Carlo draws come from shadow streams, never from the oracle's
costed EX stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BandExhausted, InvalidArgument
from .sampling import MarginalSpec, make_rng
from .vecmath import angle

DEFAULT_MC = 100_000
_CHUNK = 1 << 15


@dataclass(frozen=True)
class Estimate:
    value: float
    method: str  # "closed_form" or "monte_carlo"
    n: int
    stderr: float


ErrorEstimate = Estimate


def _signs(v):
    return np.where(v >= 0.0, 1, -1)


def _binomial(hits: int, n: int) -> Estimate:
    rate = hits / n
    return Estimate(rate, "monte_carlo", n, math.sqrt(rate * (1.0 - rate) / n))


def disagreement(w, u, spec: MarginalSpec, n: int = DEFAULT_MC, rng=None) -> Estimate:
    """Pr(sign(w.x) != sign(u.x)); exact theta/pi for the gaussian marginal."""
    w = np.asarray(w, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    theta = angle(w, u)
    if spec.kind == "gaussian":
        return Estimate(theta / math.pi, "closed_form", 0, 0.0)
    return disagreement_mc(w, u, spec, n, rng)


def disagreement_mc(w, u, spec: MarginalSpec, n: int = DEFAULT_MC, rng=None) -> Estimate:
    if n < 1:
        raise InvalidArgument("n must be at least 1")
    rng = make_rng(0 if rng is None else rng)
    w = np.asarray(w, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    hits = 0
    for i in range(0, n, _CHUNK):
        X = spec.draw(rng, min(_CHUNK, n - i))
        hits += int(np.count_nonzero(_signs(X @ w) != _signs(X @ u)))
    return _binomial(hits, n)


def err_d(w, oracle, n: int = DEFAULT_MC) -> Estimate:
    """Pr_{(x,y)~D}(sign(w.x) != y), on fresh shadow draws."""
    if n < 1:
        raise InvalidArgument("n must be at least 1")
    w = np.asarray(w, dtype=np.float64)
    hits = 0
    for i in range(0, n, _CHUNK):
        X = oracle.shadow_draw(min(_CHUNK, n - i))
        hits += int(np.count_nonzero(_signs(X @ w) != oracle.shadow_labels(X)))
    return _binomial(hits, n)


def f_estimate(w, u, b: float, spec: MarginalSpec, n: int = DEFAULT_MC, rng=None,
               max_draws: int | None = None) -> Estimate:
    """Band potential E[|u.x| 1{u.x < 0}] for x conditioned on 0 < w_hat.x <= b.

    ``n`` is the number of accepted band draws averaged over.
    """
    if not b > 0.0:
        raise InvalidArgument("band width must be positive")
    rng = make_rng(0 if rng is None else rng)
    w = np.asarray(w, dtype=np.float64)
    w_hat = w / np.linalg.norm(w)
    u = np.asarray(u, dtype=np.float64)
    if max_draws is None:
        max_draws = int(200 * n / b) + 10_000
    vals = []
    got = drawn = 0
    while got < n:
        if drawn >= max_draws:
            raise BandExhausted(drawn, b)
        X = spec.draw(rng, _CHUNK)
        drawn += _CHUNK
        proj = X @ w_hat
        inside = X[(proj > 0.0) & (proj <= b)]
        if inside.shape[0]:
            m = inside @ u
            vals.append(np.where(m < 0.0, -m, 0.0))
            got += inside.shape[0]
    vals = np.concatenate(vals)[:n]
    return Estimate(float(vals.mean()), "monte_carlo", n, float(vals.std(ddof=1) / math.sqrt(n)))


def label_correlation(oracle, n: int = DEFAULT_MC) -> Estimate:
    """Monte-Carlo E[y (u.x)] on shadow draws."""
    total = 0.0
    sq = 0.0
    for i in range(0, n, _CHUNK):
        X = oracle.shadow_draw(min(_CHUNK, n - i))
        vals = oracle.shadow_labels(X) * (X @ oracle.u)
        total += float(vals.sum())
        sq += float(vals @ vals)
    mean = total / n
    var = max(sq / n - mean * mean, 0.0)
    return Estimate(mean, "monte_carlo", n, math.sqrt(var / n))


def gaussian_band_potential_reversed(b: float) -> float:
    """f at w = -u for the gaussian marginal: E[|z| | -b <= z < 0]."""
    phi0 = 1.0 / math.sqrt(2.0 * math.pi)
    phib = phi0 * math.exp(-0.5 * b * b)
    mass = 0.5 * math.erf(b / math.sqrt(2.0))
    return (phi0 - phib) / mass
