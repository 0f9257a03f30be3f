"""Seeded samplers for isotropic log-concave marginals and band rejection sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BandExhausted, InvalidArgument

KINDS = ("gaussian", "product_laplace", "product_uniform", "product_exponential")

_SQRT3 = math.sqrt(3.0)
_LAPLACE_SCALE = 1.0 / math.sqrt(2.0)

# rows generated per refill of a SampleStream; changing it changes every stream
STREAM_BLOCK = 4096


def make_rng(seed) -> np.random.Generator:
    """RNG handle: identical seeds give identical streams."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class MarginalSpec:
    """Zero-mean, identity-covariance, log-concave law on R^d."""

    kind: str
    d: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown marginal kind {self.kind!r}; expected one of {KINDS}")
        if int(self.d) != self.d or self.d < 1:
            raise InvalidArgument(f"dimension must be a positive integer, got {self.d}")

    def draw(self, rng: np.random.Generator, n: int, d: int | None = None) -> np.ndarray:
        """``n`` i.i.d. rows; ``d`` overrides the width (used to sample a coordinate subset)."""
        shape = (n, self.d if d is None else d)
        if self.kind == "gaussian":
            return rng.standard_normal(shape)
        if self.kind == "product_laplace":
            return rng.laplace(0.0, _LAPLACE_SCALE, shape)
        if self.kind == "product_uniform":
            return rng.uniform(-_SQRT3, _SQRT3, shape)
        return rng.exponential(1.0, shape) - 1.0


def sample_marginal(spec: MarginalSpec, rng: np.random.Generator) -> np.ndarray:
    return spec.draw(rng, 1)[0]


def default_max_attempts(b: float, T: int, delta: float) -> int:
    """Per-draw rejection budget, ceil(20/b) + ceil(10 ln(T/delta) / b)."""
    return math.ceil(20.0 / b) + math.ceil(10.0 * math.log(max(T, 1) / delta) / b)


def _check_band_args(w_hat, b):
    if not b > 0.0:
        raise InvalidArgument(f"band width must be positive, got {b}")
    nw = math.sqrt(float(w_hat @ w_hat))
    if abs(nw - 1.0) > 1e-9:
        raise InvalidArgument(f"band direction must be a unit vector (norm {nw!r})")


def sample_band(spec: MarginalSpec, w_hat, b: float, rng: np.random.Generator,
                max_attempts: int):
    """Rejection-sample one x with 0 < w_hat . x <= b.

    Returns ``(x, attempts)`` where ``attempts`` counts the raw draws used.
    Candidates are drawn in chunks; those past the first hit are discarded.
    """
    w_hat = np.asarray(w_hat, dtype=np.float64)
    _check_band_args(w_hat, b)
    used = 0
    while used < max_attempts:
        n = min(max_attempts - used, 1024)
        X = spec.draw(rng, n)
        i = kernels.band_first(X, 0, w_hat, b)
        if i >= 0:
            return X[i].copy(), used + i + 1
        used += n
    raise BandExhausted(used, b)


class SampleStream:
    """Block-buffered stream of marginal draws.

    Reading one row at a time or scanning for the next band hit consume the
    same underlying sequence, so the draw count of a band scan is exactly the
    number of sequential EX calls it replaces.
    """

    def __init__(self, spec: MarginalSpec, seed):
        self.spec = spec
        self.rng = make_rng(seed)
        self._buf = np.empty((0, spec.d))
        self._pos = 0

    def _refill(self):
        self._buf = self.spec.draw(self.rng, STREAM_BLOCK)
        self._pos = 0

    def next(self) -> np.ndarray:
        if self._pos >= self._buf.shape[0]:
            self._refill()
        x = self._buf[self._pos].copy()
        self._pos += 1
        return x

    def take(self, n: int) -> np.ndarray:
        out = np.empty((n, self.spec.d))
        k = 0
        while k < n:
            if self._pos >= self._buf.shape[0]:
                self._refill()
            m = min(n - k, self._buf.shape[0] - self._pos)
            out[k:k + m] = self._buf[self._pos:self._pos + m]
            self._pos += m
            k += m
        return out

    def next_in_band(self, w_hat, b: float, max_attempts: int, keep_rejected: bool = False):
        """Advance to the next row with 0 < w_hat . x <= b.

        Returns ``(x, attempts, consumed)``; ``consumed`` stacks every row read
        (the hit last) when ``keep_rejected`` is set, else it is None.
        """
        w_hat = np.asarray(w_hat, dtype=np.float64)
        _check_band_args(w_hat, b)
        used = 0
        pieces = []
        while True:
            if self._pos >= self._buf.shape[0]:
                self._refill()
            budget_end = min(self._buf.shape[0], self._pos + (max_attempts - used))
            i = kernels.band_first(self._buf[:budget_end], self._pos, w_hat, b)
            if i >= 0:
                if keep_rejected:
                    pieces.append(self._buf[self._pos:i + 1])
                used += i + 1 - self._pos
                self._pos = i + 1
                x = self._buf[i].copy()
                consumed = np.concatenate(pieces) if keep_rejected else None
                return x, used, consumed
            if keep_rejected:
                pieces.append(self._buf[self._pos:budget_end])
            used += budget_end - self._pos
            self._pos = budget_end
            if used >= max_attempts:
                raise BandExhausted(used, b)


def gaussian_band_mass(b: float) -> float:
    """Pr(0 < z <= b) for z standard normal."""
    return 0.5 * math.erf(b / math.sqrt(2.0))


def band_acceptance(spec: MarginalSpec, w_hat, b: float, n: int, rng) -> tuple[float, float]:
    """Monte-Carlo Pr(0 < w_hat . x <= b) and its standard error."""
    rng = make_rng(rng)
    w_hat = np.asarray(w_hat, dtype=np.float64)
    hits = 0
    done = 0
    while done < n:
        m = min(n - done, 1 << 16)
        proj = spec.draw(rng, m) @ w_hat
        hits += int(np.count_nonzero((proj > 0.0) & (proj <= b)))
        done += m
    rate = hits / n
    return rate, math.sqrt(max(rate * (1.0 - rate), 1e-300) / n)
