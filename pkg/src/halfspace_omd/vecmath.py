"""Vector geometry shared by every other module.

Vectors are plain 1-D ``float64`` numpy arrays.  ``as_vector`` is the one
constructor that enforces finiteness; internal hot paths skip it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgument


def as_vector(x, d: int | None = None) -> np.ndarray:
    v = np.array(x, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidArgument(f"expected a 1-D vector, got shape {v.shape}")
    if d is not None and v.shape[0] != d:
        raise InvalidArgument(f"expected dimension {d}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise InvalidArgument("vector has non-finite entries")
    return v


@dataclass(frozen=True)
class PNormParams:
    """Exponent pair (p, q) of the mirror map, with 1/p + 1/q = 1.

    ``PNormParams.for_dim(d)`` gives the attribute-efficient choice
    q = ln(8d), p = q / (q - 1).
    """

    d: int
    p: float
    q: float

    def __post_init__(self):
        if self.d < 1:
            raise InvalidArgument("d must be positive")
        if not 1.0 < self.p <= 2.0:
            raise InvalidArgument(f"p must lie in (1, 2], got {self.p}")
        if abs(1.0 / self.p + 1.0 / self.q - 1.0) > 1e-12:
            raise InvalidArgument("p and q are not conjugate")

    @classmethod
    def for_dim(cls, d: int) -> "PNormParams":
        q = math.log(8.0 * d)
        return cls(d=d, p=q / (q - 1.0), q=q)

    @classmethod
    def with_p(cls, d: int, p: float) -> "PNormParams":
        if not 1.0 < p <= 2.0:
            raise InvalidArgument(f"p must lie in (1, 2], got {p}")
        return cls(d=d, p=p, q=p / (p - 1.0))


def norm(x, r: float = 2.0) -> float:
    x = np.asarray(x, dtype=np.float64)
    if r == 2.0:
        return float(math.sqrt(x @ x))
    if math.isinf(r):
        return float(np.max(np.abs(x))) if x.size else 0.0
    return kernels.pnorm(x, float(r))


def normalize(x) -> np.ndarray:
    n = norm(x)
    if n == 0.0:
        raise InvalidArgument("cannot normalize the zero vector")
    return np.asarray(x, dtype=np.float64) / n


def hard_threshold(v, s: int) -> np.ndarray:
    """Keep the ``s`` largest-magnitude entries of ``v``; ties go to lower indices."""
    v = np.asarray(v, dtype=np.float64)
    d = v.shape[0]
    if not 1 <= s <= d:
        raise InvalidArgument(f"sparsity must satisfy 1 <= s <= d={d}, got {s}")
    keep = np.argsort(-np.abs(v), kind="stable")[:s]
    out = np.zeros_like(v)
    out[keep] = v[keep]
    return out


def angle(w, v) -> float:
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    mw = np.max(np.abs(w)) if w.size else 0.0
    mv = np.max(np.abs(v)) if v.size else 0.0
    if mw == 0.0 or mv == 0.0:
        raise InvalidArgument("angle is undefined for a zero vector")
    a = w / mw
    b = v / mv
    a /= norm(a)
    b /= norm(b)
    # half-angle form stays accurate near 0 and pi, unlike acos of the cosine
    return 2.0 * math.atan2(norm(a - b), norm(a + b))


def grad_phi(z, params: PNormParams) -> np.ndarray:
    """Mirror image of the offset z = w - v under psi(z) = ||z||_p^2 / (2(p-1))."""
    return kernels.grad_phi(np.asarray(z, dtype=np.float64), params.p)


def grad_phi_star(theta, params: PNormParams) -> np.ndarray:
    """Inverse link: gradient of the conjugate (p-1) ||theta||_q^2 / 2."""
    return kernels.grad_phi_star(np.asarray(theta, dtype=np.float64), params.p)


def phi(w, anchor, params: PNormParams) -> float:
    z = np.asarray(w, dtype=np.float64) - anchor
    return kernels.pnorm(z, params.p) ** 2 / (2.0 * (params.p - 1.0))


def bregman_div(w, w_ref, anchor, params: PNormParams) -> float:
    """B(w; w_ref) = Phi(w) - Phi(w_ref) - <grad Phi(w_ref), w - w_ref>."""
    w = np.asarray(w, dtype=np.float64)
    w_ref = np.asarray(w_ref, dtype=np.float64)
    anchor = np.asarray(anchor, dtype=np.float64)
    if not (w.shape == w_ref.shape == anchor.shape):
        raise InvalidArgument(
            f"dimension mismatch: {w.shape}, {w_ref.shape}, {anchor.shape}")
    g = kernels.grad_phi(w_ref - anchor, params.p)
    val = phi(w, anchor, params) - phi(w_ref, anchor, params) - float(g @ (w - w_ref))
    return max(val, 0.0)
