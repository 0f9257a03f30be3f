"""The fixed joint distribution over (x, y) and the EX / EX_y query protocol."""

from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from . import kernels
from .errors import InvalidArgument
from .sampling import MarginalSpec, SampleStream, default_max_attempts, make_rng

NOISE_KINDS = ("realizable", "random_flip", "margin_flip", "region_flip")

# Monte-Carlo size for thresholds that have no closed form
QUANTILE_SAMPLES = 1_000_000
_QUANTILE_SEED = 20_211_118


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from any sequence of printable parts."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True, eq=False)
class TrueHalfspace:
    u: np.ndarray
    s: int

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64)
        if abs(math.sqrt(float(u @ u)) - 1.0) > 1e-9:
            raise InvalidArgument("target halfspace must have unit norm")
        if np.count_nonzero(u) > self.s:
            raise InvalidArgument(f"target halfspace has more than s={self.s} nonzeros")

    @classmethod
    def random(cls, d: int, s: int, rng) -> "TrueHalfspace":
        """Uniform support of size s, gaussian entries, normalized."""
        if not 1 <= s <= d:
            raise InvalidArgument(f"need 1 <= s <= d, got s={s}, d={d}")
        rng = make_rng(rng)
        support = np.sort(rng.choice(d, size=s, replace=False))
        u = np.zeros(d)
        vals = rng.standard_normal(s)
        while not np.any(vals):
            vals = rng.standard_normal(s)
        u[support] = vals / np.linalg.norm(vals)
        return cls(u=u, s=s)


def _projection_sample(spec: MarginalSpec, direction: np.ndarray, n: int, seed) -> np.ndarray:
    """n draws of direction . x; only the support of ``direction`` is sampled."""
    rng = make_rng(seed)
    idx = np.flatnonzero(direction)
    coef = direction[idx]
    out = np.empty(n)
    chunk = max(1, (1 << 22) // max(1, idx.size))
    for i in range(0, n, chunk):
        m = min(chunk, n - i)
        out[i:i + m] = spec.draw(rng, m, d=idx.size) @ coef
    return out


@functools.lru_cache(maxsize=128)
def _abs_quantile(kind: str, d: int, coef_bytes: bytes, level: float) -> float:
    direction = np.frombuffer(coef_bytes, dtype=np.float64)
    z = _projection_sample(MarginalSpec(kind, d), direction, QUANTILE_SAMPLES, _QUANTILE_SEED)
    return float(np.quantile(np.abs(z), level))


@functools.lru_cache(maxsize=128)
def _projection_sorted(kind: str, d: int, coef_bytes: bytes) -> np.ndarray:
    direction = np.frombuffer(coef_bytes, dtype=np.float64)
    z = _projection_sample(MarginalSpec(kind, d), direction, QUANTILE_SAMPLES, _QUANTILE_SEED)
    return np.sort(z)


@dataclass(frozen=True)
class NoiseModel:
    """Label corruption rule with flip budget ``nu``.

    ``margin_flip`` flips the labels with |u.x| <= tau, tau chosen so the
    flipped mass is nu; ``region_flip`` flips inside the slab
    lo <= r.x <= hi (r defaults to u), narrowed if its mass exceeds nu;
    ``random_flip`` flips with probability nu through a hash of (x, seed).
    """

    kind: str = "realizable"
    nu: float = 0.0
    tau: float | None = None
    region_direction: tuple | None = None
    region_lo: float = 0.0
    region_hi: float = 0.5

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise InvalidArgument(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if not 0.0 <= self.nu < 0.5:
            raise InvalidArgument(f"noise budget nu must lie in [0, 1/2), got {self.nu}")
        if self.kind == "realizable" and self.nu != 0.0:
            raise InvalidArgument("realizable noise requires nu = 0")
        if self.kind == "region_flip" and not self.region_lo < self.region_hi:
            raise InvalidArgument("region_flip needs region_lo < region_hi")

    def bind(self, spec: MarginalSpec, u: np.ndarray) -> "BoundNoise":
        return BoundNoise(self, spec, np.asarray(u, dtype=np.float64))


class BoundNoise:
    """A noise model resolved against a marginal and a target (thresholds fixed)."""

    def __init__(self, model: NoiseModel, spec: MarginalSpec, u: np.ndarray):
        self.model = model
        self.spec = spec
        self.u = u
        self.tau = 0.0
        self.direction = None
        self.lo = self.hi = 0.0
        if model.kind == "margin_flip":
            self.tau = model.tau if model.tau is not None else self._margin_tau()
        elif model.kind == "region_flip":
            self._resolve_region()

    def _margin_tau(self) -> float:
        nu = self.model.nu
        if nu == 0.0:
            return 0.0
        if self.spec.kind == "gaussian":
            return NormalDist().inv_cdf((1.0 + nu) / 2.0)
        return _abs_quantile(self.spec.kind, self.spec.d, self.u.tobytes(), nu)

    def _resolve_region(self):
        m = self.model
        r = self.u if m.region_direction is None else np.asarray(m.region_direction, dtype=np.float64)
        if r.shape != self.u.shape:
            raise InvalidArgument("region_direction has the wrong dimension")
        nr = float(np.linalg.norm(r))
        if nr == 0.0:
            raise InvalidArgument("region_direction must be nonzero")
        r = r / nr
        lo, hi = m.region_lo, m.region_hi
        if self.spec.kind == "gaussian":
            nd = NormalDist()
            mass = nd.cdf(hi) - nd.cdf(lo)
            if mass > m.nu:
                hi = nd.inv_cdf(min(nd.cdf(lo) + m.nu, 1.0 - 1e-16)) if m.nu > 0 else lo
        else:
            z = _projection_sorted(self.spec.kind, self.spec.d, r.tobytes())
            i_lo = np.searchsorted(z, lo, side="left")
            i_hi = np.searchsorted(z, hi, side="right")
            if (i_hi - i_lo) / z.size > m.nu:
                k = i_lo + int(math.floor(m.nu * z.size))
                hi = float(z[k - 1]) if k > i_lo else lo
        self.direction, self.lo, self.hi = r, lo, hi

    def clean_labels(self, X: np.ndarray) -> np.ndarray:
        return np.where(X @ self.u >= 0.0, 1, -1).astype(np.int64)

    def flips(self, X: np.ndarray, hash_seed: int) -> np.ndarray:
        kind = self.model.kind
        if kind == "realizable":
            return np.zeros(X.shape[0], dtype=bool)
        if kind == "random_flip":
            return kernels.hash_uniform(X, hash_seed) < self.model.nu
        if kind == "margin_flip":
            if self.tau <= 0.0:
                return np.zeros(X.shape[0], dtype=bool)
            return np.abs(X @ self.u) <= self.tau
        if self.hi <= self.lo:
            return np.zeros(X.shape[0], dtype=bool)
        proj = X @ self.direction
        return (proj >= self.lo) & (proj <= self.hi)

    def labels(self, X: np.ndarray, hash_seed: int) -> np.ndarray:
        y = self.clean_labels(X)
        return np.where(self.flips(X, hash_seed), -y, y)


@dataclass
class OracleCounters:
    ex_calls: int = 0
    label_queries: int = 0


class Oracle:
    """EX / EX_y access to a fixed distribution D = (marginal, target, noise).

    Every draw through ``draw_unlabeled`` or ``draw_in_band`` counts toward
    ``counters.ex_calls``; every revealed label toward ``label_queries``.
    ``shadow_*`` methods read an independent stream and never touch the
    counters.
    """

    def __init__(self, spec: MarginalSpec, target: TrueHalfspace, noise: NoiseModel, seed: int):
        if target.u.shape[0] != spec.d:
            raise InvalidArgument("target dimension does not match the marginal")
        self.spec = spec
        self.target = target
        self.noise = noise
        self.seed = int(seed)
        self.bound = noise.bind(spec, target.u)
        self.counters = OracleCounters()
        self._stream = SampleStream(spec, derive_seed(self.seed, "ex"))
        self._label_seed = derive_seed(self.seed, "label") & 0xFFFFFFFFFFFFFFFF
        self._shadow = make_rng(derive_seed(self.seed, "shadow"))

    @classmethod
    def build(cls, kind: str, d: int, s: int, noise: NoiseModel, seed: int) -> "Oracle":
        spec = MarginalSpec(kind, d)
        target = TrueHalfspace.random(d, s, derive_seed(seed, "target"))
        return cls(spec, target, noise, seed)

    @property
    def u(self) -> np.ndarray:
        return self.target.u

    def draw_unlabeled(self) -> np.ndarray:
        x = self._stream.next()
        self.counters.ex_calls += 1
        return x

    def draw_many(self, n: int) -> np.ndarray:
        X = self._stream.take(n)
        self.counters.ex_calls += n
        return X

    def draw_in_band(self, w_hat, b: float, max_attempts: int | None = None,
                     keep_rejected: bool = False):
        """Repeated EX calls until 0 < w_hat . x <= b; returns (x, attempts, consumed)."""
        if max_attempts is None:
            max_attempts = default_max_attempts(b, 1, 0.01)
        try:
            x, used, consumed = self._stream.next_in_band(w_hat, b, max_attempts, keep_rejected)
        except Exception as exc:
            self.counters.ex_calls += getattr(exc, "attempts", 0)
            raise
        self.counters.ex_calls += used
        return x, used, consumed

    def reveal_label(self, x) -> int:
        return int(self.reveal_labels(np.asarray(x, dtype=np.float64)[None, :])[0])

    def reveal_labels(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        self.counters.label_queries += X.shape[0]
        if self.counters.label_queries > self.counters.ex_calls:
            raise RuntimeError("more labels revealed than instances drawn")
        return self.bound.labels(X, self._label_seed)

    # counter-free access for measurement

    def shadow_draw(self, n: int) -> np.ndarray:
        return self.spec.draw(self._shadow, n)

    def shadow_labels(self, X) -> np.ndarray:
        return self.bound.labels(np.asarray(X, dtype=np.float64), self._label_seed)

    def noise_rate_estimate(self, n: int) -> float:
        """Monte-Carlo Pr(y != sign(u . x)) from the shadow stream."""
        if n < 1:
            raise InvalidArgument("n must be at least 1")
        flips = 0
        done = 0
        while done < n:
            m = min(n - done, 1 << 15)
            X = self.shadow_draw(m)
            flips += int(np.count_nonzero(self.bound.flips(X, self._label_seed)))
            done += m
        return flips / n
