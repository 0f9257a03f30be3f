"""Stagewise mirror-descent learner: phase schedule, refine, initialize, main loop.

Each refine run is online mirror descent with the p-norm regularizer on the
semi-random Perceptron gradient g_t = x_t 1{y_t = -1}, where x_t is drawn
from the band 0 < w_hat.x <= b around the current direction.  The main loop
runs an initial averaging-plus-refine stage and then phases that halve the
band, the step size and the trust-region radius.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import DegenerateInit, DegenerateOutput, InvalidArgument, PhaseError
from .metrics import disagreement
from .optimizer import ConstraintSet, MirrorProblem, md_step_offset
from .sampling import default_max_attempts
from .vecmath import PNormParams, angle, bregman_div, hard_threshold

log = logging.getLogger(__name__)

LEDGER_SLACK = 1e-6
AVERAGING_MODES = ("normalized", "raw")

# literal constants of the worst-case analysis
FAITHFUL_ZETA = 1.0 / (9 * 2**20)
FAITHFUL_B_INIT = 1.0 / (81 * 2**22)
FAITHFUL_S_TILDE_FACTOR = 81.0 * 2**40


@dataclass(frozen=True)
class ConstantsConfig:
    """Constants the analysis leaves as orders of magnitude.

    Defaults are desk-scale practical values; ``paper_faithful=True`` swaps in
    the literal worst-case ``zeta``, ``b_init`` and ``s_tilde_factor``.
    """

    c_bar: float = 1.0 / math.pi
    c_b: float = 0.25
    c_alpha: float = 1.0
    c_T: float = 8.0
    c_m: float = 4.0
    zeta: float = 0.1
    b_init: float = 0.1
    s_tilde_factor: float = 4.0
    paper_faithful: bool = False
    averaging: str = "normalized"

    def __post_init__(self):
        if self.paper_faithful:
            object.__setattr__(self, "zeta", FAITHFUL_ZETA)
            object.__setattr__(self, "b_init", FAITHFUL_B_INIT)
            object.__setattr__(self, "s_tilde_factor", FAITHFUL_S_TILDE_FACTOR)
        for name in ("c_bar", "c_b", "c_alpha", "c_T", "c_m", "zeta", "b_init", "s_tilde_factor"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise InvalidArgument(f"constant {name} must be positive and finite, got {val!r}")
        if self.zeta >= 1.0:
            raise InvalidArgument("zeta must be below 1 so the initial set is nonempty")
        if self.averaging not in AVERAGING_MODES:
            raise InvalidArgument(f"averaging must be one of {AVERAGING_MODES}")

    def s_tilde(self, s: int, d: int) -> int:
        return int(min(math.ceil(self.s_tilde_factor * s), d))

    def override(self, **kw) -> "ConstantsConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class PhaseParams:
    k: int
    alpha: float
    b: float
    radius: float
    T: int
    delta: float


@dataclass(frozen=True)
class InitParams:
    m: int
    alpha: float
    b: float
    T: int
    zeta: float
    s_tilde: int
    delta: float


def _check_common(s, d, delta):
    if not (isinstance(d, (int, np.integer)) and isinstance(s, (int, np.integer))):
        raise InvalidArgument("s and d must be integers")
    if not 1 <= s <= d:
        raise InvalidArgument(f"need 1 <= s <= d, got s={s}, d={d}")
    if not 0.0 < delta < 1.0:
        raise InvalidArgument(f"delta must lie in (0, 1), got {delta}")


def num_phases(eps: float, consts: ConstantsConfig) -> int:
    return max(0, math.ceil(math.log2(consts.c_bar * math.pi / (8.0 * eps))))


def phase_params(k: int, delta: float, s: int, d: int, consts: ConstantsConfig) -> PhaseParams:
    delta_k = delta / (2.0 * k * (k + 1))
    L = math.log(d * k * k * 2.0**k / delta_k)
    return PhaseParams(
        k=k,
        alpha=consts.c_alpha * 2.0**-k / (L * L),
        b=consts.c_b * 2.0**-k,
        radius=math.pi * 2.0 ** (-k - 2),
        T=math.ceil(consts.c_T * s * math.log(d) * L * L),
        delta=delta_k,
    )


def schedule(eps: float, delta: float, s: int, d: int, consts: ConstantsConfig):
    """Number of phases and the per-phase parameters, phases numbered 1..K."""
    if not 0.0 < eps < 1.0:
        raise InvalidArgument(f"eps must lie in (0, 1), got {eps}")
    _check_common(s, d, delta)
    K = num_phases(eps, consts)
    return K, [phase_params(k, delta, s, d, consts) for k in range(1, K + 1)]


def init_params(delta: float, s: int, d: int, consts: ConstantsConfig) -> InitParams:
    _check_common(s, d, delta)
    L = math.log(d / delta)
    return InitParams(
        m=math.ceil(consts.c_m * s * L),
        alpha=consts.c_alpha / (L * L),
        b=consts.b_init,
        T=math.ceil(consts.c_T * s * math.log(d) * L * L),
        zeta=consts.zeta,
        s_tilde=consts.s_tilde(s, d),
        delta=delta,
    )


@dataclass
class RefineTrace:
    """Running sums of both sides of the mirror-descent regret inequality."""

    T: int
    alpha: float
    labels: int = 0
    ex_calls: int = 0
    updates: int = 0
    sum_u_neg_g: float = 0.0  # sum <u, -g_t>
    sum_w_neg_g: float = 0.0  # sum <w_{t-1}, -g_t>
    sum_g_q2: float = 0.0  # sum ||g_t||_q^2
    min_hinge: float = math.inf  # min over updates of <w_{t-1}, g_t>
    bregman_u: float = math.nan  # B(u; w_0)
    u_in_K: bool = False
    max_violation: float = 0.0
    paths: dict = field(default_factory=dict)

    @property
    def lhs(self) -> float:
        return self.sum_u_neg_g / self.T

    @property
    def rhs(self) -> float:
        return (self.sum_w_neg_g / self.T + self.bregman_u / (self.alpha * self.T)
                + self.alpha * self.sum_g_q2 / self.T)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass
class RefineResult:
    w: np.ndarray
    trace: RefineTrace


def _check_ledger(trace: RefineTrace):
    if not trace.u_in_K:
        log.warning("target left the constraint set; regret ledger check skipped")
        return
    if trace.slack < -LEDGER_SLACK:
        raise AssertionError(f"regret ledger violated: slack {trace.slack:.3e}")


def _refine_core(w0, oracle, delta, s, alpha, b, K: ConstraintSet, anchor, T, *,
                 passive=False, averaging="normalized", max_attempts=None) -> RefineResult:
    d = oracle.spec.d
    if T < 1:
        raise InvalidArgument("T must be at least 1")
    if alpha <= 0.0 or b <= 0.0:
        raise InvalidArgument("step size and band width must be positive")
    if averaging not in AVERAGING_MODES:
        raise InvalidArgument(f"averaging must be one of {AVERAGING_MODES}")
    w0 = np.asarray(w0, dtype=np.float64)
    anchor = np.asarray(anchor, dtype=np.float64)
    if w0.shape != (d,) or K.d != d:
        raise InvalidArgument("dimension mismatch between w0, K and the oracle")
    if not K.contains(w0):
        raise InvalidArgument("w0 must lie in K")
    if max_attempts is None:
        # half of the failure budget goes to band sampling
        max_attempts = default_max_attempts(b, T, delta / 2.0)

    params = PNormParams.for_dim(d)
    p, q = params.p, params.q
    problem = MirrorProblem(K, anchor, params)
    u = oracle.u
    trace = RefineTrace(T=T, alpha=alpha)
    trace.bregman_u = bregman_div(u, w0, anchor, params)
    trace.u_in_K = K.contains(u)
    labels0 = oracle.counters.label_queries
    ex0 = oracle.counters.ex_calls

    z = w0 - anchor
    w = w0.copy()
    acc = np.zeros(d)
    for _ in range(T):
        nw = math.sqrt(float(w @ w))
        if nw == 0.0:
            raise DegenerateOutput("iterate collapsed to the origin")
        if averaging == "raw":
            acc += w
        x, _, consumed = oracle.draw_in_band(w / nw, b, max_attempts, keep_rejected=passive)
        if passive:
            y = int(oracle.reveal_labels(consumed)[-1])
        else:
            y = oracle.reveal_label(x)
        if y == -1:
            hinge = float(w @ x)
            trace.min_hinge = min(trace.min_hinge, hinge)
            trace.sum_w_neg_g -= hinge
            trace.sum_u_neg_g -= float(u @ x)
            nq = kernels.pnorm(x, q)
            trace.sum_g_q2 += nq * nq
            z, info = md_step_offset(problem, z, x, alpha)
            trace.paths[info.path] = trace.paths.get(info.path, 0) + 1
            trace.updates += 1
            w = anchor + z
            trace.max_violation = max(trace.max_violation, K.violation(w))
        if averaging == "normalized":
            acc += w / math.sqrt(float(w @ w))

    trace.labels = oracle.counters.label_queries - labels0
    trace.ex_calls = oracle.counters.ex_calls - ex0
    _check_ledger(trace)
    w_bar = acc / T
    h = hard_threshold(w_bar, s)
    nh = math.sqrt(float(h @ h))
    if nh == 0.0:
        raise DegenerateOutput("hard-thresholded average is zero")
    return RefineResult(h / nh, trace)


def _check_unit_sparse(w0, s):
    w0 = np.asarray(w0, dtype=np.float64)
    if abs(math.sqrt(float(w0 @ w0)) - 1.0) > 1e-9:
        raise InvalidArgument("w0 must have unit norm")
    if np.count_nonzero(w0) > s:
        raise InvalidArgument(f"w0 has more than s={s} nonzeros")


def refine(w0, oracle, delta, s, alpha, b, K: ConstraintSet, anchor, T, *,
           averaging="normalized", max_attempts=None) -> RefineResult:
    """T band-sampled mirror-descent steps; returns the thresholded average direction.

    Uses exactly T label queries.
    """
    _check_unit_sparse(w0, s)
    return _refine_core(w0, oracle, delta, s, alpha, b, K, anchor, T,
                        averaging=averaging, max_attempts=max_attempts)


def refine_passive(w0, oracle, delta, s, alpha, b, K: ConstraintSet, anchor, T, *,
                   averaging="normalized", max_attempts=None) -> RefineResult:
    """``refine`` that queries the label of every drawn instance, band hit or not.

    Updates match the active run on the same seed; labels equal EX calls.
    """
    _check_unit_sparse(w0, s)
    return _refine_core(w0, oracle, delta, s, alpha, b, K, anchor, T, passive=True,
                        averaging=averaging, max_attempts=max_attempts)


def _average_labeled(oracle, m: int) -> np.ndarray:
    X = oracle.draw_many(m)
    y = oracle.reveal_labels(X)
    return (y[:, None] * X).mean(axis=0)


def averaging_baseline(oracle, m: int, s: int) -> np.ndarray:
    """normalize(H_s(mean of y_i x_i)) over m labeled draws."""
    if m < 1:
        raise InvalidArgument("m must be at least 1")
    h = hard_threshold(_average_labeled(oracle, m), s)
    nh = float(np.linalg.norm(h))
    if nh == 0.0:
        raise DegenerateInit("labeled average is zero")
    return h / nh


@dataclass
class InitResult:
    v0: np.ndarray
    w_sharp: np.ndarray
    m: int
    params: InitParams
    trace: RefineTrace


def initialize(oracle, delta, s, consts: ConstantsConfig, *, passive=False) -> InitResult:
    """Averaging warm start followed by one refine run inside {w . w_sharp >= zeta}."""
    d = oracle.spec.d
    ip = init_params(delta, s, d, consts)
    m = ip.m
    w_avg = _average_labeled(oracle, m)
    if not np.any(w_avg):
        m *= 2
        w_avg = _average_labeled(oracle, m)
        if not np.any(w_avg):
            raise DegenerateInit(f"labeled average is zero after {m} draws")
    h = hard_threshold(w_avg, ip.s_tilde)
    w_sharp = h / np.linalg.norm(h)
    K = ConstraintSet.with_correlation(w_sharp, ip.zeta)
    w0 = ip.zeta * w_sharp
    res = _refine_core(w0, oracle, delta / 2.0, s, ip.alpha, ip.b, K, w0, ip.T,
                       passive=passive, averaging=consts.averaging)
    return InitResult(res.w, w_sharp, m, ip, res.trace)


@dataclass
class PhaseRecord:
    k: int
    angle: float
    labels: int
    ex_calls: int
    error: float
    error_method: str
    wall_ms: float
    T: int
    b: float
    alpha: float
    slack: float
    u_in_K: bool
    min_hinge: float


@dataclass
class RunResult:
    u_tilde: np.ndarray
    phases: list
    K: int

    @property
    def final(self) -> PhaseRecord:
        return self.phases[-1]


def run_main(eps, delta, s, oracle, consts: ConstantsConfig | None = None, *,
             passive=False, metric_n=100_000, metric_seed=0) -> tuple[np.ndarray, RunResult]:
    """Initialize, then K phases of refine with the scheduled parameters."""
    consts = consts or ConstantsConfig()
    d = oracle.spec.d
    K, phases = schedule(eps, delta, s, d, consts)
    u = oracle.u
    records = []

    def record(k, v, t0, pp, trace):
        err = disagreement(v, u, oracle.spec, metric_n, rng=metric_seed + k)
        records.append(PhaseRecord(
            k=k, angle=angle(v, u),
            labels=oracle.counters.label_queries, ex_calls=oracle.counters.ex_calls,
            error=err.value, error_method=err.method,
            wall_ms=(time.perf_counter() - t0) * 1e3,
            T=pp.T, b=pp.b, alpha=pp.alpha,
            slack=trace.slack, u_in_K=trace.u_in_K, min_hinge=trace.min_hinge,
        ))

    t0 = time.perf_counter()
    try:
        init = initialize(oracle, delta / 2.0, s, consts, passive=passive)
    except PhaseError:
        raise
    except Exception as exc:
        raise PhaseError(0, exc) from exc
    v = init.v0
    record(0, v, t0, init.params, init.trace)

    step = refine_passive if passive else refine
    for pp in phases:
        t0 = time.perf_counter()
        Kk = ConstraintSet.refine_phase(v, pp.radius)
        try:
            res = step(v, oracle, pp.delta, s, pp.alpha, pp.b, Kk, v, pp.T,
                       averaging=consts.averaging)
        except Exception as exc:
            raise PhaseError(pp.k, exc) from exc
        v = res.w
        record(pp.k, v, t0, pp, res.trace)
    return v, RunResult(v, records, K)
