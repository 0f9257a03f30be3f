"""Constrained mirror-descent step and the Euclidean projections it relies on.

The step solves

    argmin_{w in K}  <w, alpha g> + B(w; w_prev)

for K an intersection of an origin-centred ball with an optional second ball
and an optional halfspace {w : a.w >= zeta}.  The unconstrained minimizer is
one link-map roundtrip; when it leaves K the problem is solved through its
Lagrange dual (one multiplier per constraint) and the answer is checked with
a variational-inequality certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgument, SolverFailure
from .sampling import make_rng
from .vecmath import PNormParams, bregman_div

PROJ_TOL = 1e-8
STEP_TOL = 1e-6
DYKSTRA_MAX_ITER = 10_000
POLISH_MAX_ITER = 10_000
DEFAULT_PROBES = 12


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """{w : ||w|| <= outer_radius} intersected with optional ball and halfspace."""

    d: int
    outer_radius: float = 1.0
    ball_center: np.ndarray | None = None
    ball_radius: float | None = None
    half_normal: np.ndarray | None = None
    half_offset: float = 0.0

    def __post_init__(self):
        if self.outer_radius <= 0.0:
            raise InvalidArgument("outer radius must be positive")
        if (self.ball_center is None) != (self.ball_radius is None):
            raise InvalidArgument("ball_center and ball_radius go together")
        if self.ball_center is not None:
            object.__setattr__(self, "ball_center", np.asarray(self.ball_center, dtype=np.float64))
            if self.ball_center.shape != (self.d,) or self.ball_radius <= 0.0:
                raise InvalidArgument("inner ball needs a length-d center and positive radius")
        if self.half_normal is not None:
            a = np.asarray(self.half_normal, dtype=np.float64)
            object.__setattr__(self, "half_normal", a)
            if a.shape != (self.d,) or not np.any(a):
                raise InvalidArgument("halfspace normal must be a nonzero length-d vector")
        self._certify_nonempty()

    @classmethod
    def refine_phase(cls, prev: np.ndarray, radius: float) -> "ConstraintSet":
        """Unit ball intersected with the trust region ball(prev, radius)."""
        return cls(d=prev.shape[0], ball_center=prev.copy(), ball_radius=radius)

    @classmethod
    def with_correlation(cls, ref: np.ndarray, zeta: float) -> "ConstraintSet":
        """Unit ball intersected with {w : w . ref >= zeta}."""
        return cls(d=ref.shape[0], half_normal=ref.copy(), half_offset=zeta)

    @property
    def has_ball(self) -> bool:
        return self.ball_center is not None

    @property
    def has_half(self) -> bool:
        return self.half_normal is not None

    def kernel_args(self):
        c = self.ball_center if self.has_ball else np.zeros(self.d)
        a = self.half_normal if self.has_half else np.zeros(self.d)
        R1 = float(self.ball_radius) if self.has_ball else 0.0
        return (float(self.outer_radius), c, R1, a, float(self.half_offset),
                self.has_ball, self.has_half)

    def violation(self, w) -> float:
        w = np.asarray(w, dtype=np.float64)
        v = math.sqrt(float(w @ w)) - self.outer_radius
        if self.has_ball:
            dc = w - self.ball_center
            v = max(v, math.sqrt(float(dc @ dc)) - self.ball_radius)
        if self.has_half:
            a = self.half_normal
            v = max(v, (self.half_offset - float(a @ w)) / math.sqrt(float(a @ a)))
        return max(v, 0.0)

    def contains(self, w, tol: float = PROJ_TOL) -> bool:
        return self.violation(w) <= tol

    def _certify_nonempty(self):
        starts = [np.zeros(self.d)]
        if self.has_ball:
            starts.append(self.ball_center)
        if self.has_half:
            a = self.half_normal
            starts.append(a * (self.half_offset / float(a @ a)))
        for y in starts:
            R0, c, R1, a, zeta, hb, hh = self.kernel_args()
            x, _, ok, _ = kernels.dykstra(np.asarray(y, dtype=np.float64), R0, c, R1, a, zeta,
                                          hb, hh, 1e-12, DYKSTRA_MAX_ITER)
            if self.violation(x) <= 1e-9:
                return
        raise InvalidArgument("constraint set is empty")


def euclid_project(K: ConstraintSet, y, tol: float = PROJ_TOL) -> np.ndarray:
    """Euclidean projection of ``y`` onto ``K``.

    Closed form when projecting onto a single constraint already lands in K,
    Dykstra's alternating projections otherwise.
    """
    y = np.asarray(y, dtype=np.float64)
    if K.violation(y) <= 0.0:
        return y.copy()
    R0, c, R1, a, zeta, hb, hh = K.kernel_args()
    candidates = []
    ny = math.sqrt(float(y @ y))
    candidates.append(y * (R0 / ny) if ny > R0 else y)
    if hb:
        dc = y - c
        nd = math.sqrt(float(dc @ dc))
        candidates.append(c + dc * (R1 / nd) if nd > R1 else y)
    if hh:
        gap = zeta - float(a @ y)
        candidates.append(y + (gap / float(a @ a)) * a if gap > 0.0 else y)
    for cand in candidates:
        if K.violation(cand) <= 0.0:
            return np.array(cand, dtype=np.float64)
    x, iters, ok, move = kernels.dykstra(y, R0, c, R1, a, zeta, hb, hh, tol, DYKSTRA_MAX_ITER)
    if not ok:
        raise SolverFailure(f"Dykstra did not converge in {iters} iterations", move)
    return x


@dataclass(frozen=True, eq=False)
class MirrorProblem:
    """Constraint set plus the p-norm regularizer anchored at ``anchor``."""

    constraint: ConstraintSet
    anchor: np.ndarray
    params: PNormParams
    tol: float = STEP_TOL

    def __post_init__(self):
        if self.tol <= 0.0:
            raise InvalidArgument("tol must be positive")
        anchor = np.asarray(self.anchor, dtype=np.float64)
        object.__setattr__(self, "anchor", anchor)
        if anchor.shape != (self.constraint.d,) or self.params.d != self.constraint.d:
            raise InvalidArgument("anchor, constraint and params disagree on the dimension")

    def objective(self, w, w_prev, g, alpha) -> float:
        return alpha * float(np.dot(g, w)) + bregman_div(w, w_prev, self.anchor, self.params)

    def gradient(self, w, w_prev, g, alpha) -> np.ndarray:
        p = self.params.p
        return (alpha * np.asarray(g, dtype=np.float64)
                + kernels.grad_phi(w - self.anchor, p)
                - kernels.grad_phi(w_prev - self.anchor, p))


def _probe_points(problem: MirrorProblem, w_star, G, probes: int, rng):
    K = problem.constraint
    pts = []
    nG = math.sqrt(float(G @ G))
    if nG > 0.0:
        direction = G / nG
        pts.append(-K.outer_radius * direction)
        if K.has_ball:
            pts.append(K.ball_center - K.ball_radius * direction)
        for t in (1e-4, 1e-3, 1e-2, 1e-1, 1.0):
            pts.append(w_star - t * direction)
    pts = pts[:probes]
    while len(pts) < probes:
        z = rng.standard_normal(K.d)
        z *= K.outer_radius * rng.random() ** (1.0 / K.d) / max(np.linalg.norm(z), 1e-300)
        pts.append(z)
    for y in pts:
        try:
            yield euclid_project(K, y)
        except SolverFailure:
            continue


def certify(problem: MirrorProblem, w_star, w_prev, g, alpha: float, probes: int = DEFAULT_PROBES,
            rng=None, z_star=None, z_prev=None) -> float:
    """Largest <grad F(w_star), w_star - w> over probe points w in K.

    Non-positive at an exact minimizer; ``-inf`` when ``probes == 0``.
    ``z_star``/``z_prev`` pass the offsets from the anchor directly: the
    p-norm gradient is extremely steep near zero offsets, so recomputing
    them as ``w - anchor`` can cost several digits.
    """
    if probes <= 0:
        return -math.inf
    rng = make_rng(0 if rng is None else rng)
    w_star = np.asarray(w_star, dtype=np.float64)
    p = problem.params.p
    if z_star is None:
        z_star = w_star - problem.anchor
    if z_prev is None:
        z_prev = np.asarray(w_prev, dtype=np.float64) - problem.anchor
    G = (alpha * np.asarray(g, dtype=np.float64)
         + kernels.grad_phi(z_star, p) - kernels.grad_phi(z_prev, p))
    best = -math.inf
    for w in _probe_points(problem, w_star, G, probes, rng):
        best = max(best, float(G @ (w_star - w)))
    return best


@dataclass
class StepInfo:
    path: str
    residual: float
    polish_passes: int = 0


def _projected_descent(problem, w_prev, g, alpha, start):
    # fallback when the dual solve stalls: projected gradient with Armijo backtracking
    K = problem.constraint
    w = euclid_project(K, start)
    f = problem.objective(w, w_prev, g, alpha)
    step = 1.0
    for _ in range(POLISH_MAX_ITER):
        G = problem.gradient(w, w_prev, g, alpha)
        while True:
            cand = euclid_project(K, w - step * G)
            fc = problem.objective(cand, w_prev, g, alpha)
            if fc <= f - 1e-4 * float(G @ (w - cand)) or step < 1e-14:
                break
            step *= 0.5
        moved = float(np.linalg.norm(cand - w))
        w, f = cand, fc
        step = min(1.0, step * 2.0)
        if moved < problem.tol * 1e-3:
            break
    return w


def md_step_offset(problem: MirrorProblem, z_prev, g, alpha: float,
                   probes: int = DEFAULT_PROBES):
    """Mirror step expressed in offsets z = w - anchor; returns ``(z, StepInfo)``.

    ``z_prev`` must describe a point of K up to ``10 * problem.tol``; points
    outside by more than ``PROJ_TOL`` are projected back first.
    """
    K = problem.constraint
    p = problem.params.p
    v = problem.anchor
    z_prev = np.asarray(z_prev, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if alpha <= 0.0:
        raise InvalidArgument("step size must be positive")
    w_prev = v + z_prev
    viol = K.violation(w_prev)
    if viol > 10.0 * problem.tol:
        raise InvalidArgument(f"w_prev lies outside K (violation {viol:.3e})")
    if viol > PROJ_TOL:
        w_prev = euclid_project(K, w_prev)
        z_prev = w_prev - v

    if not np.any(g):
        return z_prev.copy(), StepInfo("idle", 0.0)

    theta = kernels.grad_phi(z_prev, p) - alpha * g
    z = kernels.grad_phi_star(theta, p)
    if K.violation(v + z) <= PROJ_TOL:
        return z, StepInfo("closed", 0.0)

    R0, c, R1, a, zeta, hb, hh = K.kernel_args()
    z, _, passes, ok = kernels.mirror_polish(theta, v, R0, c, R1, a, zeta, hb, hh, p,
                                             PROJ_TOL * 1e-2, POLISH_MAX_ITER)
    path = "dual"
    if not ok or not np.all(np.isfinite(z)):
        w = _projected_descent(problem, w_prev, g, alpha, w_prev)
        z = w - v
        path = "descent"
    if K.violation(v + z) > PROJ_TOL:
        z = euclid_project(K, v + z) - v
    residual = certify(problem, v + z, w_prev, g, alpha, probes, z_star=z, z_prev=z_prev)
    if residual > problem.tol:
        raise SolverFailure("mirror step certificate not met", residual)
    return z, StepInfo(path, residual, passes)


def md_step(problem: MirrorProblem, w_prev, g, alpha: float, probes: int = DEFAULT_PROBES,
            return_info: bool = False):
    """One constrained mirror-descent step from ``w_prev`` along ``g``."""
    w_prev = np.asarray(w_prev, dtype=np.float64)
    z, info = md_step_offset(problem, w_prev - problem.anchor, g, alpha, probes)
    w = problem.anchor + z
    return (w, info) if return_info else w
