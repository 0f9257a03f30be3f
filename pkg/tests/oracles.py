"""Independent reference computations used by the tests.

Nothing here calls the package's solvers; they only share the objective.
"""

import itertools
import math

import numpy as np

from halfspace_omd.optimizer import ConstraintSet, MirrorProblem
from halfspace_omd.vecmath import PNormParams


def feasible_mask(K: ConstraintSet, P, tol=1e-12):
    ok = np.linalg.norm(P, axis=1) <= K.outer_radius + tol
    if K.has_ball:
        ok &= np.linalg.norm(P - K.ball_center, axis=1) <= K.ball_radius + tol
    if K.has_half:
        ok &= P @ K.half_normal >= K.half_offset - tol
    return ok


def boundary_snaps(K: ConstraintSet, P):
    """Grid points pushed radially (or along the normal) onto each constraint surface.

    The constrained optimum sits on the boundary, which a plain grid only
    approaches to within its spacing; snapped copies close that gap.
    """
    out = [P]
    n = np.linalg.norm(P, axis=1, keepdims=True)
    out.append(P * (K.outer_radius / np.where(n == 0.0, 1.0, n)))
    if K.has_ball:
        D = P - K.ball_center
        n = np.linalg.norm(D, axis=1, keepdims=True)
        out.append(K.ball_center + D * (K.ball_radius / np.where(n == 0.0, 1.0, n)))
    if K.has_half:
        a = K.half_normal
        out.append(P + np.outer((K.half_offset - P @ a) / (a @ a), a))
    return np.vstack(out)


def _objective_rows(problem, P, w_prev, g, alpha):
    p = problem.params.p
    Z = P - problem.anchor
    zp = w_prev - problem.anchor

    def psi(Zr):
        m = np.max(np.abs(Zr), axis=-1, keepdims=True)
        m = np.where(m == 0.0, 1.0, m)
        nrm = m[..., 0] * np.sum(np.abs(Zr / m) ** p, axis=-1) ** (1.0 / p)
        return nrm ** 2 / (2.0 * (p - 1.0))

    npv = float(np.sum(np.abs(zp) ** p) ** (1.0 / p))
    if npv > 0.0:
        grad_prev = npv ** (2.0 - p) * np.sign(zp) * np.abs(zp) ** (p - 1.0) / (p - 1.0)
    else:
        grad_prev = np.zeros_like(zp)
    return alpha * (P @ g) + psi(Z) - psi(zp[None, :])[0] - (P - w_prev) @ grad_prev


def grid_minimum(problem: MirrorProblem, w_prev, g, alpha, points_per_axis=None, zooms=12):
    """Brute-force minimum of the mirror-step objective over a feasibility-filtered grid.

    Starts with a grid over the outer box and repeatedly re-grids a shrinking
    box around the incumbent (the objective is convex, so the minimizer stays
    inside the box once the spacing is fine enough).
    """
    d = problem.constraint.d
    n = points_per_axis or {2: 401, 3: 61}.get(d, 21)
    lo = -np.ones(d) * problem.constraint.outer_radius
    hi = -lo
    best_val, best_pt = math.inf, None
    for zoom in range(zooms + 1):
        if zoom:
            n = 25
        axes = [np.linspace(lo[i], hi[i], n) for i in range(d)]
        P = boundary_snaps(problem.constraint, np.array(list(itertools.product(*axes))))
        P = P[feasible_mask(problem.constraint, P)]
        if P.shape[0]:
            vals = _objective_rows(problem, P, w_prev, g, alpha)
            i = int(np.argmin(vals))
            if vals[i] < best_val:
                best_val, best_pt = float(vals[i]), P[i]
        step = (hi - lo) / (n - 1)
        # halve the box each round so a flat valley along the boundary is not cut off
        lo = best_pt - 6 * step
        hi = best_pt + 6 * step
    return best_val, best_pt


def random_instance(rng, d):
    """A random constrained step problem of either constraint shape, plus (w_prev, g, alpha)."""
    params = PNormParams.for_dim(d)
    if rng.random() < 0.5:
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        K = ConstraintSet.refine_phase(v, float(rng.uniform(0.2, 0.8)))
        anchor = v
        center, radius = (1.0 - K.ball_radius / 2) * v, K.ball_radius / 2
    else:
        ref = rng.standard_normal(d)
        ref /= np.linalg.norm(ref)
        zeta = float(rng.uniform(0.05, 0.5))
        K = ConstraintSet.with_correlation(ref, zeta)
        anchor = zeta * ref
        center, radius = (0.5 + zeta / 2) * ref, (1 - zeta) / 2
    # a feasible previous iterate inside a ball that sits in K
    off = rng.standard_normal(d)
    off *= radius * rng.random() ** (1.0 / d) / np.linalg.norm(off)
    w_prev = center + 0.95 * off
    g = rng.standard_normal(d) * rng.uniform(0.5, 3.0)
    alpha = float(rng.uniform(0.05, 1.5))
    return MirrorProblem(K, anchor, params), w_prev, g, alpha
