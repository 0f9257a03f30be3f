"""Vectorized numpy implementations of the hot kernels.

Every function here has a twin with the same name and signature in
``_kernels_numba``; ``halfspace_omd.kernels`` picks one set at import time.
"""

import math

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def pnorm(z, p):
    m = np.max(np.abs(z)) if z.size else 0.0
    if m == 0.0:
        return 0.0
    return float(m * np.sum(np.abs(z / m) ** p) ** (1.0 / p))


def grad_phi(z, p):
    # N * sign(z) * |z/N|^(p-1) / (p-1)  ==  ||z||^(2-p) sign(z)|z|^(p-1) / (p-1)
    n = pnorm(z, p)
    if n == 0.0:
        return np.zeros_like(z)
    return n * np.sign(z) * np.abs(z / n) ** (p - 1.0) / (p - 1.0)


def grad_phi_star(theta, p):
    q = p / (p - 1.0)
    n = pnorm(theta, q)
    if n == 0.0:
        return np.zeros_like(theta)
    return (p - 1.0) * n * np.sign(theta) * np.abs(theta / n) ** (q - 1.0)


def band_first(X, start, w, b):
    """Index of the first row i >= start with 0 < X[i].w <= b, or -1."""
    n = X.shape[0]
    chunk = 256
    i = start
    while i < n:
        j = min(n, i + chunk)
        proj = X[i:j] @ w
        hit = np.flatnonzero((proj > 0.0) & (proj <= b))
        if hit.size:
            return int(i + hit[0])
        i = j
        chunk = min(chunk * 2, 8192)
    return -1


def _splitmix(h):
    h = (h + _GOLDEN) & _MASK64
    h = ((h ^ (h >> np.uint64(30))) * _MIX1) & _MASK64
    h = ((h ^ (h >> np.uint64(27))) * _MIX2) & _MASK64
    return h ^ (h >> np.uint64(31))


def hash_uniform(X, seed):
    """Per-row uniform in [0, 1) that is a fixed function of (row bits, seed)."""
    bits = np.ascontiguousarray(X, dtype=np.float64).view(np.uint64)
    with np.errstate(over="ignore"):
        h = np.full(bits.shape[0], np.uint64(seed) & _MASK64, dtype=np.uint64)
        h = _splitmix(h)
        for j in range(bits.shape[1]):
            h = _splitmix(h ^ bits[:, j])
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def _coord_solve(a, beta, rho, e):
    # a t^e + beta t = rho, t >= 0; Newton in log t on a convex increasing map
    t = np.zeros_like(rho)
    pos = rho > 0.0
    if not np.any(pos):
        return t
    r = rho[pos]
    if a == 0.0:
        t[pos] = r / beta
        return t
    lr = np.log(r)
    u = np.minimum(lr - math.log(beta), (lr - math.log(a)) / e)
    for _ in range(100):
        eu = np.exp(u)
        eeu = np.exp(e * u)
        G = a * eeu + beta * eu - r
        dG = a * e * eeu + beta * eu
        step = G / dG
        u = u - step
        if np.all(np.abs(step) <= 1e-15) or np.all(np.abs(G) <= 1e-15 * r):
            break
    t[pos] = np.exp(u)
    return t


def solve_shifted(r, beta, p):
    """Solve grad_phi(z) + beta * z = r for z (beta >= 0)."""
    if beta <= 0.0:
        return grad_phi_star(r, p)
    m = float(np.max(np.abs(r)))
    if m == 0.0:
        return np.zeros_like(r, dtype=float)
    # both sides are 1-homogeneous in (r, z), so solve at unit scale
    return m * _solve_shifted_unit(r / m, beta, p)


def _solve_shifted_unit(r, beta, p):
    e = p - 1.0
    rho = np.abs(r)
    sgn = np.sign(r)
    if p == 2.0:
        return r / (1.0 + beta)
    q = p / e

    def resid(n):
        a = n ** (2.0 - p) / e
        t = _coord_solve(a, beta, rho, e)
        return pnorm(t, p) - n, t

    lo, flo = 0.0, pnorm(rho, p) / beta
    if not math.isfinite(flo):
        # beta * z is below double resolution next to r
        return grad_phi_star(r, p)
    hi = min(flo, e * pnorm(r, q))
    fhi, t = resid(hi)
    if fhi >= 0.0:
        return sgn * t
    side = 0
    n = hi
    for _ in range(200):
        n = (lo * fhi - hi * flo) / (fhi - flo)
        fn, t = resid(n)
        if abs(fn) <= 1e-15 * max(n, 1e-300) or hi - lo <= 1e-15 * hi:
            break
        if fn > 0.0:
            lo, flo = n, fn
            if side == 1:
                fhi *= 0.5
            side = 1
        else:
            hi, fhi = n, fn
            if side == -1:
                flo *= 0.5
            side = -1
    return sgn * t


def _proj_ball(x, c, R):
    d = x - c
    nd = math.sqrt(float(d @ d))
    if nd <= R:
        return x.copy()
    return c + d * (R / nd)


def _proj_half(x, a, zeta):
    aa = float(a @ a)
    gap = zeta - float(a @ x)
    if gap <= 0.0 or aa == 0.0:
        return x.copy()
    return x + (gap / aa) * a


def _project_one(x, k, R0, c, R1, a, zeta):
    if k == 0:
        return _proj_ball(x, np.zeros_like(x), R0)
    if k == 1:
        return _proj_ball(x, c, R1)
    return _proj_half(x, a, zeta)


def _violation(x, R0, c, R1, a, zeta, has_ball, has_half):
    v = math.sqrt(float(x @ x)) - R0
    if has_ball:
        dc = x - c
        v = max(v, math.sqrt(float(dc @ dc)) - R1)
    if has_half:
        na = math.sqrt(float(a @ a))
        v = max(v, (zeta - float(a @ x)) / na)
    return max(v, 0.0)


def dykstra(y, R0, c, R1, a, zeta, has_ball, has_half, tol, max_iter):
    """Euclidean projection onto the intersection by Dykstra's method.

    Returns (x, iterations, converged, last_move).
    """
    sets = [0]
    if has_ball:
        sets.append(1)
    if has_half:
        sets.append(2)
    x = y.astype(np.float64).copy()
    incr = [np.zeros_like(x) for _ in sets]
    move = math.inf
    for it in range(1, max_iter + 1):
        x_prev = x.copy()
        for j, k in enumerate(sets):
            tmp = x + incr[j]
            x = _project_one(tmp, k, R0, c, R1, a, zeta)
            incr[j] = tmp - x
        dx = x - x_prev
        move = math.sqrt(float(dx @ dx))
        if move < tol and _violation(x, R0, c, R1, a, zeta, has_ball, has_half) <= tol:
            return x, it, True, move
    return x, max_iter, False, move


def _primal(theta, v, mu, c, a, has_ball, has_half, p):
    beta = 2.0 * mu[0]
    r = theta - 2.0 * mu[0] * v
    if has_ball:
        beta += 2.0 * mu[1]
        r = r - 2.0 * mu[1] * (v - c)
    if has_half:
        r = r + mu[2] * a
    return solve_shifted(r, beta, p)


def _gap(w, k, R0, c, R1, a, zeta):
    if k == 0:
        return math.sqrt(float(w @ w)) - R0
    if k == 1:
        dc = w - c
        return math.sqrt(float(dc @ dc)) - R1
    return (zeta - float(a @ w)) / math.sqrt(float(a @ a))


def mirror_polish(theta, v, R0, c, R1, a, zeta, has_ball, has_half, p, tol, max_iter):
    """Constrained minimizer of psi(w - v) - <theta, w> over the set, as z = w - v.

    Dual coordinate ascent on the constraint multipliers; the primal point for
    fixed multipliers comes from ``solve_shifted``.  Returns (z, mu, passes, ok).
    """
    sets = [0]
    if has_ball:
        sets.append(1)
    if has_half:
        sets.append(2)
    mu = np.zeros(3)
    z = _primal(theta, v, mu, c, a, has_ball, has_half, p)
    for it in range(1, max_iter + 1):
        for k in sets:
            mu[k] = 0.0
            z = _primal(theta, v, mu, c, a, has_ball, has_half, p)
            g0 = _gap(v + z, k, R0, c, R1, a, zeta)
            if g0 <= 0.0:
                continue
            lo, glo = 0.0, g0
            hi = 1.0
            while True:
                mu[k] = hi
                z = _primal(theta, v, mu, c, a, has_ball, has_half, p)
                ghi = _gap(v + z, k, R0, c, R1, a, zeta)
                if ghi <= 0.0:
                    break
                lo, glo = hi, ghi
                hi *= 4.0
                if hi > 1e300:
                    return z, mu, it, False
            side = 0
            for _ in range(300):
                m = (lo * ghi - hi * glo) / (ghi - glo)
                if not (lo < m < hi):
                    m = 0.5 * (lo + hi)
                mu[k] = m
                z = _primal(theta, v, mu, c, a, has_ball, has_half, p)
                gm = _gap(v + z, k, R0, c, R1, a, zeta)
                if abs(gm) <= 1e-14 or hi - lo <= 1e-15 * hi:
                    break
                if gm > 0.0:
                    lo, glo = m, gm
                    if side == 1:
                        ghi *= 0.5
                    side = 1
                else:
                    hi, ghi = m, gm
                    if side == -1:
                        glo *= 0.5
                    side = -1
        z = _primal(theta, v, mu, c, a, has_ball, has_half, p)
        done = True
        for k in sets:
            gk = _gap(v + z, k, R0, c, R1, a, zeta)
            if gk > tol or (mu[k] > 0.0 and gk < -tol):
                done = False
        if done:
            return z, mu, it, True
    return z, mu, max_iter, False
