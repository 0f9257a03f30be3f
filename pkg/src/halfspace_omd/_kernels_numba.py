"""Numba-compiled twins of ``_kernels_numpy``; same names, same signatures."""

import math

import numpy as np
from numba import njit

_OPTS = dict(cache=True, nogil=True)


@njit(**_OPTS)
def pnorm(z, p):
    m = 0.0
    for j in range(z.shape[0]):
        az = abs(z[j])
        if az > m:
            m = az
    if m == 0.0:
        return 0.0
    s = 0.0
    for j in range(z.shape[0]):
        s += (abs(z[j]) / m) ** p
    return m * s ** (1.0 / p)


@njit(**_OPTS)
def grad_phi(z, p):
    out = np.zeros_like(z)
    n = pnorm(z, p)
    if n == 0.0:
        return out
    e = p - 1.0
    for j in range(z.shape[0]):
        zj = z[j]
        if zj != 0.0:
            mag = n * (abs(zj) / n) ** e / e
            out[j] = mag if zj > 0.0 else -mag
    return out


@njit(**_OPTS)
def grad_phi_star(theta, p):
    out = np.zeros_like(theta)
    q = p / (p - 1.0)
    n = pnorm(theta, q)
    if n == 0.0:
        return out
    for j in range(theta.shape[0]):
        tj = theta[j]
        if tj != 0.0:
            mag = (p - 1.0) * n * (abs(tj) / n) ** (q - 1.0)
            out[j] = mag if tj > 0.0 else -mag
    return out


@njit(**_OPTS)
def band_first(X, start, w, b):
    d = X.shape[1]
    for i in range(start, X.shape[0]):
        s = 0.0
        for j in range(d):
            s += X[i, j] * w[j]
        if s > 0.0 and s <= b:
            return i
    return -1


@njit(**_OPTS)
def _splitmix(h):
    h = h + np.uint64(0x9E3779B97F4A7C15)
    h = (h ^ (h >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    h = (h ^ (h >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return h ^ (h >> np.uint64(31))


@njit(**_OPTS)
def _hash_rows(bits, seed):
    n, d = bits.shape
    out = np.empty(n)
    for i in range(n):
        h = _splitmix(seed)
        for j in range(d):
            h = _splitmix(h ^ bits[i, j])
        out[i] = float(h >> np.uint64(11)) * (1.0 / 9007199254740992.0)
    return out


def hash_uniform(X, seed):
    bits = np.ascontiguousarray(X, dtype=np.float64).view(np.uint64)
    return _hash_rows(bits, np.uint64(seed))


@njit(**_OPTS)
def _coord_solve(a, beta, rho, e):
    if rho <= 0.0:
        return 0.0
    if a == 0.0:
        return rho / beta
    # start from the smaller of the two one-term solutions, in log space so
    # tiny rho cannot underflow
    lr = math.log(rho)
    u = min(lr - math.log(beta), (lr - math.log(a)) / e)
    for _ in range(100):
        eu = math.exp(u)
        eeu = math.exp(e * u)
        G = a * eeu + beta * eu - rho
        step = G / (a * e * eeu + beta * eu)
        u -= step
        if abs(step) <= 1e-15 or abs(G) <= 1e-15 * rho:
            break
    return math.exp(u)


@njit(**_OPTS)
def _shift_resid(n, beta, rho, p, t):
    e = p - 1.0
    a = n ** (2.0 - p) / e
    for j in range(rho.shape[0]):
        t[j] = _coord_solve(a, beta, rho[j], e)
    return pnorm(t, p) - n


@njit(**_OPTS)
def solve_shifted(r, beta, p):
    if beta <= 0.0:
        return grad_phi_star(r, p)
    m = np.max(np.abs(r))
    if m == 0.0:
        return np.zeros(r.shape[0])
    # both sides are 1-homogeneous in (r, z), so solve at unit scale
    return m * _solve_shifted_unit(r / m, beta, p)


@njit(**_OPTS)
def _solve_shifted_unit(r, beta, p):
    d = r.shape[0]
    rho = np.abs(r)
    out = np.zeros(d)
    if p == 2.0:
        return r / (1.0 + beta)
    e = p - 1.0
    q = p / e
    t = np.zeros(d)
    lo = 0.0
    flo = pnorm(rho, p) / beta
    if not math.isfinite(flo):
        # beta * z is below double resolution next to r
        return grad_phi_star(r, p)
    hi = min(flo, e * pnorm(r, q))
    fhi = _shift_resid(hi, beta, rho, p, t)
    if fhi < 0.0:
        side = 0
        for _ in range(200):
            n = (lo * fhi - hi * flo) / (fhi - flo)
            fn = _shift_resid(n, beta, rho, p, t)
            if abs(fn) <= 1e-15 * max(n, 1e-300) or hi - lo <= 1e-15 * hi:
                break
            if fn > 0.0:
                lo = n
                flo = fn
                if side == 1:
                    fhi *= 0.5
                side = 1
            else:
                hi = n
                fhi = fn
                if side == -1:
                    flo *= 0.5
                side = -1
    for j in range(d):
        out[j] = t[j] if r[j] > 0.0 else -t[j]
    return out


@njit(**_OPTS)
def _project_one(x, k, R0, c, R1, a, zeta):
    if k == 0:
        nx = math.sqrt(np.dot(x, x))
        if nx <= R0:
            return x.copy()
        return x * (R0 / nx)
    if k == 1:
        dc = x - c
        nd = math.sqrt(np.dot(dc, dc))
        if nd <= R1:
            return x.copy()
        return c + dc * (R1 / nd)
    aa = np.dot(a, a)
    gap = zeta - np.dot(a, x)
    if gap <= 0.0 or aa == 0.0:
        return x.copy()
    return x + (gap / aa) * a


@njit(**_OPTS)
def _gap(w, k, R0, c, R1, a, zeta):
    if k == 0:
        return math.sqrt(np.dot(w, w)) - R0
    if k == 1:
        dc = w - c
        return math.sqrt(np.dot(dc, dc)) - R1
    return (zeta - np.dot(a, w)) / math.sqrt(np.dot(a, a))


@njit(**_OPTS)
def _set_list(has_ball, has_half):
    n = 1 + int(has_ball) + int(has_half)
    sets = np.zeros(n, dtype=np.int64)
    i = 1
    if has_ball:
        sets[i] = 1
        i += 1
    if has_half:
        sets[i] = 2
    return sets


@njit(**_OPTS)
def dykstra(y, R0, c, R1, a, zeta, has_ball, has_half, tol, max_iter):
    sets = _set_list(has_ball, has_half)
    x = y.astype(np.float64).copy()
    incr = np.zeros((sets.shape[0], x.shape[0]))
    move = np.inf
    for it in range(1, max_iter + 1):
        x_prev = x.copy()
        for j in range(sets.shape[0]):
            tmp = x + incr[j]
            x = _project_one(tmp, sets[j], R0, c, R1, a, zeta)
            incr[j] = tmp - x
        dx = x - x_prev
        move = math.sqrt(np.dot(dx, dx))
        if move < tol:
            viol = 0.0
            for j in range(sets.shape[0]):
                viol = max(viol, _gap(x, sets[j], R0, c, R1, a, zeta))
            if viol <= tol:
                return x, it, True, move
    return x, max_iter, False, move


@njit(**_OPTS)
def _primal(theta, v, mu, c, a, has_ball, has_half, p):
    beta = 2.0 * mu[0]
    r = theta - 2.0 * mu[0] * v
    if has_ball:
        beta += 2.0 * mu[1]
        r = r - 2.0 * mu[1] * (v - c)
    if has_half:
        r = r + mu[2] * a
    return solve_shifted(r, beta, p)


@njit(**_OPTS)
def mirror_polish(theta, v, R0, c, R1, a, zeta, has_ball, has_half, p, tol, max_iter):
    sets = _set_list(has_ball, has_half)
    mu = np.zeros(3)
    z = _primal(theta, v, mu, c, a, has_ball, has_half, p)
    for it in range(1, max_iter + 1):
        for j in range(sets.shape[0]):
            k = sets[j]
            mu[k] = 0.0
            z = _primal(theta, v, mu, c, a, has_ball, has_half, p)
            g0 = _gap(v + z, k, R0, c, R1, a, zeta)
            if g0 <= 0.0:
                continue
            lo = 0.0
            glo = g0
            hi = 1.0
            ghi = 0.0
            while True:
                mu[k] = hi
                z = _primal(theta, v, mu, c, a, has_ball, has_half, p)
                ghi = _gap(v + z, k, R0, c, R1, a, zeta)
                if ghi <= 0.0:
                    break
                lo = hi
                glo = ghi
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
                    lo = m
                    glo = gm
                    if side == 1:
                        ghi *= 0.5
                    side = 1
                else:
                    hi = m
                    ghi = gm
                    if side == -1:
                        glo *= 0.5
                    side = -1
        z = _primal(theta, v, mu, c, a, has_ball, has_half, p)
        done = True
        for j in range(sets.shape[0]):
            k = sets[j]
            gk = _gap(v + z, k, R0, c, R1, a, zeta)
            if gk > tol or (mu[k] > 0.0 and gk < -tol):
                done = False
        if done:
            return z, mu, it, True
    return z, mu, max_iter, False
