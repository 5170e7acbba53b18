"""Compiled RK4 kernel for the variational equations of motion.

Same system as :mod:`lzsm.dynamics` but assembled and solved in complex
arithmetic: the real split of (C + lam I) is exactly G + lam I, so a
complex Cholesky solve of the half-size Hermitian system gives the same
derivatives at a quarter of the cost.
"""

import math

import numpy as np
from numba import njit

LINEAR = 0
SINUSOIDAL = 1


@njit(cache=True)
def bias(kind, drive, t):
    if kind == LINEAR:
        return drive[0] * t
    return drive[1] + drive[2] * math.sin(drive[3] * t + drive[4])


@njit(cache=True)
def _cholesky(a, L):
    """In-place lower Cholesky factor of Hermitian ``a``; False if not PD."""
    n = a.shape[0]
    for j in range(n):
        s = a[j, j].real
        for k in range(j):
            s -= (L[j, k] * L[j, k].conjugate()).real
        if not s > 0.0:
            return False
        d = math.sqrt(s)
        L[j, j] = d
        for i in range(j + 1, n):
            acc = a[i, j]
            for k in range(j):
                acc -= L[i, k] * L[j, k].conjugate()
            L[i, j] = acc / d
    return True


@njit(cache=True)
def _cho_solve(L, b):
    n = L.shape[0]
    y = np.empty(n, dtype=np.complex128)
    for i in range(n):
        acc = b[i]
        for k in range(i):
            acc -= L[i, k] * y[k]
        y[i] = acc / L[i, i].real
    x = np.empty(n, dtype=np.complex128)
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for k in range(i + 1, n):
            acc -= L[k, i].conjugate() * x[k]
        x[i] = acc / L[i, i].real
    return x


@njit(cache=True)
def hermitian_system(vec, M, N, t, kind, drive, delta, om, gc, gs):
    """Gram matrix C and right-hand side b = -i h, see dynamics._complex_system."""
    A = vec[:M]
    B = vec[M:2 * M]
    f = vec[2 * M:].reshape((M, N))
    D = 2 * M + M * N
    S = np.empty((M, M), dtype=np.complex128)
    sq = np.empty(M)
    for i in range(M):
        acc = 0.0
        for q in range(N):
            acc += f[i, q].real ** 2 + f[i, q].imag ** 2
        sq[i] = 0.5 * acc
    for k in range(M):
        for i in range(M):
            acc = 0j
            for q in range(N):
                acc += f[k, q].conjugate() * f[i, q]
            S[k, i] = np.exp(acc - sq[k] - sq[i])

    eps = bias(kind, drive, t)
    C = np.zeros((D, D), dtype=np.complex128)
    h = np.zeros(D, dtype=np.complex128)
    for k in range(M):
        Ak = A[k].conjugate()
        Bk = B[k].conjugate()
        for i in range(M):
            s = S[k, i]
            C[k, i] = s
            C[M + k, M + i] = s
            rho = Ak * A[i] + Bk * B[i]
            zeta = Ak * A[i] - Bk * B[i]
            flip = Ak * B[i] + Bk * A[i]
            F = 0j
            dc = 0j
            ds = 0j
            for q in range(N):
                F += om[q] * f[k, q].conjugate() * f[i, q]
                dc += gc[q] * (f[i, q] + f[k, q].conjugate())
                ds += gs[q] * (f[i, q] + f[k, q].conjugate())
            h[k] += s * ((0.5 * eps + F + dc) * A[i] + (0.5 * delta + ds) * B[i])
            h[M + k] += s * ((-0.5 * eps + F - dc) * B[i] + (0.5 * delta + ds) * A[i])
            coef = (0.5 * eps * zeta + 0.5 * delta * flip + rho * F + zeta * dc + flip * ds) * s
            for q in range(N):
                row = 2 * M + k * N + q
                h[row] += coef * f[i, q] + rho * s * om[q] * f[i, q] + zeta * s * gc[q] + flip * s * gs[q]
                C[k, 2 * M + i * N + q] = A[i] * s * f[k, q].conjugate()
                C[M + k, 2 * M + i * N + q] = B[i] * s * f[k, q].conjugate()
                C[row, i] = Ak * s * f[i, q]
                C[row, M + i] = Bk * s * f[i, q]
                for p in range(N):
                    val = f[i, q] * f[k, p].conjugate()
                    if p == q:
                        val += 1.0
                    C[row, 2 * M + i * N + p] = rho * s * val
    b = -1j * h
    return C, b


@njit(cache=True)
def rate(vec, M, N, t, kind, drive, delta, om, gc, gs, reg, ceiling):
    C, b = hermitian_system(vec, M, N, t, kind, drive, delta, om, gc, gs)
    D = C.shape[0]
    if not (np.all(np.isfinite(C)) and np.all(np.isfinite(b))):
        return np.full(D, np.nan + 0j)
    tr = 0.0
    for j in range(D):
        tr += C[j, j].real
    lam = reg * tr / D
    Cr = C.copy()
    for j in range(D):
        Cr[j, j] += lam
    L = np.zeros((D, D), dtype=np.complex128)
    ok = _cholesky(Cr, L)
    if ok:
        dmax = 0.0
        dmin = np.inf
        for j in range(D):
            d = L[j, j].real
            dmax = max(dmax, d)
            dmin = min(dmin, d)
        ok = (dmax / dmin) ** 2 < ceiling
    if ok:
        x = _cho_solve(L, b)
    else:
        Ch = 0.5 * (C + C.conj().T)
        w, V = np.linalg.eigh(Ch)
        wmax = 0.0
        for j in range(D):
            wmax = max(wmax, abs(w[j]))
        cutoff = lam if lam > 0 else 2.220446049250313e-16 * max(wmax, 1.0) * 2 * D
        proj = V.conj().T @ b
        for j in range(D):
            if abs(w[j]) > cutoff:
                proj[j] = proj[j] / w[j]
            else:
                proj[j] = 0.0
        x = V @ proj
    out = np.empty(D, dtype=np.complex128)
    f = vec[2 * M:].reshape((M, N))
    for i in range(M):
        R = 0.0
        for q in range(N):
            R += (f[i, q].conjugate() * x[2 * M + i * N + q]).real
        out[i] = x[i] + vec[i] * R
        out[M + i] = x[M + i] + vec[M + i] * R
    for j in range(2 * M, D):
        out[j] = x[j]
    return out


@njit(cache=True)
def rk4(vec, M, N, t, dt, kind, drive, delta, om, gc, gs, reg, ceiling):
    k1 = rate(vec, M, N, t, kind, drive, delta, om, gc, gs, reg, ceiling)
    k2 = rate(vec + 0.5 * dt * k1, M, N, t + 0.5 * dt, kind, drive, delta, om, gc, gs, reg, ceiling)
    k3 = rate(vec + 0.5 * dt * k2, M, N, t + 0.5 * dt, kind, drive, delta, om, gc, gs, reg, ceiling)
    k4 = rate(vec + dt * k3, M, N, t + dt, kind, drive, delta, om, gc, gs, reg, ceiling)
    return vec + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def rk4_many(vec, M, N, t0, dt, n, kind, drive, delta, om, gc, gs, reg, ceiling):
    """``n`` consecutive steps; returns the state, or NaNs on a non-finite step."""
    t = t0
    for s in range(n):
        vec = rk4(vec, M, N, t, dt, kind, drive, delta, om, gc, gs, reg, ceiling)
        for j in range(vec.shape[0]):
            if not (np.isfinite(vec[j].real) and np.isfinite(vec[j].imag)):
                vec[:] = np.nan
                return vec, s
        t = t0 + (s + 1) * dt
    return vec, n
