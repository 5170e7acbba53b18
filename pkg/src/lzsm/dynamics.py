"""Time-dependent variational equations of motion for the multi-D2 state.

The Euler-Lagrange equations of the Dirac-Frenkel Lagrangian couple the
derivatives of A_i, B_i, f_iq and, through the coherent-state
normalization, the conjugates of df_iq/dt. Those conjugate terms all enter
as A_i Re(f_i* . df_i/dt), so substituting

    y_i = dA_i/dt - A_i sum_q Re(f_iq* df_iq/dt)     (z_i likewise for B)

turns the system into a complex-linear one, C x = -i h, with C the
Hermitian Gram matrix of the tangent vectors. It is solved in its real
split form (G symmetric, dimension 2 (2M + MN)) and mapped back to
(dA/dt, dB/dt, df/dt).

:func:`integrate` runs on a compiled kernel that solves the equivalent
complex Hermitian system; the functions here are the reference path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

from . import _kernels
from .ansatz import MultiD2State, overlap_matrix
from .model import LinearDrive, ModelParams, bias_at
from .observables import TrajectoryRecord, make_record

log = logging.getLogger(__name__)

__all__ = [
    "NonFiniteError",
    "IntegrationAborted",
    "TangentSystem",
    "IntegratorConfig",
    "assemble_tangent_system",
    "regularized_solve",
    "solve_derivatives",
    "time_derivative",
    "eom_residual",
    "rk4_step",
    "compiled_derivative",
    "integrate",
]


class NonFiniteError(ArithmeticError):
    """The derivative solve produced NaN or Inf."""


class IntegrationAborted(RuntimeError):
    """A trajectory hit a non-finite derivative; carries what was computed."""

    def __init__(self, message, records, t, state):
        super().__init__(message)
        self.records = records
        self.t = t
        self.state = state


@dataclass
class TangentSystem:
    """Real-split variational system ``G x = r``.

    ``x`` stacks Re and Im of (y_1..y_M, z_1..z_M, df_11/dt..df_MN/dt).
    ``state`` is kept to map the solution back to parameter rates.
    """

    G: np.ndarray
    r: np.ndarray
    state: MultiD2State = field(repr=False)
    condition_estimate: float = math.nan

    @property
    def dim(self) -> int:
        return self.G.shape[0]


@dataclass(frozen=True)
class IntegratorConfig:
    t0: float
    t1: float
    dt: float = 0.02
    reg_epsilon: float = 1e-10
    record_stride: int = 10
    n_report: int = 8
    cond_ceiling: float = 1e15
    compiled: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t1 > self.t0:
            raise ValueError("t1 must exceed t0")
        if self.reg_epsilon < 0:
            raise ValueError("reg_epsilon must be non-negative")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


def _complex_system(state: MultiD2State, params: ModelParams, t: float):
    """Hermitian Gram matrix C and right-hand side h (with C x = -i h)."""
    A, B, f = state.A, state.B, state.f
    M, N = f.shape
    fc = f.conj()
    S = overlap_matrix(f)  # S[k, i] = <f_k|f_i>
    AA = np.outer(A.conj(), A)
    BB = np.outer(B.conj(), B)
    AB = np.outer(A.conj(), B)
    rho = AA + BB
    zeta = AA - BB
    flip = AB + AB.conj().T  # A_k* B_i + B_k* A_i

    D = 2 * M + M * N
    C = np.empty((D, D), dtype=complex)
    C[:M, :M] = S
    C[:M, M:2 * M] = 0.0
    C[M:2 * M, :M] = 0.0
    C[M:2 * M, M:2 * M] = S
    # amplitude rows vs displacement columns: [k, (i, p)] = A_i S_ki f_kp*
    SA = S * A[None, :]
    SB = S * B[None, :]
    C[:M, 2 * M:] = (SA[:, :, None] * fc[:, None, :]).reshape(M, M * N)
    C[M:2 * M, 2 * M:] = (SB[:, :, None] * fc[:, None, :]).reshape(M, M * N)
    # displacement rows vs amplitude columns: [(k, q), i] = A_k* S_ki f_iq
    C[2 * M:, :M] = ((A.conj()[:, None] * S)[:, None, :] * f.T[None, :, :]).reshape(M * N, M)
    C[2 * M:, M:2 * M] = ((B.conj()[:, None] * S)[:, None, :] * f.T[None, :, :]).reshape(M * N, M)
    # displacement block: [(k, q), (i, p)] = rho_ki S_ki (delta_pq + f_iq f_kp*)
    w = rho * S
    blk = np.einsum("iq,kp->kqip", f, fc)
    blk += np.eye(N)[None, :, None, :]
    C[2 * M:, 2 * M:] = (w[:, None, :, None] * blk).reshape(M * N, M * N)

    eps = float(bias_at(params.drive, t))
    om = params.omegas
    gc = 0.5 * params.gammas_cos
    gs = 0.5 * params.gammas_sin
    F = (fc * om) @ f.T  # sum_q w_q f_kq* f_iq
    disp_c = (f @ gc)[None, :] + (fc @ gc)[:, None]  # sum_q gc_q (f_iq + f_kq*)
    disp_s = (f @ gs)[None, :] + (fc @ gs)[:, None]
    half_d = 0.5 * params.delta

    hA = (S * (0.5 * eps + F + disp_c)) @ A + (S * (half_d + disp_s)) @ B
    hB = (S * (-0.5 * eps + F - disp_c)) @ B + (S * (half_d + disp_s)) @ A
    coef = (0.5 * eps * zeta + half_d * flip + rho * F + zeta * disp_c + flip * disp_s) * S
    hf = (coef @ f                                  # sum_i coef_ki f_iq
          + ((rho * S) @ f) * om[None, :]           # omega_q sum_i rho_ki S_ki f_iq
          + np.sum(zeta * S, axis=1)[:, None] * gc[None, :]
          + np.sum(flip * S, axis=1)[:, None] * gs[None, :])
    h = np.concatenate([hA, hB, hf.reshape(-1)])
    return C, h


def assemble_tangent_system(state: MultiD2State, params: ModelParams, t: float,
                            estimate_condition: bool = False) -> TangentSystem:
    """Build the real-split variational system at time ``t``.

    With ``estimate_condition`` the 2-norm condition number of G is computed
    (an SVD; diagnostics only).
    """
    if state.N != params.n_modes:
        raise ValueError(f"state has {state.N} modes, model has {params.n_modes}")
    C, h = _complex_system(state, params, t)
    b = -1j * h
    G = np.block([[C.real, -C.imag], [C.imag, C.real]])
    r = np.concatenate([b.real, b.imag])
    cond = float(np.linalg.cond(G)) if estimate_condition else math.nan
    return TangentSystem(G=G, r=r, state=state, condition_estimate=cond)


def regularized_solve(G, r, reg_epsilon=1e-10, cond_ceiling=1e15):
    """Solve the symmetric system (G + lam I) x = r, lam = reg_epsilon trace(G) / dim.

    Falls back to an eigenvalue pseudo-inverse when Cholesky fails or the
    LAPACK reciprocal condition estimate is below 1 / cond_ceiling.
    """
    dim = G.shape[0]
    lam = reg_epsilon * np.trace(G) / dim
    Gr = G + lam * np.eye(dim)
    try:
        c, lower = la.cho_factor(Gr, check_finite=False)
        anorm = np.linalg.norm(Gr, 1)
        rcond, info = lapack.dpocon(c, anorm, uplo="L" if lower else "U")
        if info == 0 and rcond > 1.0 / cond_ceiling:
            return la.cho_solve((c, lower), r, check_finite=False)
    except la.LinAlgError:
        pass
    # symmetric pseudo-inverse, discarding modes below the shift
    w, V = np.linalg.eigh(0.5 * (G + G.T))
    cutoff = lam if lam > 0 else np.finfo(float).eps * max(abs(w).max(), 1.0) * dim
    keep = np.abs(w) > cutoff
    coeff = np.zeros_like(w)
    coeff[keep] = (V[:, keep].T @ r) / w[keep]
    return V @ coeff


def solve_derivatives(sys: TangentSystem, reg_epsilon: float = 1e-10,
                      cond_ceiling: float = 1e15) -> np.ndarray:
    """Solve ``(G + lam I) x = r`` and return packed (dA, dB, df) rates.

    ``lam = reg_epsilon * trace(G) / dim``. If Cholesky fails or the
    regularized matrix is worse conditioned than ``cond_ceiling`` an
    eigenvalue pseudo-inverse with cutoff ``lam`` is used instead.
    """
    x = regularized_solve(sys.G, sys.r, reg_epsilon, cond_ceiling)
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("non-finite solution of the variational system")
    st = sys.state
    M, N = st.M, st.N
    half = x.shape[0] // 2
    xc = x[:half] + 1j * x[half:]
    y, z = xc[:M], xc[M:2 * M]
    fdot = xc[2 * M:].reshape(M, N)
    R = np.sum((st.f.conj() * fdot).real, axis=1)
    return np.concatenate([y + st.A * R, z + st.B * R, fdot.reshape(-1)])


def time_derivative(state: MultiD2State, params: ModelParams, t: float,
                    reg_epsilon: float = 1e-10, cond_ceiling: float = 1e15) -> np.ndarray:
    return solve_derivatives(assemble_tangent_system(state, params, t), reg_epsilon, cond_ceiling)


def eom_residual(state: MultiD2State, params: ModelParams, t: float, deriv: np.ndarray):
    """Residual of the amplitude and displacement equations of motion written
    out term by term in the original variables (dA, dB, df and df*).

    Loops are deliberate: this is an independent check on the vectorized
    Gram-matrix assembly. Returns the complex residual vector, ordered like
    the rows of the variational system.
    """
    M, N = state.M, state.N
    A, B, f = state.A, state.B, state.f
    dA = deriv[:M]
    dB = deriv[M:2 * M]
    df = deriv[2 * M:].reshape(M, N)
    eps = float(bias_at(params.drive, t))
    dlt = params.delta
    om = params.omegas
    gc = params.gammas_cos
    gs = params.gammas_sin
    S = np.array([[np.exp(sum(-0.5 * (abs(f[k, q]) ** 2 + abs(f[i, q]) ** 2) + np.conj(f[k, q]) * f[i, q]
                              for q in range(N))) for i in range(M)] for k in range(M)])
    res = np.zeros(2 * M + M * N, dtype=complex)
    for k in range(M):
        lhsA = lhsB = rhsA = rhsB = 0.0
        for i in range(M):
            phase = sum(-(df[i, q] * np.conj(f[i, q]) + f[i, q] * np.conj(df[i, q])) + 2 * np.conj(f[k, q]) * df[i, q]
                        for q in range(N))
            osc = sum(om[q] * np.conj(f[k, q]) * f[i, q] for q in range(N))
            dc = sum(gc[q] * (f[i, q] + np.conj(f[k, q])) for q in range(N))
            ds = sum(gs[q] * (f[i, q] + np.conj(f[k, q])) for q in range(N))
            lhsA += (-1j * dA[i] - 0.5j * A[i] * phase) * S[k, i]
            lhsB += (-1j * dB[i] - 0.5j * B[i] * phase) * S[k, i]
            rhsA += (-eps / 2 * A[i] - dlt / 2 * B[i] - A[i] * osc - 0.5 * A[i] * dc - 0.5 * B[i] * ds) * S[k, i]
            rhsB += (eps / 2 * B[i] - dlt / 2 * A[i] - B[i] * osc + 0.5 * B[i] * dc - 0.5 * A[i] * ds) * S[k, i]
        res[k] = lhsA - rhsA
        res[M + k] = lhsB - rhsB
        for q in range(N):
            lhs = rhs = 0.0
            for i in range(M):
                rho = np.conj(A[k]) * A[i] + np.conj(B[k]) * B[i]
                zeta = np.conj(A[k]) * A[i] - np.conj(B[k]) * B[i]
                flip = np.conj(A[k]) * B[i] + np.conj(B[k]) * A[i]
                rate = np.conj(A[k]) * dA[i] + np.conj(B[k]) * dB[i]
                phase = sum(2 * np.conj(f[k, p]) * df[i, p] - df[i, p] * np.conj(f[i, p]) - f[i, p] * np.conj(df[i, p])
                            for p in range(N))
                osc = sum(om[p] * np.conj(f[k, p]) * f[i, p] for p in range(N))
                dc = sum(gc[p] * (f[i, p] + np.conj(f[k, p])) for p in range(N))
                ds = sum(gs[p] * (f[i, p] + np.conj(f[k, p])) for p in range(N))
                lhs += (-1j * (rate * f[i, q] + rho * df[i, q]) - 0.5j * rho * f[i, q] * phase) * S[k, i]
                rhs += (-eps / 2 * zeta * f[i, q] - dlt / 2 * flip * f[i, q]
                        - rho * (om[q] + osc) * f[i, q]
                        - 0.5 * zeta * gc[q] - 0.5 * zeta * f[i, q] * dc
                        - 0.5 * flip * gs[q] - 0.5 * flip * f[i, q] * ds) * S[k, i]
            res[2 * M + k * N + q] = lhs - rhs
    return res


def _kernel_args(params: ModelParams):
    d = params.drive
    if isinstance(d, LinearDrive):
        kind, drive = _kernels.LINEAR, np.array([d.v, 0.0, 0.0, 0.0, 0.0])
    else:
        kind, drive = _kernels.SINUSOIDAL, np.array([0.0, d.eps0, d.A, d.Omega, d.phi0])
    return (kind, drive, float(params.delta), np.ascontiguousarray(params.omegas, dtype=float),
            np.ascontiguousarray(0.5 * params.gammas_cos, dtype=float),
            np.ascontiguousarray(0.5 * params.gammas_sin, dtype=float))


def compiled_derivative(state: MultiD2State, params: ModelParams, t: float,
                        reg_epsilon: float = 1e-10, cond_ceiling: float = 1e15) -> np.ndarray:
    """Packed rates from the compiled kernel.

    Conditioning is judged from the Cholesky diagonal, (max L_jj / min L_jj)^2,
    rather than a LAPACK estimate, so the fallback may trigger at slightly
    different points than in :func:`time_derivative`.
    """
    if state.N != params.n_modes:
        raise ValueError(f"state has {state.N} modes, model has {params.n_modes}")
    out = _kernels.rate(state.pack(), state.M, state.N, float(t), *_kernel_args(params),
                        float(reg_epsilon), float(cond_ceiling))
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("non-finite solution of the variational system")
    return out


def rk4_step(state: MultiD2State, params: ModelParams, t: float, dt: float,
             reg_epsilon: float = 1e-10, cond_ceiling: float = 1e15) -> MultiD2State:
    """One classical fourth-order Runge-Kutta step. A negative ``dt`` steps
    backwards in time."""
    if dt == 0:
        raise ValueError("dt must be non-zero")
    M, N = state.M, state.N
    y0 = state.pack()

    def rate(vec, tt):
        return time_derivative(MultiD2State.unpack(vec, M, N), params, tt, reg_epsilon, cond_ceiling)

    k1 = rate(y0, t)
    k2 = rate(y0 + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = rate(y0 + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rate(y0 + dt * k3, t + dt)
    return MultiD2State.unpack(y0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), M, N)


def integrate(initial: MultiD2State, params: ModelParams, cfg: IntegratorConfig,
              callback=None) -> list[TrajectoryRecord]:
    """March from cfg.t0 to cfg.t1 with fixed-step RK4.

    The step is shrunk slightly if needed so an integer number of steps lands
    exactly on t1. A record is emitted at t0, every ``record_stride`` steps
    and always at t1. ``callback(t, state)`` is invoked at every record.

    Raises :class:`IntegrationAborted` (holding the partial trajectory) when
    the derivative solve turns non-finite.
    """
    if initial.N != params.n_modes:
        raise ValueError(f"state has {initial.N} modes, model has {params.n_modes}")
    n_steps = max(1, math.ceil((cfg.t1 - cfg.t0) / cfg.dt - 1e-9))
    dt = (cfg.t1 - cfg.t0) / n_steps
    state = initial
    records = [make_record(state, params, cfg.t0, cfg.n_report)]
    if callback is not None:
        callback(cfg.t0, state)
    if cfg.compiled:
        return _integrate_compiled(state, params, cfg, n_steps, dt, records, callback)
    for step in range(1, n_steps + 1):
        t = cfg.t0 + (step - 1) * dt
        try:
            new = rk4_step(state, params, t, dt, cfg.reg_epsilon, cfg.cond_ceiling)
            if not np.all(np.isfinite(new.pack())):
                raise NonFiniteError("non-finite state after RK4 step")
        except NonFiniteError as exc:
            log.error("trajectory aborted at t=%.6g: %s", t, exc)
            raise IntegrationAborted(f"aborted at t={t:.6g}: {exc}", records, t, state) from exc
        state = new
        if step % cfg.record_stride == 0 or step == n_steps:
            t_now = cfg.t0 + step * dt if step < n_steps else cfg.t1
            records.append(make_record(state, params, t_now, cfg.n_report))
            if callback is not None:
                callback(t_now, state)
    return records


def _integrate_compiled(state, params, cfg, n_steps, dt, records, callback):
    M, N = state.M, state.N
    args = _kernel_args(params)
    vec = state.pack()
    done = 0
    while done < n_steps:
        chunk = min(cfg.record_stride, n_steps - done)
        t = cfg.t0 + done * dt
        new, ok = _kernels.rk4_many(vec, M, N, t, dt, chunk, *args, cfg.reg_epsilon, cfg.cond_ceiling)
        if ok < chunk:
            t_fail = t + ok * dt
            if ok:
                # redo the good steps to hand back the last finite state
                vec, _ = _kernels.rk4_many(vec, M, N, t, dt, ok, *args, cfg.reg_epsilon, cfg.cond_ceiling)
            log.error("trajectory aborted at t=%.6g: non-finite RK4 step", t_fail)
            raise IntegrationAborted(f"aborted at t={t_fail:.6g}: non-finite RK4 step",
                                     records, t_fail, MultiD2State.unpack(vec, M, N))
        vec = new
        done += chunk
        t_now = cfg.t0 + done * dt if done < n_steps else cfg.t1
        state = MultiD2State.unpack(vec, M, N)
        records.append(make_record(state, params, t_now, cfg.n_report))
        if callback is not None:
            callback(t_now, state)
    return records
