"""Measured quantities of a multi-D2 state and post-processing of series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ansatz import MultiD2State, fock_amplitudes, norm_squared, overlap_matrix
from .model import ModelParams, bias_at

__all__ = [
    "TrajectoryRecord",
    "sigma_z",
    "p_lz",
    "fock_populations",
    "fock_population",
    "mean_photon_number",
    "photon_moments",
    "mandel_q",
    "expectation_energy",
    "make_record",
    "records_to_arrays",
    "moving_average",
]


@dataclass
class TrajectoryRecord:
    t: float
    p_lz: float
    norm2: float
    energy: float
    mean_n: float
    mandel_q: float  # nan when <n> vanishes
    p_up: np.ndarray = field(repr=False)
    p_down: np.ndarray = field(repr=False)


def _densities(state: MultiD2State):
    """Overlaps and the spin-summed / spin-weighted branch densities.

    Returns S[j, i], rho[j, i] = A_j* A_i + B_j* B_i and
    zeta[j, i] = A_j* A_i - B_j* B_i.
    """
    S = overlap_matrix(state.f)
    AA = np.outer(state.A.conj(), state.A)
    BB = np.outer(state.B.conj(), state.B)
    return S, AA + BB, AA - BB


def sigma_z(state: MultiD2State) -> float:
    S, rho, zeta = _densities(state)
    return float(np.sum(zeta * S).real / np.sum(rho * S).real)


def p_lz(state: MultiD2State) -> float:
    """Probability of finding the qubit in the down state."""
    return 0.5 * (1.0 - sigma_z(state))


def fock_populations(state: MultiD2State, n_max: int):
    """Normalized populations P_{n,up}, P_{n,down} for n = 0..n_max."""
    up, down = fock_amplitudes(state, n_max)
    nrm = norm_squared(state)
    return np.abs(up) ** 2 / nrm, np.abs(down) ** 2 / nrm


def fock_population(state: MultiD2State, n: int, spin: str) -> float:
    up, down = fock_populations(state, n)
    if spin == "up":
        return float(up[n])
    if spin == "down":
        return float(down[n])
    raise ValueError(f"spin must be 'up' or 'down', got {spin!r}")


def photon_moments(state: MultiD2State):
    """(<n>, <n^2>) of the total photon number, normalized.

    For coherent states <f_j| n_p n_q |f_i> = S_ji (x_p x_q + delta_pq x_q)
    with x_q = f_jq* f_iq.
    """
    S, rho, _ = _densities(state)
    x = np.einsum("jq,iq->jiq", state.f.conj(), state.f)
    xs = x.sum(axis=2)
    w = rho * S
    nrm = np.sum(w).real
    n1 = np.sum(w * xs).real / nrm
    n2 = np.sum(w * (xs ** 2 + xs)).real / nrm
    return float(n1), float(n2)


def mean_photon_number(state: MultiD2State) -> float:
    return photon_moments(state)[0]


def mandel_q(state: MultiD2State, floor: float = 1e-12) -> float:
    """Mandel Q = (<n^2> - <n>^2 - <n>) / <n>; nan for <n> below ``floor``."""
    n1, n2 = photon_moments(state)
    if n1 < floor:
        return math.nan
    return (n2 - n1 * n1 - n1) / n1


def expectation_energy(state: MultiD2State, params: ModelParams, t: float) -> float:
    """<H> per unit norm at time t."""
    S, rho, zeta = _densities(state)
    f = state.f
    cross = np.outer(state.A.conj(), state.B)
    flip = cross + cross.conj().T  # A_j* B_i + B_j* A_i
    x = np.einsum("jq,iq->jiq", f.conj(), f)
    disp = f[None, :, :] + f.conj()[:, None, :]  # f_iq + f_jq*
    osc = x @ params.omegas
    gc = disp @ params.gammas_cos
    gs = disp @ params.gammas_sin
    eps = bias_at(params.drive, t)
    e = (0.5 * eps * zeta + 0.5 * params.delta * flip + rho * osc
         + 0.5 * zeta * gc + 0.5 * flip * gs)
    return float(np.sum(e * S).real / np.sum(rho * S).real)


def make_record(state: MultiD2State, params: ModelParams, t: float, n_report: int) -> TrajectoryRecord:
    S, rho, zeta = _densities(state)
    nrm = float(np.sum(rho * S).real)
    if state.N == 1:
        p_up, p_down = fock_populations(state, n_report)
    else:
        p_up = p_down = np.full(n_report + 1, np.nan)
    n1, _ = photon_moments(state)
    return TrajectoryRecord(
        t=float(t),
        p_lz=0.5 * (1.0 - float(np.sum(zeta * S).real) / nrm),
        norm2=nrm,
        energy=expectation_energy(state, params, t),
        mean_n=n1,
        mandel_q=mandel_q(state),
        p_up=p_up,
        p_down=p_down,
    )


def records_to_arrays(records) -> dict:
    """Column view of a trajectory: scalar fields as 1-d arrays, populations as
    (T, n_report + 1) arrays."""
    out = {name: np.array([getattr(r, name) for r in records], dtype=float)
           for name in ("t", "p_lz", "norm2", "energy", "mean_n", "mandel_q")}
    out["p_up"] = np.array([r.p_up for r in records])
    out["p_down"] = np.array([r.p_down for r in records])
    return out


def moving_average(t, values, window: float):
    """Centered sliding-window mean over a time span ``window``.

    The mean is the trapezoid integral over [t - w/2, t + w/2] divided by the
    covered length; windows shrink at the ends of the series. Works on
    non-uniform grids. Returns ``(t, averaged)``.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size == 0:
        raise ValueError("empty series")
    if window <= 0:
        raise ValueError("window must be positive")
    if np.any(np.diff(t) <= 0):
        raise ValueError("series must be strictly increasing in t")
    if t.size == 1:
        return t.copy(), y.copy()
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))])
    lo = np.clip(t - window / 2, t[0], t[-1])
    hi = np.clip(t + window / 2, t[0], t[-1])
    span = hi - lo
    avg = np.where(span > 0, (np.interp(hi, t, cum) - np.interp(lo, t, cum)) / np.where(span > 0, span, 1.0), y)
    return t.copy(), avg
