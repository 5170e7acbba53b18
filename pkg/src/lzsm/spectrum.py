"""Exact-diagonalization oracle in a truncated Fock basis.

Adiabatic level diagrams, avoided-crossing detection and labeling,
brute-force time propagation, and the gap/period regression used to relate
oscillation periods to avoided-crossing gaps.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, stats

from .model import ModelParams, _static_parts, bias_at, bias_rate, fock_index

log = logging.getLogger(__name__)

__all__ = [
    "TruncationWarning",
    "SpectrumResult",
    "CrossingInfo",
    "EDResult",
    "adiabatic_levels",
    "find_avoided_crossings",
    "find_crossing",
    "pair_gap",
    "ed_evolve",
    "oscillation_period",
    "gap_period_regression",
    "write_levels_csv",
    "write_crossings_csv",
]


class TruncationWarning(UserWarning):
    """The Fock truncation is too small for the requested quantity."""


@dataclass
class SpectrumResult:
    t_grid: np.ndarray
    levels: np.ndarray  # (T, dim), ascending along axis 1
    n_trunc: int
    params: ModelParams = field(repr=False)


@dataclass(frozen=True)
class CrossingInfo:
    t_star: float
    gap: float
    level_pair: tuple  # (k, k + 1)
    diabatic_labels: tuple  # ((n, spin), (m, spin)) or (None, None)


@dataclass
class EDResult:
    t: np.ndarray
    p_lz: np.ndarray
    p_up: np.ndarray  # (T, n_report + 1)
    p_down: np.ndarray
    norm2: np.ndarray
    final_state: np.ndarray = field(repr=False)


def _hamiltonians(params: ModelParams, times, n_trunc: int) -> np.ndarray:
    h0, half_sz = _static_parts(params, n_trunc)
    eps = np.atleast_1d(bias_at(params.drive, np.asarray(times, dtype=float)))
    out = np.broadcast_to(h0, (eps.size,) + h0.shape).copy()
    idx = np.arange(h0.shape[0])
    out[:, idx, idx] += eps[:, None] * half_sz[None, :]
    return out


def adiabatic_levels(params: ModelParams, t_grid, n_trunc: int = 40) -> SpectrumResult:
    """Sorted eigenvalues of the truncated Hamiltonian at every grid time."""
    t_grid = np.asarray(t_grid, dtype=float)
    levels = np.linalg.eigvalsh(_hamiltonians(params, t_grid, n_trunc))
    return SpectrumResult(t_grid=t_grid, levels=levels, n_trunc=n_trunc, params=params)


def _basis_label(vec: np.ndarray, threshold: float):
    k = int(np.argmax(np.abs(vec) ** 2))
    if abs(vec[k]) ** 2 < threshold:
        return None
    return (k // 2, "up" if k % 2 == 0 else "down")


def _eigvecs_at(params, t, n_trunc):
    return np.linalg.eigh(_hamiltonians(params, [t], n_trunc)[0])[1]


def _monotone_reach(drive, t, delta, tries=40):
    """Shrink ``delta`` until the bias runs the same way at t - delta, t and
    t + delta; None if it never does."""
    s0 = np.sign(bias_rate(drive, t))
    if s0 == 0:
        return None
    for _ in range(tries):
        if np.sign(bias_rate(drive, t - delta)) == s0 == np.sign(bias_rate(drive, t + delta)):
            return delta
        delta /= 2
    return None


def find_avoided_crossings(spec: SpectrumResult, label_threshold: float = 0.9,
                           max_levels: int | None = None) -> list[CrossingInfo]:
    """Local minima of adjacent-level gaps where the levels swap character.

    A gap minimum (refined by a parabola through the three grid points) is
    accepted only if the dominant basis state of the lower level on one side
    becomes that of the upper level on the other side. Sides are probed at
    a distance of five times gap / |d eps/dt| from the minimum, shortened so
    the bias stays monotonic in between; minima at a turning point of the
    bias are therefore never crossings. Labels are reported when the
    dominant overlap reaches ``label_threshold``.
    """
    t = spec.t_grid
    dim = spec.levels.shape[1]
    top = dim - 1 if max_levels is None else min(dim - 1, max_levels - 1)
    span = t[-1] - t[0]
    found = []
    for k in range(top):
        gaps = spec.levels[:, k + 1] - spec.levels[:, k]
        for j in range(1, len(t) - 1):
            if not (gaps[j] <= gaps[j - 1] and gaps[j] < gaps[j + 1]):
                continue
            g0, g1, g2 = gaps[j - 1], gaps[j], gaps[j + 1]
            h = t[j + 1] - t[j]
            denom = g0 - 2 * g1 + g2
            shift = 0.5 * h * (g0 - g2) / denom if denom > 0 else 0.0
            t_star = t[j] + float(np.clip(shift, -h, h))
            gap = max(0.0, g1 - (g0 - g2) ** 2 / (8 * denom)) if denom > 0 else g1
            slope = abs(float(bias_rate(spec.params.drive, t_star)))
            delta = 5 * max(gap, 1e-3) / slope if slope > 0 else span
            delta = min(max(delta, 2 * h), 0.25 * span)
            delta = _monotone_reach(spec.params.drive, t_star, delta)
            if delta is None:
                continue  # gap minimum at a turning point of the bias, not a crossing
            before = _eigvecs_at(spec.params, t_star - delta, spec.n_trunc)
            after = _eigvecs_at(spec.params, t_star + delta, spec.n_trunc)
            lo_b = int(np.argmax(np.abs(before[:, k])))
            lo_a = int(np.argmax(np.abs(after[:, k])))
            hi_b = int(np.argmax(np.abs(before[:, k + 1])))
            hi_a = int(np.argmax(np.abs(after[:, k + 1])))
            if not (lo_b == hi_a and hi_b == lo_a and lo_b != hi_b):
                continue
            labels = (_basis_label(before[:, k], label_threshold),
                      _basis_label(before[:, k + 1], label_threshold))
            if k + 1 == dim - 1:
                warnings.warn("highest retained level takes part in a crossing; "
                              "increase n_trunc", TruncationWarning, stacklevel=2)
            found.append(CrossingInfo(t_star, gap, (k, k + 1), labels))
    found.sort(key=lambda c: (c.t_star, c.level_pair))
    return found


def find_crossing(crossings, a, b):
    """Crossings whose diabatic labels are the pair {a, b}, e.g.
    ``a=(0, 'up'), b=(1, 'down')``."""
    want = {a, b}
    return [c for c in crossings if set(c.diabatic_labels) == want]


def pair_gap(params: ModelParams, t: float, a, b, n_trunc: int = 40) -> float:
    """Energy difference at time ``t`` between the two adiabatic states with the
    largest weight on the diabatic states ``a`` and ``b`` (each ``(n, spin)``)."""
    h = _hamiltonians(params, [t], n_trunc)[0]
    w, V = np.linalg.eigh(h)
    ia, ib = fock_index(*a), fock_index(*b)
    # the two eigenvectors carrying most of the combined weight of a and b
    weight = np.abs(V[ia, :]) ** 2 + np.abs(V[ib, :]) ** 2
    top2 = np.sort(np.argsort(weight)[-2:])
    return float(w[top2[1]] - w[top2[0]])


def ed_evolve(params: ModelParams, initial, t0: float, t1: float, dt: float = 0.02,
              n_report: int = 8, record_stride: int = 10, leak_tol: float = 1e-6) -> EDResult:
    """Propagate a Fock-basis vector with midpoint matrix exponentials.

    Each step applies exp(-i H(t + dt/2) dt), evaluated by Hermitian
    eigendecomposition. A :class:`TruncationWarning` is issued if the two
    highest photon numbers ever hold more than ``leak_tol`` population.
    """
    psi = np.asarray(initial, dtype=complex).copy()
    dim = psi.shape[0]
    if dim % 2:
        raise ValueError("Fock vector must have even dimension 2 (n_trunc + 1)")
    n_trunc = dim // 2 - 1
    if abs(np.vdot(psi, psi).real - 1) > 1e-8:
        raise ValueError("initial vector must be normalized")
    n_steps = max(1, int(np.ceil((t1 - t0) / dt - 1e-9)))
    step = (t1 - t0) / n_steps
    n_rep = min(n_report, n_trunc)
    h0, half_sz = _static_parts(params, n_trunc)
    idx = np.arange(dim)

    ts, plz, pup, pdn, nrm = [], [], [], [], []
    leak = 0.0

    def record(t, v):
        pop = np.abs(v) ** 2
        ts.append(t)
        plz.append(pop[1::2].sum())
        up = np.zeros(n_report + 1)
        dn = np.zeros(n_report + 1)
        up[:n_rep + 1] = pop[0:2 * n_rep + 2:2]
        dn[:n_rep + 1] = pop[1:2 * n_rep + 2:2]
        pup.append(up)
        pdn.append(dn)
        nrm.append(pop.sum())

    record(t0, psi)
    h = h0.copy()
    for s in range(1, n_steps + 1):
        tm = t0 + (s - 0.5) * step
        h[idx, idx] = h0[idx, idx] + bias_at(params.drive, tm) * half_sz
        w, V = np.linalg.eigh(h)
        psi = V @ (np.exp(-1j * w * step) * (V.conj().T @ psi))
        leak = max(leak, float(np.sum(np.abs(psi[-4:]) ** 2)))
        if s % record_stride == 0 or s == n_steps:
            record(t0 + s * step if s < n_steps else t1, psi)
    if leak > leak_tol:
        warnings.warn(f"population {leak:.2e} reached the top two photon levels; "
                      "increase n_trunc", TruncationWarning, stacklevel=2)
    return EDResult(np.array(ts), np.array(plz), np.array(pup), np.array(pdn), np.array(nrm), psi)


def oscillation_period(t, y, t_lo: float, t_hi: float, prominence: float | None = None) -> float:
    """Median peak-to-peak spacing of ``y`` inside [t_lo, t_hi]."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (t >= t_lo) & (t <= t_hi)
    tt, yy = t[sel], y[sel]
    if prominence is None:
        prominence = 0.05 * (yy.max() - yy.min())
    peaks, _ = signal.find_peaks(yy, prominence=prominence)
    if len(peaks) < 2:
        raise ValueError("fewer than two peaks in the window")
    return float(np.median(np.diff(tt[peaks])))


def gap_period_regression(gaps, periods):
    """Least-squares line period = slope / gap + intercept.

    Returns ``(slope, intercept, r_squared)``.
    """
    gaps = np.asarray(gaps, dtype=float)
    periods = np.asarray(periods, dtype=float)
    if gaps.shape != periods.shape or gaps.size < 3:
        raise ValueError("need at least three (gap, period) pairs")
    inv = 1.0 / gaps
    if np.ptp(inv) == 0:
        raise ValueError("degenerate abscissae: all gaps equal")
    fit = stats.linregress(inv, periods)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)


def write_levels_csv(path, spec: SpectrumResult, n_levels: int | None = None) -> None:
    k = spec.levels.shape[1] if n_levels is None else n_levels
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"E{j + 1}" for j in range(k)])
        for t, row in zip(spec.t_grid, spec.levels):
            w.writerow([f"{t:.12g}"] + [f"{e:.12g}" for e in row[:k]])


def write_crossings_csv(path, crossings) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_star", "gap", "level_lo", "level_hi", "label_lo", "label_hi"])
        for c in crossings:
            labels = ["" if lab is None else f"|{lab[0]},{lab[1]}>" for lab in c.diabatic_labels]
            w.writerow([f"{c.t_star:.12g}", f"{c.gap:.12g}", c.level_pair[0], c.level_pair[1]] + labels)
