"""Closed-form Landau-Zener benchmarks, plateau statistics and the
cat-phase curve fit."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

__all__ = [
    "FitResult",
    "PlateauStats",
    "p_stay",
    "lz_asymptote",
    "rwa_final_probability",
    "rwa_even",
    "rwa_odd",
    "rwa_yurke_stoler",
    "plateau_windows",
    "plateau_average",
    "theta_curve",
    "fit_theta_curve",
]


@dataclass(frozen=True)
class FitResult:
    F0: float
    F1: float
    residual: float  # sum of squared errors
    success: bool = True


@dataclass(frozen=True)
class PlateauStats:
    window: tuple
    mean: float
    spread: float  # time-weighted standard deviation


def p_stay(gamma: float, v: float) -> float:
    """Probability of remaining in |up, 0> after one crossing,
    exp(-pi gamma^2 / 2v)."""
    if not v > 0:
        raise ValueError("v must be positive")
    return math.exp(-math.pi * gamma * gamma / (2 * v))


def lz_asymptote(gamma: float, v: float) -> float:
    """Final transition probability for a vacuum photon field."""
    return 1.0 - p_stay(gamma, v)


def rwa_final_probability(alpha, theta: float, gamma: float, v: float) -> float:
    """Rotating-wave prediction for a cat-state photon field.

        P = 1 - 2 P0 (e^{a P0} + e^{-a P0} cos theta) / (N_theta^2 e^{a}),
        a = |alpha|^2,  P0 = p_stay(gamma, v).

    Rewritten with 1 + cos theta split off so the odd-cat limit alpha -> 0
    stays finite (it tends to 1 - P0^2).
    """
    a = abs(alpha) ** 2
    p0 = p_stay(gamma, v)
    c1 = 1.0 + math.cos(theta)
    num = 2.0 * math.sinh(a * p0) + c1 * math.exp(-a * p0)
    den = 2.0 * math.sinh(a) + c1 * math.exp(-a)
    if den <= 1e-300:
        raise ValueError("cat state normalization vanishes (alpha = 0, theta = pi)")
    return 1.0 - p0 * num / den


def rwa_even(alpha, gamma, v) -> float:
    a = abs(alpha) ** 2
    p0 = p_stay(gamma, v)
    return 1.0 - p0 * math.cosh(a * p0) / math.cosh(a)


def rwa_odd(alpha, gamma, v) -> float:
    a = abs(alpha) ** 2
    if a == 0:
        raise ValueError("odd cat state needs alpha != 0")
    p0 = p_stay(gamma, v)
    return 1.0 - p0 * math.sinh(a * p0) / math.sinh(a)


def rwa_yurke_stoler(alpha, gamma, v) -> float:
    a = abs(alpha) ** 2
    p0 = p_stay(gamma, v)
    return 1.0 - p0 * math.exp(-a * (1.0 - p0))


def plateau_windows(t_cross: float, t_end: float, core: float = 0.7):
    """Default averaging windows for a symmetric pair of crossings at +-t_cross.

    First plateau: the central ``core`` fraction of [-t_cross, t_cross].
    Second plateau: [1.5 t_cross, t_end].
    """
    if not t_cross > 0:
        raise ValueError("t_cross must be positive")
    first = (-core * t_cross, core * t_cross)
    second = (1.5 * t_cross, t_end)
    if not second[0] < second[1]:
        raise ValueError("series ends before the second plateau starts")
    return first, second


def plateau_average(t, values, window) -> PlateauStats:
    """Trapezoid-weighted mean and standard deviation over ``window``.

    The series is linearly interpolated onto the window edges.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must satisfy t_lo < t_hi")
    if lo < t[0] - 1e-9 or hi > t[-1] + 1e-9:
        raise ValueError(f"window {window} outside series range [{t[0]}, {t[-1]}]")
    inner = (t > lo) & (t < hi)
    tt = np.concatenate([[lo], t[inner], [hi]])
    yy = np.concatenate([[np.interp(lo, t, y)], y[inner], [np.interp(hi, t, y)]])
    span = hi - lo
    mean = np.trapezoid(yy, tt) / span
    var = np.trapezoid((yy - mean) ** 2, tt) / span
    return PlateauStats((lo, hi), float(mean), float(math.sqrt(max(var, 0.0))))


def theta_curve(theta, F0: float, F1: float, alpha2: float):
    """P(theta) = F0 - e^{a F1} (1 + e^{2 a F1} cos theta) / (1 + e^{2 a} cos theta)."""
    c = np.cos(np.asarray(theta, dtype=float))
    return F0 - math.exp(alpha2 * F1) * (1 + math.exp(2 * alpha2 * F1) * c) / (1 + math.exp(2 * alpha2) * c)


def fit_theta_curve(theta, p, alpha2: float, grid: int = 8,
                    F0_range=(0.5, 4.0), F1_range=(0.0, 1.0)) -> FitResult:
    """Least-squares fit of :func:`theta_curve` with a ``grid`` x ``grid``
    multi-start over (F0, F1). Returns the best start."""
    theta = np.asarray(theta, dtype=float)
    p = np.asarray(p, dtype=float)
    if theta.shape != p.shape:
        raise ValueError("theta and p differ in length")
    if np.unique(np.round(np.mod(theta, 2 * np.pi), 12)).size < 4:
        raise ValueError("need at least four distinct theta values")

    def resid(x):
        return theta_curve(theta, x[0], x[1], alpha2) - p

    best = None
    for F0, F1 in itertools.product(np.linspace(*F0_range, grid), np.linspace(*F1_range, grid)):
        with np.errstate(all="ignore"):
            try:
                sol = optimize.least_squares(resid, [F0, F1], method="lm")
            except ValueError:
                continue
        if not np.all(np.isfinite(sol.fun)):
            continue
        sse = float(np.sum(sol.fun ** 2))
        if best is None or sse < best[0]:
            best = (sse, sol)
    if best is None:
        raise RuntimeError("theta-curve fit failed from every starting point")
    sse, sol = best
    return FitResult(float(sol.x[0]), float(sol.x[1]), sse, bool(sol.success))
