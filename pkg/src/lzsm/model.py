"""Driven qubit coupled to bosonic modes: drive protocols, parameters and the
truncated-Fock Hamiltonian used by the exact-diagonalization oracle.

Units: hbar = 1, energies in the mode frequency omega (normally 1).

The Hamiltonian is

    H = eps(t)/2 sz + Delta/2 sx + sum_q omega_q b_q^+ b_q
        + sum_q gamma_q/2 (cos theta_q sz + sin theta_q sx)(b_q^+ + b_q)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "LinearDrive",
    "SinusoidalDrive",
    "DriveProtocol",
    "ModeSpec",
    "ModelParams",
    "bias_at",
    "bias_rate",
    "build_fock_hamiltonian",
    "fock_index",
]


@dataclass(frozen=True)
class LinearDrive:
    """Linear sweep eps(t) = v t."""

    v: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError(f"sweep speed must be positive, got {self.v}")


@dataclass(frozen=True)
class SinusoidalDrive:
    """Sinusoidal bias eps(t) = eps0 + A sin(Omega t + phi0)."""

    eps0: float
    A: float
    Omega: float
    phi0: float = 0.0

    def __post_init__(self):
        if not self.Omega > 0:
            raise ValueError(f"drive frequency must be positive, got {self.Omega}")
        if self.A < 0:
            raise ValueError(f"drive amplitude must be non-negative, got {self.A}")

    @property
    def period(self) -> float:
        return 2 * math.pi / self.Omega


DriveProtocol = Union[LinearDrive, SinusoidalDrive]


@dataclass(frozen=True)
class ModeSpec:
    omega: float = 1.0
    gamma: float = 0.0
    theta: float = math.pi / 2

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"mode frequency must be positive, got {self.omega}")
        if self.gamma < 0:
            raise ValueError(f"coupling must be non-negative, got {self.gamma}")


@dataclass(frozen=True)
class ModelParams:
    """Qubit tunneling, drive and bath modes.

    ``modes`` is an ordered tuple of :class:`ModeSpec`; lists are converted.
    """

    drive: DriveProtocol
    modes: tuple = field(default_factory=lambda: (ModeSpec(),))
    delta: float = 0.0

    def __post_init__(self):
        modes = tuple(self.modes)
        if len(modes) < 1:
            raise ValueError("at least one bath mode is required")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def single_mode(cls, drive, gamma, omega=1.0, theta=math.pi / 2, delta=0.0):
        return cls(drive=drive, modes=(ModeSpec(omega, gamma, theta),), delta=delta)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes], dtype=float)

    @property
    def gammas_cos(self) -> np.ndarray:
        """gamma_q cos(theta_q): diagonal (sz) coupling per mode."""
        return np.array([m.gamma * math.cos(m.theta) for m in self.modes], dtype=float)

    @property
    def gammas_sin(self) -> np.ndarray:
        """gamma_q sin(theta_q): off-diagonal (sx) coupling per mode."""
        return np.array([m.gamma * math.sin(m.theta) for m in self.modes], dtype=float)


def bias_at(drive: DriveProtocol, t):
    """Time-dependent qubit bias eps(t). Accepts scalars or arrays."""
    if isinstance(drive, LinearDrive):
        return drive.v * np.asarray(t, dtype=float) if np.ndim(t) else drive.v * float(t)
    if isinstance(drive, SinusoidalDrive):
        return drive.eps0 + drive.A * np.sin(drive.Omega * np.asarray(t, dtype=float) + drive.phi0)
    raise TypeError(f"unknown drive protocol {drive!r}")


def bias_rate(drive: DriveProtocol, t):
    """d eps / dt, used for crossing slopes and local linearization."""
    if isinstance(drive, LinearDrive):
        return drive.v + 0.0 * np.asarray(t, dtype=float)
    if isinstance(drive, SinusoidalDrive):
        return drive.A * drive.Omega * np.cos(drive.Omega * np.asarray(t, dtype=float) + drive.phi0)
    raise TypeError(f"unknown drive protocol {drive!r}")


def fock_index(n: int, spin: str) -> int:
    """Position of |n, spin> in the interleaved basis |0,up>, |0,dn>, |1,up>, ..."""
    if spin not in ("up", "down"):
        raise ValueError(f"spin must be 'up' or 'down', got {spin!r}")
    return 2 * n + (0 if spin == "up" else 1)


def _static_parts(params: ModelParams, n_trunc: int):
    """Time-independent part of H and the diagonal of the sz/2 bias operator."""
    if params.n_modes != 1:
        raise ValueError("the Fock-space Hamiltonian is single-mode only")
    if n_trunc < 0:
        raise ValueError("n_trunc must be non-negative")
    mode = params.modes[0]
    dim = 2 * (n_trunc + 1)
    n = np.repeat(np.arange(n_trunc + 1), 2)
    sz = np.tile([1.0, -1.0], n_trunc + 1)

    h0 = np.diag(mode.omega * n).astype(complex)
    gc = mode.gamma * math.cos(mode.theta) / 2
    gs = mode.gamma * math.sin(mode.theta) / 2
    for k in range(n_trunc + 1):
        up, dn = 2 * k, 2 * k + 1
        h0[up, dn] += params.delta / 2
        h0[dn, up] += params.delta / 2
        if k == 0:
            continue
        amp = math.sqrt(k)
        lo_up, lo_dn = 2 * (k - 1), 2 * (k - 1) + 1
        # sz (b + b^+): same spin, photon number changes by one
        h0[up, lo_up] += gc * amp
        h0[dn, lo_dn] -= gc * amp
        # sx (b + b^+): spin flips, photon number changes by one
        h0[up, lo_dn] += gs * amp
        h0[dn, lo_up] += gs * amp
    h0 = np.triu(h0.conj().T, 1) + np.tril(h0)
    assert h0.shape == (dim, dim)
    return h0, sz / 2


def build_fock_hamiltonian(params: ModelParams, t: float, n_trunc: int) -> np.ndarray:
    """Dense Hamiltonian in the truncated basis of :func:`fock_index` ordering.

    Dimension is ``2 * (n_trunc + 1)``. Single-mode models only.
    """
    h0, half_sz = _static_parts(params, n_trunc)
    return h0 + np.diag(bias_at(params.drive, t) * half_sz)
