"""Multiple Davydov D2 trial state.

    |psi> = sum_i (A_i |up> + B_i |down>) |f_i>

where |f_i> is a normalized multi-mode coherent state with displacements
f_iq. All inner products reduce to the Debye-Waller overlap
S_ji = <f_j|f_i>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import fock_index

__all__ = [
    "MultiD2State",
    "CatSpec",
    "JitterSpec",
    "debye_waller",
    "overlap_matrix",
    "norm_squared",
    "normalized",
    "init_cat",
    "init_vacuum",
    "fock_amplitudes",
    "fock_amplitude",
    "fock_vector",
    "cat_fock_vector",
    "save_snapshot",
    "load_snapshot",
]


@dataclass(frozen=True)
class MultiD2State:
    A: np.ndarray  # (M,) complex, up-state amplitudes
    B: np.ndarray  # (M,) complex, down-state amplitudes
    f: np.ndarray  # (M, N) complex displacements

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex).reshape(-1)
        B = np.asarray(self.B, dtype=complex).reshape(-1)
        f = np.asarray(self.f, dtype=complex)
        if f.ndim == 1:
            f = f.reshape(-1, 1)
        if not (A.shape == B.shape and f.shape[0] == A.shape[0]):
            raise ValueError(f"inconsistent shapes A{A.shape} B{B.shape} f{f.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "f", f)

    @property
    def M(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return self.f.shape[1]

    @property
    def size(self) -> int:
        """Number of complex variational parameters, 2M + MN."""
        return 2 * self.M + self.M * self.N

    def pack(self) -> np.ndarray:
        return np.concatenate([self.A, self.B, self.f.reshape(-1)])

    @classmethod
    def unpack(cls, vec: np.ndarray, M: int, N: int) -> "MultiD2State":
        vec = np.asarray(vec, dtype=complex)
        return cls(vec[:M], vec[M:2 * M], vec[2 * M:].reshape(M, N))

    def copy(self) -> "MultiD2State":
        return MultiD2State(self.A.copy(), self.B.copy(), self.f.copy())


@dataclass(frozen=True)
class CatSpec:
    """Photon cat state (|alpha> + e^{i theta} |-alpha>) / N_theta."""

    alpha: complex
    theta: float

    @property
    def norm2(self) -> float:
        """N_theta^2 = 2 (1 + exp(-2|alpha|^2) cos theta)."""
        return 2.0 * (1.0 + math.exp(-2 * abs(self.alpha) ** 2) * math.cos(self.theta))


@dataclass(frozen=True)
class JitterSpec:
    """Random seeding of the unpopulated branches.

    Amplitudes of empty branches are drawn uniformly from
    [-amplitude, amplitude]; displacement copies get uniform offsets bounded
    by ``displacement``. With ``complex_valued`` the real and imaginary parts
    are drawn independently.
    """

    amplitude: float = 1e-4
    displacement: float = 1e-2
    complex_valued: bool = True

    @classmethod
    def off(cls) -> "JitterSpec":
        return cls(0.0, 0.0)


def debye_waller(f_j, f_i) -> complex:
    """Overlap <f_j|f_i> of two normalized multi-mode coherent states."""
    f_j = np.atleast_1d(np.asarray(f_j, dtype=complex))
    f_i = np.atleast_1d(np.asarray(f_i, dtype=complex))
    if f_j.shape != f_i.shape:
        raise ValueError(f"mode count mismatch: {f_j.shape} vs {f_i.shape}")
    expo = -0.5 * (np.abs(f_j) ** 2 + np.abs(f_i) ** 2) + np.conj(f_j) * f_i
    return complex(np.exp(expo.sum()))


def overlap_matrix(f: np.ndarray) -> np.ndarray:
    """All pairwise overlaps, ``S[j, i] = <f_j|f_i>``."""
    sq = 0.5 * np.sum(np.abs(f) ** 2, axis=1)
    return np.exp(f.conj() @ f.T - sq[:, None] - sq[None, :])


def norm_squared(state: MultiD2State) -> float:
    S = overlap_matrix(state.f)
    val = state.A.conj() @ S @ state.A + state.B.conj() @ S @ state.B
    return float(val.real)


def normalized(state: MultiD2State) -> MultiD2State:
    scale = 1.0 / math.sqrt(norm_squared(state))
    return MultiD2State(state.A * scale, state.B * scale, state.f)


def _uniform(rng, scale, shape, complex_valued):
    if scale == 0:
        return np.zeros(shape, dtype=complex)
    out = rng.uniform(-scale, scale, size=shape).astype(complex)
    if complex_valued:
        out = out + 1j * rng.uniform(-scale, scale, size=shape)
    return out


def init_cat(spec: CatSpec, M: int, jitter: JitterSpec | None = None,
             seed: int = 0, n_modes: int = 1, norm_floor: float = 1e-12) -> MultiD2State:
    """Qubit up, photon mode in a cat state, spread over ``M`` branches.

    Branches 1 and 2 carry the two coherent components (A_1 = 1,
    A_2 = e^{i theta}, f = +alpha, -alpha). The remaining branches repeat the
    displacements with small random offsets and tiny random amplitudes so the
    variational Gram matrix stays invertible. The result has unit norm.
    """
    if M < 2 or M % 2:
        raise ValueError(f"cat initialization needs an even multiplicity >= 2, got {M}")
    if spec.norm2 < norm_floor:
        raise ValueError(f"degenerate cat normalization N^2 = {spec.norm2:.3e}")
    jitter = JitterSpec() if jitter is None else jitter
    rng = np.random.default_rng(seed)

    A = np.zeros(M, dtype=complex)
    B = np.zeros(M, dtype=complex)
    f = np.zeros((M, n_modes), dtype=complex)
    f[0::2, 0] = spec.alpha
    f[1::2, 0] = -spec.alpha
    A[2:] = _uniform(rng, jitter.amplitude, M - 2, jitter.complex_valued)
    B[2:] = _uniform(rng, jitter.amplitude, M - 2, jitter.complex_valued)
    f[2:] += _uniform(rng, jitter.displacement, (M - 2, n_modes), jitter.complex_valued)
    A[0] = 1.0
    A[1] = np.exp(1j * spec.theta)
    return normalized(MultiD2State(A, B, f))


def init_vacuum(M: int, jitter: JitterSpec | None = None, seed: int = 0,
                n_modes: int = 1) -> MultiD2State:
    """Qubit up, all modes in vacuum; branch 1 carries the state."""
    if M < 1:
        raise ValueError("multiplicity must be >= 1")
    jitter = JitterSpec() if jitter is None else jitter
    rng = np.random.default_rng(seed)
    A = np.zeros(M, dtype=complex)
    B = np.zeros(M, dtype=complex)
    f = np.zeros((M, n_modes), dtype=complex)
    if M > 1:
        A[1:] = _uniform(rng, jitter.amplitude, M - 1, jitter.complex_valued)
        B[1:] = _uniform(rng, jitter.amplitude, M - 1, jitter.complex_valued)
        f[1:] = _uniform(rng, jitter.displacement, (M - 1, n_modes), jitter.complex_valued)
    A[0] = 1.0
    return normalized(MultiD2State(A, B, f))


def _coherent_coefficients(f: np.ndarray, n_max: int) -> np.ndarray:
    """<n|f_i> for n = 0..n_max, shape (n_max + 1, M). Single mode.

    Built by the recursion c_n = c_{n-1} f / sqrt(n), which never forms
    f^n or n! explicitly and so cannot overflow for large n or |f|.
    """
    fi = f[:, 0]
    out = np.empty((n_max + 1, fi.shape[0]), dtype=complex)
    out[0] = np.exp(-0.5 * np.abs(fi) ** 2)
    for n in range(1, n_max + 1):
        out[n] = out[n - 1] * fi / math.sqrt(n)
    return out


def fock_amplitudes(state: MultiD2State, n_max: int):
    """(<n,up|psi>, <n,down|psi>) for n = 0..n_max as two arrays."""
    if state.N != 1:
        raise ValueError("Fock projections are implemented for single-mode states only")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    c = _coherent_coefficients(state.f, n_max)
    return c @ state.A, c @ state.B


def fock_amplitude(state: MultiD2State, n: int, spin: str) -> complex:
    """<n, spin | psi> for a single-mode state."""
    up, down = fock_amplitudes(state, n)
    if spin == "up":
        return complex(up[n])
    if spin == "down":
        return complex(down[n])
    raise ValueError(f"spin must be 'up' or 'down', got {spin!r}")


def fock_vector(state: MultiD2State, n_trunc: int) -> np.ndarray:
    """Project onto the truncated qubit-Fock basis (interleaved ordering)."""
    up, down = fock_amplitudes(state, n_trunc)
    vec = np.empty(2 * (n_trunc + 1), dtype=complex)
    vec[0::2] = up
    vec[1::2] = down
    return vec


def cat_fock_vector(spec: CatSpec, n_trunc: int, spin: str = "up") -> np.ndarray:
    """Cat state times a qubit basis state, built directly from the Poisson
    expansion of |alpha> and |-alpha> (independent of the D2 machinery)."""
    n = np.arange(n_trunc + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    a = complex(spec.alpha)
    mag = np.exp(-0.5 * abs(a) ** 2 + n * math.log(abs(a)) - 0.5 * log_fact) if a != 0 else (n == 0) * 1.0
    phase = np.exp(1j * n * np.angle(a))
    coh = mag * phase
    photon = (coh + np.exp(1j * spec.theta) * coh * (-1.0) ** n) / math.sqrt(spec.norm2)
    vec = np.zeros(2 * (n_trunc + 1), dtype=complex)
    vec[fock_index(0, spin)::2] = photon
    return vec


def save_snapshot(path, state: MultiD2State, t: float) -> None:
    """Plain-text snapshot: header ``M N t``, then one line per branch with
    Re/Im of A_i, B_i and of each f_iq."""
    with open(path, "w") as fh:
        fh.write(f"# M={state.M} N={state.N} t={t!r}\n")
        for i in range(state.M):
            vals = [state.A[i].real, state.A[i].imag, state.B[i].real, state.B[i].imag]
            for q in range(state.N):
                vals += [state.f[i, q].real, state.f[i, q].imag]
            fh.write(" ".join(f"{v:.17e}" for v in vals) + "\n")


def load_snapshot(path):
    """Inverse of :func:`save_snapshot`; returns ``(state, t)``."""
    with open(path) as fh:
        header = fh.readline().lstrip("#").split()
        meta = dict(item.split("=") for item in header)
        M, N, t = int(meta["M"]), int(meta["N"]), float(meta["t"])
        rows = np.loadtxt(fh, ndmin=2)
    if rows.shape != (M, 4 + 2 * N):
        raise ValueError(f"snapshot body has shape {rows.shape}, expected {(M, 4 + 2 * N)}")
    A = rows[:, 0] + 1j * rows[:, 1]
    B = rows[:, 2] + 1j * rows[:, 3]
    f = rows[:, 4::2] + 1j * rows[:, 5::2]
    return MultiD2State(A, B, f), t

