"""Variational (multiple Davydov D2) and exact dynamics of a qubit swept
through avoided crossings while coupled to a quantized cavity mode."""

__version__ = "0.1.0"

from .analytics import (FitResult, PlateauStats, fit_theta_curve, lz_asymptote, plateau_average,
                        plateau_windows, rwa_final_probability)
from .ansatz import (CatSpec, JitterSpec, MultiD2State, cat_fock_vector, init_cat, init_vacuum,
                     load_snapshot, save_snapshot)
from .dynamics import IntegrationAborted, IntegratorConfig, NonFiniteError, integrate
from .model import LinearDrive, ModelParams, ModeSpec, SinusoidalDrive, bias_at
from .observables import TrajectoryRecord, moving_average, p_lz, records_to_arrays
from .spectrum import adiabatic_levels, ed_evolve, find_avoided_crossings

__all__ = [
    "__version__",
    "FitResult", "PlateauStats", "fit_theta_curve", "lz_asymptote", "plateau_average",
    "plateau_windows", "rwa_final_probability",
    "CatSpec", "JitterSpec", "MultiD2State", "cat_fock_vector", "init_cat", "init_vacuum",
    "load_snapshot", "save_snapshot",
    "IntegrationAborted", "IntegratorConfig", "NonFiniteError", "integrate",
    "LinearDrive", "ModelParams", "ModeSpec", "SinusoidalDrive", "bias_at",
    "TrajectoryRecord", "moving_average", "p_lz", "records_to_arrays",
    "adiabatic_levels", "ed_evolve", "find_avoided_crossings",
]
