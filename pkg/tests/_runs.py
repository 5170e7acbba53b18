"""Shared, memoized trajectories for the slower tests."""

import functools
import math

import numpy as np

from lzsm.ansatz import CatSpec, init_cat, init_vacuum
from lzsm.dynamics import IntegratorConfig, integrate
from lzsm.model import LinearDrive, ModelParams, SinusoidalDrive
from lzsm.observables import records_to_arrays
from lzsm.spectrum import ed_evolve
from lzsm.ansatz import cat_fock_vector

DT = 0.02


def _linear(v, gamma):
    return ModelParams.single_mode(LinearDrive(v), gamma)


def _sinusoidal(A, gamma=0.05):
    return ModelParams.single_mode(SinusoidalDrive(0.0, A, math.pi / 200, math.pi / 2), gamma)


@functools.lru_cache(maxsize=None)
def vacuum_run(M=6, v=0.01, gamma=0.12, t0=-300.0, t1=300.0, stride=10):
    st = init_vacuum(M, seed=0)
    return records_to_arrays(integrate(st, _linear(v, gamma), IntegratorConfig(t0, t1, DT, record_stride=stride)))


@functools.lru_cache(maxsize=None)
def linear_cat_run(alpha2=1.0, theta=math.pi / 2, v=0.01, gamma=0.05, M=8, span=None, stride=10):
    span = 3.0 / v if span is None else span
    st = init_cat(CatSpec(math.sqrt(alpha2), theta), M, seed=0)
    return records_to_arrays(integrate(st, _linear(v, gamma), IntegratorConfig(-span, span, DT, record_stride=stride)))


@functools.lru_cache(maxsize=None)
def sinusoidal_cat_run(A, alpha=1.0, M=8, stride=5):
    st = init_cat(CatSpec(alpha, math.pi / 2), M, seed=0)
    return records_to_arrays(integrate(st, _sinusoidal(A), IntegratorConfig(-400.0, 400.0, DT, record_stride=stride)))


@functools.lru_cache(maxsize=None)
def sinusoidal_ed_run(A, alpha=1.0, n_trunc=40, stride=5):
    return ed_evolve(_sinusoidal(A), cat_fock_vector(CatSpec(alpha, math.pi / 2), n_trunc),
                     -400.0, 400.0, DT, record_stride=stride)


@functools.lru_cache(maxsize=None)
def linear_ed_run(kind, v, gamma, t0, t1, n_trunc=30, stride=10):
    if kind == "vacuum":
        vec = np.zeros(2 * (n_trunc + 1), dtype=complex)
        vec[0] = 1.0
    else:
        vec = cat_fock_vector(CatSpec(1.0, math.pi / 2), n_trunc)
    return ed_evolve(_linear(v, gamma), vec, t0, t1, DT, record_stride=stride)


def sinusoidal_params(A, gamma=0.05):
    return _sinusoidal(A, gamma)


def linear_params(v, gamma):
    return _linear(v, gamma)
