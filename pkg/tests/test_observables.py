import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lzsm.ansatz import CatSpec, JitterSpec, MultiD2State, init_cat, init_vacuum, normalized
from lzsm.model import LinearDrive, ModelParams
from lzsm.observables import (expectation_energy, fock_population, fock_populations, make_record, mandel_q,
                              mean_photon_number, moving_average, p_lz, photon_moments, records_to_arrays,
                              sigma_z)

OFF = JitterSpec.off()
cplx = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)

# mean photon number and Mandel Q of cat states at alpha = 1, from a 30-digit
# Fock-space sum (cutoff 80)
EVEN_MEAN, EVEN_Q = 0.76159415595576489, 0.55144112954356642
ODD_MEAN, ODD_Q = 1.3130352854993313, -0.55144112954356642


def cat(alpha, theta):
    return init_cat(CatSpec(alpha, theta), 2, OFF)


def test_p_lz_trivial_states():
    assert p_lz(init_vacuum(3, OFF)) == 0.0
    s = MultiD2State([0, 0], [0.6, 0.8], [[0.1], [0.2]])
    assert p_lz(s) == pytest.approx(1.0)


@pytest.mark.parametrize("theta, mean, q", [(0.0, EVEN_MEAN, EVEN_Q), (math.pi / 2, 1.0, 0.0),
                                            (math.pi, ODD_MEAN, ODD_Q)])
def test_cat_photon_statistics(theta, mean, q):
    s = cat(1.0, theta)
    assert mean_photon_number(s) == pytest.approx(mean, abs=1e-12)
    assert mandel_q(s) == pytest.approx(q, abs=1e-10)


def test_mandel_q_signs():
    assert mandel_q(cat(1.0, 0.0)) > 0
    assert abs(mandel_q(cat(1.0, math.pi / 2))) < 1e-10
    assert mandel_q(cat(1.0, math.pi)) < 0


def test_mandel_q_undefined_for_vacuum():
    assert math.isnan(mandel_q(init_vacuum(2, OFF)))
    assert mean_photon_number(init_vacuum(2, OFF)) == 0.0


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_coherent_state_is_poissonian(alpha):
    assert mandel_q(MultiD2State([1.0], [0.0], [[alpha]])) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("alpha", [0.1, 1.0, 2.0])
def test_cat_means_match_closed_forms(alpha):
    a = alpha ** 2
    n_even = 2 * a * (1 - math.exp(-2 * a)) / (2 * (1 + math.exp(-2 * a)))
    n_odd = 2 * a * (1 + math.exp(-2 * a)) / (2 * (1 - math.exp(-2 * a)))
    assert mean_photon_number(cat(alpha, 0.0)) == pytest.approx(n_even, abs=1e-10)
    assert mean_photon_number(cat(alpha, math.pi)) == pytest.approx(n_odd, abs=1e-10)
    assert mean_photon_number(cat(alpha, math.pi / 2)) == pytest.approx(a, abs=1e-10)


def test_photon_moments_against_fock_sum():
    s = init_cat(CatSpec(1.3, 0.9), 6, seed=2)
    up, down = fock_populations(s, 80)
    n = np.arange(81)
    w = up + down
    n1, n2 = photon_moments(s)
    assert n1 == pytest.approx(np.sum(n * w), abs=1e-12)
    assert n2 == pytest.approx(np.sum(n * n * w), abs=1e-11)


def test_energy_examples():
    p = ModelParams.single_mode(LinearDrive(0.01), 0.12)
    assert expectation_energy(init_vacuum(1, OFF), p, 0.0) == 0.0
    p0 = ModelParams.single_mode(LinearDrive(0.01), 0.0)
    assert expectation_energy(cat(1.0, math.pi / 2), p0, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_energy_against_fock_matrix():
    from lzsm.ansatz import fock_vector
    from lzsm.model import ModeSpec, SinusoidalDrive, build_fock_hamiltonian
    p = ModelParams(SinusoidalDrive(0.2, 0.9, 0.3, 0.4), (ModeSpec(1.3, 0.4, 0.8),), 0.25)
    s = init_cat(CatSpec(0.9, 1.4), 6, seed=4)
    vec = fock_vector(s, 60)
    h = build_fock_hamiltonian(p, 7.0, 60)
    ref = np.vdot(vec, h @ vec).real / np.vdot(vec, vec).real
    assert expectation_energy(s, p, 7.0) == pytest.approx(ref, abs=1e-10)


def test_fock_population_spin_argument():
    s = cat(1.0, math.pi / 2)
    assert fock_population(s, 0, "up") == pytest.approx(math.exp(-1))
    assert fock_population(s, 0, "down") == 0.0
    with pytest.raises(ValueError):
        fock_population(s, 0, "x")


@given(A=st.lists(cplx, min_size=3, max_size=3), B=st.lists(cplx, min_size=3, max_size=3),
       f=st.lists(cplx, min_size=3, max_size=3))
def test_p_lz_and_up_probability_sum_to_one(A, B, f):
    s = MultiD2State(A, B, f)
    from lzsm.ansatz import norm_squared
    if norm_squared(s) < 1e-6:
        return
    assert p_lz(s) + (1 + sigma_z(s)) / 2 == pytest.approx(1.0, abs=1e-12)


@given(A=st.lists(cplx, min_size=2, max_size=2), B=st.lists(cplx, min_size=2, max_size=2),
       f=st.lists(cplx, min_size=2, max_size=2))
def test_record_invariants(A, B, f):
    from lzsm.ansatz import norm_squared
    s = MultiD2State(A, B, f)
    if norm_squared(s) < 1e-6:
        return
    s = normalized(s)
    r = make_record(s, ModelParams.single_mode(LinearDrive(0.01), 0.1), 3.0, 8)
    assert -1e-9 <= r.p_lz <= 1 + 1e-9
    assert np.all(r.p_up >= 0) and np.all(r.p_up <= 1 + 1e-9)
    assert np.all(r.p_down >= 0) and np.all(r.p_down <= 1 + 1e-9)
    assert r.p_up.sum() + r.p_down.sum() <= r.norm2 + 1e-9


def test_records_to_arrays_shapes():
    p = ModelParams.single_mode(LinearDrive(0.01), 0.1)
    recs = [make_record(init_vacuum(2, seed=1), p, t, 4) for t in (0.0, 1.0, 2.0)]
    arr = records_to_arrays(recs)
    assert arr["p_up"].shape == (3, 5)
    np.testing.assert_array_equal(arr["t"], [0, 1, 2])


def test_multimode_record_has_no_fock_populations():
    from lzsm.model import ModeSpec
    p = ModelParams(LinearDrive(0.01), (ModeSpec(1.0, 0.1), ModeSpec(1.2, 0.1)))
    r = make_record(init_vacuum(2, seed=1, n_modes=2), p, 0.0, 3)
    assert np.all(np.isnan(r.p_up))


def test_moving_average_constant_and_sinusoid():
    t = np.linspace(0, 100, 2001)
    _, y = moving_average(t, np.full_like(t, 0.3), 10)
    np.testing.assert_allclose(y, 0.3)
    period = 7.0
    _, y = moving_average(t, np.sin(2 * np.pi * t / period), period)
    inner = (t > period) & (t < 100 - period)
    assert np.max(np.abs(y[inner])) < 1e-2


def test_moving_average_errors():
    with pytest.raises(ValueError):
        moving_average([], [], 1.0)
    with pytest.raises(ValueError):
        moving_average([0, 1], [0, 1], 0.0)
    with pytest.raises(ValueError):
        moving_average([1, 0], [0, 1], 1.0)
