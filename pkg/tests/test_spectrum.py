import csv
import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _runs import linear_ed_run, linear_params, sinusoidal_params
from lzsm.analytics import lz_asymptote
from lzsm.model import LinearDrive, ModelParams, SinusoidalDrive, build_fock_hamiltonian
from lzsm.spectrum import (TruncationWarning, adiabatic_levels, ed_evolve, find_avoided_crossings,
                           find_crossing, gap_period_regression, oscillation_period, pair_gap,
                           write_crossings_csv, write_levels_csv)


def ground(n_trunc):
    v = np.zeros(2 * (n_trunc + 1), dtype=complex)
    v[0] = 1.0
    return v


@given(t=st.floats(-400, 400), v=st.floats(1e-3, 0.1))
def test_uncoupled_levels_are_diabatic_lines(t, v):
    n_trunc = 6
    spec = adiabatic_levels(ModelParams.single_mode(LinearDrive(v), 0.0), [t], n_trunc)
    n = np.arange(n_trunc + 1)
    expected = np.sort(np.concatenate([n + v * t / 2, n - v * t / 2]))
    np.testing.assert_allclose(spec.levels[0], expected, atol=1e-12)


def test_uncoupled_crossings_are_exact():
    spec = adiabatic_levels(linear_params(0.01, 0.0), np.linspace(-300, 300, 3001), 8)
    found = find_avoided_crossings(spec, max_levels=8)
    assert found
    assert max(c.gap for c in found) < 1e-10


def test_first_photon_crossings_at_plus_minus_omega_over_v():
    spec = adiabatic_levels(linear_params(0.01, 0.05), np.linspace(-300, 300, 6001), 20)
    found = find_avoided_crossings(spec, max_levels=8)
    right = find_crossing(found, (0, "up"), (1, "down"))
    left = find_crossing(found, (1, "up"), (0, "down"))
    assert len(right) == 1 and len(left) == 1
    assert right[0].t_star == pytest.approx(100.0, abs=0.5)
    assert left[0].t_star == pytest.approx(-100.0, abs=0.5)
    # single-photon coupling matrix element is gamma / 2, so the gap is gamma
    assert right[0].gap == pytest.approx(0.05, rel=1e-3)


def test_gaps_grow_with_photon_number():
    spec = adiabatic_levels(linear_params(0.01, 0.05), np.linspace(-300, 300, 6001), 20)
    found = find_avoided_crossings(spec, max_levels=8)
    gaps = [find_crossing(found, (n - 1, "up"), (n, "down"))[0].gap for n in (1, 2, 3)]
    np.testing.assert_allclose(gaps, 0.05 * np.sqrt([1, 2, 3]), rtol=5e-3)


def test_small_amplitude_drive_has_no_photon_changing_crossings():
    spec = adiabatic_levels(sinusoidal_params(0.7), np.linspace(-400, 400, 4001), 16)
    for c in find_avoided_crossings(spec, max_levels=8):
        assert c.gap < 1e-10


def test_large_amplitude_drive_reaches_photon_crossings():
    spec = adiabatic_levels(sinusoidal_params(1.1), np.linspace(-400, 400, 8001), 20)
    found = find_avoided_crossings(spec, max_levels=8)
    hits = find_crossing(found, (0, "up"), (1, "down"))
    assert hits
    assert all(abs(c.gap - 0.05) < 1e-3 for c in hits)
    # the bias turns around at t = 0 and t = +-200; gap minima there are not crossings
    for c in found:
        assert min(abs(c.t_star), abs(abs(c.t_star) - 200)) > 1.0


@pytest.mark.parametrize("t", [-28.0, 0.0, 50.0])
def test_pair_gap_orders_with_photon_number(t):
    p = sinusoidal_params(1.1)
    gaps = [pair_gap(p, t, (n - 1, "up"), (n, "down"), 30) for n in (1, 2, 3, 4)]
    assert np.all(np.diff(gaps) != 0)
    if t == -28.0:
        assert np.all(np.diff(gaps) > 0)


def test_levels_match_dense_diagonalization():
    p = ModelParams.single_mode(SinusoidalDrive(0.2, 1.1, 0.03, 0.1), 0.3, theta=0.7, delta=0.2)
    spec = adiabatic_levels(p, [1.7], 10)
    ref = np.linalg.eigvalsh(build_fock_hamiltonian(p, 1.7, 10))
    np.testing.assert_allclose(spec.levels[0], ref, atol=1e-12)


def test_ed_uncoupled_stays_up():
    res = ed_evolve(linear_params(0.01, 0.0), ground(6), -150, 150, 0.05)
    assert np.max(res.p_lz) < 1e-14


def test_ed_vacuum_reaches_lz_asymptote():
    res = linear_ed_run("vacuum", 0.01, 0.12, -300.0, 300.0)
    assert np.max(np.abs(res.norm2 - 1)) < 1e-10
    # the counter-rotating part of the coupling shifts the value slightly
    assert abs(res.p_lz[-1] - lz_asymptote(0.12, 0.01)) < 0.02
    assert abs(res.p_lz[-1] - 0.9087) < 1e-3


def test_ed_truncation_converged():
    p = linear_params(0.01, 0.12)
    a = ed_evolve(p, ground(10), 50, 150, 0.02)
    b = ed_evolve(p, ground(20), 50, 150, 0.02)
    np.testing.assert_allclose(a.p_lz, b.p_lz, atol=1e-10)


def test_ed_step_converged():
    p = sinusoidal_params(1.1)
    a = ed_evolve(p, ground(12), -40, 0, 0.02, record_stride=10)
    b = ed_evolve(p, ground(12), -40, 0, 0.01, record_stride=20)
    np.testing.assert_allclose(a.t, b.t)
    np.testing.assert_allclose(a.p_lz, b.p_lz, atol=1e-5)


def test_ed_warns_on_leakage():
    vec = np.zeros(8, dtype=complex)
    vec[4] = 1.0  # |2, up> with only four photon levels
    with pytest.warns(TruncationWarning):
        ed_evolve(linear_params(0.01, 0.3), vec, -110, -90, 0.05)


def test_ed_rejects_bad_vectors():
    with pytest.raises(ValueError):
        ed_evolve(linear_params(0.01, 0.1), np.ones(5), 0, 1)
    with pytest.raises(ValueError):
        ed_evolve(linear_params(0.01, 0.1), np.ones(6), 0, 1)


def test_ed_populations_sum_to_norm():
    res = ed_evolve(linear_params(0.01, 0.12), ground(8), 80, 120, 0.05, n_report=8)
    np.testing.assert_allclose(res.p_up.sum(1) + res.p_down.sum(1), res.norm2, atol=1e-12)
    np.testing.assert_allclose(res.p_down.sum(1), res.p_lz, atol=1e-12)


def test_oscillation_period_of_sine():
    t = np.linspace(0, 100, 5001)
    assert oscillation_period(t, np.sin(2 * np.pi * t / 7.5), 0, 100) == pytest.approx(7.5, abs=0.03)
    with pytest.raises(ValueError):
        oscillation_period(t, t, 0, 100)


def test_gap_period_regression_exact_line():
    gaps = np.array([0.05, 0.07, 0.09, 0.1])
    slope, icpt, r2 = gap_period_regression(gaps, 2 * np.pi / gaps + 3.0)
    assert slope == pytest.approx(2 * np.pi)
    assert icpt == pytest.approx(3.0)
    assert r2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        gap_period_regression([0.1, 0.1, 0.1], [1, 2, 3])
    with pytest.raises(ValueError):
        gap_period_regression([0.1, 0.2], [1, 2])


def test_csv_writers(tmp_path):
    spec = adiabatic_levels(linear_params(0.01, 0.05), np.linspace(-150, 150, 601), 6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        found = find_avoided_crossings(spec, max_levels=4)
    write_levels_csv(tmp_path / "levels.csv", spec, 4)
    write_crossings_csv(tmp_path / "cross.csv", found)
    rows = list(csv.reader(open(tmp_path / "levels.csv")))
    assert rows[0] == ["t", "E1", "E2", "E3", "E4"] and len(rows) == 602
    rows = list(csv.reader(open(tmp_path / "cross.csv")))
    assert rows[0][0] == "t_star" and len(rows) == len(found) + 1
    assert "|0,up>" in {cell for r in rows for cell in r}
