import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from lzsm.analytics import (fit_theta_curve, lz_asymptote, p_stay, plateau_average, plateau_windows,
                            rwa_even, rwa_final_probability, rwa_odd, rwa_yurke_stoler, theta_curve)

# 50-digit mpmath evaluations of the closed forms
FROZEN_RWA = {
    # gamma^2 / v: (1 - P0, Yurke-Stoler, even, odd) at |alpha|^2 = 1
    0.25: (0.32476809334422278, 0.51201332315213644, 0.45880849670406209, 0.58187313763732612),
    0.01: (None, 0.030808635413803272, 0.027150784522967584, 0.035611522702565693),
}


def test_vacuum_asymptote_frozen():
    assert lz_asymptote(0.12, 0.01) == pytest.approx(0.89585245783908215, abs=1e-15)
    assert p_stay(0.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        p_stay(0.1, 0.0)


@pytest.mark.parametrize("ratio", sorted(FROZEN_RWA))
def test_rwa_frozen_values(ratio):
    asym, ys, even, odd = FROZEN_RWA[ratio]
    gamma, v = math.sqrt(ratio * 0.01), 0.01
    if asym is not None:
        assert lz_asymptote(gamma, v) == pytest.approx(asym, abs=1e-14)
    assert rwa_final_probability(1.0, math.pi / 2, gamma, v) == pytest.approx(ys, abs=1e-14)
    assert rwa_final_probability(1.0, 0.0, gamma, v) == pytest.approx(even, abs=1e-14)
    assert rwa_final_probability(1.0, math.pi, gamma, v) == pytest.approx(odd, abs=1e-14)


alphas = st.floats(0.05, 3.0)
ratios = st.floats(1e-3, 2.0)


@given(a=alphas, r=ratios)
def test_specializations(a, r):
    g = math.sqrt(r * 0.01)
    assert rwa_final_probability(a, 0.0, g, 0.01) == pytest.approx(rwa_even(a, g, 0.01), abs=1e-14)
    assert rwa_final_probability(a, math.pi, g, 0.01) == pytest.approx(rwa_odd(a, g, 0.01), abs=1e-14)
    assert rwa_final_probability(a, math.pi / 2, g, 0.01) == pytest.approx(rwa_yurke_stoler(a, g, 0.01), abs=1e-14)


@given(a=alphas, r=ratios, th=st.floats(0, 2 * math.pi))
def test_theta_periodicity_and_mirror(a, r, th):
    g = math.sqrt(r * 0.01)
    p = rwa_final_probability(a, th, g, 0.01)
    assert 0.0 <= p <= 1.0
    assert rwa_final_probability(a, th + 2 * math.pi, g, 0.01) == pytest.approx(p, abs=1e-13)
    assert rwa_final_probability(a, -th, g, 0.01) == pytest.approx(p, abs=1e-13)


@given(a=alphas, th=st.floats(0, 2 * math.pi), r1=ratios, r2=ratios)
def test_monotone_in_coupling(a, th, r1, r2):
    assume(abs(r1 - r2) > 1e-6)
    lo, hi = sorted((r1, r2))
    assert rwa_final_probability(a, th, math.sqrt(lo * 0.01), 0.01) \
        < rwa_final_probability(a, th, math.sqrt(hi * 0.01), 0.01)


def test_vacuum_limit_and_odd_limit():
    g, v = 0.05, 0.01
    p0 = p_stay(g, v)
    assert rwa_final_probability(0.0, 0.3, g, v) == pytest.approx(lz_asymptote(g, v), abs=1e-15)
    assert rwa_final_probability(1e-6, math.pi, g, v) == pytest.approx(1 - p0 ** 2, abs=1e-10)
    with pytest.raises(ValueError):
        rwa_final_probability(0.0, math.pi, g, v)
    with pytest.raises(ValueError):
        rwa_odd(0.0, g, v)


def test_plateau_windows():
    first, second = plateau_windows(100.0, 300.0)
    assert first == pytest.approx((-70.0, 70.0))
    assert second == pytest.approx((150.0, 300.0))
    with pytest.raises(ValueError):
        plateau_windows(100.0, 120.0)
    with pytest.raises(ValueError):
        plateau_windows(0.0, 10.0)


def test_plateau_average_examples():
    t = np.linspace(0, 10, 11)
    assert plateau_average(t, 2 * t, (2.5, 7.5)).mean == pytest.approx(10.0)
    fine = np.linspace(0, 10, 20001)
    assert plateau_average(fine, 2 * fine, (2.5, 7.5)).spread == pytest.approx(10 / math.sqrt(12), rel=1e-6)
    s = plateau_average(t, np.full_like(t, 0.3), (0, 10))
    assert s.mean == pytest.approx(0.3) and s.spread == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        plateau_average(t, t, (5, 11))
    with pytest.raises(ValueError):
        plateau_average(t, t, (5, 5))


FROZEN_CURVE = {0.0: 0.72219889336007692, math.pi / 2: 0.26910029358279015, math.pi: 0.86403474290070714}


@pytest.mark.parametrize("theta", sorted(FROZEN_CURVE))
def test_theta_curve_frozen(theta):
    assert float(theta_curve(theta, 2.68, 0.88, 1.0)) == pytest.approx(FROZEN_CURVE[theta], abs=1e-14)


def test_fit_round_trip():
    th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    res = fit_theta_curve(th, theta_curve(th, 2.68, 0.88, 1.0), 1.0)
    assert res.F0 == pytest.approx(2.68, abs=1e-8)
    assert res.F1 == pytest.approx(0.88, abs=1e-8)
    assert res.residual < 1e-20


@given(F0=st.floats(1.0, 3.5), F1=st.floats(0.05, 0.95))
def test_fit_recovers_parameters(F0, F1):
    th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    res = fit_theta_curve(th, theta_curve(th, F0, F1, 1.0), 1.0, grid=4)
    assert res.residual < 1e-12


def test_fit_input_errors():
    with pytest.raises(ValueError):
        fit_theta_curve([0.0, 1.0, 2.0], [0.1, 0.2, 0.3], 1.0)
    with pytest.raises(ValueError):
        fit_theta_curve([0.0, 1.0, 2.0, 3.0], [0.1, 0.2], 1.0)
    with pytest.raises(ValueError):
        fit_theta_curve([0.0, 2 * np.pi, 1.0, 2.0], [0.1] * 4, 1.0)
