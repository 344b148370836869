from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlac import (EnergyCurve, FractionalKernel, GridFunction,
                  SymmetricPowerWell, fit_derivative_exponent,
                  fit_tail_exponent, psi_s, renormalized_energy_curve,
                  truncation_check)


def synthetic_result(a, R=100.0, h=0.05, s=0.3):
    """Fake converged result with exact power tails 1 - |x|^(-a)."""
    n = int(round(2.0 * R / h))
    x = -R + h * np.arange(n + 1)
    ax = np.maximum(np.abs(x), 1.0)
    tail = np.minimum(ax ** (-a), 1.0)
    u = GridFunction(R, h, np.sign(x) * (1.0 - tail))
    return SimpleNamespace(converged=True, profile=u,
                           potential=SymmetricPowerWell(p=2.0),
                           kernel=FractionalKernel(s), opts=None)


def test_energy_scale_function():
    assert psi_s(0.25, 16.0) == 4.0
    assert psi_s(0.5, float(np.e)) == pytest.approx(1.0, rel=1e-15)
    assert psi_s(0.75, 1e6) == 1.0
    assert psi_s(0.3, 4.0) == pytest.approx(4.0 ** 0.4, rel=1e-15)
    # the log branch catches values within rounding of one half
    assert psi_s(0.5 + 5e-15, 7.0) == pytest.approx(np.log(7.0), rel=1e-15)

    for bad_s in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(ValueError):
            psi_s(bad_s, 2.0)
    for bad_rho in (1.0, 0.5, -3.0):
        with pytest.raises(ValueError):
            psi_s(0.4, bad_rho)


@given(s=st.floats(min_value=0.05, max_value=0.5),
       r1=st.floats(min_value=1.001, max_value=1e6),
       factor=st.floats(min_value=1.0, max_value=1e3))
@settings(max_examples=100, deadline=None)
def test_scale_function_monotone_below_half(s, r1, factor):
    assert psi_s(s, r1 * factor) >= psi_s(s, r1) * (1.0 - 1e-12)


def test_synthetic_tail_recovery():
    res = synthetic_result(0.6)
    fit = fit_tail_exponent(res, side="right")
    assert fit.fitted_exponent == pytest.approx(0.6, rel=1e-9)
    assert fit.fit_r2 == pytest.approx(1.0, abs=1e-12)
    assert fit.is_power_law
    assert fit.window == (40.0, 85.0)
    # balanced exponents collapse the bracket onto 2s/(p-1)
    assert fit.theoretical_upper == fit.theoretical_lower == \
        pytest.approx(0.6, rel=1e-15)
    assert fit.bracket_ok()

    left = fit_tail_exponent(res, side="left")
    assert left.fitted_exponent == pytest.approx(0.6, rel=1e-9)


def test_synthetic_derivative_recovery():
    res = synthetic_result(0.6)
    for side in ("left", "right"):
        fit = fit_derivative_exponent(res, side=side)
        assert fit.fitted_exponent == pytest.approx(1.6, rel=1e-4)
        assert fit.theoretical_upper == fit.theoretical_lower == \
            pytest.approx(1.6, rel=1e-15)
        assert fit.bracket_ok()


def test_saturated_window_is_rejected():
    res = synthetic_result(8.0)
    with pytest.raises(ValueError, match="saturated"):
        fit_tail_exponent(res, side="right")


def test_unconverged_result_is_rejected():
    res = synthetic_result(0.6)
    res.converged = False
    with pytest.raises(ValueError):
        fit_tail_exponent(res)
    with pytest.raises(ValueError):
        fit_derivative_exponent(res)


def test_window_fraction_validation():
    res = synthetic_result(0.6)
    for window in ((0.2, 0.6), (0.5, 0.95), (0.85, 0.4)):
        with pytest.raises(ValueError):
            fit_tail_exponent(res, window_fraction=window)
    with pytest.raises(ValueError, match="fewer than 8"):
        fit_tail_exponent(res, window_fraction=(0.6, 0.601))
    with pytest.raises(ValueError):
        fit_tail_exponent(res, side="up")


def test_fits_on_reference_solve(solve_std):
    right = fit_tail_exponent(solve_std, side="right")
    left = fit_tail_exponent(solve_std, side="left")
    # the odd minimizer must give mirror-image tails
    assert abs(left.fitted_exponent - right.fitted_exponent) <= \
        0.05 * right.fitted_exponent
    assert right.is_power_law and left.is_power_law

    deriv = fit_derivative_exponent(solve_std, side="right")
    assert deriv.fitted_exponent == pytest.approx(2.0, rel=0.2)
    assert deriv.bracket_ok()


def test_energy_curve_arithmetic():
    curve = EnergyCurve(rho=np.array([1.0, 2.0, 4.0, 8.0]),
                        energy=np.array([1.0, 2.0, 3.0, 2.4]),
                        ratio=np.array([1.0, 2.0, 3.0, 2.4]))
    assert curve.max_ratio == 3.0
    assert curve.top_half_spread() == pytest.approx(0.2, rel=1e-15)
    assert curve.rows() == [(1.0, 1.0, 1.0), (2.0, 2.0, 2.0),
                            (4.0, 3.0, 3.0), (8.0, 2.4, 2.4)]


def test_renormalized_curve(solve_small):
    res = solve_small
    curve = renormalized_energy_curve(res.kernel, res.potential, res,
                                      [24.0, 6.0, 12.0])
    assert np.array_equal(curve.rho, [6.0, 12.0, 24.0])
    assert np.all(np.diff(curve.energy) > 0.0)
    assert np.all(curve.ratio > 0.0)
    assert curve.max_ratio == float(np.max(curve.ratio))

    with pytest.raises(ValueError):
        renormalized_energy_curve(res.kernel, res.potential, res, [6.0, 28.0])
    with pytest.raises(ValueError):
        renormalized_energy_curve(res.kernel, res.potential, res, [])


def test_truncation_check_flags_small_window(solve_small):
    report = truncation_check(solve_small, side="right")
    assert report["rel_change"] > 0.05
    assert report["r_ok"] is False


def test_truncation_check_accepts_large_window(solve_std):
    report = truncation_check(solve_std, side="right")
    assert report["rel_change"] == pytest.approx(0.0192, abs=0.01)
    assert report["r_ok"] is True
    assert report["refit"].fitted_exponent == pytest.approx(
        report["base"].fitted_exponent, rel=0.05)
