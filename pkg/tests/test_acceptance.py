"""End-to-end checks of the package's headline guarantees.

One test per guarantee so a verbose run prints one pass/fail line for
each. These runs accept the cost of realistic window sizes; the
per-module suites cover the internals at toy scale. Every tolerance
and runtime budget here is part of the contract the README states.
"""

import math
import time

import numpy as np
import pytest

from nlac import (AsymmetricProductWell, FractionalKernel, GridFunction,
                  ModulatedKernel, PiecewisePowerKernel, SymmetricPowerWell,
                  TruncatedKernel, apply_LK, apply_profile, apply_to_callable,
                  asymptotic_limit_check, build_test_profile, certified_barrier,
                  certify_profile_bounds, certify_well_growth,
                  check_kernel_conditions, check_well_convexity, energy,
                  fit_derivative_exponent, fit_tail_exponent, minimize_profile,
                  renormalized_energy_curve, sup_ratio)
from conftest import random_profile

# tail fits use a window clear of both the interface core and the wall,
# where the pre-asymptotic bias would otherwise dominate the slope
FIT_WINDOW = (0.3, 0.6)


def gaussian_grid(R, h):
    n = int(round(2.0 * R / h))
    x = -R + h * np.arange(n + 1)
    return GridFunction(R, h, np.exp(-x ** 2), left_tail=0.0, right_tail=0.0)


def test_operator_matches_quadrature_oracle():
    t0 = time.monotonic()
    u = gaussian_grid(R=40.0, h=0.002)
    f = lambda x: np.exp(-x ** 2)
    d2 = lambda x: (4.0 * x ** 2 - 2.0) * np.exp(-x ** 2)
    d4 = lambda x: (16.0 * x ** 4 - 48.0 * x ** 2 + 12.0) * np.exp(-x ** 2)
    targets = np.linspace(-2.0, 2.0, 20)
    worst = 0.0
    for s in (0.3, 0.5, 0.7):
        kernel = FractionalKernel(s)
        for xt in targets:
            x0 = -u.R + u.h * round((xt + u.R) / u.h)
            got = apply_LK(kernel, u, x0)
            want = apply_to_callable(kernel, f, x0, second_deriv=d2,
                                     fourth_deriv=d4,
                                     epsabs=1e-13, epsrel=1e-12)
            worst = max(worst, abs(got - want) / abs(want))
    assert worst <= 1e-6, worst
    assert time.monotonic() - t0 < 10.0


def test_constant_annihilation_and_minmax_inequality():
    t0 = time.monotonic()
    rng = np.random.default_rng(202)
    families = [FractionalKernel(0.5), PiecewisePowerKernel(0.5, 2.0, 1.0),
                ModulatedKernel(0.5, tau=1.0, zeta=1.0),
                TruncatedKernel(0.5, radius=1.0)]
    for kernel in families:
        for c in rng.uniform(-1.0, 1.0, size=25):
            u = GridFunction(5.0, 0.1, np.full(101, c),
                             left_tail=c, right_tail=c)
            assert np.max(np.abs(apply_profile(kernel, u))) <= 1e-10

    kernel = FractionalKernel(0.5)
    pot = SymmetricPowerWell(p=2.0)
    for _ in range(100):
        u, v = random_profile(rng), random_profile(rng)
        lo = GridFunction(u.R, u.h, np.minimum(u.values, v.values),
                          left_tail=-1.0, right_tail=1.0)
        hi = GridFunction(u.R, u.h, np.maximum(u.values, v.values),
                          left_tail=-1.0, right_tail=1.0)
        lhs = energy(kernel, pot, lo).total + energy(kernel, pot, hi).total
        rhs = energy(kernel, pot, u).total + energy(kernel, pot, v).total
        assert lhs <= rhs + 1e-10
    assert time.monotonic() - t0 < 60.0


def test_heteroclinic_decay_quartic_well():
    t0 = time.monotonic()
    kernel = FractionalKernel(0.3)
    pot = SymmetricPowerWell(p=2.0)
    res = minimize_profile(kernel, pot, 200.0, 0.05)
    assert res.converged and res.monotone

    u = res.profile.values
    odd_defect = float(np.max(np.abs(u + u[::-1])))
    assert odd_defect <= 1e-4, odd_defect

    tail = fit_tail_exponent(res, side="right", window_fraction=FIT_WINDOW)
    assert abs(tail.fitted_exponent - 0.6) <= 0.15 * 0.6, tail.fitted_exponent
    deriv = fit_derivative_exponent(res, side="right",
                                    window_fraction=FIT_WINDOW)
    assert abs(deriv.fitted_exponent - 1.6) <= 0.20 * 1.6, deriv.fitted_exponent
    assert time.monotonic() - t0 < 900.0


def test_degenerate_well_slows_decay():
    t0 = time.monotonic()
    kernel = FractionalKernel(0.5)
    fits = {}
    for p in (2.0, 3.0):
        res = minimize_profile(kernel, SymmetricPowerWell(p=p), 200.0, 0.05)
        assert res.converged
        fits[p] = fit_tail_exponent(res, side="right",
                                    window_fraction=FIT_WINDOW).fitted_exponent
    # 2s/(p-1) = 0.5 for the cubic-degenerate well
    assert abs(fits[3.0] - 0.5) <= 0.20 * 0.5, fits
    assert fits[3.0] < fits[2.0], fits
    assert time.monotonic() - t0 < 1200.0


def spread_about_mean(ratios):
    mean = float(np.mean(ratios))
    return float(np.max(np.abs(np.asarray(ratios) - mean))) / mean


def test_renormalized_energy_growth():
    pot = SymmetricPowerWell(p=2.0)
    rhos = [25.0, 50.0, 100.0]
    for s in (0.25, 0.75):
        kernel = FractionalKernel(s)
        res = minimize_profile(kernel, pot, 120.0, 0.05)
        assert res.converged
        curve = renormalized_energy_curve(kernel, pot, res, rhos)
        energies = [row[1] for row in curve.rows()]
        ratios = [row[2] for row in curve.rows()]
        assert all(np.isfinite(energies)), (s, energies)
        assert spread_about_mean(ratios) < 0.25, (s, ratios)
        assert curve.top_half_spread() < 0.25, (s, ratios)


def test_kernel_admissibility_matrix():
    for kernel in (FractionalKernel(0.4), PiecewisePowerKernel(0.4, 2.0, 1.0),
                   ModulatedKernel(0.4, tau=1.0, zeta=1.0)):
        report = check_kernel_conditions(kernel)
        assert report.admissible, kernel.describe()
        assert report.symmetric and report.sandwich_ok
        assert report.slow_dilation.passes

    trunc = check_kernel_conditions(TruncatedKernel(0.4, radius=1.0))
    assert trunc.symmetric and trunc.sandwich_ok
    assert not trunc.slow_dilation.passes
    assert math.isinf(trunc.slow_dilation.witness_values[-1])
    assert not trunc.admissible

    for kernel in (FractionalKernel(0.4), PiecewisePowerKernel(0.4, 2.0, 1.0),
                   TruncatedKernel(0.4, radius=1.0)):
        for sigma in (0.3, 0.5, 0.8):
            closed = sup_ratio(kernel, sigma, method="closed")
            sampled = sup_ratio(kernel, sigma, method="sampled")
            if math.isinf(closed):
                assert math.isinf(sampled)
            else:
                assert abs(closed - sampled) <= 1e-8 * closed, \
                    (kernel.describe(), sigma)


def test_far_field_operator_pinch():
    profile = build_test_profile(kappa=1.0, sigma_exp=2.0, tau_exp=2.0,
                                 bridge_integral=2.0)
    assert profile.total_mass == pytest.approx(4.0, rel=1e-9)
    for s in (0.3, 0.5, 0.7):
        report = asymptotic_limit_check(FractionalKernel(s), profile,
                                        [-1000.0, 1000.0], tol_rel=0.02)
        assert report.lower == pytest.approx(4.0, rel=1e-9)
        assert report.upper == pytest.approx(4.0, rel=1e-9)
        assert report.contained, (s, report.scaled_values)
        for value in report.scaled_values:
            assert abs(value - 4.0) <= 0.02 * 4.0, (s, value)


class ExactPowerWell:
    """W'' = C (1+t)^(a-2) exactly, making the convexity bounds identities."""

    def __init__(self, a=2.5, C=0.7, xi=0.25):
        self.alpha = self.beta = a
        self.gamma_exp = self.delta = 2.0
        self.C = C
        self.xi = xi

    def w(self, t):
        a = self.alpha
        return self.C / (a * (a - 1.0)) * (1.0 + np.asarray(t, dtype=float)) ** a

    def w1(self, t):
        a = self.alpha
        return self.C / (a - 1.0) * (1.0 + np.asarray(t, dtype=float)) ** (a - 1.0)

    def w2(self, t):
        a = self.alpha
        return self.C * (1.0 + np.asarray(t, dtype=float)) ** (a - 2.0)


def test_well_convexity_on_random_pairs():
    rng = np.random.default_rng(71)
    shipped = [SymmetricPowerWell(p=2.0), SymmetricPowerWell(p=3.0),
               AsymmetricProductWell(alpha=3.0, gamma=2.0)]
    for pot in shipped:
        growth = certify_well_growth(pot)
        assert growth.passes, pot.describe()
        for _ in range(1000):
            a, b = np.sort(rng.uniform(0.0, growth.xi, size=2))
            if rng.uniform() < 0.5:
                r, t = -1.0 + a, -1.0 + b
            else:
                r, t = 1.0 - b, 1.0 - a
            chk = check_well_convexity(pot, r, t, growth=growth)
            assert chk.passes, (pot.describe(), r, t)

    pot = ExactPowerWell()
    growth = certify_well_growth(pot)
    for r, t in ((-1.0, -0.8), (-0.95, -0.9), (-1.0, -0.76)):
        chk = check_well_convexity(pot, r, t, growth=growth)
        scale = max(1.0, abs(chk.diff_W1))
        assert abs(chk.lhs_W1 - chk.diff_W1) <= 1e-12 * scale
        assert abs(chk.rhs_W1 - chk.diff_W1) <= 1e-12 * scale


@pytest.mark.parametrize("m, s", [(2.0, 0.3), (2.0, 0.5), (3.0, 0.3),
                                  (3.0, 0.5)])
def test_barrier_certification(m, s):
    t0 = time.monotonic()
    zeta = 0.1
    spec, w, cert = certified_barrier(FractionalKernel(s), m, zeta, s,
                                      R_over_R0=2.0, probe_points=384,
                                      cert_points=4096, workers=1)
    assert cert.supersolution_ok, cert.max_violation
    assert cert.slack == pytest.approx(1e-6 * zeta)
    assert math.isfinite(cert.sandwich_C) and cert.sandwich_C > 0.0
    assert cert.monotone_ok
    assert 1.0 < spec.gamma_r < 2.0

    bounds = certify_profile_bounds(spec)
    assert bounds["envelope_constant"] == 2.0 ** 7
    assert bounds["g_d1_over_envelope"] <= 2.0 ** 7
    assert bounds["g_d2_over_envelope"] <= 2.0 ** 7
    assert bounds["sandwich_lower_ok"] and bounds["sandwich_upper_ok"]
    assert time.monotonic() - t0 < 300.0
