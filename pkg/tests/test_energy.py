import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlac import (FractionalKernel, GridFunction, SolveOptions,
                  SymmetricPowerWell, apply_profile, energy, minimize_profile,
                  ramp_profile, translate_and_compare)
from conftest import random_profile


KERNEL = FractionalKernel(0.5)
WELL = SymmetricPowerWell(p=2.0)


def tanh_profile(R, h, wobble=0.0):
    n = int(round(2.0 * R / h))
    x = -R + h * np.arange(n + 1)
    return GridFunction(R, h, np.tanh(x + wobble * np.sin(x)))


def test_pure_states_have_zero_energy():
    for c in (-1.0, 1.0):
        u = GridFunction(10.0, 0.1, np.full(201, c), left_tail=c, right_tail=c)
        ledger = energy(KERNEL, WELL, u)
        assert ledger.potential_term == 0.0
        assert 0.0 <= ledger.kinetic <= 1e-10
        assert ledger.total <= 1e-10


def test_energy_parts_are_nonnegative():
    rng = np.random.default_rng(5)
    for _ in range(5):
        u = random_profile(rng)
        ledger = energy(KERNEL, WELL, u)
        assert ledger.kinetic >= 0.0
        assert ledger.potential_term >= 0.0


def test_window_energy_is_monotone_in_the_window():
    u = tanh_profile(20.0, 0.1)
    totals = [energy(KERNEL, WELL, u, window=(-rho, rho)).total
              for rho in (5.0, 10.0, 20.0)]
    assert totals[0] <= totals[1] + 1e-12
    assert totals[1] <= totals[2] + 1e-12
    assert energy(KERNEL, WELL, u, window=(-20.0, 20.0)).total == \
        pytest.approx(energy(KERNEL, WELL, u).total, abs=1e-12)


def test_step_kinetic_energy_window_scaling():
    # for s < 1/2 the sharp interface has window energy growing like
    # rho^(1 - 2s); doubling the window should scale the kinetic part
    # by 2^(1 - 2s) up to wall effects
    s = 0.25
    kern = FractionalKernel(s)
    R, h = 60.0, 0.05
    n = int(round(2.0 * R / h))
    x = -R + h * np.arange(n + 1)
    step = GridFunction(R, h, np.sign(x))
    k1 = energy(kern, WELL, step, window=(-20.0, 20.0)).kinetic
    k2 = energy(kern, WELL, step, window=(-40.0, 40.0)).kinetic
    assert k2 / k1 == pytest.approx(2.0 ** (1.0 - 2.0 * s), rel=0.10)


@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
@settings(max_examples=30, deadline=None)
def test_min_max_energy_inequality(seed):
    rng = np.random.default_rng(seed)
    u, v = random_profile(rng), random_profile(rng)
    mn = GridFunction(u.R, u.h, np.minimum(u.values, v.values))
    mx = GridFunction(u.R, u.h, np.maximum(u.values, v.values))
    lhs = energy(KERNEL, WELL, mn).total + energy(KERNEL, WELL, mx).total
    rhs = energy(KERNEL, WELL, u).total + energy(KERNEL, WELL, v).total
    assert lhs <= rhs + 1e-10


def test_min_max_equality_for_ordered_profiles():
    rng = np.random.default_rng(17)
    u = random_profile(rng)
    upper = GridFunction(u.R, u.h,
                         np.clip(u.values + rng.uniform(0.0, 0.5, u.n + 1),
                                 -1.0, 1.0))
    mn = GridFunction(u.R, u.h, np.minimum(u.values, upper.values))
    mx = GridFunction(u.R, u.h, np.maximum(u.values, upper.values))
    lhs = energy(KERNEL, WELL, mn).total + energy(KERNEL, WELL, mx).total
    rhs = energy(KERNEL, WELL, u).total + energy(KERNEL, WELL, upper).total
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_energy_gradient_matches_finite_difference():
    u = tanh_profile(10.0, 0.1, wobble=0.3)
    formula = u.h * (WELL.w1(u.values) - apply_profile(KERNEL, u))
    base = energy(KERNEL, WELL, u).total
    rng = np.random.default_rng(23)
    candidates = [i for i in range(1, u.n)
                  if abs(u.values[i]) < 0.99 and abs(formula[i]) > 1e-3]
    eps = 1e-6
    for i in rng.choice(candidates, size=20, replace=False):
        for sgn in (1.0, -1.0):
            w = u.copy()
            w.values[i] += sgn * eps
            if sgn > 0:
                e_plus = energy(KERNEL, WELL, w).total
            else:
                e_minus = energy(KERNEL, WELL, w).total
        fd = (e_plus - e_minus) / (2.0 * eps)
        assert fd == pytest.approx(formula[i], rel=1e-4), (i, base)


def test_reference_minimizer(solve_std):
    res = solve_std
    assert res.converged
    assert res.residual <= res.opts.tol
    assert res.monotone
    assert abs(res.zero_crossing) <= res.profile.h / 2.0 + 1e-12
    vals = res.profile.values
    assert np.all(np.abs(vals[1:-1]) < 1.0)
    # the symmetric problem has an odd minimizer
    assert np.max(np.abs(vals + vals[::-1])) <= 50.0 * res.opts.tol
    assert res.ledger.kinetic > 0.0
    assert res.ledger.potential_term > 0.0
    assert res.ledger.window == (-100.0, 100.0)


def test_two_initializations_agree(solve_small):
    u0 = solve_small.profile
    init = tanh_profile(u0.R, u0.h)
    res2 = minimize_profile(KERNEL, WELL, u0.R, u0.h, init=init)
    assert res2.converged
    tol = solve_small.opts.tol
    assert np.max(np.abs(res2.profile.values - u0.values)) < 10.0 * tol


def test_translation_frame_independence(solve_small):
    assert translate_and_compare(solve_small, 0.0) == 0.0
    assert translate_and_compare(solve_small, 0.5) < 10.0 * solve_small.opts.tol
    with pytest.warns(UserWarning, match="snapped"):
        translate_and_compare(solve_small, 0.033)


def test_iteration_cap_is_reported():
    opts = SolveOptions(max_iter=10, accel=False, recenter=False)
    with pytest.warns(UserWarning, match="iteration cap"):
        res = minimize_profile(KERNEL, WELL, 30.0, 0.25, opts=opts)
    assert not res.converged
    assert res.residual > opts.tol
    assert res.iterations == 10


def test_shifted_initializations_are_renormalized(solve_small):
    # starting from a displaced ramp, the solver must still deliver the
    # translation-normalized connection (crossing at the center)
    u0 = solve_small.profile
    for center in (1.7, 5.0):
        init = ramp_profile(u0.R, u0.h, center=center)
        res = minimize_profile(KERNEL, WELL, u0.R, u0.h, init=init)
        assert res.converged
        assert abs(res.zero_crossing) <= u0.h / 2.0 + 1e-12
        assert np.max(np.abs(res.profile.values - u0.values)) < 1e-5


def test_window_validation():
    u = tanh_profile(10.0, 0.1)
    with pytest.raises(ValueError):
        energy(KERNEL, WELL, u, window=(-11.0, 5.0))
    with pytest.warns(UserWarning, match="snapped"):
        energy(KERNEL, WELL, u, window=(-5.03, 5.03))


def test_geometry_validation():
    with pytest.raises(ValueError):
        minimize_profile(KERNEL, WELL, 10.0, 0.3)
    bad_init = tanh_profile(10.0, 0.25)
    with pytest.raises(ValueError):
        minimize_profile(KERNEL, WELL, 10.0, 0.1, init=bad_init)
