"""Post-processing of minimizers: tail exponents and energy growth.

The heteroclinic profile approaches its limits at algebraic rates
governed by the degeneracy exponents of the well, and its energy on
growing windows is bounded by the scale function

    psi_s(rho) = rho^(1-2s)  (s < 1/2),   log rho  (s = 1/2),   1  (s > 1/2).

This module fits the observed rates by ordinary least squares in
log-log coordinates and compares them with the two-sided theoretical
bracket coming from the well exponents, and it tabulates the
renormalized energy ratio E(u; [-rho, rho]) / psi_s(rho).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .energy import energy, minimize_profile
from .operator import build_table

SIDES = ("left", "right")


def psi_s(s, rho):
    """The energy scale function; rho must exceed 1."""
    s = float(s)
    rho = float(rho)
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie strictly inside (0, 1), got {s}")
    if rho <= 1.0:
        raise ValueError(f"rho must exceed 1, got {rho}")
    if abs(s - 0.5) <= 1e-14:
        return float(np.log(rho))
    if s < 0.5:
        return float(rho ** (1.0 - 2.0 * s))
    return 1.0


@dataclass
class DecayFit:
    """Log-log regression of a tail quantity against |x|.

    The stored theoretical exponents bracket the admissible decay:
    `theoretical_upper` is the exponent of the upper decay estimate
    (faster decay cannot beat it), `theoretical_lower` the exponent of
    the lower estimate; the two coincide when the well degeneracy is
    balanced on that side.
    """

    side: str
    window: tuple
    fitted_exponent: float
    fit_r2: float
    theoretical_upper: float
    theoretical_lower: float

    @property
    def is_power_law(self):
        return self.fit_r2 >= 0.995

    def bracket_ok(self, slack_frac=0.2):
        lo = self.theoretical_upper * (1.0 - slack_frac)
        hi = self.theoretical_lower * (1.0 + slack_frac)
        return lo <= self.fitted_exponent <= hi


def _side_exponents(pot, side):
    if side == "left":
        return pot.alpha, pot.beta
    if side == "right":
        return pot.gamma_exp, pot.delta
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _fit_window_mask(u, side, window_fraction):
    f_lo, f_hi = float(window_fraction[0]), float(window_fraction[1])
    if not 0.25 <= f_lo < f_hi <= 0.9:
        raise ValueError("fit window fractions must satisfy "
                         "0.25 <= lo < hi <= 0.9 of the half-width")
    x_lo, x_hi = f_lo * u.R, f_hi * u.R
    x = u.x
    if side == "left":
        mask = (x <= -x_lo) & (x >= -x_hi)
    else:
        mask = (x >= x_lo) & (x <= x_hi)
    if np.count_nonzero(mask) < 8:
        raise ValueError("fit window contains fewer than 8 grid nodes")
    return mask, (x_lo, x_hi)


def _loglog_slope(xs, ys):
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(slope), r2


def fit_tail_exponent(result, side="right", window_fraction=(0.4, 0.85)):
    """Fit 1 -/+ u ~ |x|^(-a) on one tail of a converged minimizer.

    Left side fits 1 + u against the exponent pair of the left well,
    right side 1 - u against the right pair.
    """
    if not result.converged:
        raise ValueError("refusing to fit an unconverged profile")
    u = result.profile
    mask, window = _fit_window_mask(u, side, window_fraction)
    xs = np.abs(u.x[mask])
    ys = 1.0 + u.values[mask] if side == "left" else 1.0 - u.values[mask]
    if np.min(ys) < 1e-12:
        raise ValueError("profile is saturated inside the fit window; "
                         "a larger R or finer grid is needed")
    slope, r2 = _loglog_slope(xs, ys)
    if r2 < 0.995:
        warnings.warn(f"{side} tail is not a clean power law (r2 = {r2:.4f})",
                      stacklevel=2)
    k_exp, k_sec = _side_exponents(result.potential, side)
    s = result.kernel.s
    return DecayFit(side, window, -slope, r2,
                    theoretical_upper=2.0 * s / (k_exp - 1.0),
                    theoretical_lower=2.0 * s * (k_exp - k_sec + 1.0) / (k_exp - 1.0))


def fit_derivative_exponent(result, side="right", window_fraction=(0.4, 0.85)):
    """Fit u' ~ |x|^(-b) by centered differences on one tail."""
    if not result.converged:
        raise ValueError("refusing to fit an unconverged profile")
    u = result.profile
    mask, window = _fit_window_mask(u, side, window_fraction)
    du = np.gradient(u.values, u.h)
    xs = np.abs(u.x[mask])
    ys = du[mask]
    if np.min(ys) < 1e-14:
        raise ValueError("derivative vanishes inside the fit window; "
                         "a larger R or finer grid is needed")
    slope, r2 = _loglog_slope(xs, ys)
    if r2 < 0.995:
        warnings.warn(f"{side} derivative tail is not a clean power law "
                      f"(r2 = {r2:.4f})", stacklevel=2)
    k_exp, k_sec = _side_exponents(result.potential, side)
    s = result.kernel.s
    upper = 1.0 + 2.0 * s * (1.0 - (k_exp - 2.0) * (k_exp - k_sec)) / (k_exp - 1.0)
    lower = 1.0 + 2.0 * s * (k_exp - k_sec + 1.0) / (k_exp - 1.0)
    return DecayFit(side, window, -slope, r2,
                    theoretical_upper=upper, theoretical_lower=lower)


@dataclass
class EnergyCurve:
    """Window energies and their renormalized ratios, sorted by rho."""

    rho: np.ndarray
    energy: np.ndarray
    ratio: np.ndarray

    @property
    def max_ratio(self):
        return float(np.max(self.ratio))

    def top_half_spread(self):
        """Relative spread of the ratio over the larger half of the windows."""
        sub = self.ratio[self.rho.size // 2:]
        top = float(np.max(sub))
        if top <= 0.0:
            return 0.0
        return float((top - np.min(sub)) / top)

    def rows(self):
        return list(zip(self.rho, self.energy, self.ratio))


def renormalized_energy_curve(kernel, pot, result, rho_list):
    """Energy of the minimizer on [-rho, rho] against the psi_s scale."""
    u = result.profile
    rhos = np.sort(np.asarray(rho_list, dtype=float))
    if rhos.size == 0:
        raise ValueError("rho_list is empty")
    if rhos[-1] > 0.9 * u.R:
        raise ValueError(f"largest rho {rhos[-1]} exceeds 0.9 R = {0.9 * u.R}; "
                         "the window boundary would contaminate the energy")
    table = build_table(kernel, u.h, u.n)
    s = kernel.s
    energies = np.empty_like(rhos)
    ratios = np.empty_like(rhos)
    for i, rho in enumerate(rhos):
        led = energy(kernel, pot, u, window=(-rho, rho), table=table)
        energies[i] = led.total
        ratios[i] = led.total / psi_s(s, rho)
    return EnergyCurve(rhos, energies, ratios)


def truncation_check(result, side="right", window_fraction=(0.4, 0.85),
                     scale=1.5):
    """Refit the tail after re-solving on a window enlarged by `scale`.

    A fitted exponent that moves by 5% or more flags the original R as
    too small for the tail to have settled.
    """
    base = fit_tail_exponent(result, side=side, window_fraction=window_fraction)
    u = result.profile
    n_big = int(round(2.0 * scale * u.R / u.h))
    r_big = n_big * u.h / 2.0
    big = minimize_profile(result.kernel, result.potential, r_big, u.h,
                           opts=result.opts)
    refit = fit_tail_exponent(big, side=side, window_fraction=window_fraction)
    rel_change = abs(refit.fitted_exponent - base.fitted_exponent) / max(
        abs(base.fitted_exponent), 1e-30)
    return {
        "base": base,
        "refit": refit,
        "rel_change": rel_change,
        "r_ok": bool(rel_change < 0.05),
    }
