"""Nonlocal Allen-Cahn layer computations for general integrable-tail kernels.

One-dimensional tooling: admissible kernel families with exact weighted
moments, double-well potentials with growth certification, a
positive-stencil discretization of the nonlocal operator, energy
evaluation and constrained minimization of layer profiles, a
supersolution barrier construction, and decay/energy-growth analysis.
"""

from .kernels import (FractionalKernel, PiecewisePowerKernel, ModulatedKernel,
                      TruncatedKernel, ScaledKernel, scaled_kernel, make_kernel,
                      eval_kernel, sup_ratio, check_slow_dilation,
                      check_kernel_conditions, KernelConditionReport,
                      SlowDilationReport)
from .potentials import (SymmetricPowerWell, AsymmetricProductWell,
                         make_potential, eval_potential, certify_well_growth,
                         check_well_convexity, WellGrowthReport, ConvexityCheck)
from .gridfn import GridFunction, ramp_profile, read_profile, write_profile
from .operator import (OperatorTable, build_table, increment_weights,
                       apply_profile, apply_at_node, apply_LK,
                       apply_to_callable, TestProfile, build_test_profile,
                       asymptotic_limit_check, AsymptoticsReport,
                       EdgeAccuracyWarning)
from .energy import (EnergyLedger, energy, SolveOptions, MinimizerResult,
                     minimize_profile, translate_and_compare)
from .barrier import (BarrierSpec, BarrierW, ProfileG, build_profile_g,
                      build_barrier, estimate_c4, certify_barrier,
                      certified_barrier, certify_profile_bounds,
                      BarrierCertificate)
from .analysis import (psi_s, DecayFit, fit_tail_exponent,
                       fit_derivative_exponent, renormalized_energy_curve,
                       truncation_check, EnergyCurve)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
