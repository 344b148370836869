"""Batch experiment runner: every verification pipeline as a subcommand.

All tables are plain comma-separated text with a one-line schema header
and repr-formatted floats, so a repeated run with the same config and
worker count reproduces its output files byte for byte.

Exit codes: 0 all checks passed, 2 the solver failed to converge,
3 a criterion failed or a pipeline raised, 64 the config was invalid.
"""

import argparse
import math
import os
import sys

import numpy as np
import yaml

from .analysis import (fit_derivative_exponent, fit_tail_exponent,
                       renormalized_energy_curve, truncation_check)
from .barrier import certified_barrier, certify_profile_bounds
from .config import load_config, template_text
from .gridfn import write_profile
from .kernels import check_kernel_conditions, sup_ratio
from .energy import minimize_profile
from .operator import asymptotic_limit_check, build_test_profile
from .runpool import default_workers

EXIT_OK = 0
EXIT_NONCONVERGED = 2
EXIT_CRITERION = 3
EXIT_CONFIG = 64


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float) or isinstance(v, np.floating):
        return repr(float(v))
    return str(v)


def _write_csv(path, header, rows):
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


class _Report:
    """Collects pass/fail lines and the resulting exit code."""

    def __init__(self):
        self.lines = []
        self.failed = False

    def check(self, ok, label, detail=""):
        tag = "PASS" if ok else "FAIL"
        suffix = f": {detail}" if detail else ""
        self.lines.append(f"{tag} {label}{suffix}")
        if not ok:
            self.failed = True

    def note(self, text):
        self.lines.append(text)

    def emit(self, path=None):
        text = "\n".join(self.lines) + "\n"
        print(text, end="")
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)

    @property
    def exit_code(self):
        return EXIT_CRITERION if self.failed else EXIT_OK


def _solve(cfg):
    kernel = cfg.kernel.build()
    pot = cfg.potential.build()
    result = minimize_profile(kernel, pot, cfg.window.R, cfg.window.h,
                              opts=cfg.solver.to_options())
    return kernel, pot, result


def _write_solution(out, kernel, pot, result):
    write_profile(os.path.join(out, "profile.txt"), result.profile,
                  header_extra={
                      "kernel": kernel.describe(),
                      "potential": pot.describe(),
                      "converged": result.converged,
                      "iterations": result.iterations,
                      "residual": repr(result.residual),
                      "zero_crossing": repr(result.zero_crossing),
                  })
    led = result.ledger
    with open(os.path.join(out, "ledger.txt"), "w") as fh:
        fh.write(f"kinetic: {led.kinetic!r}\n"
                 f"potential_term: {led.potential_term!r}\n"
                 f"total: {led.total!r}\n"
                 f"window: [{led.window[0]!r}, {led.window[1]!r}]\n")


def cmd_solve(cfg, out, workers, rng):
    kernel, pot, result = _solve(cfg)
    _write_solution(out, kernel, pot, result)
    rep = _Report()
    rep.check(result.converged, "solver converged",
              f"residual {result.residual:.3e} after {result.iterations} iterations")
    rep.check(result.monotone, "profile monotone")
    rep.note(f"energy total {result.ledger.total!r} "
             f"(kinetic {result.ledger.kinetic!r}, "
             f"potential {result.ledger.potential_term!r})")
    rep.emit(os.path.join(out, "summary.txt"))
    if not result.converged:
        return EXIT_NONCONVERGED
    return rep.exit_code


def cmd_decay(cfg, out, workers, rng):
    kernel, pot, result = _solve(cfg)
    _write_solution(out, kernel, pot, result)
    if not result.converged:
        print("solver did not converge; decay fits skipped", file=sys.stderr)
        return EXIT_NONCONVERGED

    window = tuple(cfg.analysis.fit_window)
    rep = _Report()
    tail_rows, deriv_rows = [], []
    for side in cfg.analysis.sides:
        fit = fit_tail_exponent(result, side=side, window_fraction=window)
        tail_rows.append((side, fit.fitted_exponent, fit.fit_r2,
                          fit.theoretical_upper, fit.theoretical_lower))
        rep.check(fit.bracket_ok(), f"tail exponent ({side})",
                  f"fitted {fit.fitted_exponent:.4f} against "
                  f"[{fit.theoretical_upper:.4f}, {fit.theoretical_lower:.4f}]"
                  f" r2 {fit.fit_r2:.5f}")
        dfit = fit_derivative_exponent(result, side=side, window_fraction=window)
        deriv_rows.append((side, dfit.fitted_exponent, dfit.fit_r2,
                           dfit.theoretical_upper, dfit.theoretical_lower))
        rep.check(dfit.bracket_ok(), f"derivative exponent ({side})",
                  f"fitted {dfit.fitted_exponent:.4f} against "
                  f"[{dfit.theoretical_upper:.4f}, {dfit.theoretical_lower:.4f}]"
                  f" r2 {dfit.fit_r2:.5f}")

    header = "side,exponent,r2,theory_lo,theory_hi"
    _write_csv(os.path.join(out, "decay.csv"), header, tail_rows)
    _write_csv(os.path.join(out, "derivative.csv"), header, deriv_rows)

    if cfg.analysis.check_truncation:
        chk = truncation_check(result, side=cfg.analysis.sides[-1],
                               window_fraction=window)
        rep.check(chk["r_ok"], "window size sufficient",
                  f"exponent moved {100 * chk['rel_change']:.2f}% on re-solve "
                  "at 1.5 R")
    rep.emit(os.path.join(out, "decay_summary.txt"))
    return rep.exit_code


def cmd_energy_growth(cfg, out, workers, rng):
    kernel, pot, result = _solve(cfg)
    _write_solution(out, kernel, pot, result)
    if not result.converged:
        print("solver did not converge; energy curve skipped", file=sys.stderr)
        return EXIT_NONCONVERGED
    curve = renormalized_energy_curve(kernel, pot, result, cfg.analysis.rho_list)
    _write_csv(os.path.join(out, "growth.csv"), "rho,energy,ratio", curve.rows())
    rep = _Report()
    spread = curve.top_half_spread()
    rep.check(spread < 0.25, "renormalized energy bounded",
              f"ratio spread {100 * spread:.1f}% over the top half, "
              f"max ratio {curve.max_ratio:.6g}")
    rep.emit(os.path.join(out, "growth_summary.txt"))
    return rep.exit_code


def cmd_barrier(cfg, out, workers, rng):
    kernel = cfg.kernel.build()
    b = cfg.barrier
    spec, w, cert = certified_barrier(kernel, b.m, b.zeta, kernel.s,
                                      R_over_R0=b.R_over_R0,
                                      probe_points=b.probe_points,
                                      cert_points=b.cert_points,
                                      retries=b.retries, workers=workers)
    rows = [(x, wv, lk, bd, bd - abs(lk))
            for x, wv, lk, bd in zip(cert.x, cert.w, cert.lkw, cert.bound)]
    _write_csv(os.path.join(out, "barrier.csv"), "x,w,lkw,bound,margin", rows)

    bounds = certify_profile_bounds(spec)
    rep = _Report()
    rep.note(f"spec: r1 {spec.r1!r} r {spec.r!r} R0 {spec.R0!r} R {spec.R!r} "
             f"c4_hat {spec.c4_hat!r} beta {spec.beta_b!r} gamma_r {spec.gamma_r!r}")
    rep.check(cert.supersolution_ok, "supersolution inequality",
              f"max violation {cert.max_violation:.3e} against slack {cert.slack:.3e}")
    rep.check(math.isfinite(cert.sandwich_C), "decay sandwich constant",
              f"C = {cert.sandwich_C:.6g}")
    rep.check(cert.monotone_ok, "barrier monotone in |x|")
    rep.check(1.0 < spec.gamma_r < 2.0, "glue constant in range",
              f"gamma_r = {spec.gamma_r:.6f}")
    env = bounds["envelope_constant"]
    rep.check(bounds["g_d1_over_envelope"] <= env, "g' envelope",
              f"ratio {bounds['g_d1_over_envelope']:.3f} <= {env:g}")
    rep.check(bounds["g_d2_over_envelope"] <= env, "g'' envelope",
              f"ratio {bounds['g_d2_over_envelope']:.3f} <= {env:g}")
    rep.check(-4.0 < bounds["eta_d1_min"] and bounds["eta_d1_max"] <= 0.0,
              "cutoff slope range",
              f"min {bounds['eta_d1_min']:.3f}")
    rep.check(bounds["eta_d2_absmax"] <= 32.0, "cutoff curvature range",
              f"max |eta''| {bounds['eta_d2_absmax']:.3f}")
    rep.check(bounds["sandwich_lower_ok"] and bounds["sandwich_upper_ok"],
              "profile sandwich against the power envelope")
    rep.emit(os.path.join(out, "barrier_summary.txt"))
    return rep.exit_code


def cmd_kernel_check(cfg, out, workers, rng):
    kernel = cfg.kernel.build()
    report = check_kernel_conditions(kernel)
    dil = report.slow_dilation
    rep = _Report()
    rows = []

    rep.check(report.symmetric, "kernel symmetric")
    rows.append(("symmetric", report.symmetric, report.symmetric))
    rep.check(report.sandwich_ok, "two-sided power sandwich",
              f"lam {report.details['lam']:.6g}, Lam {report.details['Lam']:.6g}, "
              f"r0 {report.details['r0']:.6g}")
    rows.append(("sandwich", report.sandwich_ok, report.sandwich_ok))
    rep.note(f"INFO global lower bound: {report.global_lower_ok} "
             "(not required for admissibility)")
    rows.append(("global_lower", report.global_lower_ok, True))
    tail = max(v for v in dil.witness_values[-3:])
    rep.check(dil.passes, "slow dilation",
              f"normalized excess tail {tail:.3e} against tol {dil.tol:g}")
    rows.append(("slow_dilation", tail, dil.passes))

    sig = 0.5
    sampled = sup_ratio(kernel, sig, method="sampled")
    try:
        closed = sup_ratio(kernel, sig, method="closed")
    except ValueError:
        closed = None
        rows.append(("dilation_ratio_sampled", sampled, True))
    if closed is not None:
        if math.isinf(closed) or math.isinf(sampled):
            agree = math.isinf(closed) and math.isinf(sampled)
            detail = f"closed {closed}, sampled {sampled}"
        else:
            agree = abs(closed - sampled) <= 1e-8 * abs(closed)
            detail = f"closed {closed!r}, sampled {sampled!r}"
        rep.check(agree, "dilation ratio closed form matches sampling", detail)
        rows.append(("dilation_ratio_match", closed, agree))

    xs = rng.uniform(0.1, 50.0, size=16)
    spot = bool(np.array_equal(np.asarray(kernel.evaluate(xs)),
                               np.asarray(kernel.evaluate(-xs))))
    rep.check(spot, "random symmetry probes")
    rows.append(("symmetry_spot", spot, spot))

    rep.check(report.admissible, "kernel admissible")
    rows.append(("admissible", report.admissible, report.admissible))

    _write_csv(os.path.join(out, "kernel_check.csv"), "condition,value,passed",
               rows)
    rep.emit(os.path.join(out, "kernel_summary.txt"))
    return rep.exit_code


def cmd_asymptotics(cfg, out, workers, rng):
    kernel = cfg.kernel.build()
    a = cfg.asymptotics
    profile = build_test_profile(kappa=a.kappa, sigma_exp=a.sigma_exp,
                                 tau_exp=a.tau_exp,
                                 bridge_integral=a.bridge_integral)
    report = asymptotic_limit_check(kernel, profile, a.x_values,
                                    tol_rel=a.tol_rel)
    rows = list(zip(report.x, report.scaled_values,
                    [report.lower] * len(report.x),
                    [report.upper] * len(report.x)))
    _write_csv(os.path.join(out, "asymptotics.csv"),
               "x,scaled_value,band_lo,band_hi", rows)
    rep = _Report()
    rep.check(report.contained, "scaled operator inside the mass band",
              f"band [{report.lower:.6g}, {report.upper:.6g}], "
              f"mass {report.mass_sum:.6g}")
    rep.check(report.monotone_approach, "approach to the band monotone")
    rep.emit(os.path.join(out, "asymptotics_summary.txt"))
    return rep.exit_code


def cmd_emit_template(cfg, out, workers, rng):
    text = template_text()
    if out is None:
        print(text, end="")
    else:
        path = os.path.join(out, "config_template.yaml")
        with open(path, "w") as fh:
            fh.write(text)
        print(f"template written to {path}")
    return EXIT_OK


_COMMANDS = {
    "solve": cmd_solve,
    "decay": cmd_decay,
    "energy-growth": cmd_energy_growth,
    "barrier": cmd_barrier,
    "kernel-check": cmd_kernel_check,
    "asymptotics": cmd_asymptotics,
    "emit-template": cmd_emit_template,
}


class _Parser(argparse.ArgumentParser):
    """Argument errors are config errors as far as exit codes go."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _build_parser():
    parser = _Parser(prog="nlac",
                     description="nonlocal layer-profile experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", default=None,
                       help="path to the YAML experiment config")
        p.add_argument("--workers", type=int, default=None,
                       help="process count for grid sweeps (default: all cores)")
        p.add_argument("--out", default=None,
                       help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized spot checks (overrides the config)")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    needs_config = args.command != "emit-template"
    cfg = None
    if args.config is not None:
        try:
            cfg = load_config(args.config)
        except (OSError, ValueError, TypeError, yaml.YAMLError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    elif needs_config:
        print("error: --config is required for this command", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "emit-template":
        out = args.out
    else:
        out = args.out if args.out is not None else cfg.out_dir
        os.makedirs(out, exist_ok=True)
    workers = args.workers if args.workers is not None else default_workers()
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    rng = np.random.default_rng(seed)

    try:
        return _COMMANDS[args.command](cfg, out, workers, rng)
    except (ValueError, FloatingPointError) as exc:
        print(f"pipeline failure: {exc}", file=sys.stderr)
        return EXIT_CRITERION


if __name__ == "__main__":
    sys.exit(main())
