"""Declarative experiment configuration with lossless YAML round-trip.

One file drives every CLI pipeline.  Sections map one-to-one onto
dataclasses here; unknown sections or keys are rejected rather than
ignored so that a typo cannot silently fall back to a default.  The
generated template documents every default inline and parses back to
the all-defaults configuration.
"""

import dataclasses
from dataclasses import dataclass, field

import yaml

from .energy import SolveOptions
from .kernels import make_kernel
from .potentials import make_potential


@dataclass
class KernelConfig:
    family: str = "fractional"
    params: dict = field(default_factory=lambda: {"s": 0.5})

    def build(self):
        return make_kernel(self.family, **self.params)


@dataclass
class PotentialConfig:
    family: str = "symmetric_power"
    params: dict = field(default_factory=lambda: {"p": 2.0, "xi": 0.25})

    def build(self):
        return make_potential(self.family, **self.params)


@dataclass
class WindowConfig:
    R: float = 100.0
    h: float = 0.05

    def validate(self):
        if self.R <= 0.0 or self.h <= 0.0:
            raise ValueError("window R and h must be positive")
        n = round(2.0 * self.R / self.h)
        if abs(n * self.h - 2.0 * self.R) > 1e-9 * max(1.0, self.R):
            raise ValueError(f"h = {self.h} does not divide the window "
                             f"width 2R = {2 * self.R}")


@dataclass
class SolverConfig:
    tol: float = 1e-8
    max_iter: int = 50000
    omega: float = 0.85
    accel: bool = True
    recenter: bool = True

    def validate(self):
        if self.tol <= 0.0 or self.max_iter < 1:
            raise ValueError("solver tol must be positive and max_iter >= 1")
        if not 0.0 < self.omega <= 1.0:
            raise ValueError("solver omega must lie in (0, 1]")

    def to_options(self):
        return SolveOptions(tol=self.tol, max_iter=self.max_iter,
                            omega=self.omega, accel=self.accel,
                            recenter=self.recenter)


@dataclass
class AnalysisConfig:
    fit_window: list = field(default_factory=lambda: [0.4, 0.85])
    rho_list: list = field(default_factory=lambda: [25.0, 50.0, 100.0])
    sides: list = field(default_factory=lambda: ["left", "right"])
    check_truncation: bool = False

    def validate(self):
        lo, hi = self.fit_window
        if not 0.25 <= lo < hi <= 0.9:
            raise ValueError("fit_window fractions must satisfy "
                             "0.25 <= lo < hi <= 0.9")
        if any(side not in ("left", "right") for side in self.sides):
            raise ValueError("sides entries must be 'left' or 'right'")
        if not self.rho_list or any(r <= 1.0 for r in self.rho_list):
            raise ValueError("rho_list must be nonempty with every rho > 1")


@dataclass
class BarrierConfig:
    m: float = 2.0
    zeta: float = 0.1
    R_over_R0: float = 2.0
    probe_points: int = 512
    cert_points: int = 4096
    retries: int = 2

    def validate(self):
        if self.m < 2.0 or self.zeta <= 0.0:
            raise ValueError("barrier needs m >= 2 and zeta > 0")
        if self.R_over_R0 < 1.0:
            raise ValueError("barrier R_over_R0 must be at least 1")
        if self.probe_points < 16 or self.cert_points < 16:
            raise ValueError("barrier grids need at least 16 points")


@dataclass
class AsymptoticsConfig:
    kappa: float = 1.0
    sigma_exp: float = 2.0
    tau_exp: float = 2.0
    bridge_integral: float = 2.0
    x_values: list = field(default_factory=lambda: [100.0, 300.0, 1000.0])
    tol_rel: float = 0.02

    def validate(self):
        if self.kappa <= 0.0 or self.tol_rel <= 0.0:
            raise ValueError("asymptotics kappa and tol_rel must be positive")
        if not self.x_values:
            raise ValueError("asymptotics x_values must be nonempty")


@dataclass
class ExperimentConfig:
    kernel: KernelConfig = field(default_factory=KernelConfig)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    window: WindowConfig = field(default_factory=WindowConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    barrier: BarrierConfig = field(default_factory=BarrierConfig)
    asymptotics: AsymptoticsConfig = field(default_factory=AsymptoticsConfig)
    out_dir: str = "out"
    seed: int = 0

    def validate(self):
        self.window.validate()
        self.solver.validate()
        self.analysis.validate()
        self.barrier.validate()
        self.asymptotics.validate()
        # building catches bad family names and parameters early
        self.kernel.build()
        self.potential.build()
        return self

    def to_dict(self):
        return dataclasses.asdict(self)


_SECTIONS = {
    "kernel": KernelConfig,
    "potential": PotentialConfig,
    "window": WindowConfig,
    "solver": SolverConfig,
    "analysis": AnalysisConfig,
    "barrier": BarrierConfig,
    "asymptotics": AsymptoticsConfig,
}


def _build_section(cls, data, name):
    if not isinstance(data, dict):
        raise ValueError(f"config section {name!r} must be a mapping")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown keys in section {name!r}: {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data):
    if not isinstance(data, dict):
        raise ValueError("config root must be a mapping")
    scalars = {"out_dir", "seed"}
    unknown = set(data) - set(_SECTIONS) - scalars
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    kwargs = {}
    for name, cls in _SECTIONS.items():
        if name in data:
            kwargs[name] = _build_section(cls, data[name], name)
    if "out_dir" in data:
        kwargs["out_dir"] = str(data["out_dir"])
    if "seed" in data:
        kwargs["seed"] = int(data["seed"])
    return ExperimentConfig(**kwargs).validate()


def config_to_yaml(cfg):
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def load_config(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    return config_from_dict(data)


def save_config(path, cfg):
    with open(path, "w") as fh:
        fh.write(config_to_yaml(cfg))


_SECTION_DOCS = {
    "kernel": (
        "interaction kernel: family is one of fractional | piecewise_power |"
        " modulated | truncated; params go straight to the family constructor"
        " (every family needs s in (0,1); see the package docs for the rest)"),
    "potential": (
        "double-well potential: family is symmetric_power (params p, xi) or"
        " asymmetric_product (params alpha, gamma, amplitude, xi)"),
    "window": (
        "computational window [-R, R] with grid step h; h must divide 2R"),
    "solver": (
        "relaxation solver: residual tolerance, iteration cap, damping"
        " factor, quasi-Newton acceleration, recentering of the profile"),
    "analysis": (
        "tail fits and energy growth: fit window as fractions of R, window"
        " half-widths rho for the energy curve, which tails to fit, and an"
        " optional re-solve at 1.5 R to flag truncation bias"),
    "barrier": (
        "supersolution certification: nonlinearity exponent m >= 2, forcing"
        " coefficient zeta, outer radius as a multiple of the minimal R0,"
        " probe/certification grid sizes, retry budget"),
    "asymptotics": (
        "far-field limit check: bump shape (kappa, interior/exterior decay"
        " exponents, bridge integral), evaluation points, relative tolerance"),
}


def template_text():
    """A commented template whose values are exactly the defaults."""
    cfg = ExperimentConfig()
    data = cfg.to_dict()
    lines = [
        "# experiment configuration template",
        "# every value below is the default; delete any section to keep its defaults",
    ]
    for name in _SECTIONS:
        lines.append("")
        lines.append(f"# {_SECTION_DOCS[name]}")
        lines.append(yaml.safe_dump({name: data[name]}, sort_keys=False).rstrip())
    lines.append("")
    lines.append("# output directory for tables and profiles, and the seed for"
                 " randomized spot checks")
    lines.append(yaml.safe_dump({"out_dir": cfg.out_dir, "seed": cfg.seed},
                                sort_keys=False).rstrip())
    return "\n".join(lines) + "\n"
