"""Uniform-grid profiles with constant far-field tails.

A GridFunction stores nodal values on x_i = -R + i*h, i = 0..N, together
with the two constants the profile takes outside [-R, R].  Between nodes
the profile is understood as piecewise linear; beyond the window it is
the constant tail after one transition cell.  Profiles persist as plain
two-column text with a small header so that runs are reproducible from
the file alone.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class GridFunction:
    R: float
    h: float
    values: np.ndarray
    left_tail: float = -1.0
    right_tail: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.R <= 0.0 or self.h <= 0.0:
            raise ValueError("R and h must be positive")
        n = self.values.size - 1
        if n < 2:
            raise ValueError("need at least 3 grid values")
        if abs(n * self.h - 2.0 * self.R) > 1e-9 * max(1.0, self.R):
            raise ValueError(f"grid does not tile the window: N*h = {n * self.h} "
                             f"but 2R = {2 * self.R}")
        if np.max(np.abs(self.values)) > 1.0 + 1e-9:
            raise ValueError("profile values must stay within [-1, 1]")

    @property
    def n(self):
        """Number of cells N (there are N+1 nodes)."""
        return self.values.size - 1

    @property
    def x(self):
        return -self.R + self.h * np.arange(self.values.size)

    def copy(self):
        return GridFunction(self.R, self.h, self.values.copy(),
                            self.left_tail, self.right_tail)

    def reflected(self, negate=False):
        """Mirror x -> -x; with negate=True also flip the sign (odd part)."""
        vals = self.values[::-1].copy()
        lt, rt = self.right_tail, self.left_tail
        if negate:
            vals = -vals
            lt, rt = -lt, -rt
        return GridFunction(self.R, self.h, vals, lt, rt)

    def interpolate(self, y):
        """Piecewise-linear value at arbitrary points, constant tails outside."""
        y = np.asarray(y, dtype=float)
        return np.interp(y, self.x, self.values,
                         left=self.left_tail, right=self.right_tail)


def ramp_profile(R, h, center=0.0):
    """The clamped linear ramp, the standard monotone competitor."""
    n = int(round(2.0 * R / h))
    x = -R + h * np.arange(n + 1)
    return GridFunction(R, h, np.clip(x - center, -1.0, 1.0))


def write_profile(path, grid, header_extra=None):
    """Write a profile as two-column text with a describing header."""
    lines = [
        f"# R: {grid.R!r}",
        f"# h: {grid.h!r}",
        f"# left_tail: {grid.left_tail!r}",
        f"# right_tail: {grid.right_tail!r}",
    ]
    for key, val in (header_extra or {}).items():
        lines.append(f"# {key}: {val}")
    lines.append("# columns: x u")
    xs = grid.x
    body = "\n".join(f"{float(xs[i])!r} {float(grid.values[i])!r}"
                     for i in range(xs.size))
    text = "\n".join(lines) + "\n" + body + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def read_profile(path):
    """Read a profile file back; returns (GridFunction, header dict)."""
    header = {}
    xs, us = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, val = body.split(":", 1)
                    header[key.strip()] = val.strip()
                continue
            sx, su = line.split()
            xs.append(float(sx))
            us.append(float(su))
    grid = GridFunction(float(header["R"]), float(header["h"]),
                        np.asarray(us),
                        float(header.get("left_tail", -1.0)),
                        float(header.get("right_tail", 1.0)))
    return grid, header
