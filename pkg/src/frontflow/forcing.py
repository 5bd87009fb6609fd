"""Forcing terms g(x, t).

Kinds: ``zero``, ``constant``, ``time_table`` (piecewise linear in t,
held constant outside the breakpoints), ``separable`` (an affine space
factor times a time table) and ``grid_sequence`` (one grid per step).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("zero", "constant", "time_table", "separable", "grid_sequence")


class ForcingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ForcingSpec:
    kind: str = "zero"
    value: float = 0.0
    breakpoints: np.ndarray = field(default_factory=lambda: np.zeros(0))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    space_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    grids: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ForcingError(f"unknown forcing kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("time_table", "separable"):
            bp = np.asarray(self.breakpoints, dtype=float)
            vals = np.asarray(self.values, dtype=float)
            if len(bp) == 0 or len(bp) != len(vals):
                raise ForcingError("time table needs equally many breakpoints and values (at least one)")
            if np.any(np.diff(bp) <= 0):
                raise ForcingError("time-table breakpoints must be strictly increasing")
            object.__setattr__(self, "breakpoints", bp)
            object.__setattr__(self, "values", vals)
        if self.kind == "separable" and len(self.space_coeffs) < 2:
            raise ForcingError("separable forcing needs space_coeffs = c0 c1 ... cN (affine in x)")
        if self.kind == "grid_sequence" and not self.grids:
            raise ForcingError("grid_sequence forcing needs at least one grid")

    @property
    def time_only(self) -> bool:
        if self.kind == "separable":
            return bool(np.all(np.asarray(self.space_coeffs)[1:] == 0.0))
        return self.kind in ("zero", "constant", "time_table")

    def time_factor(self, t: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return float(self.value)
        if self.kind in ("time_table", "separable"):
            return float(np.interp(t, self.breakpoints, self.values))
        raise ForcingError("grid_sequence forcing has no time factor")

    def space_factor(self, x: np.ndarray) -> np.ndarray:
        c = np.asarray(self.space_coeffs, dtype=float)
        if c.size != x.shape[-1] + 1:
            raise ForcingError(f"space_coeffs needs {x.shape[-1] + 1} entries, got {c.size}")
        return c[0] + x @ c[1:]

    def on_grid(self, points: np.ndarray | None, t: float, step: int = 0):
        """g at the given points (shape (..., N)) and time; scalar when time-only."""
        if self.kind == "grid_sequence":
            return self.grids[min(step, len(self.grids) - 1)]
        if self.kind == "separable":
            if self.time_only:
                return self.space_coeffs[0] * self.time_factor(t)
            return self.space_factor(points) * self.time_factor(t)
        return self.time_factor(t)

    def sup_norm(self, extent: float = 1.0, dim: int = 2) -> float:
        """||g||_inf over [-extent, extent]^dim and all times."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(float(self.value))
        tmax = float(np.max(np.abs(self.values))) if len(self.values) else 0.0
        if self.kind == "time_table":
            return tmax
        if self.kind == "separable":
            c = np.asarray(self.space_coeffs, dtype=float)
            # an affine function peaks at a corner of the cube
            return (abs(c[0]) + extent * float(np.sum(np.abs(c[1:])))) * tmax
        return float(max(np.max(np.abs(g)) for g in self.grids))

    def time_integral(self, t0: float, t1: float) -> float:
        """int_{t0}^{t1} g dt for time-only forcing (exact for piecewise-linear tables)."""
        if not self.time_only:
            raise ForcingError("time integrals need a time-only forcing")
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return float(self.value) * (t1 - t0)
        scale = float(self.space_coeffs[0]) if self.kind == "separable" else 1.0
        knots = np.concatenate([[t0], self.breakpoints[(self.breakpoints > t0) & (self.breakpoints < t1)], [t1]])
        vals = np.interp(knots, self.breakpoints, self.values)
        return scale * float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(knots)))

    def time_average(self, t0: float, t1: float) -> float:
        if not t1 > t0:
            raise ForcingError("time average needs t1 > t0")
        return self.time_integral(t0, t1) / (t1 - t0)


def zero() -> ForcingSpec:
    return ForcingSpec("zero")


def constant(c: float) -> ForcingSpec:
    return ForcingSpec("constant", value=float(c))


def time_table(breakpoints, values) -> ForcingSpec:
    return ForcingSpec("time_table", breakpoints=np.asarray(breakpoints, float), values=np.asarray(values, float))


def separable(space_coeffs, breakpoints, values) -> ForcingSpec:
    return ForcingSpec(
        "separable",
        breakpoints=np.asarray(breakpoints, float),
        values=np.asarray(values, float),
        space_coeffs=np.asarray(space_coeffs, float),
    )


def grid_sequence(grids) -> ForcingSpec:
    return ForcingSpec("grid_sequence", grids=tuple(np.asarray(g, dtype=float) for g in grids))
