"""Threshold dynamics on a uniform grid.

One step maps the phase ``u`` in {-1, +1} to

    u_new = +1  where  2 (J_h * 1_Omega) - m_h + g beta > 0,   -1 otherwise,

which equals ``sign(J_h * u + g beta)`` on all of R^N when ``u = -1``
outside the grid.  The convolution is a zero-padded (linear) FFT product
and every bit of kernel mass that does not land on the grid, whether cut off
by the patch or lying beyond the domain, is counted with phase -1 through
``m_h``.  The front therefore has to stay clear of the outer ``margin``
cells; a step that puts +1 there raises :class:`FrontEscapeError`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import fft

from .domain import Domain, SetSpec, check_inside
from .forcing import ForcingSpec
from .kernel import KernelTable, SchemeParams, sample_kernel_grid
from .norms import NormDescriptor


class SchemeError(ValueError):
    pass


class FrontEscapeError(SchemeError):
    pass


def fft_workers() -> int:
    try:
        return max(1, int(os.environ.get("FRONTFLOW_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class PhaseGrid:
    values: np.ndarray
    spacing: float
    origin: np.ndarray
    time: float = 0.0
    margin: int = 0

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def inside(self) -> np.ndarray:
        return self.values > 0

    def volume(self) -> float:
        return float(np.count_nonzero(self.values > 0)) * self.spacing**self.dim

    def points(self) -> np.ndarray:
        axes = [self.origin[i] + self.spacing * np.arange(n) for i, n in enumerate(self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def with_values(self, values: np.ndarray, time: float | None = None) -> "PhaseGrid":
        return replace(self, values=values, time=self.time if time is None else time)


def touches_margin(values: np.ndarray, margin: int) -> bool:
    if margin <= 0:
        return False
    pos = values > 0
    for ax in range(values.ndim):
        lo = np.take(pos, range(margin), axis=ax)
        hi = np.take(pos, range(values.shape[ax] - margin, values.shape[ax]), axis=ax)
        if lo.any() or hi.any():
            return True
    return False


def phase_from_mask(mask: np.ndarray, domain: Domain, time: float = 0.0) -> PhaseGrid:
    vals = np.where(mask, 1.0, -1.0)
    return PhaseGrid(vals, domain.spacing, domain.origin.copy(), time, domain.margin)


def init_phase(domain: Domain, spec: SetSpec) -> PhaseGrid:
    """+1 on cells whose centre lies in the open set, -1 elsewhere."""
    check_inside(spec, domain)
    mask = spec.contains(domain.points())
    if not mask.any():
        raise SchemeError("initial set contains no cell centre")
    return phase_from_mask(mask, domain)


@dataclass(eq=False)
class Convolver:
    """Linear convolution of grid fields with a fixed kernel patch via FFT."""

    kernel: KernelTable
    grid_shape: tuple[int, ...]
    workers: int = 1
    _kfft: np.ndarray = field(init=False, repr=False)
    _fshape: tuple[int, ...] = field(init=False, repr=False)
    _crop: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        k = self.kernel.half_width
        # entries further than the grid extent never pair two grid cells
        reach = max(self.grid_shape) - 1
        c = min(k, reach)
        sl = tuple(slice(k - c, k + c + 1) for _ in self.grid_shape)
        patch = self.kernel.values[sl]
        self._crop = c
        # the full linear product has length n + 2c, but only outputs c..c+n-1 are kept;
        # a circular length of n + c wraps the overflow onto indices below c
        self._fshape = tuple(fft.next_fast_len(n + c, real=True) for n in self.grid_shape)
        self._kfft = fft.rfftn(patch, self._fshape, workers=self.workers)

    @property
    def patch_mass(self) -> float:
        k, c = self.kernel.half_width, self._crop
        sl = tuple(slice(k - c, k + c + 1) for _ in self.grid_shape)
        return float(self.kernel.values[sl].sum())

    def __call__(self, field_: np.ndarray) -> np.ndarray:
        f = fft.rfftn(field_, self._fshape, workers=self.workers)
        full = fft.irfftn(f * self._kfft, self._fshape, workers=self.workers)
        c = self._crop
        sl = tuple(slice(c, c + n) for n in self.grid_shape)
        return full[sl]


def threshold_field(
    grid: PhaseGrid,
    conv: Convolver,
    g: ForcingSpec,
    params: SchemeParams,
    step: int = 0,
) -> np.ndarray:
    """The pre-threshold field 2 J*1_Omega - m_h + g beta."""
    if abs(conv.kernel.spacing - grid.spacing) > 1e-12 * grid.spacing:
        raise SchemeError(f"kernel spacing {conv.kernel.spacing} != grid spacing {grid.spacing}")
    ind = (grid.values > 0).astype(float)
    s = 2.0 * conv(ind) - conv.kernel.total_mass
    gv = g.on_grid(grid.points() if not g.time_only else None, grid.time, step)
    return s + np.asarray(gv) * params.beta


def threshold_step(
    grid: PhaseGrid,
    conv: Convolver,
    g: ForcingSpec,
    params: SchemeParams,
    step: int = 0,
) -> PhaseGrid:
    s = threshold_field(grid, conv, g, params, step)
    # ties go to -1
    vals = np.where(s > 0.0, 1.0, -1.0)
    if touches_margin(vals, grid.margin):
        raise FrontEscapeError(
            f"front entered the {grid.margin}-cell margin at t={grid.time + params.h:.6g}; enlarge the domain"
        )
    return grid.with_values(vals, grid.time + params.h)


def make_convolver(desc: NormDescriptor, params: SchemeParams, domain: Domain, eps_tail: float = 1e-3) -> Convolver:
    kt = sample_kernel_grid(desc, params, domain.spacing, eps_tail)
    return Convolver(kt, domain.shape, fft_workers())


@dataclass
class Trajectory:
    grids: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)


def run(
    grid: PhaseGrid,
    conv: Convolver,
    g: ForcingSpec,
    params: SchemeParams,
    n_steps: int,
    cadence: int = 1,
    diagnose=None,
    keep_grids: bool = True,
) -> Trajectory:
    """Iterate ``threshold_step``; ``diagnose(grid, step)`` returns a dict row."""
    if n_steps < 0:
        raise SchemeError("n_steps must be >= 0")
    traj = Trajectory()
    cur = grid
    for n in range(n_steps + 1):
        if n > 0:
            cur = threshold_step(cur, conv, g, params, n - 1)
        if n % cadence == 0 or n == n_steps:
            if keep_grids:
                traj.grids.append(cur)
            if diagnose is not None:
                row = {"step": n, "t": cur.time}
                row.update(diagnose(cur, n))
                traj.diagnostics.append(row)
    return traj
