"""Threshold kernel, time-step scalings and the sampled kernel patch.

The kernel at time step ``h`` is

    J_h(y) = sigma / (sigma^((N+alpha)/alpha) + N(y)^(N+alpha))

with ``sigma = sigma_of_h(alpha, h)``.  Its L1 mass does not depend on
``h`` and factors into a closed-form radial moment times an angular
integral of ``N(theta)^(-N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import quadrature
from .norms import NormDescriptor, equivalence_constant, norm_eval

ALPHA1_H_MAX = 1.0 / (2.0 * math.e)
SIGMA1_MAX = math.exp(-0.5)
DEFAULT_EPS_TAIL = 1e-3
DEFAULT_MAX_BYTES = 2 * 1024**3


class KernelError(ValueError):
    pass


def _check_alpha(alpha: float) -> None:
    if not 1.0 <= alpha < 2.0:
        raise KernelError(f"alpha must be in [1,2), got {alpha}")


def sigma_of_h(alpha: float, h: float) -> float:
    _check_alpha(alpha)
    if not h > 0:
        raise KernelError(f"time step h must be > 0, got {h}")
    if alpha > 1.0:
        return h ** (alpha / 2.0)
    if h >= ALPHA1_H_MAX:
        raise KernelError(f"alpha=1 requires h < 1/(2e) = {ALPHA1_H_MAX:.6f}, got h={h}")
    # sigma^2 |ln sigma| is increasing on (0, e^{-1/2}); solve on that branch
    f = lambda s: s * s * -math.log(s) - h  # noqa: E731
    return optimize.bisect(f, 1e-300, SIGMA1_MAX, xtol=1e-300, rtol=1e-15, maxiter=4000)


def beta_of_h(alpha: float, h: float) -> float:
    s = sigma_of_h(alpha, h)
    if alpha > 1.0:
        return math.sqrt(h)
    return s * abs(math.log(s))


@dataclass(frozen=True)
class SchemeParams:
    alpha: float
    h: float
    sigma: float
    beta: float

    @property
    def width(self) -> float:
        """Core width sigma^(1/alpha) of the kernel."""
        return self.sigma ** (1.0 / self.alpha)


def scheme_params(alpha: float, h: float) -> SchemeParams:
    return SchemeParams(float(alpha), float(h), sigma_of_h(alpha, h), beta_of_h(alpha, h))


def kernel_value(desc: NormDescriptor, params: SchemeParams, y) -> np.ndarray:
    n = desc.dim
    a = params.alpha
    s = params.sigma
    r = norm_eval(desc, y)
    return s / (s ** ((n + a) / a) + r ** (n + a))


def angular_mass(desc: NormDescriptor, power: float, rtol: float = 1e-10) -> float:
    """int_{S^{N-1}} N(theta)^(-power) dH^{N-1}."""
    n = desc.dim
    if desc.kind == "euclidean":
        return quadrature.sphere_area(n)
    bp = None
    if desc.kind == "polygon":
        v = desc.vertices
        bp = np.arctan2(v[:, 1], v[:, 0])
    return float(quadrature.sphere_integral(lambda th: norm_eval(desc, th) ** (-power), np.eye(n), rtol=rtol, breakpoints=bp))


def kernel_mass(desc: NormDescriptor, alpha: float) -> float:
    """||J_h||_{L1} (independent of h)."""
    _check_alpha(alpha)
    n = desc.dim
    radial = quadrature.radial_moment_closed(n - 1, n + alpha)
    return radial * angular_mass(desc, n)


def kernel_mass_closed(n: int, alpha: float) -> float:
    """Closed form for the Euclidean norm (angular factor = sphere area)."""
    return quadrature.radial_moment_closed(n - 1, n + alpha) * quadrature.sphere_area(n)


@dataclass(frozen=True, eq=False)
class KernelTable:
    values: np.ndarray
    half_width: int
    spacing: float
    total_mass: float
    tail_mass: float
    tail_bound: float
    params: SchemeParams

    @property
    def patch_radius(self) -> float:
        return self.half_width * self.spacing

    @property
    def dim(self) -> int:
        return self.values.ndim


def tail_radius(desc: NormDescriptor, params: SchemeParams, eps_tail: float, mass: float) -> float:
    """Radius R with the analytic tail bound int_{|y|>R} J_h <= eps_tail * mass."""
    n = desc.dim
    a = params.alpha
    c = equivalence_constant(desc)
    omega = quadrature.sphere_area(n)
    return (params.sigma * c ** (n + a) * omega / (a * eps_tail * mass)) ** (1.0 / a)


def tail_bound(desc: NormDescriptor, params: SchemeParams, radius: float) -> float:
    n = desc.dim
    a = params.alpha
    c = equivalence_constant(desc)
    return params.sigma * c ** (n + a) * quadrature.sphere_area(n) * radius ** (-a) / a


def sample_kernel_grid(
    desc: NormDescriptor,
    params: SchemeParams,
    dx: float,
    eps_tail: float = DEFAULT_EPS_TAIL,
    max_bytes: int = DEFAULT_MAX_BYTES,
    mass: float | None = None,
) -> KernelTable:
    """Midpoint samples J_h(k dx) dx^N on the smallest adequate centred patch."""
    if not dx > 0:
        raise KernelError(f"spacing must be > 0, got {dx}")
    if dx > params.width / 4.0 * (1.0 + 1e-12):
        raise KernelError(
            f"grid too coarse for kernel: dx={dx:.6g} > sigma^(1/alpha)/4 = {params.width / 4.0:.6g}"
        )
    n = desc.dim
    m = kernel_mass(desc, params.alpha) if mass is None else mass
    radius = tail_radius(desc, params, eps_tail, m)
    k = max(1, int(math.ceil(radius / dx)))
    side = 2 * k + 1
    nbytes = side**n * 8
    if nbytes > max_bytes:
        raise KernelError(f"kernel patch {side}^{n} needs {nbytes / 2**20:.0f} MiB > limit {max_bytes / 2**20:.0f} MiB")
    ax = np.arange(-k, k + 1) * dx
    grids = np.meshgrid(*([ax] * n), indexing="ij")
    pts = np.stack(grids, axis=-1)
    vals = kernel_value(desc, params, pts) * dx**n
    # enforce exact evenness: average with the point reflection
    vals = 0.5 * (vals + vals[(slice(None, None, -1),) * n])
    vals.setflags(write=False)
    tail = max(m - float(vals.sum()), 0.0)
    return KernelTable(vals, k, dx, m, tail, tail_bound(desc, params, k * dx), params)
