"""Radial moments and sphere integrals.

Every radially-separable integral in this package reduces to a moment

    R(k, b) = int_0^inf t^k / (1 + t^b) dt,       b > k + 1,

which has the closed form ``(pi/b) / sin(pi (k+1)/b)``.  The quadrature
route below is an independent check: ``[0, 1]`` is integrated directly and
``[1, inf)`` is mapped to ``[0, 1]`` by ``t = 1/s``, where the integrand
picks up an algebraic endpoint weight handled by QUADPACK's QAWS rule.

Angular factors are integrals over the unit sphere of a linear subspace,
given by an orthonormal basis (columns).  Dimension 1 (two antipodal
points) is a counting sum; higher dimensions use nested adaptive
quadrature in hyperspherical coordinates.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import integrate

DEFAULT_RTOL = 1e-10


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


def radial_moment_closed(k: float, b: float) -> float:
    if not b > k + 1:
        raise ValueError(f"moment diverges: need b > k + 1, got k={k}, b={b}")
    return (math.pi / b) / math.sin(math.pi * (k + 1) / b)


def radial_moment_quad(k: float, b: float, rtol: float = DEFAULT_RTOL) -> float:
    if not b > k + 1:
        raise ValueError(f"moment diverges: need b > k + 1, got k={k}, b={b}")
    near, err1 = integrate.quad(lambda t: t**k / (1.0 + t**b), 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=200)
    # t = 1/s:  t^k/(1+t^b) dt = s^(b-k-2) / (1 + s^b) ds
    far, err2 = integrate.quad(
        lambda s: 1.0 / (1.0 + s**b), 0.0, 1.0, weight="alg", wvar=(b - k - 2.0, 0.0), epsabs=0.0, epsrel=rtol, limit=200
    )
    total = near + far
    if err1 + err2 > 10 * rtol * abs(total):
        raise QuadratureError(f"radial moment k={k}, b={b}: error estimate {err1 + err2:.3e}")
    return total


def sphere_area(k: int) -> float:
    """H^{k-1} measure of the unit sphere in R^k (k=1 gives the 2-point count)."""
    return 2.0 * math.pi ** (k / 2.0) / math.gamma(k / 2.0)


def _check(val, err, rtol, what):
    scale = np.max(np.abs(val)) if np.ndim(val) else abs(val)
    if np.max(err) > 100 * rtol * max(scale, 1e-300):
        raise QuadratureError(f"{what}: quadrature error estimate {np.max(err):.3e} vs value {scale:.3e}")


def sphere_integral(
    f: Callable[[np.ndarray], np.ndarray | float],
    basis: np.ndarray,
    rtol: float = DEFAULT_RTOL,
    breakpoints: np.ndarray | None = None,
):
    """Integrate ``f`` over the unit sphere of ``span(basis)``.

    ``basis`` has shape ``(N, k)`` with orthonormal columns.  ``f`` receives
    points of shape ``(N,)`` and may return a scalar or an array; array
    valued integrands are integrated componentwise.  For ``k == 2`` the
    optional ``breakpoints`` are circle angles where ``f`` has kinks.
    """
    basis = np.asarray(basis, dtype=float)
    k = basis.shape[1]
    if k == 1:
        e = basis[:, 0]
        return np.asarray(f(e)) + np.asarray(f(-e))
    if k == 2:
        e1, e2 = basis[:, 0], basis[:, 1]

        def g(phi):
            return f(np.cos(phi) * e1 + np.sin(phi) * e2)

        return _circle_quad(g, rtol, breakpoints)
    # k >= 3: theta = cos(psi) e0 + sin(psi) * (point on sphere of remaining k-1 dims)
    e0 = basis[:, 0]
    rest = basis[:, 1:]

    def inner(psi):
        c, s = math.cos(psi), math.sin(psi)

        def h(y):
            return f(c * e0 + s * y)

        return np.asarray(sphere_integral(h, rest, rtol=rtol)) * s ** (k - 2)

    val, err = integrate.quad_vec(inner, 0.0, math.pi, epsabs=0.0, epsrel=rtol, limit=400)
    _check(val, err, rtol, "sphere integral")
    return val


def _circle_quad(g, rtol, breakpoints):
    pts = [0.0, 2.0 * math.pi]
    if breakpoints is not None:
        pts += [float(b) % (2.0 * math.pi) for b in breakpoints]
    pts = np.unique(np.array(pts))
    probe = np.asarray(g(0.0))
    total = np.zeros_like(probe, dtype=float)
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo <= 1e-15:
            continue
        if probe.ndim == 0:
            val, err = integrate.quad(g, lo, hi, epsabs=0.0, epsrel=rtol, limit=400)
        else:
            val, err = integrate.quad_vec(g, lo, hi, epsabs=0.0, epsrel=rtol, limit=400)
        _check(val, err, rtol, "circle integral")
        total = total + val
    return total if probe.ndim else float(total)


def orthonormal_complement(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of ``p^perp``."""
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    q, _ = np.linalg.qr(np.column_stack([p, np.eye(n)]))
    # first column spans p; the remaining n-1 span its complement
    return q[:, 1:n]


def full_basis(n: int) -> np.ndarray:
    return np.eye(n)
