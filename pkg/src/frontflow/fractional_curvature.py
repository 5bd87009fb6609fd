"""Fractional anisotropic curvature of quadratic surfaces and its local limit.

For ``u(x + z) = u(x) + <p, z> + 1/2 <M z, z>`` and the measure
``nu(dz) = (1 - alpha) dz / N(z)^(N + alpha)`` with ``alpha`` in (0, 1),

    kappa = nu{u(x+z) >= u(x), <p,z> <= 0} - nu{u(x+z) < u(x), <p,z> > 0}.

Along a ray ``z = r theta`` the increment is ``r a + r^2 b`` with
``a = <p, theta>`` and ``b = <M theta, theta>/2``, so the first set meets the
ray in ``r >= |a|/b`` when ``a < 0 < b`` and the second in ``r > a/|b|`` when
``b < 0 < a``.  The radial measure of ``[r0, R_out]`` is
``(1 - alpha)/alpha (r0^-alpha - R_out^-alpha) N(theta)^-(N+alpha)``; the
angular integral has ``|a|^-alpha`` endpoint singularities on ``p^⊥`` and is
done with QUADPACK's algebraic-weight rule there.

As ``alpha -> 1`` the value tends to
``(1/(2|p|)) tr(M int_{S ∩ p^⊥} theta⊗theta N(theta)^-(N+1))``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import quadrature
from .anisotropy import great_sphere_moment
from .kernel import angular_mass
from .norms import NormDescriptor, norm_eval

DEFAULT_ROUT = 1e3
SAMPLES = 721


class CurvatureError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuadraticSurfaceSpec:
    p: np.ndarray
    m: np.ndarray
    r_out: float = DEFAULT_ROUT

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float)
        m = np.asarray(self.m, dtype=float)
        if np.linalg.norm(p) == 0.0:
            raise CurvatureError("gradient p must be nonzero")
        if m.shape != (p.size, p.size):
            raise CurvatureError(f"Hessian must be {p.size}x{p.size}, got {m.shape}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "m", 0.5 * (m + m.T))

    @property
    def dim(self) -> int:
        return self.p.size


def _roots(f, lo: float, hi: float, n: int = SAMPLES) -> list[float]:
    x = np.linspace(lo, hi, n)
    y = np.array([f(v) for v in x])
    out = []
    for i in range(n - 1):
        if y[i] == 0.0 and 0 < i:
            out.append(float(x[i]))
        elif y[i] * y[i + 1] < 0:
            out.append(optimize.brentq(f, x[i], x[i + 1], xtol=1e-15, rtol=1e-15))
    return out


def _is_zero(s: float, zeros) -> bool:
    return any(abs(s - z) < 1e-13 for z in zeros)


def _angular_integral(afun, ratio, bfun, nfun, weight, lo, hi, a_zeros, alpha, r_out, n, rtol):
    """Signed integral over the angle interval [lo, hi] of the ray measures.

    ``a`` vanishes linearly at the points ``a_zeros``; ``ratio(s, s0)`` must
    return ``|a(s)| / |s - s0|`` evaluated stably near ``s0``.
    """
    c = (1.0 - alpha) / alpha
    cut = r_out ** (-alpha)

    def dens(s, r0_pow, cut_scale=1.0):
        # r0_pow = r0^-alpha, possibly with a factor d^-alpha taken out as a quadrature weight,
        # in which case the cutoff term carries the compensating d^alpha in cut_scale
        return c * max(r0_pow - cut * cut_scale, 0.0) * nfun(s) ** (-(n + alpha)) * weight(s)

    pts = {lo, hi, *a_zeros}
    pts.update(_roots(bfun, lo, hi))
    pts.update(_roots(lambda s: abs(afun(s)) - r_out * abs(bfun(s)), lo, hi))
    pts = sorted(pts)
    total = 0.0
    for s0, s1 in zip(pts[:-1], pts[1:]):
        if s1 - s0 <= 1e-14:
            continue
        mid = 0.5 * (s0 + s1)
        am, bm = afun(mid), bfun(mid)
        if am < 0 < bm:
            sign = 1.0
        elif bm < 0 < am:
            sign = -1.0
        else:
            continue
        if abs(am) >= r_out * abs(bm):
            # r0 beyond the cutoff on the whole piece (its ends include the kinks |a| = R|b|)
            continue
        left, right = _is_zero(s0, a_zeros), _is_zero(s1, a_zeros)
        if left and right:
            pieces = [(s0, mid, s0), (mid, s1, s1)]
        else:
            pieces = [(s0, s1, s0 if left else (s1 if right else None))]
        for q0, q1, z in pieces:
            if z is None:
                f = lambda s: dens(s, (abs(bfun(s)) / abs(afun(s))) ** alpha)  # noqa: E731
                v, _ = integrate.quad(f, q0, q1, epsabs=0.0, epsrel=rtol, limit=200)
            else:
                # |a|^-alpha = (|a|/d)^-alpha * d^-alpha, with d^-alpha as the QAWS weight
                f = lambda s, z=z: dens(s, abs(bfun(s)) ** alpha * ratio(s, z) ** (-alpha), abs(s - z) ** alpha)  # noqa: E731
                wv = (-alpha, 0.0) if z == q0 else (0.0, -alpha)
                v, _ = integrate.quad(f, q0, q1, weight="alg", wvar=wv, epsabs=0.0, epsrel=rtol, limit=200)
            total += sign * v
    return total


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise CurvatureError(f"alpha must be in (0,1), got {alpha}")


def _frame(spec: QuadraticSurfaceSpec):
    pn = float(np.linalg.norm(spec.p))
    u = spec.p / pn
    return pn, u, quadrature.orthonormal_complement(u)


def _cos_ratio(s: float, z: float, pn: float) -> float:
    """|pn cos s| / |s - z| for z an odd multiple of pi/2."""
    d = s - z
    return pn * abs(np.sinc(d / math.pi))


def kappa_alpha(spec: QuadraticSurfaceSpec, desc: NormDescriptor, alpha: float, rtol: float = 1e-10) -> float:
    _check_alpha(alpha)
    if desc.dim != spec.dim:
        raise CurvatureError(f"norm is {desc.dim}-D but the surface is {spec.dim}-D")
    m = spec.m
    pn, u, perp = _frame(spec)
    n = spec.dim
    if n == 2:
        q = perp[:, 0]

        def theta(s):
            return math.cos(s) * u + math.sin(s) * q

        return _angular_integral(
            lambda s: pn * math.cos(s),
            lambda s, z: _cos_ratio(s, z, pn),
            lambda s: 0.5 * theta(s) @ m @ theta(s),
            lambda s: float(norm_eval(desc, theta(s))),
            lambda s: 1.0,
            -0.5 * math.pi,
            1.5 * math.pi,
            (-0.5 * math.pi, 0.5 * math.pi, 1.5 * math.pi),
            alpha,
            spec.r_out,
            n,
            rtol,
        )
    if n == 3:
        e1, e2 = perp[:, 0], perp[:, 1]

        def inner(phi):
            e = math.cos(phi) * e1 + math.sin(phi) * e2

            def theta(s):
                return math.cos(s) * u + math.sin(s) * e

            return _angular_integral(
                lambda s: pn * math.cos(s),
                lambda s, z: _cos_ratio(s, z, pn),
                lambda s: 0.5 * theta(s) @ m @ theta(s),
                lambda s: float(norm_eval(desc, theta(s))),
                math.sin,
                0.0,
                math.pi,
                (0.5 * math.pi,),
                alpha,
                spec.r_out,
                n,
                rtol,
            )

        # the in-plane quadratic form changes sign at these azimuths
        mq = lambda phi: (math.cos(phi) * e1 + math.sin(phi) * e2) @ m @ (math.cos(phi) * e1 + math.sin(phi) * e2)  # noqa: E731
        pts = sorted({0.0, 2.0 * math.pi, *_roots(mq, 0.0, 2.0 * math.pi)})
        total = 0.0
        for a0, a1 in zip(pts[:-1], pts[1:]):
            v, _ = integrate.quad(inner, a0, a1, epsabs=0.0, epsrel=max(rtol, 1e-8), limit=200)
            total += v
        return total
    raise CurvatureError("fractional curvature is implemented for N=2 and N=3")


def tail_bound(desc: NormDescriptor, alpha: float, r_out: float = DEFAULT_ROUT) -> float:
    """Upper bound on the measure the R_out cutoff leaves out."""
    _check_alpha(alpha)
    return (1.0 - alpha) / alpha * r_out ** (-alpha) * angular_mass(desc, desc.dim + alpha)


def local_limit_curvature(spec: QuadraticSurfaceSpec, desc: NormDescriptor) -> float:
    pn = float(np.linalg.norm(spec.p))
    b = great_sphere_moment(desc, spec.p)
    return float(np.sum(b * spec.m)) / (2.0 * pn)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    kappa: float
    limit: float
    rel_error: float


def stability_sweep(spec: QuadraticSurfaceSpec, desc: NormDescriptor, alphas) -> list[SweepRow]:
    alphas = [float(a) for a in alphas]
    for a in alphas:
        _check_alpha(a)
    lim = local_limit_curvature(spec, desc)
    rows = []
    for a in alphas:
        k = kappa_alpha(spec, desc, a)
        if not math.isfinite(k):
            raise CurvatureError(f"non-finite curvature at alpha={a}")
        rel = abs(k - lim) / abs(lim) if lim != 0.0 else abs(k - lim)
        rows.append(SweepRow(a, k, lim, rel))
    return rows


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "kappa", "limit", "rel_error"])
        for r in rows:
            w.writerow([repr(r.alpha), repr(r.kappa), repr(r.limit), repr(r.rel_error)])
