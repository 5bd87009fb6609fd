"""Limit-flow quantities: mobility, anisotropy matrix, mobility norm, Wulff shape.

For a direction ``p`` the hyperplane and great-sphere integrals split into a
closed-form radial moment and an angular integral over ``S^{N-1} ∩ p^⊥``:

    mu(p)   = [2 * R(N-2, N+alpha) * I_{N-1}(p)]^{-1}
    A(p)    = C_{N,alpha} * int_{S ∩ p^⊥} theta⊗theta N(theta)^{-(N+1)}
    Phi(p)  = mu(p) |p|

with ``I_k(p) = int_{S ∩ p^⊥} N(theta)^{-k}``.  In two dimensions
``S ∩ p^⊥`` is the pair ``±theta_p`` and the angular integrals are sums.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import HalfspaceIntersection

from . import quadrature
from .norms import NormDescriptor, norm_eval

DEFAULT_NDIRS = 1024


class AnisotropyError(ValueError):
    pass


def _check(alpha: float) -> None:
    if not 1.0 <= alpha < 2.0:
        raise AnisotropyError(f"alpha must be in [1,2), got {alpha}")


def _unit(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    nrm = np.linalg.norm(p)
    if nrm == 0.0:
        raise AnisotropyError("direction p must be nonzero")
    return p / nrm


def c_const(n: int, alpha: float) -> float:
    """C_{N,alpha}; equal to 1 at alpha=1 by convention."""
    _check(alpha)
    if alpha == 1.0:
        return 1.0
    return quadrature.radial_moment_closed(n, n + alpha)


def c_const_quad(n: int, alpha: float) -> float:
    _check(alpha)
    if alpha == 1.0:
        return 1.0
    return quadrature.radial_moment_quad(n, n + alpha)


def lambda_const(n: int, alpha: float) -> float:
    """lambda_{alpha,N} = [int_0^inf t^{N-2}/(1+t^{N+alpha}) dt]^{-1}."""
    if n < 2:
        raise AnisotropyError("N must be >= 2")
    return 1.0 / quadrature.radial_moment_closed(n - 2, n + alpha)


def lambda_const_quad(n: int, alpha: float) -> float:
    return 1.0 / quadrature.radial_moment_quad(n - 2, n + alpha)


def _perp_integral(desc: NormDescriptor, u: np.ndarray, f, rtol=1e-10):
    # polygon norms are 2-D only, so the great sphere is never a kinked circle here
    return quadrature.sphere_integral(f, quadrature.orthonormal_complement(u), rtol=rtol)


def hyperplane_angular(desc: NormDescriptor, p) -> float:
    """I_{N-1}(p) = int_{S ∩ p^⊥} N(theta)^{-(N-1)} dH^{N-2}."""
    u = _unit(p)
    n = desc.dim
    return float(_perp_integral(desc, u, lambda th: norm_eval(desc, th) ** (-(n - 1))))


def mobility_mu(desc: NormDescriptor, alpha: float, p) -> float:
    n = desc.dim
    radial = quadrature.radial_moment_closed(n - 2, n + alpha)
    return 1.0 / (2.0 * radial * hyperplane_angular(desc, p))


def mobility_norm_phi(desc: NormDescriptor, alpha: float, p) -> float:
    p = np.asarray(p, dtype=float)
    nrm = float(np.linalg.norm(p))
    if nrm == 0.0:
        return 0.0
    return mobility_mu(desc, alpha, p) * nrm


def great_sphere_moment(desc: NormDescriptor, p) -> np.ndarray:
    """int_{S ∩ p^⊥} theta⊗theta N(theta)^{-(N+1)} dH^{N-2}."""
    u = _unit(p)
    n = desc.dim

    def f(th):
        return np.outer(th, th) * norm_eval(desc, th) ** (-(n + 1))

    m = np.asarray(_perp_integral(desc, u, f), dtype=float)
    return 0.5 * (m + m.T)


def anisotropy_matrix(desc: NormDescriptor, alpha: float, p) -> np.ndarray:
    return c_const(desc.dim, alpha) * great_sphere_moment(desc, p)


def curvature_operator(m, p, amat=None, desc: NormDescriptor | None = None, alpha: float | None = None) -> float:
    """F_alpha(M, p) = tr(M A(p/|p|)); pass ``amat`` or ``(desc, alpha)``."""
    if amat is None:
        if desc is None or alpha is None:
            raise AnisotropyError("curvature_operator needs amat or (desc, alpha)")
        amat = anisotropy_matrix(desc, alpha, p)
    else:
        _unit(p)
    return float(np.sum(np.asarray(m, dtype=float) * amat))


def char_constant_2d(n_alpha: float) -> float:
    """The constant c with Phi(p1, p2) = c * N(-p2, p1) in 2-D.

    Evaluating the two-point sum gives ``lambda_{alpha,2} / 4``.
    """
    return lambda_const(2, n_alpha) / 4.0


# ---------------------------------------------------------------------------
# direction table


@dataclass(frozen=True, eq=False)
class AnisotropyTable:
    dim: int
    alpha: float
    norm: NormDescriptor
    dirs: np.ndarray  # (n_dirs, N) unit vectors
    mu: np.ndarray
    amat: np.ndarray  # (n_dirs, N, N)
    phi: np.ndarray  # Phi(theta_k) = mu(theta_k)
    c_n_alpha: float
    lam: float
    wulff_vertices: np.ndarray  # unit-scale Wulff polygon (2-D), counter-clockwise
    # 2-D extras for fast lookups
    angles: np.ndarray | None = None
    tangent_coef: np.ndarray | None = None  # a(theta) with A = a theta^⊥⊗theta^⊥
    _edge_normals: np.ndarray | None = None
    _edge_angles: np.ndarray | None = None

    @property
    def n_dirs(self) -> int:
        return len(self.dirs)

    @property
    def phi_dual_vertices(self) -> np.ndarray:
        return self.wulff_vertices

    def interp(self, angle: np.ndarray):
        """Linear-in-angle interpolation of (mu, a) for 2-D tables."""
        if self.dim != 2:
            raise AnisotropyError("angle interpolation is only available for 2-D tables")
        n = self.n_dirs
        t = np.mod(angle, 2.0 * np.pi) * (n / (2.0 * np.pi))
        i0 = np.floor(t).astype(np.int64) % n
        w = t - np.floor(t)
        i1 = (i0 + 1) % n
        mu = (1.0 - w) * self.mu[i0] + w * self.mu[i1]
        a = (1.0 - w) * self.tangent_coef[i0] + w * self.tangent_coef[i1]
        return mu, a

    def max_diffusion(self) -> float:
        lam = np.linalg.eigvalsh(self.amat)[:, -1]
        return float(np.max(self.mu * lam))

    def to_csv(self, path) -> None:
        n = self.dim
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            head = [f"theta{i}" for i in range(n)] + ["mu"]
            head += [f"A{i}{j}" for i in range(n) for j in range(n)] + ["phi"]
            if n == 2:
                head = ["angle"] + head
            w.writerow(head)
            for k in range(self.n_dirs):
                row = [repr(float(v)) for v in self.dirs[k]] + [repr(float(self.mu[k]))]
                row += [repr(float(v)) for v in self.amat[k].ravel()] + [repr(float(self.phi[k]))]
                if n == 2:
                    row = [repr(float(self.angles[k]))] + row
                w.writerow(row)


def _sphere_dirs(n_dirs: int) -> np.ndarray:
    """Fibonacci points on S^2, symmetric under x -> -x."""
    half = n_dirs // 2
    i = np.arange(half) + 0.5
    z = 1.0 - i / half  # z in (0, 1]
    golden = math.pi * (3.0 - math.sqrt(5.0))
    phi = golden * np.arange(half)
    r = np.sqrt(1.0 - z * z)
    pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
    return np.concatenate([pts, -pts])


def wulff_polygon(dirs: np.ndarray, support: np.ndarray) -> np.ndarray:
    """Vertices of {x : <x, d_k> <= support_k for all k}, counter-clockwise."""
    hs = np.column_stack([dirs, -support])
    inter = HalfspaceIntersection(hs, np.zeros(2))
    pts = inter.intersections
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    pts = pts[np.argsort(ang)]
    # qhull can report near-duplicate intersections of nearly parallel lines
    keep = np.ones(len(pts), dtype=bool)
    scale = np.abs(pts).max()
    for i in range(1, len(pts)):
        if np.linalg.norm(pts[i] - pts[i - 1]) < 1e-13 * scale:
            keep[i] = False
    return pts[keep]


def _edge_data(verts: np.ndarray):
    nxt = np.roll(verts, -1, axis=0)
    edge = nxt - verts
    # outward normal of a ccw polygon edge, scaled so <normal, x> = 1 on the edge
    normal = np.column_stack([edge[:, 1], -edge[:, 0]])
    h = np.sum(normal * verts, axis=1)
    normal = normal / h[:, None]
    ang = np.mod(np.arctan2(verts[:, 1], verts[:, 0]), 2.0 * np.pi)
    order = np.argsort(ang)
    return normal[order], ang[order]


def build_direction_table(desc: NormDescriptor, alpha: float, n_dirs: int = DEFAULT_NDIRS) -> AnisotropyTable:
    _check(alpha)
    n = desc.dim
    c = c_const(n, alpha)
    lam = lambda_const(n, alpha)
    if n == 2:
        if n_dirs < 64:
            raise AnisotropyError(f"n_dirs must be >= 64, got {n_dirs}")
        ang = 2.0 * np.pi * np.arange(n_dirs) / n_dirs
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        perp = np.stack([-dirs[:, 1], dirs[:, 0]], axis=-1)
        nperp = norm_eval(desc, perp)
        radial = quadrature.radial_moment_closed(0, 2 + alpha)
        # two-point sums over ±perp
        mu = 1.0 / (2.0 * radial * 2.0 / nperp)
        a = 2.0 * c / nperp**3
        amat = a[:, None, None] * perp[:, :, None] * perp[:, None, :]
        phi = mu.copy()
        verts = wulff_polygon(dirs, phi)
        en, ea = _edge_data(verts)
        return AnisotropyTable(2, alpha, desc, dirs, mu, amat, phi, c, lam, verts, ang, a, en, ea)
    if n == 3:
        dirs = _sphere_dirs(max(n_dirs, 64))
        mu = np.array([mobility_mu(desc, alpha, d) for d in dirs])
        amat = np.array([c * great_sphere_moment(desc, d) for d in dirs])
        return AnisotropyTable(3, alpha, desc, dirs, mu, amat, mu.copy(), c, lam, np.empty((0, 3)))
    raise AnisotropyError("direction tables are built for N=2 or N=3")


def wulff_boundary(c: float, table: AnisotropyTable):
    """Boundary polyline of c * W, W = {x : <x, theta> <= Phi(theta)}."""
    from .geometry import FrontPolyline

    if table.dim != 2:
        raise AnisotropyError("wulff_boundary is 2-D only")
    if not c > 0:
        raise AnisotropyError(f"Wulff scale c must be > 0, got {c}")
    return FrontPolyline.from_loops([c * table.wulff_vertices])


def phi_dual(x, table: AnisotropyTable) -> np.ndarray:
    """Dual norm max_k <x, theta_k> / Phi(theta_k), vectorised over x[..., :]."""
    x = np.asarray(x, dtype=float)
    if table.dim == 2:
        # the gauge of the Wulff polygon: locate the edge whose angular sector holds x
        ang = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2.0 * np.pi)
        idx = np.searchsorted(table._edge_angles, ang, side="right") - 1
        idx = np.mod(idx, len(table._edge_angles))
        nrm = table._edge_normals[idx]
        val = x[..., 0] * nrm[..., 0] + x[..., 1] * nrm[..., 1]
        return np.maximum(val, 0.0)
    w = table.dirs / table.phi[:, None]
    return np.max(x @ w.T, axis=-1)


def phi_dual_bruteforce(x, table: AnisotropyTable) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    w = table.dirs / table.phi[:, None]
    return np.max(x @ w.T, axis=-1)


def wulff_radius_range(table: AnisotropyTable) -> tuple[float, float]:
    """(min, max) Euclidean radius of the unit Wulff shape."""
    r = np.linalg.norm(table.wulff_vertices, axis=1)
    # inradius is the min support value
    return float(np.min(table.phi)), float(r.max())
