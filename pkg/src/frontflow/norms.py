"""Anisotropy norms on R^N.

A :class:`NormDescriptor` is an immutable description of a symmetric norm.
Four families are built in:

* ``euclidean``: ``|x|``
* ``pnorm``: ``(sum |x_i|^q)^(1/q)``, ``q`` in ``[1, inf]``
* ``ellipse``: ``sqrt(x^T M x)`` for a symmetric positive-definite ``M``
* ``polygon`` (2-D only): the Minkowski gauge of a centrally symmetric
  convex polygon, evaluated exactly as a max over its facet inequalities.

All evaluators are vectorised over leading axes: ``norm_eval(desc, x)``
accepts ``x`` of shape ``(..., N)`` and returns shape ``(...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

KINDS = ("euclidean", "pnorm", "ellipse", "polygon")
SYMMETRY_TOL = 1e-12
# polygon equivalence constants come from sampling; see equivalence_constant
POLYGON_SAMPLES = 4096
POLYGON_SAFETY = 1.01


class NormError(ValueError):
    """Invalid norm construction or evaluation."""


@dataclass(frozen=True, eq=False)
class NormDescriptor:
    kind: str
    dim: int
    q: float | None = None
    matrix: np.ndarray | None = None
    vertices: np.ndarray | None = None
    # polygon facets: gauge(x) = max_j <facets[j], x>
    facets: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise NormError(f"unknown norm kind {self.kind!r}; expected one of {KINDS}")
        if self.dim < 2:
            raise NormError(f"dimension must be >= 2, got {self.dim}")

    def __call__(self, x) -> np.ndarray:
        return norm_eval(self, x)

    @property
    def label(self) -> str:
        if self.kind == "pnorm":
            return f"pnorm(q={self.q:g})"
        if self.kind == "ellipse":
            return "ellipse(" + ",".join(f"{v:g}" for v in self.matrix.ravel()) + ")"
        if self.kind == "polygon":
            return f"polygon({len(self.vertices)} vertices)"
        return "euclidean"


def euclidean(dim: int = 2) -> NormDescriptor:
    return NormDescriptor("euclidean", int(dim))


def pnorm(q: float, dim: int = 2) -> NormDescriptor:
    q = float(q)
    if not q >= 1.0:
        raise NormError(f"pnorm exponent q must be >= 1 (or inf), got {q}")
    return NormDescriptor("pnorm", int(dim), q=q)


def ellipse(matrix) -> NormDescriptor:
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NormError(f"ellipse matrix must be square, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise NormError("ellipse matrix must be symmetric")
    if np.linalg.eigvalsh(m).min() <= 0.0:
        raise NormError("ellipse matrix must be positive definite")
    m = 0.5 * (m + m.T)
    m.setflags(write=False)
    return NormDescriptor("ellipse", m.shape[0], matrix=m)


def polygon(vertices) -> NormDescriptor:
    """Gauge of the convex hull of ``vertices`` (must be centrally symmetric)."""
    pts = np.array(vertices, dtype=float).reshape(-1, 2)
    if len(pts) < 4:
        raise NormError("polygon norm needs at least 4 vertices")
    try:
        hull = ConvexHull(pts)
    except Exception as exc:  # qhull raises its own error type
        raise NormError(f"degenerate polygon: {exc}") from exc
    hv = pts[hull.vertices]
    scale = np.abs(hv).max()
    # every hull vertex must have its antipode among the hull vertices
    d = np.linalg.norm(hv[:, None, :] + hv[None, :, :], axis=-1)
    if d.min(axis=1).max() > SYMMETRY_TOL * max(1.0, scale):
        raise NormError("polygon vertices are not centrally symmetric")
    # hull.equations rows: n.x + c <= 0 inside, so gauge = max n.x / (-c)
    eq = hull.equations
    if np.any(eq[:, 2] >= 0.0):
        raise NormError("origin must lie strictly inside the polygon")
    facets = eq[:, :2] / (-eq[:, 2])[:, None]
    order = np.argsort(np.arctan2(hv[:, 1], hv[:, 0]))
    hv = hv[order]
    hv.setflags(write=False)
    facets.setflags(write=False)
    return NormDescriptor("polygon", 2, vertices=hv, facets=facets)


def from_config(kind: str, dim: int, q=None, matrix=None, vertices=None) -> NormDescriptor:
    if kind == "euclidean":
        return euclidean(dim)
    if kind == "pnorm":
        if q is None:
            raise NormError("pnorm requires q")
        return pnorm(q, dim)
    if kind == "ellipse":
        if matrix is None:
            raise NormError("ellipse requires matrix")
        m = np.asarray(matrix, dtype=float)
        if m.size != dim * dim:
            raise NormError(f"ellipse matrix needs {dim * dim} entries, got {m.size}")
        return ellipse(m.reshape(dim, dim))
    if kind == "polygon":
        if dim != 2:
            raise NormError("polygon norms are only defined for N=2")
        if vertices is None:
            raise NormError("polygon requires vertices")
        return polygon(vertices)
    raise NormError(f"unknown norm kind {kind!r}")


def norm_eval(desc: NormDescriptor, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != desc.dim:
        raise NormError(f"dimension mismatch: norm is {desc.dim}-D, got vectors of length {x.shape[-1]}")
    if desc.kind == "euclidean":
        return np.sqrt(np.sum(x * x, axis=-1))
    if desc.kind == "pnorm":
        q = desc.q
        ax = np.abs(x)
        if np.isinf(q):
            return ax.max(axis=-1)
        if q == 1.0:
            return ax.sum(axis=-1)
        # scale by the max entry to avoid overflow in ax**q
        s = ax.max(axis=-1)
        safe = np.where(s > 0, s, 1.0)
        return s * np.sum((ax / safe[..., None]) ** q, axis=-1) ** (1.0 / q)
    if desc.kind == "ellipse":
        quad = np.einsum("...i,ij,...j->...", x, desc.matrix, x)
        return np.sqrt(np.maximum(quad, 0.0))
    # polygon
    return np.max(x @ desc.facets.T, axis=-1)


def unit_circle(n: int) -> np.ndarray:
    phi = 2.0 * np.pi * np.arange(n) / n
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


def equivalence_constant(desc: NormDescriptor) -> float:
    """Smallest ``C >= 1`` with ``|x|/C <= N(x) <= C|x|`` (see module notes)."""
    n = desc.dim
    if desc.kind == "euclidean":
        return 1.0
    if desc.kind == "pnorm":
        q = desc.q
        inv_q = 0.0 if np.isinf(q) else 1.0 / q
        return float(n ** abs(inv_q - 0.5))
    if desc.kind == "ellipse":
        ev = np.linalg.eigvalsh(desc.matrix)
        return float(max(np.sqrt(ev.max()), 1.0 / np.sqrt(ev.min()), 1.0))
    vals = norm_eval(desc, unit_circle(POLYGON_SAMPLES))
    return float(max(vals.max(), 1.0 / vals.min(), 1.0) * POLYGON_SAFETY)
