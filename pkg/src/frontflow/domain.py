"""Computational domains and initial-set descriptions.

A domain is the cube ``[-extent, extent]^N`` split into ``cells`` cells per
axis; values live at cell centres.  Initial sets are unions of balls,
axis-aligned boxes and convex polygons, written in the config as

    ball 0 0 1 + box -0.5 -0.5 0.5 0.5 + polygon 1 0 0 1 -1 0 0 -1

(``box`` takes the lower corner then the upper corner; ``polygon`` takes a
flat list of 2-D vertices in any cyclic order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    dim: int
    extent: float
    cells: int
    margin: int = 4

    def __post_init__(self) -> None:
        if self.dim not in (2, 3):
            raise DomainError(f"domain dimension must be 2 or 3, got {self.dim}")
        if not self.extent > 0:
            raise DomainError(f"extent must be > 0, got {self.extent}")
        if self.cells < 8:
            raise DomainError(f"need at least 8 cells per axis, got {self.cells}")
        if not 0 <= 2 * self.margin < self.cells:
            raise DomainError(f"margin {self.margin} leaves no interior in {self.cells} cells")

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / self.cells

    @property
    def origin(self) -> np.ndarray:
        """Coordinates of the centre of cell (0, ..., 0)."""
        return np.full(self.dim, -self.extent + 0.5 * self.spacing)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells,) * self.dim

    def axes(self) -> list[np.ndarray]:
        c = self.origin[0] + self.spacing * np.arange(self.cells)
        return [c] * self.dim

    def points(self) -> np.ndarray:
        """Cell centres, shape ``shape + (N,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)


# ---------------------------------------------------------------------------
# set primitives; ``sdist`` is a signed distance (positive inside)


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def contains(self, x):
        return np.linalg.norm(x - self.center, axis=-1) < self.radius

    def sdist(self, x):
        return self.radius - np.linalg.norm(x - self.center, axis=-1)

    def bounds(self):
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True, eq=False)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def contains(self, x):
        return np.all((x > self.lo) & (x < self.hi), axis=-1)

    def sdist(self, x):
        c = 0.5 * (self.lo + self.hi)
        half = 0.5 * (self.hi - self.lo)
        q = np.abs(x - c) - half
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(q.max(axis=-1), 0.0)
        return -(outside + inside)

    def bounds(self):
        return self.lo, self.hi


@dataclass(frozen=True, eq=False)
class Polygon:
    """Convex polygon (2-D) with counter-clockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self) -> None:
        hull = ConvexHull(self.vertices)
        if len(hull.vertices) != len(self.vertices):
            raise DomainError("polygon initial sets must be convex with no repeated or interior vertices")
        # reorder counter-clockwise
        object.__setattr__(self, "vertices", self.vertices[hull.vertices])

    def _normals(self):
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        n = np.column_stack([e[:, 1], -e[:, 0]])
        n /= np.linalg.norm(n, axis=1)[:, None]
        off = np.sum(n * v, axis=1)
        return n, off

    def contains(self, x):
        n, off = self._normals()
        return np.all(x @ n.T < off, axis=-1)

    def sdist(self, x):
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        d = _point_segment_dist(x, v, w)
        return np.where(self.contains(x), d, -d)

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def _point_segment_dist(x, a, b):
    """min over segments [a_k, b_k] of |x - segment|; x has shape (..., 2)."""
    best = np.full(x.shape[:-1], np.inf)
    for p, q in zip(a, b):
        d = q - p
        t = np.clip(((x - p) @ d) / (d @ d), 0.0, 1.0)
        dist = np.linalg.norm(x - p - t[..., None] * d, axis=-1)
        best = np.minimum(best, dist)
    return best


@dataclass(frozen=True, eq=False)
class SetSpec:
    parts: tuple

    def contains(self, x):
        out = self.parts[0].contains(x)
        for p in self.parts[1:]:
            out = out | p.contains(x)
        return out

    def sdist(self, x):
        # max of signed distances: exact outside, a lower bound inside
        out = self.parts[0].sdist(x)
        for p in self.parts[1:]:
            out = np.maximum(out, p.sdist(x))
        return out

    def bounds(self):
        lo = np.min([p.bounds()[0] for p in self.parts], axis=0)
        hi = np.max([p.bounds()[1] for p in self.parts], axis=0)
        return lo, hi


def parse_set(text: str, dim: int) -> SetSpec:
    terms = [t.strip() for t in text.split("+")]
    if not text.strip() or any(not t for t in terms):
        raise DomainError("initial set is empty")
    parts = []
    for t in terms:
        kind, *rest = t.split()
        try:
            nums = np.array([float(v) for v in rest])
        except ValueError as exc:
            raise DomainError(f"bad number in set term {t!r}") from exc
        if kind == "ball":
            if len(nums) != dim + 1:
                raise DomainError(f"ball needs {dim} centre coordinates and a radius: {t!r}")
            if not nums[-1] > 0:
                raise DomainError(f"ball radius must be > 0: {t!r}")
            parts.append(Ball(nums[:dim], float(nums[-1])))
        elif kind == "box":
            if len(nums) != 2 * dim:
                raise DomainError(f"box needs {2 * dim} numbers: {t!r}")
            lo, hi = nums[:dim], nums[dim:]
            if np.any(hi <= lo):
                raise DomainError(f"box upper corner must exceed lower corner: {t!r}")
            parts.append(Box(lo, hi))
        elif kind == "polygon":
            if dim != 2:
                raise DomainError("polygon sets are 2-D only")
            if len(nums) < 6 or len(nums) % 2:
                raise DomainError(f"polygon needs at least 3 vertex pairs: {t!r}")
            parts.append(Polygon(nums.reshape(-1, 2)))
        else:
            raise DomainError(f"unknown set kind {kind!r} (expected ball, box or polygon)")
    return SetSpec(tuple(parts))


def regular_polygon(n: int, radius: float, center=(0.0, 0.0), phase: float = 0.0) -> SetSpec:
    ang = phase + 2.0 * np.pi * np.arange(n) / n
    v = np.column_stack([np.cos(ang), np.sin(ang)]) * radius + np.asarray(center)
    return SetSpec((Polygon(v),))


def check_inside(spec: SetSpec, domain: Domain) -> None:
    """Refuse sets that reach the margin band."""
    lo, hi = spec.bounds()
    limit = domain.extent - domain.margin * domain.spacing
    if np.any(lo <= -limit) or np.any(hi >= limit):
        raise DomainError(
            f"initial set (bounds {np.round(lo, 6).tolist()}..{np.round(hi, 6).tolist()}) "
            f"touches the margin band |x_i| >= {limit:.6g}"
        )
