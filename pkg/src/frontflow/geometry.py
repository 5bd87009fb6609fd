"""Fronts of 2-D phase fields and the geometric diagnostics built on them.

Fronts are traced with marching squares at level 0.  On a {-1, +1} field
every crossing sits at the midpoint of a cell edge, so front positions are
accurate to O(dx).  Distances come in two metrics: Euclidean, and the dual
mobility norm ``Phi°`` of an :class:`~frontflow.anisotropy.AnisotropyTable`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import fft, ndimage
from scipy.spatial import ConvexHull, HalfspaceIntersection, cKDTree
from skimage import measure

from .anisotropy import AnisotropyTable, phi_dual


PHASE_SMOOTH = 1.2


class GeometryError(ValueError):
    pass


def _loop_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _loop_perimeter(v: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)))


@dataclass(frozen=True, eq=False)
class FrontPolyline:
    """Closed loops (no repeated end vertex); the inside lies to the left."""

    loops: tuple

    @classmethod
    def from_loops(cls, loops) -> "FrontPolyline":
        return cls(tuple(np.asarray(v, dtype=float) for v in loops if len(v) >= 3))

    @property
    def empty(self) -> bool:
        return len(self.loops) == 0

    @property
    def vertices(self) -> np.ndarray:
        if self.empty:
            return np.zeros((0, 2))
        return np.concatenate(self.loops)

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        if self.empty:
            return np.zeros((0, 2)), np.zeros((0, 2))
        a = np.concatenate(self.loops)
        b = np.concatenate([np.roll(v, -1, axis=0) for v in self.loops])
        return a, b

    @property
    def loop_areas(self) -> list[float]:
        return [_loop_area(v) for v in self.loops]

    @property
    def area(self) -> float:
        return float(sum(self.loop_areas))

    @property
    def perimeter(self) -> float:
        return float(sum(_loop_perimeter(v) for v in self.loops))

    def scaled(self, s: float, center=(0.0, 0.0)) -> "FrontPolyline":
        c = np.asarray(center, dtype=float)
        return FrontPolyline(tuple(c + s * (v - c) for v in self.loops))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["loop", "x", "y"])
            for k, v in enumerate(self.loops):
                for x, y in v:
                    w.writerow([k, repr(float(x)), repr(float(y))])


def extract_front(grid, smooth: float | None = None) -> FrontPolyline:
    """Zero contour of a 2-D phase (or level-set) field.

    Binary phase fields are first blurred by a Gaussian of ``smooth`` cells
    (default ``PHASE_SMOOTH``); the raw edge-midpoint contour of a digitised
    curve is a staircase whose length overshoots the true perimeter by ~5%.
    Real-valued fields are contoured as they are unless ``smooth`` is given.
    """
    vals = np.asarray(grid.values, dtype=float)
    if vals.ndim != 2:
        raise GeometryError("front extraction is 2-D only")
    if not (vals > 0).any():
        return FrontPolyline(())
    if smooth is None:
        smooth = PHASE_SMOOTH if np.all(np.abs(vals) == 1.0) else 0.0
    if smooth > 0:
        vals = ndimage.gaussian_filter(vals, smooth, mode="nearest")
    # pad with the outside phase so every contour closes
    low = min(float(vals.min()), -1.0)
    padded = np.pad(vals, 1, constant_values=low)
    contours = measure.find_contours(padded, 0.0, fully_connected="high", positive_orientation="high")
    loops = []
    for c in contours:
        if len(c) > 1 and np.allclose(c[0], c[-1]):
            c = c[:-1]
        pts = grid.origin + (c - 1.0) * grid.spacing
        loops.append(pts)
    front = FrontPolyline.from_loops(loops)
    # find_contours orients in (row, col) index space; our axes are (x, y) = (row, col),
    # which is a reflection of image coordinates, so fix the sign once globally
    if front.area < 0:
        front = FrontPolyline(tuple(v[::-1] for v in front.loops))
    return front


# ---------------------------------------------------------------------------
# distances


def _directed_euclid(pts: np.ndarray, a: np.ndarray, b: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Distance from each point to the nearest segment [a_k, b_k]."""
    d = b - a
    dd = np.maximum(np.sum(d * d, axis=1), 1e-300)
    out = np.empty(len(pts))
    for s in range(0, len(pts), chunk):
        p = pts[s : s + chunk, None, :]
        t = np.clip(np.sum((p - a) * d, axis=-1) / dd, 0.0, 1.0)
        diff = p - a - t[..., None] * d
        out[s : s + chunk] = np.sqrt(np.min(np.sum(diff * diff, axis=-1), axis=1))
    return out


def _densify(front: FrontPolyline, step: float) -> np.ndarray:
    a, b = front.segments()
    out = [a]
    seg = np.linalg.norm(b - a, axis=1)
    n = np.maximum(np.ceil(seg / step).astype(int), 1)
    for k in range(1, int(n.max())):
        m = n > k
        t = (k / n[m])[:, None]
        out.append(a[m] + t * (b[m] - a[m]))
    return np.concatenate(out)


def _metric_scale(table: AnisotropyTable) -> tuple[float, float]:
    """(rmin, rmax) with |x|/rmax <= Phi°(x) <= |x|/rmin."""
    r = np.linalg.norm(table.wulff_vertices, axis=1)
    return float(np.min(table.phi)), float(r.max())


def _directed_phi(pts: np.ndarray, target: FrontPolyline, table: AnisotropyTable, step: float) -> np.ndarray:
    dense = _densify(target, step)
    tree = cKDTree(dense)
    de, _ = tree.query(pts)
    rmin, rmax = _metric_scale(table)
    out = np.empty(len(pts))
    # a Phi°-nearest point is within Euclidean distance de * rmax / rmin
    for i, (p, r) in enumerate(zip(pts, de)):
        idx = tree.query_ball_point(p, r * rmax / rmin * (1.0 + 1e-9) + 1e-15)
        out[i] = np.min(phi_dual(dense[idx] - p, table))
    return out


def _resolution(a: FrontPolyline, b: FrontPolyline) -> float:
    sa, ea = a.segments()
    sb, eb = b.segments()
    seg = np.concatenate([np.linalg.norm(ea - sa, axis=1), np.linalg.norm(eb - sb, axis=1)])
    return float(np.median(seg))


def _check_nonempty(a: FrontPolyline, b: FrontPolyline) -> None:
    if a.empty or b.empty:
        raise GeometryError("distance between empty fronts is undefined")


def directed_distances(a: FrontPolyline, b: FrontPolyline, table: AnisotropyTable | None = None, densify: float = 0.05):
    """Distances from the vertices of ``a`` to the curve ``b``."""
    if a.empty or b.empty:
        raise GeometryError("distance between empty fronts is undefined")
    if table is None:
        return _directed_euclid(a.vertices, *b.segments())
    return _directed_phi(a.vertices, b, table, densify * _resolution(a, b))


def hausdorff(a: FrontPolyline, b: FrontPolyline, table: AnisotropyTable | None = None) -> float:
    """Symmetric Hausdorff distance (Euclidean, or Phi° when ``table`` is given)."""
    _check_nonempty(a, b)
    if table is None:
        return float(max(directed_distances(a, b).max(), directed_distances(b, a).max()))
    step = 0.05 * _resolution(a, b)
    dab = _directed_phi(a.vertices, b, table, step).max()
    dba = _directed_phi(b.vertices, a, table, step).max()
    return float(max(dab, dba))


def boundary_gap(a: FrontPolyline, b: FrontPolyline, table: AnisotropyTable | None = None) -> float:
    """Smallest distance between the two curves."""
    _check_nonempty(a, b)
    step = 0.05 * _resolution(a, b)
    if table is None:
        return float(min(directed_distances(a, b).min(), directed_distances(b, a).min()))
    return float(min(_directed_phi(a.vertices, b, table, step).min(), _directed_phi(b.vertices, a, table, step).min()))


# ---------------------------------------------------------------------------
# shape statistics


def convexity_defects(front: FrontPolyline) -> list[float]:
    out = []
    for v in front.loops:
        area = abs(_loop_area(v))
        hull = ConvexHull(v).volume
        out.append(max(0.0, 1.0 - area / hull) if hull > 0 else 0.0)
    return out


def convexity_defect(front: FrontPolyline) -> float:
    """1 - area / hull area; the max over loops when there are several."""
    if front.empty:
        raise GeometryError("convexity defect of an empty front")
    return float(max(convexity_defects(front)))


def radius_stats(front: FrontPolyline, center=(0.0, 0.0)) -> tuple[float, float, float]:
    if front.empty:
        raise GeometryError("radius statistics of an empty front")
    r = np.linalg.norm(front.vertices - np.asarray(center, dtype=float), axis=1)
    return float(r.min()), float(r.mean()), float(r.max())


def equivalent_radius(grid) -> float:
    """Radius of the disk with the same area as the +1 region."""
    return float(np.sqrt(grid.volume() / np.pi))


# ---------------------------------------------------------------------------
# Wulff morphology


def wulff_element(radius: float, spacing: float, table: AnisotropyTable) -> np.ndarray:
    """Boolean stencil {k : Phi°(k dx) <= radius}."""
    rmax = float(np.linalg.norm(table.wulff_vertices, axis=1).max())
    k = int(np.ceil(radius * rmax / spacing)) + 1
    ax = np.arange(-k, k + 1) * spacing
    pts = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)
    return phi_dual(pts, table) <= radius * (1.0 + 1e-12)


def _fft_dilate(mask: np.ndarray, elem: np.ndarray) -> np.ndarray:
    k = elem.shape[0] // 2
    shape = tuple(fft.next_fast_len(n + 2 * k, real=True) for n in mask.shape)
    full = fft.irfftn(fft.rfftn(mask.astype(float), shape) * fft.rfftn(elem.astype(float), shape), shape)
    return full[k : k + mask.shape[0], k : k + mask.shape[1]] > 0.5


def morph_mask(mask: np.ndarray, radius: float, spacing: float, table: AnisotropyTable) -> np.ndarray:
    """Dilate (radius > 0) or erode (radius < 0) a boolean mask by |radius| W."""
    if radius == 0:
        return mask.copy()
    elem = wulff_element(abs(radius), spacing, table)
    if radius > 0:
        return _fft_dilate(mask, elem)
    # erosion = complement of the dilated complement; outside the grid is outside the set
    k = elem.shape[0] // 2
    comp = np.pad(~mask, k, constant_values=True)
    return ~_fft_dilate(comp, elem)[k:-k, k:-k]


def wulff_support_points(table: AnisotropyTable, n: int = 64) -> np.ndarray:
    """Support points of W in ``n`` evenly spaced directions (its significant corners)."""
    ang = 2.0 * np.pi * np.arange(n) / n
    d = np.column_stack([np.cos(ang), np.sin(ang)])
    idx = np.unique(np.argmax(d @ table.wulff_vertices.T, axis=1))
    return table.wulff_vertices[idx]


def _bilinear_shift(padded: np.ndarray, z: np.ndarray, shape) -> np.ndarray:
    """u(x + z) for |z_i| <= 1 cell, from a field padded by one edge cell."""
    out = np.zeros(shape)
    i0 = np.floor(z).astype(int)
    f = z - i0
    for di, wi in ((0, 1.0 - f[0]), (1, f[0])):
        for dj, wj in ((0, 1.0 - f[1]), (1, f[1])):
            w = wi * wj
            if w == 0.0:
                continue
            a, b = 1 + i0[0] + di, 1 + i0[1] + dj
            out += w * padded[a : a + shape[0], b : b + shape[1]]
    return out


def morph_levelset(values: np.ndarray, radius: float, spacing: float, table: AnisotropyTable) -> np.ndarray:
    """Hopf-Lax update of a level-set field: sup (inf) of u over x + radius W.

    Every level set is dilated (eroded) by |radius| W.  The Minkowski sum is
    built from sub-cell increments, since (m s) W = s W + ... + s W for convex
    W; each increment takes the max over the support points of s W, read by
    bilinear interpolation with edge values held constant.
    """
    if radius == 0:
        return values.copy()
    corners = wulff_support_points(table)
    rmax = float(np.linalg.norm(corners, axis=1).max())
    m = max(1, int(np.ceil(abs(radius) * rmax / spacing)))
    zs = corners * (abs(radius) / m / spacing)
    pick = np.maximum if radius > 0 else np.minimum
    out = values.astype(float, copy=True)
    for _ in range(m):
        padded = np.pad(out, 1, mode="edge")
        acc = out
        for z in zs:
            acc = pick(acc, _bilinear_shift(padded, z, out.shape))
        out = acc
    return out


def morph_polyline(front: FrontPolyline, radius: float, table: AnisotropyTable) -> FrontPolyline:
    """Exact dilation/erosion of convex loops by |radius| W."""
    loops = []
    w = table.wulff_vertices * abs(radius)
    for v in front.loops:
        hull = ConvexHull(v)
        if len(hull.vertices) != len(v) and convexity_defects(FrontPolyline((v,)))[0] > 1e-12:
            raise GeometryError("polyline morphology needs convex loops")
        if radius > 0:
            s = (v[:, None, :] + w[None, :, :]).reshape(-1, 2)
            h = ConvexHull(s)
            loops.append(s[h.vertices])
            continue
        # erosion: shift each supporting line inward by the support of |radius| W
        eq = hull.equations  # n.x + c <= 0
        shift = np.max(eq[:, :2] @ w.T, axis=1)
        hs = np.column_stack([eq[:, :2], eq[:, 2] + shift])
        c = v.mean(axis=0)
        if np.any(hs[:, :2] @ c + hs[:, 2] >= 0):
            # find an interior point, if any, by a Chebyshev-centre linear program
            from scipy.optimize import linprog

            nrm = np.linalg.norm(hs[:, :2], axis=1)
            res = linprog(
                [0, 0, -1], A_ub=np.column_stack([hs[:, :2], nrm]), b_ub=-hs[:, 2], bounds=[(None, None)] * 2 + [(0, None)]
            )
            if not res.success or res.x[2] <= 1e-12:
                continue
            c = res.x[:2]
        pts = HalfspaceIntersection(hs, c).intersections
        h = ConvexHull(pts)
        loops.append(pts[h.vertices])
    return FrontPolyline.from_loops(loops)


def wulff_morph(obj, radius: float, table: AnisotropyTable):
    """Minkowski dilation (radius > 0) or erosion (radius < 0) by |radius| W.

    Accepts a phase grid (the +1 set is morphed), a level-set grid (every
    level set is morphed, via the Hopf-Lax formula) or a convex polyline.
    """
    if isinstance(obj, FrontPolyline):
        return morph_polyline(obj, radius, table)
    vals = obj.values
    if vals.ndim != 2:
        raise GeometryError("grid morphology is 2-D only")
    if 0 < abs(radius) < obj.spacing:
        raise GeometryError(f"|radius| {abs(radius):.3g} is below the grid spacing {obj.spacing:.3g}")
    phase = bool(np.all(np.abs(vals) == 1.0))
    if phase:
        new = morph_mask(vals > 0, radius, obj.spacing, table)
        return obj.with_values(np.where(new, 1.0, -1.0))
    return obj.with_values(morph_levelset(vals, radius, obj.spacing, table))
