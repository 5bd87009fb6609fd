"""Raw grid snapshots and PGM previews.

``.grid`` layout (all little-endian)::

    b"AMCF"                     magic
    uint32 version (= 1)
    uint32 N
    uint32 dims[N]
    float64 spacing[N], origin[N], time
    float32 values[prod(dims)]  row-major

so the header is ``4 + 4 + 4 + 4N + 8(2N + 1)`` bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"AMCF"
VERSION = 1


class SnapshotError(OSError):
    pass


@dataclass(frozen=True, eq=False)
class GridSnapshot:
    values: np.ndarray
    spacing: np.ndarray
    origin: np.ndarray
    time: float


def header_size(n: int) -> int:
    return 4 + 4 + 4 + 4 * n + 8 * (2 * n + 1)


def encode_grid(values, spacing, origin, time: float) -> bytes:
    vals = np.ascontiguousarray(values, dtype="<f4")
    n = vals.ndim
    sp = np.broadcast_to(np.asarray(spacing, dtype=float), (n,))
    org = np.broadcast_to(np.asarray(origin, dtype=float), (n,))
    head = MAGIC + struct.pack(f"<II{n}I", VERSION, n, *vals.shape)
    head += struct.pack(f"<{2 * n + 1}d", *sp, *org, float(time))
    return head + vals.tobytes(order="C")


def decode_grid(data: bytes) -> GridSnapshot:
    if data[:4] != MAGIC:
        raise SnapshotError("not a grid snapshot (bad magic)")
    version, n = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    dims = struct.unpack_from(f"<{n}I", data, 12)
    floats = struct.unpack_from(f"<{2 * n + 1}d", data, 12 + 4 * n)
    off = header_size(n)
    count = int(np.prod(dims))
    if len(data) != off + 4 * count:
        raise SnapshotError(f"snapshot payload is {len(data) - off} bytes, expected {4 * count}")
    vals = np.frombuffer(data, dtype="<f4", count=count, offset=off).reshape(dims)
    return GridSnapshot(vals.copy(), np.array(floats[:n]), np.array(floats[n : 2 * n]), floats[2 * n])


def write_grid_snapshot(grid, path) -> None:
    path = Path(path)
    n = grid.values.ndim
    data = encode_grid(grid.values, np.full(n, grid.spacing), grid.origin, grid.time)
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise SnapshotError(f"cannot write {path}: {exc}") from exc


def read_grid_snapshot(path) -> GridSnapshot:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read {path}: {exc}") from exc
    return decode_grid(data)


def encode_pgm(values) -> bytes:
    """Binary P5 image: phase -1 (or any negative value) -> 0, positive -> 255."""
    vals = np.asarray(values)
    if vals.ndim != 2:
        raise SnapshotError("PGM previews are 2-D only")
    img = np.where(vals > 0, 255, 0).astype(np.uint8)
    # rows of the image run along the second axis so that +y points up
    img = img.T[::-1]
    head = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    return head + img.tobytes()


def write_pgm(grid, path) -> None:
    path = Path(path)
    try:
        path.write_bytes(encode_pgm(grid.values))
    except OSError as exc:
        raise SnapshotError(f"cannot write {path}: {exc}") from exc
