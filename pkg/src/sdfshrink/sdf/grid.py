"""Regular-lattice signed distance field with trilinear interpolation.

Values are held as ``values[i, j, k]`` for the node at
``origin + spacing * (i, j, k)``. The on-disk SDFGRID1 layout is::

    8 bytes   b"SDFGRID1"
    3 x u32   nx, ny, nz                 (little-endian)
    3 x f64   origin
    1 x f64   spacing
    nx*ny*nz x f32 values, x fastest
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from os import PathLike

import numpy as np
import numpy.typing as npt

from sdfshrink.sdf.base import FloatArray, as_points

MAGIC = b"SDFGRID1"
_HEADER = struct.Struct("<3I3dd")
_SNAP = 1e-9


class GridDomainWarning(UserWarning):
    """Emitted when a grid is queried outside its sampled box; the query is clamped."""


@dataclass(frozen=True, eq=False)
class GridSdf:
    origin: FloatArray
    spacing: float
    values: FloatArray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        if values.ndim != 3 or min(values.shape) < 2:
            raise ValueError(f"grid needs at least 2 nodes per axis, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        if not (np.isfinite(self.spacing) and self.spacing > 0):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", float(self.spacing))

    @classmethod
    def sample(cls, field, lo, hi, resolution: int | tuple[int, int, int]) -> GridSdf:
        """Sample ``field`` on a cubic lattice spanning ``[lo, hi]``.

        An integer ``resolution`` sets the node count along the longest axis;
        the other axes get as many nodes as fit at the same spacing (at least 2).
        """
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        extent = hi - lo
        if isinstance(resolution, int):
            spacing = extent.max() / (resolution - 1)
            shape = np.maximum(np.ceil(extent / spacing - 1e-9).astype(int) + 1, 2)
        else:
            shape = np.asarray(resolution, dtype=int)
            spacing = (extent / (shape - 1)).max()
        axes = [lo[a] + spacing * np.arange(shape[a]) for a in range(3)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        return cls(lo, spacing, field.eval(pts).reshape(tuple(shape)))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    def bounds(self) -> tuple[FloatArray, FloatArray]:
        return self.origin, self.origin + self.spacing * (np.array(self.shape) - 1)

    def node_positions(self) -> FloatArray:
        axes = [self.origin[a] + self.spacing * np.arange(n) for a, n in enumerate(self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def outside_mask(self, points: npt.ArrayLike) -> npt.NDArray[np.bool_]:
        p = as_points(points)
        lo, hi = self.bounds()
        return np.any((p < lo) | (p > hi), axis=1)

    def _locate(self, points: npt.ArrayLike):
        p = as_points(points)
        outside = self.outside_mask(p)
        if outside.any():
            warnings.warn(
                f"{int(outside.sum())} point(s) outside grid bounds were clamped",
                GridDomainWarning,
                stacklevel=3,
            )
        n = np.array(self.shape)
        u = np.clip((p - self.origin) / self.spacing, 0.0, n - 1)
        r = np.rint(u)
        on_node = np.abs(u - r) < _SNAP
        u = np.where(on_node, r, u)
        cell = np.floor(u).astype(np.intp)
        # a point on a face belongs to the cell on the grid-centre side
        upper_half = u > (n - 1) / 2.0
        cell = np.where(on_node & upper_half, cell - 1, cell)
        cell = np.clip(cell, 0, n - 2)
        return cell, u - cell, outside

    def _corners(self, cell):
        i, j, k = cell.T
        v = self.values
        return (
            v[i, j, k], v[i + 1, j, k], v[i, j + 1, k], v[i + 1, j + 1, k],
            v[i, j, k + 1], v[i + 1, j, k + 1], v[i, j + 1, k + 1], v[i + 1, j + 1, k + 1],
        )

    def eval_flagged(self, points: npt.ArrayLike) -> tuple[FloatArray, npt.NDArray[np.bool_]]:
        """Trilinear values plus a mask of queries that had to be clamped into the box."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GridDomainWarning)
            cell, t, outside = self._locate(points)
        return self._interp(cell, t), outside

    def _interp(self, cell, t):
        c000, c100, c010, c110, c001, c101, c011, c111 = self._corners(cell)
        tx, ty, tz = t.T
        # (1 - t) a + t b reproduces node values exactly at t = 0 and t = 1
        c00 = (1 - tx) * c000 + tx * c100
        c10 = (1 - tx) * c010 + tx * c110
        c01 = (1 - tx) * c001 + tx * c101
        c11 = (1 - tx) * c011 + tx * c111
        c0 = (1 - ty) * c00 + ty * c10
        c1 = (1 - ty) * c01 + ty * c11
        return (1 - tz) * c0 + tz * c1

    def eval(self, points: npt.ArrayLike) -> FloatArray:
        cell, t, _ = self._locate(points)
        return self._interp(cell, t)

    def grad(self, points: npt.ArrayLike) -> FloatArray:
        """Exact derivative of the trilinear interpolant within the containing cell."""
        cell, t, _ = self._locate(points)
        c000, c100, c010, c110, c001, c101, c011, c111 = self._corners(cell)
        tx, ty, tz = t.T
        sx, sy, sz = 1.0 - tx, 1.0 - ty, 1.0 - tz
        gx = (sy * sz * (c100 - c000) + ty * sz * (c110 - c010)
              + sy * tz * (c101 - c001) + ty * tz * (c111 - c011))
        gy = (sx * sz * (c010 - c000) + tx * sz * (c110 - c100)
              + sx * tz * (c011 - c001) + tx * tz * (c111 - c101))
        gz = (sx * sy * (c001 - c000) + tx * sy * (c101 - c100)
              + sx * ty * (c011 - c010) + tx * ty * (c111 - c110))
        return np.stack([gx, gy, gz], axis=1) / self.spacing


def save_grid(grid: GridSdf, path: str | PathLike) -> None:
    nx, ny, nz = grid.shape
    payload = grid.values.astype("<f4").ravel(order="F").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(nx, ny, nz, *grid.origin, grid.spacing))
        fh.write(payload)


def load_grid(path: str | PathLike) -> GridSdf:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != MAGIC:
        raise ValueError(f"{path}: not an SDFGRID1 file")
    nx, ny, nz, ox, oy, oz, spacing = _HEADER.unpack_from(data, 8)
    offset = 8 + _HEADER.size
    count = nx * ny * nz
    if len(data) != offset + 4 * count:
        raise ValueError(f"{path}: expected {count} values, file size is {len(data)} bytes")
    values = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
    values = values.reshape((nx, ny, nz), order="F").astype(np.float64)
    return GridSdf(np.array([ox, oy, oz]), spacing, values)
