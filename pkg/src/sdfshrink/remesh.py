"""Uniform arc-length resampling of polylines and of anchor-grid rows and columns.

Every output point is a convex combination of the endpoints of one input
segment, and output arc-length parameters increase strictly, so resampling
never reorders anchors along a row or column.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Literal

import numpy as np
import numpy.typing as npt

if TYPE_CHECKING:
    from sdfshrink.shrink import AnchorGrid

Order = Literal["row-first", "column-first"]


class ResampleError(ValueError):
    pass


def _sample_at(points, seg_len, cum, s):
    seg = np.searchsorted(cum, s, side="right") - 1
    seg = np.clip(seg, 0, len(seg_len) - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(seg_len[seg] > 0, (s - cum[seg]) / seg_len[seg], 0.0)
    frac = np.clip(frac, 0.0, 1.0)
    nxt = np.append(points[1:], points[:1], axis=0) if len(points) == len(seg_len) else points[1:]
    return points[seg] + frac[:, None] * (nxt[seg] - points[seg])


def resample_closed_polyline(points: npt.ArrayLike, n: int) -> np.ndarray:
    """Place ``n`` points at arc lengths ``k * L / n`` around a closed polyline.

    Arc length is measured from ``points[0]``, which is therefore reproduced
    exactly as ``output[0]``; this keeps the seam of a periodic row fixed.
    """
    p = np.asarray(points, dtype=np.float64)
    if n < 3:
        raise ResampleError(f"closed resampling needs n >= 3, got {n}")
    seg_len = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    if not total > 0:
        raise ResampleError("closed polyline has zero length")
    return _sample_at(p, seg_len, cum, total * np.arange(n) / n)


def resample_open_polyline(points: npt.ArrayLike, n: int) -> np.ndarray:
    """Place ``n`` points uniformly by arc length along an open polyline; endpoints are kept bit-exact."""
    p = np.asarray(points, dtype=np.float64)
    if n < 2:
        raise ResampleError(f"open resampling needs n >= 2, got {n}")
    seg_len = np.linalg.norm(np.diff(p, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    if not total > 0:
        raise ResampleError("open polyline has zero length")
    out = _sample_at(p, seg_len, cum, total * np.arange(n) / (n - 1))
    out[0], out[-1] = p[0], p[-1]
    return out


def polyline_length(points: npt.ArrayLike, closed: bool) -> float:
    p = np.asarray(points, dtype=np.float64)
    d = np.diff(np.vstack([p, p[:1]]) if closed else p, axis=0)
    return float(np.linalg.norm(d, axis=1).sum())


def resample_rows(grid: AnchorGrid) -> AnchorGrid:
    """Resample every non-pole row as a closed loop in theta."""
    pos = grid.positions.copy()
    for j in range(1, grid.n_phi):
        pos[j] = resample_closed_polyline(grid.positions[j], grid.n_theta)
    return grid.with_positions(pos)


def resample_columns(grid: AnchorGrid) -> AnchorGrid:
    """Resample every theta column as an open curve running pole to pole."""
    pos = grid.positions.copy()
    for i in range(grid.n_theta):
        pos[:, i] = resample_open_polyline(grid.positions[:, i], grid.n_phi + 1)
    return grid.with_positions(pos)


def resample_bidirectional(grid: AnchorGrid, order: Order = "row-first") -> AnchorGrid:
    if order == "row-first":
        return resample_columns(resample_rows(grid))
    if order == "column-first":
        return resample_rows(resample_columns(grid))
    raise ValueError(f"unknown resampling order {order!r}")
