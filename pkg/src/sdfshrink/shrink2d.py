"""Planar variant of shrinking: a closed polyline contracted onto a 2D signed distance field, with optional momentum."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from sdfshrink.remesh import resample_closed_polyline
from sdfshrink.sdf.base import as_points


class SelfIntersectionError(RuntimeError):
    def __init__(self, message: str, segments: tuple[int, int]):
        super().__init__(message)
        self.segments = segments


@dataclass(frozen=True, eq=False)
class Disk2D:
    center: npt.NDArray[np.float64]
    radius: float

    def eval(self, points):
        return np.linalg.norm(as_points(points, 2) - self.center, axis=1) - self.radius

    def grad(self, points):
        d = as_points(points, 2) - self.center
        n = np.linalg.norm(d, axis=1, keepdims=True)
        return np.divide(d, n, out=np.zeros_like(d), where=n > 0)


@dataclass(frozen=True, eq=False)
class Polygon2D:
    """Exact signed distance to a simple polygon (negative inside)."""

    vertices: npt.NDArray[np.float64]

    def _closest(self, p):
        a = self.vertices
        b = np.roll(a, -1, axis=0)
        ab = b - a
        t = np.einsum("nkj,kj->nk", p[:, None, :] - a, ab) / np.einsum("kj,kj->k", ab, ab)
        q = a + np.clip(t, 0.0, 1.0)[..., None] * ab
        d2 = np.sum((p[:, None, :] - q) ** 2, axis=2)
        k = np.argmin(d2, axis=1)
        return q[np.arange(len(p)), k], np.sqrt(d2[np.arange(len(p)), k])

    def _inside(self, p):
        a = self.vertices
        b = np.roll(a, -1, axis=0)
        x, y = p[:, 0:1], p[:, 1:2]
        straddle = (a[:, 1] > y) != (b[:, 1] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
        return (np.count_nonzero(straddle & (x < xc), axis=1) % 2) == 1

    def eval(self, points):
        p = as_points(points, 2)
        _, d = self._closest(p)
        return np.where(self._inside(p), -d, d)

    def grad(self, points):
        p = as_points(points, 2)
        q, d = self._closest(p)
        g = np.divide(p - q, d[:, None], out=np.zeros_like(p), where=d[:, None] > 0)
        return np.where(self._inside(p)[:, None], -g, g)


def disk(radius: float, center=(0.0, 0.0)) -> Disk2D:
    return Disk2D(np.asarray(center, dtype=np.float64), float(radius))


def l_shape(size: float = 1.0, notch: float = 0.5) -> Polygon2D:
    """An L made from a ``2 size`` square centred at the origin with its upper-right quadrant-sized notch removed."""
    s, c = size, size - 2 * size * notch
    return Polygon2D(np.array([[-s, -s], [s, -s], [s, c], [c, c], [c, s], [-s, s]], dtype=np.float64))


@dataclass
class Curve2D:
    points: npt.NDArray[np.float64]
    velocity: npt.NDArray[np.float64] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.velocity is None:
            self.velocity = np.zeros_like(self.points)


def circle(n: int, radius: float, center=(0.0, 0.0)) -> Curve2D:
    theta = 2.0 * np.pi * np.arange(n) / n
    return Curve2D(np.asarray(center) + radius * np.stack([np.cos(theta), np.sin(theta)], axis=1))


@dataclass(frozen=True)
class Shrink2DConfig:
    step: float = 0.2
    epsilon: float = 1e-8
    momentum: float = 0.0
    max_iters: int = 500
    residual_tol: float = 1e-6
    resample: bool = True


def find_self_intersection(points: npt.NDArray[np.float64]) -> tuple[int, int] | None:
    """First pair of non-adjacent closed-polyline segments that properly cross, if any."""
    a = points
    b = np.roll(points, -1, axis=0)
    n = len(a)

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    A, B = a[:, None], b[:, None]
    C, D = a[None, :], b[None, :]
    o1, o2 = orient(A, B, C), orient(A, B, D)
    o3, o4 = orient(C, D, A), orient(C, D, B)
    cross = (o1 * o2 < 0) & (o3 * o4 < 0)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    gap = (j - i) % n
    cross &= (gap > 1) & (gap < n - 1) & (i < j)
    hits = np.argwhere(cross)
    return (int(hits[0, 0]), int(hits[0, 1])) if len(hits) else None


def shrink_2d(field, curve: Curve2D, cfg: Shrink2DConfig = Shrink2DConfig()) -> tuple[Curve2D, list[float]]:
    """Contract ``curve`` onto the zero set of a planar ``field``.

    Per iteration ``v <- momentum * v - s grad s / (|grad s| + eps) * step``,
    ``x <- x + v``, then arc-length resampling of the closed polyline. Returns
    the final curve and the mean ``|s|`` history (initial curve first).
    """
    pts = curve.points.copy()
    vel = curve.velocity.copy()
    n = len(pts)
    history = [float(np.mean(np.abs(field.eval(pts))))]
    for _ in range(cfg.max_iters):
        if history[-1] <= cfg.residual_tol:
            break
        s = field.eval(pts)
        g = field.grad(pts)
        gn = np.linalg.norm(g, axis=1)
        step = -(s / (gn + cfg.epsilon) * cfg.step)[:, None] * g
        step[gn <= 10.0 * cfg.epsilon] = 0.0
        vel = cfg.momentum * vel + step
        pts = pts + vel
        if cfg.resample:
            pts = resample_closed_polyline(pts, n)
        crossing = find_self_intersection(pts)
        if crossing is not None:
            raise SelfIntersectionError(f"curve self-intersects at segments {crossing}", crossing)
        history.append(float(np.mean(np.abs(field.eval(pts)))))
    return Curve2D(pts, vel), history
