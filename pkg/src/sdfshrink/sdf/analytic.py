"""Closed-form signed distance primitives and min/max CSG composition.

These stand in for trained networks in tests and in the CLI. Single
primitives are exact signed distances; unions and intersections are exact
away from their medial sets and a valid distance bound everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from sdfshrink.sdf.base import FloatArray, as_points


def _safe_normalize(v: FloatArray) -> FloatArray:
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    out = np.zeros_like(v)
    np.divide(v, n, out=out, where=n > 0)
    return out


class AnalyticSdf:
    """Base class for analytic fields. Subclasses implement ``_eval``/``_grad`` on ``(N, 3)`` arrays."""

    def eval(self, points: npt.ArrayLike) -> FloatArray:
        return self._eval(as_points(points))

    def grad(self, points: npt.ArrayLike) -> FloatArray:
        return self._grad(as_points(points))

    def _eval(self, p: FloatArray) -> FloatArray:
        raise NotImplementedError

    def _grad(self, p: FloatArray) -> FloatArray:
        raise NotImplementedError

    def bounds(self) -> tuple[FloatArray, FloatArray]:
        """Valid query domain: analytic fields are defined everywhere."""
        return np.full(3, -np.inf), np.full(3, np.inf)

    def extent(self) -> tuple[FloatArray, FloatArray]:
        """Axis-aligned box enclosing the shape."""
        raise NotImplementedError

    def __or__(self, other: AnalyticSdf) -> Union:
        return union(self, other)

    def __and__(self, other: AnalyticSdf) -> Intersection:
        return intersection(self, other)


@dataclass(frozen=True, eq=False)
class Sphere(AnalyticSdf):
    center: FloatArray
    radius: float

    def _eval(self, p):
        return np.linalg.norm(p - self.center, axis=1) - self.radius

    def _grad(self, p):
        return _safe_normalize(p - self.center)

    def extent(self):
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True, eq=False)
class Box(AnalyticSdf):
    """Axis-aligned box, optionally with rounded edges of ``corner_radius``."""

    center: FloatArray
    half_extents: FloatArray
    corner_radius: float = 0.0

    def _q(self, p):
        d = p - self.center
        return d, np.abs(d) - (self.half_extents - self.corner_radius)

    def _eval(self, p):
        _, q = self._q(p)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inside = np.minimum(q.max(axis=1), 0.0)
        return outside + inside - self.corner_radius

    def _grad(self, p):
        d, q = self._q(p)
        sgn = np.where(d >= 0.0, 1.0, -1.0)
        qmax = q.max(axis=1)
        g_out = sgn * _safe_normalize(np.maximum(q, 0.0))
        g_in = np.zeros_like(p)
        k = np.argmax(q, axis=1)
        rows = np.arange(len(p))
        g_in[rows, k] = sgn[rows, k]
        return np.where((qmax > 0.0)[:, None], g_out, g_in)

    def extent(self):
        return self.center - self.half_extents, self.center + self.half_extents


@dataclass(frozen=True, eq=False)
class Capsule(AnalyticSdf):
    a: FloatArray
    b: FloatArray
    radius: float

    def _offset(self, p):
        ab = self.b - self.a
        denom = float(ab @ ab)
        t = np.zeros(len(p)) if denom == 0.0 else np.clip((p - self.a) @ ab / denom, 0.0, 1.0)
        return p - (self.a + t[:, None] * ab)

    def _eval(self, p):
        return np.linalg.norm(self._offset(p), axis=1) - self.radius

    def _grad(self, p):
        return _safe_normalize(self._offset(p))

    def extent(self):
        return np.minimum(self.a, self.b) - self.radius, np.maximum(self.a, self.b) + self.radius


@dataclass(frozen=True, eq=False)
class Union(AnalyticSdf):
    children: tuple[AnalyticSdf, ...]

    def _select(self, p):
        vals = np.stack([c._eval(p) for c in self.children])
        return vals, np.argmin(vals, axis=0)

    def _eval(self, p):
        vals, _ = self._select(p)
        return vals.min(axis=0)

    def _grad(self, p):
        _, idx = self._select(p)
        grads = np.stack([c._grad(p) for c in self.children])
        return grads[idx, np.arange(len(p))]

    def extent(self):
        los, his = zip(*(c.extent() for c in self.children))
        return np.min(los, axis=0), np.max(his, axis=0)


@dataclass(frozen=True, eq=False)
class Intersection(AnalyticSdf):
    children: tuple[AnalyticSdf, ...]

    def _select(self, p):
        vals = np.stack([c._eval(p) for c in self.children])
        return vals, np.argmax(vals, axis=0)

    def _eval(self, p):
        vals, _ = self._select(p)
        return vals.max(axis=0)

    def _grad(self, p):
        _, idx = self._select(p)
        grads = np.stack([c._grad(p) for c in self.children])
        return grads[idx, np.arange(len(p))]

    def extent(self):
        los, his = zip(*(c.extent() for c in self.children))
        return np.max(los, axis=0), np.min(his, axis=0)


def _vec3(v) -> FloatArray:
    arr = np.asarray(v, dtype=np.float64).reshape(-1)
    if arr.shape == (1,):
        arr = np.repeat(arr, 3)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got {v!r}")
    return arr


def sphere(radius: float, center=(0.0, 0.0, 0.0)) -> Sphere:
    if not radius > 0:
        raise ValueError(f"sphere radius must be positive, got {radius}")
    return Sphere(_vec3(center), float(radius))


def box(half_extents, corner_radius: float = 0.0, center=(0.0, 0.0, 0.0)) -> Box:
    h = _vec3(half_extents)
    if np.any(h <= 0):
        raise ValueError(f"box half-extents must be positive, got {h}")
    if not 0.0 <= corner_radius <= h.min():
        raise ValueError(f"corner radius must lie in [0, {h.min()}], got {corner_radius}")
    return Box(_vec3(center), h, float(corner_radius))


def capsule(a, b, radius: float) -> Capsule:
    if not radius > 0:
        raise ValueError(f"capsule radius must be positive, got {radius}")
    return Capsule(_vec3(a), _vec3(b), float(radius))


def union(*children: AnalyticSdf) -> Union:
    if len(children) < 2:
        raise ValueError("union needs at least two children")
    return Union(tuple(children))


def intersection(*children: AnalyticSdf) -> Intersection:
    if len(children) < 2:
        raise ValueError("intersection needs at least two children")
    return Intersection(tuple(children))
