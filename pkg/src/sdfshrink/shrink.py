"""Sphere shrinking: contract a UV-parameterized sphere onto the zero set of a signed distance field.

Each anchor moves by ``-s(x) * grad s(x) / (|grad s(x)| + eps) * t``, a step of
length ``|s| * t`` toward the surface from either side. Pole rows are handled
as single points, and rows/columns are periodically redistributed by
arc length (see :mod:`sdfshrink.remesh`).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Literal, TextIO

import numpy as np
import numpy.typing as npt

from sdfshrink.remesh import resample_bidirectional, resample_columns, resample_rows
from sdfshrink.sdf.base import ScalarField3

log = logging.getLogger(__name__)

ResampleMode = Literal["alternate", "both", "off"]


class ShrinkError(RuntimeError):
    """The field produced a non-finite value or gradient at an anchor."""

    def __init__(self, message: str, anchor: int | None = None):
        super().__init__(message)
        self.anchor = anchor


class DivergenceError(RuntimeError):
    def __init__(self, message: str, history: list[float]):
        super().__init__(message)
        self.history = history


class ShrinkWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ShrinkConfig:
    step: float = 0.2
    epsilon: float = 1e-8
    max_iters: int = 500
    residual_tol: float = 1e-4
    resample: ResampleMode = "alternate"
    resample_every: int = 1
    momentum: float = 0.0
    n_theta: int = 200
    n_phi: int = 100
    initial_radius: float = 1.0
    initial_center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.residual_tol > 0:
            raise ValueError(f"residual_tol must be positive, got {self.residual_tol}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be non-negative, got {self.max_iters}")
        if self.resample not in ("alternate", "both", "off"):
            raise ValueError(f"unknown resample mode {self.resample!r}")
        if self.resample_every < 1:
            raise ValueError(f"resample_every must be >= 1, got {self.resample_every}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")
        if not self.initial_radius > 0:
            raise ValueError(f"initial_radius must be positive, got {self.initial_radius}")


@dataclass(frozen=True, eq=False)
class AnchorGrid:
    """``(n_phi + 1) x n_theta`` lattice of anchors; row 0 is the north pole, row ``n_phi`` the south pole.

    The UV coordinate of anchor ``(j, i)`` is ``(i / n_theta, j / n_phi)`` and
    never changes; only positions evolve.
    """

    positions: npt.NDArray[np.float64]

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 3 or pos.shape[2] != 3:
            raise ValueError(f"positions must have shape (n_phi+1, n_theta, 3), got {pos.shape}")
        if pos.shape[1] < 3 or pos.shape[0] < 3:
            raise ValueError(f"need n_theta >= 3 and n_phi >= 2, got shape {pos.shape}")
        object.__setattr__(self, "positions", pos)

    @property
    def n_theta(self) -> int:
        return self.positions.shape[1]

    @property
    def n_phi(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def uv(self) -> npt.NDArray[np.float64]:
        u = np.arange(self.n_theta) / self.n_theta
        v = np.arange(self.n_phi + 1) / self.n_phi
        uu, vv = np.meshgrid(u, v)
        return np.stack([uu, vv], axis=-1)

    def with_positions(self, positions) -> AnchorGrid:
        return AnchorGrid(positions)

    def distinct(self) -> npt.NDArray[np.float64]:
        """North pole, interior rows in row-major order, south pole: ``(n_phi - 1) * n_theta + 2`` points."""
        p = self.positions
        return np.concatenate([p[0, :1], p[1:-1].reshape(-1, 3), p[-1, :1]])

    @classmethod
    def from_distinct(cls, pts: npt.NDArray[np.float64], n_theta: int, n_phi: int) -> AnchorGrid:
        pos = np.empty((n_phi + 1, n_theta, 3))
        pos[0] = pts[0]
        pos[1:-1] = pts[1:-1].reshape(n_phi - 1, n_theta, 3)
        pos[-1] = pts[-1]
        return cls(pos)


def init_sphere(n_theta: int, n_phi: int, radius: float, center=(0.0, 0.0, 0.0),
                field: ScalarField3 | None = None) -> AnchorGrid:
    """Anchors at ``center + r (sin phi cos theta, sin phi sin theta, cos phi)``.

    With ``theta_i = 2 pi i / n_theta`` and ``phi_j = pi j / n_phi``. When a
    ``field`` is given, warns if any anchor starts on or inside the surface or
    outside the field's bounds.
    """
    if n_theta < 3 or n_phi < 2:
        raise ValueError(f"need n_theta >= 3 and n_phi >= 2, got {n_theta}, {n_phi}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    phi = np.pi * np.arange(n_phi + 1) / n_phi
    sp, cp = np.sin(phi)[:, None], np.cos(phi)[:, None]
    unit = np.stack(np.broadcast_arrays(sp * np.cos(theta), sp * np.sin(theta), cp), axis=-1)
    unit[0] = (0.0, 0.0, 1.0)
    unit[-1] = (0.0, 0.0, -1.0)
    grid = AnchorGrid(np.asarray(center, dtype=np.float64) + radius * unit)
    if field is not None:
        pts = grid.distinct()
        lo, hi = field.bounds()
        if np.any((pts < lo) | (pts > hi)):
            warnings.warn("initial sphere leaves the field's domain", ShrinkWarning, stacklevel=2)
        if np.any(_eval_quiet(field, pts) <= 0):
            warnings.warn("initial sphere is not strictly outside the shape", ShrinkWarning, stacklevel=2)
    return grid


def _eval_quiet(field, pts):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return field.eval(pts)


def _check_finite(values, what):
    bad = np.flatnonzero(~np.all(np.isfinite(values.reshape(len(values), -1)), axis=1))
    if len(bad):
        raise ShrinkError(f"non-finite field {what} at anchor {int(bad[0])}", int(bad[0]))


def _displacement(field, pts, cfg, velocity=None):
    s = field.eval(pts)
    _check_finite(s, "value")
    g = field.grad(pts)
    _check_finite(g, "gradient")
    gnorm = np.linalg.norm(g, axis=1)
    move = -(s / (gnorm + cfg.epsilon) * cfg.step)[:, None] * g
    # no usable direction on medial sets; resampling drags these anchors along
    move[gnorm <= 10.0 * cfg.epsilon] = 0.0
    if velocity is not None:
        move = cfg.momentum * velocity + move
    return move


def residual(grid: AnchorGrid, field: ScalarField3) -> float:
    """Mean ``|s|`` over the distinct anchors."""
    s = field.eval(grid.distinct())
    _check_finite(s, "value")
    return float(np.mean(np.abs(s)))


def shrink_step(grid: AnchorGrid, field: ScalarField3, cfg: ShrinkConfig) -> tuple[AnchorGrid, float]:
    """One scaled-gradient update of every distinct anchor; returns the new grid and its residual."""
    new, res, _, _ = _step(grid, field, cfg, None)
    return new, res


def _step(grid, field, cfg, velocity):
    pts = grid.distinct()
    move = _displacement(field, pts, cfg, velocity)
    new = AnchorGrid.from_distinct(pts + move, grid.n_theta, grid.n_phi)
    return new, residual(new, field), float(np.linalg.norm(move, axis=1).max()), move


@dataclass
class ShrinkResult:
    grid: AnchorGrid
    history: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.history) - 1

    @property
    def final_residual(self) -> float:
        return self.history[-1]


def _resample(grid: AnchorGrid, cfg: ShrinkConfig, k: int) -> AnchorGrid:
    if cfg.resample == "off" or (k + 1) % cfg.resample_every:
        return grid
    even = (k // cfg.resample_every) % 2 == 0
    if cfg.resample == "alternate":
        return resample_rows(grid) if even else resample_columns(grid)
    return resample_bidirectional(grid, "row-first" if even else "column-first")


def run_shrink(field: ScalarField3, cfg: ShrinkConfig, stream: TextIO | None = None) -> ShrinkResult:
    """Shrink the configured initial sphere onto ``field``'s zero set.

    ``history[0]`` is the residual of the initial sphere and ``history[k]`` the
    residual after step ``k``. Stops once the residual reaches
    ``cfg.residual_tol`` or after ``cfg.max_iters`` steps. With ``stream``, one
    ``iteration residual max_displacement`` line is written per step.
    """
    grid = init_sphere(cfg.n_theta, cfg.n_phi, cfg.initial_radius, cfg.initial_center, field)
    result = ShrinkResult(grid, [residual(grid, field)])
    if result.history[0] <= cfg.residual_tol:
        result.converged = True
        return result
    velocity = np.zeros((len(grid.distinct()), 3)) if cfg.momentum > 0 else None
    for k in range(cfg.max_iters):
        grid, res, max_move, move = _step(grid, field, cfg, velocity)
        if velocity is not None:
            velocity = move
        result.history.append(res)
        if stream is not None:
            print(f"{k + 1} {res:.9g} {max_move:.9g}", file=stream)
        if res <= cfg.residual_tol:
            result.converged = True
            break
        h = result.history
        if len(h) >= 4 and all(h[-i] > 1.1 * h[-i - 1] for i in range(1, 4)):
            result.grid = grid
            raise DivergenceError(f"residual increased three times in a row: {h[-4:]}", list(h))
        if k + 1 < cfg.max_iters:
            grid = _resample(grid, cfg, k)
    result.grid = grid
    log.debug("shrink finished after %d iterations, residual %.3g", result.iterations, result.final_residual)
    return result


__all__ = [
    "AnchorGrid",
    "DivergenceError",
    "ShrinkConfig",
    "ShrinkError",
    "ShrinkResult",
    "ShrinkWarning",
    "default_start",
    "init_sphere",
    "residual",
    "run_shrink",
    "shrink_step",
]


def default_start(field: ScalarField3) -> tuple[tuple[float, float, float], float]:
    """A starting sphere for ``field``: around the shape for analytic fields, inscribed in the domain otherwise."""
    extent = getattr(field, "extent", None)
    if extent is not None:
        lo, hi = extent()
        center = 0.5 * (lo + hi)
        radius = 1.1 * 0.5 * float(np.linalg.norm(hi - lo))
    else:
        lo, hi = field.bounds()
        center = 0.5 * (lo + hi)
        radius = 0.49 * float(np.min(hi - lo))
    return tuple(float(c) for c in center), radius
