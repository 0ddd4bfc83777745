from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]


@runtime_checkable
class ScalarField3(Protocol):
    """A signed distance oracle over R^3.

    Implementations are pure: ``eval`` maps an ``(N, 3)`` array of points to
    ``(N,)`` signed distances (negative inside) and ``grad`` to the ``(N, 3)``
    spatial derivative. ``bounds`` returns the ``(lo, hi)`` corners of the box
    on which the field is meaningful.
    """

    def eval(self, points: npt.ArrayLike) -> FloatArray: ...

    def grad(self, points: npt.ArrayLike) -> FloatArray: ...

    def bounds(self) -> tuple[FloatArray, FloatArray]: ...


def as_points(points: npt.ArrayLike, dim: int = 3) -> FloatArray:
    """Coerce ``points`` to a float64 ``(N, dim)`` array; a single point becomes ``(1, dim)``."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"expected points of shape (N, {dim}), got {arr.shape}")
    return arr
