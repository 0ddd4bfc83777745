"""Signed-distance oracles: analytic primitives, sampled grids and SIREN networks."""

from sdfshrink.sdf.base import ScalarField3, as_points
from sdfshrink.sdf.analytic import AnalyticSdf, box, capsule, intersection, sphere, union
from sdfshrink.sdf.grid import GridDomainWarning, GridSdf, load_grid, save_grid
from sdfshrink.sdf.mlp import MlpFormatError, MlpSdf, load_mlp, save_mlp

__all__ = [
    "AnalyticSdf",
    "GridDomainWarning",
    "GridSdf",
    "MlpFormatError",
    "MlpSdf",
    "ScalarField3",
    "as_points",
    "box",
    "capsule",
    "intersection",
    "load_grid",
    "load_mlp",
    "save_grid",
    "save_mlp",
    "sphere",
    "union",
]
