"""Parameterized surface extraction from signed distance fields by sphere shrinking."""

from sdfshrink.sdf import AnalyticSdf, GridSdf, MlpSdf, ScalarField3
from sdfshrink.mesh import TriangleMesh, load_obj, save_obj
from sdfshrink.shrink import AnchorGrid, ShrinkConfig, init_sphere, run_shrink, shrink_step

__all__ = [
    "AnalyticSdf",
    "AnchorGrid",
    "GridSdf",
    "MlpSdf",
    "ScalarField3",
    "ShrinkConfig",
    "TriangleMesh",
    "init_sphere",
    "load_obj",
    "run_shrink",
    "save_obj",
    "shrink_step",
]

__version__ = "0.1.0"
