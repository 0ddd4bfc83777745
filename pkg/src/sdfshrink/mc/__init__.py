from sdfshrink.mc.marching import marching_cubes
from sdfshrink.mc.tables import CENTER, CENTER_LOOPS, CORNERS, EDGES, TRI_TABLE

__all__ = ["CENTER", "CENTER_LOOPS", "CORNERS", "EDGES", "TRI_TABLE", "marching_cubes"]
