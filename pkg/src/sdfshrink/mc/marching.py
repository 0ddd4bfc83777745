"""Marching Cubes over a :class:`~sdfshrink.sdf.grid.GridSdf`."""

from __future__ import annotations

import numpy as np

from sdfshrink.mc.tables import CENTER, CENTER_LOOPS, CORNERS, EDGES, TRI_TABLE
from sdfshrink.mesh import TriangleMesh
from sdfshrink.sdf.grid import GridSdf

SINGULAR_TOL = 1e-12

_MAX_LEN = max(len(t) for t in TRI_TABLE)
_TABLE = np.full((256, _MAX_LEN), -1, dtype=np.int64)
for _case, _tris in enumerate(TRI_TABLE):
    _TABLE[_case, : len(_tris)] = _tris
_COUNTS = np.array([len(t) // 3 for t in TRI_TABLE])

# start corner offset and axis of each cube edge
_EDGE_START = np.minimum(CORNERS[EDGES[:, 0]], CORNERS[EDGES[:, 1]])
_EDGE_AXIS = np.argmax(np.abs(CORNERS[EDGES[:, 1]] - CORNERS[EDGES[:, 0]]), axis=1)


def edge_crossing(xa: np.ndarray, xb: np.ndarray, sa: np.ndarray, sb: np.ndarray) -> np.ndarray:
    """Zero of the linear interpolant between ``(xa, sa)`` and ``(xb, sb)``.

    Computes ``(xa * sb - xb * sa) / (sb - sa)``; where ``|sb - sa|`` is below
    ``SINGULAR_TOL`` the edge midpoint is returned instead.
    """
    diff = sb - sa
    singular = np.abs(diff) < SINGULAR_TOL
    safe = np.where(singular, 1.0, diff)
    return np.where(singular, 0.5 * (xa + xb), (xa * sb - xb * sa) / safe)


def _loop_centers(cell_ids, cells, cases, uniq, verts, shape):
    """Mean of the edge vertices of each listed cell's centre loop, summed in edge order."""
    nx, ny, nz = shape
    out = np.empty((len(cell_ids), 3))
    for k, c in enumerate(cell_ids):
        loop = np.array(CENTER_LOOPS[cases[c]])
        start = cells[c] + _EDGE_START[loop]
        axis = _EDGE_AXIS[loop]
        keys = ((axis * nx + start[:, 0]) * ny + start[:, 1]) * nz + start[:, 2]
        out[k] = verts[np.searchsorted(uniq, keys)].mean(axis=0)
    return out


def marching_cubes(grid: GridSdf, iso: float = 0.0) -> TriangleMesh:
    """Extract the ``iso`` level set as a triangle mesh.

    Vertices are shared between neighbouring cubes (one per crossed lattice
    edge, ordered by edge key, then any loop-centre vertices) and triangle
    normals point toward larger values.
    Returns an empty mesh when nothing crosses ``iso``.
    """
    s = grid.values - iso
    nx, ny, nz = s.shape
    below = s < 0.0
    case = np.zeros((nx - 1, ny - 1, nz - 1), dtype=np.int64)
    for c, (dx, dy, dz) in enumerate(CORNERS):
        case |= below[dx:nx - 1 + dx, dy:ny - 1 + dy, dz:nz - 1 + dz].astype(np.int64) << c
    cells = np.argwhere((case != 0) & (case != 255))
    if len(cells) == 0:
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    cases = case[tuple(cells.T)]
    ntri = _COUNTS[cases]
    cell_of_tri = np.repeat(np.arange(len(cells)), ntri)
    slot = np.arange(ntri.sum()) - np.repeat(np.cumsum(ntri) - ntri, ntri)
    local = np.stack([_TABLE[cases[cell_of_tri], 3 * slot + k] for k in range(3)], axis=1)

    # global key of each referenced lattice edge: (axis, i, j, k) of its lower node;
    # loop-centre vertices get keys past every edge key, one per cell
    n_nodes = nx * ny * nz
    is_center = local == CENTER
    edge = np.where(is_center, 0, local)
    start = cells[cell_of_tri][:, None, :] + _EDGE_START[edge]
    axis = _EDGE_AXIS[edge]
    keys = ((axis * nx + start[..., 0]) * ny + start[..., 1]) * nz + start[..., 2]
    keys = np.where(is_center, 3 * n_nodes + cell_of_tri[:, None], keys)
    uniq, inverse = np.unique(keys.reshape(-1), return_inverse=True)

    n_edge = int(np.searchsorted(uniq, 3 * n_nodes))
    e_axis, rest = np.divmod(uniq[:n_edge], n_nodes)
    ei, rest = np.divmod(rest, ny * nz)
    ej, ek = np.divmod(rest, nz)
    a_idx = np.stack([ei, ej, ek], axis=1)
    b_idx = a_idx.copy()
    b_idx[np.arange(n_edge), e_axis] += 1
    sa = s[tuple(a_idx.T)]
    sb = s[tuple(b_idx.T)]
    verts = grid.origin + grid.spacing * a_idx.astype(np.float64)
    xa = verts[np.arange(n_edge), e_axis]
    verts[np.arange(n_edge), e_axis] = edge_crossing(xa, xa + grid.spacing, sa, sb)
    if n_edge < len(uniq):
        verts = np.concatenate([verts, _loop_centers(uniq[n_edge:] - 3 * n_nodes, cells, cases, uniq, verts, s.shape)])
    tris = inverse.reshape(-1, 3)

    # crossings at a lattice node (value exactly iso) coincide; merge them and drop collapsed triangles
    merged, first, remap = np.unique(verts, axis=0, return_index=True, return_inverse=True)
    if len(merged) < len(verts):
        order = np.argsort(first)
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        verts = merged[order]
        tris = rank[remap.reshape(-1)][tris]
        tris = tris[(tris[:, 0] != tris[:, 1]) & (tris[:, 1] != tris[:, 2]) & (tris[:, 2] != tris[:, 0])]
    return TriangleMesh(verts, tris)
