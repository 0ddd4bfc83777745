"""Mesh-to-grid conversion: unsigned distance from a BVH, sign from angle-weighted pseudonormals."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import numpy.typing as npt

from sdfshrink.bvh import EDGE_AB, EDGE_BC, EDGE_CA, FACE, VERT_A, VERT_B, VERT_C, MeshBvh
from sdfshrink.mesh import TriangleMesh, mesh_watertight_check
from sdfshrink.sdf.grid import GridSdf

MIN_RESOLUTION = 8
PSEUDONORMAL_TOL = 1e-10


class MeshError(ValueError):
    """The mesh cannot be converted (not watertight, empty, ...)."""


def _unit(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.divide(v, n, out=np.zeros_like(v), where=n > 0)


class Pseudonormals:
    """Angle-weighted vertex normals, edge normals and face normals of a closed mesh."""

    def __init__(self, mesh: TriangleMesh):
        tris = mesh.triangles
        corners = mesh.corners
        self.face = mesh.face_normals()

        vert = np.zeros_like(mesh.vertices)
        for k in range(3):
            e1 = _unit(corners[:, (k + 1) % 3] - corners[:, k])
            e2 = _unit(corners[:, (k + 2) % 3] - corners[:, k])
            angle = np.arccos(np.clip(np.einsum("ij,ij->i", e1, e2), -1.0, 1.0))
            np.add.at(vert, tris[:, k], angle[:, None] * self.face)
        self.vertex = _unit(vert)

        # edge k of a triangle joins corner k and corner k+1
        n_vert = len(mesh.vertices)
        ends = np.stack([tris, np.roll(tris, -1, axis=1)], axis=-1).reshape(-1, 2)
        keys = ends.min(axis=1) * n_vert + ends.max(axis=1)
        uniq, inverse = np.unique(keys, return_inverse=True)
        edge_sum = np.zeros((len(uniq), 3))
        np.add.at(edge_sum, inverse.reshape(-1), np.repeat(self.face, 3, axis=0))
        self.edge = _unit(edge_sum)[inverse.reshape(-1)].reshape(-1, 3, 3)
        self.triangles = tris

    def lookup(self, tri: np.ndarray, region: np.ndarray) -> np.ndarray:
        t = self.triangles[tri]
        corner = np.select([region == VERT_A, region == VERT_B, region == VERT_C], [0, 1, 2], default=0)
        edge = np.select([region == EDGE_AB, region == EDGE_BC, region == EDGE_CA], [0, 1, 2], default=0)
        out = self.face[tri].copy()
        is_vert = np.isin(region, (VERT_A, VERT_B, VERT_C))
        is_edge = np.isin(region, (EDGE_AB, EDGE_BC, EDGE_CA))
        out[is_vert] = self.vertex[t[is_vert, corner[is_vert]]]
        out[is_edge] = self.edge[tri[is_edge], edge[is_edge]]
        assert np.all(is_vert | is_edge | (region == FACE))
        return out


def ray_parity_inside(mesh: TriangleMesh, p: np.ndarray) -> bool:
    """Majority vote of crossing-count parity along the six axis rays from ``p``."""
    corners = mesh.corners
    a, e1, e2 = corners[:, 0], corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]
    votes = 0
    for axis in range(3):
        for sign in (1.0, -1.0):
            d = np.zeros(3)
            d[axis] = sign
            h = np.cross(d, e2)
            det = np.einsum("ij,ij->i", e1, h)
            ok = np.abs(det) > 1e-15
            inv = np.divide(1.0, det, out=np.zeros_like(det), where=ok)
            s = p - a
            u = inv * np.einsum("ij,ij->i", s, h)
            qv = np.cross(s, e1)
            v = inv * (qv @ d)
            t = inv * np.einsum("ij,ij->i", e2, qv)
            hits = ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 0)
            votes += int(hits.sum()) % 2
    return votes > 3


def signed_distance_to_mesh(mesh: TriangleMesh, points: npt.ArrayLike, bvh: MeshBvh | None = None,
                            normals: Pseudonormals | None = None) -> np.ndarray:
    bvh = bvh or MeshBvh(mesh)
    normals = normals or Pseudonormals(mesh)
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    res = bvh.query(p)
    n = normals.lookup(res.triangle, res.region)
    dots = np.einsum("ij,ij->i", _unit(p - res.points), n)
    sign = np.where(dots < 0, -1.0, 1.0)
    for i in np.flatnonzero((np.abs(dots) < PSEUDONORMAL_TOL) & (res.distance > 0)):
        sign[i] = -1.0 if ray_parity_inside(mesh, p[i]) else 1.0
    return sign * res.distance


def mesh_to_grid_sdf(mesh: TriangleMesh, resolution: int = 32, padding: float = 0.1,
                     normalize: bool = False, threads: int = 1, leaf_size: int = 8) -> GridSdf:
    """Sample the signed distance of a closed mesh on a cubic lattice.

    The lattice covers the mesh bounding box grown by ``padding`` times the box
    diagonal on every side, with ``resolution`` nodes along its longest axis.
    With ``normalize`` the mesh is first centred and scaled so its bounding box
    diagonal has length 2. ``threads`` splits node queries across workers; the
    result does not depend on it.
    """
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be at least {MIN_RESOLUTION}, got {resolution}")
    if padding < 0:
        raise ValueError(f"padding must be non-negative, got {padding}")
    closed, bad = mesh_watertight_check(mesh)
    if not closed:
        raise MeshError(f"mesh is not watertight: {bad} boundary or non-manifold edge(s)")
    if normalize:
        lo, hi = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
        scale = 2.0 / np.linalg.norm(hi - lo)
        mesh = TriangleMesh((mesh.vertices - 0.5 * (lo + hi)) * scale, mesh.triangles, mesh.uv)

    lo, hi = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
    pad = padding * np.linalg.norm(hi - lo)
    lo, hi = lo - pad, hi + pad
    spacing = (hi - lo).max() / (resolution - 1)
    shape = np.maximum(np.ceil((hi - lo) / spacing - 1e-9).astype(int) + 1, 2)
    axes = [lo[a] + spacing * np.arange(shape[a]) for a in range(3)]
    nodes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)

    bvh = MeshBvh(mesh, leaf_size=leaf_size)
    normals = Pseudonormals(mesh)
    chunks = np.array_split(nodes, -(-len(nodes) // 4096))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: signed_distance_to_mesh(mesh, c, bvh, normals), chunks))
    else:
        parts = [signed_distance_to_mesh(mesh, c, bvh, normals) for c in chunks]
    values = np.concatenate(parts).reshape(tuple(shape))
    return GridSdf(lo, spacing, values)
