"""Surface sampling, Chamfer distance, normal consistency and UV fold detection."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
import numpy.typing as npt
from scipy.spatial import cKDTree

from sdfshrink.mesh import TriangleMesh
from sdfshrink.shrink import AnchorGrid

CD_SCALE = 1000.0


@dataclass(frozen=True)
class Samples:
    points: npt.NDArray[np.float64]
    normals: npt.NDArray[np.float64]

    def __len__(self) -> int:
        return len(self.points)


def sample_surface(mesh: TriangleMesh, n: int, seed: int = 42) -> Samples:
    """Draw ``n`` area-uniform surface points, each carrying its triangle's unit normal."""
    areas = mesh.face_areas()
    total = areas.sum()
    if not total > 0:
        raise ValueError("cannot sample a mesh with zero total area")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(areas) / total
    tri = np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), len(areas) - 1)
    r1, r2 = rng.random((2, n))
    sq = np.sqrt(r1)
    c = mesh.corners[tri]
    pts = (1 - sq)[:, None] * c[:, 0] + (sq * (1 - r2))[:, None] * c[:, 1] + (sq * r2)[:, None] * c[:, 2]
    return Samples(pts, mesh.face_normals()[tri])


def nearest_indices(src: npt.ArrayLike, dst: npt.ArrayLike, workers: int = 1) -> np.ndarray:
    """Index into ``dst`` of the nearest neighbour of every ``src`` point."""
    _, idx = cKDTree(np.asarray(dst)).query(np.asarray(src), k=1, workers=workers)
    return idx


def _one_sided_sq(src, dst, workers):
    idx = nearest_indices(src, dst, workers)
    diff = src - dst[idx]
    return np.einsum("ij,ij->i", diff, diff), idx


def chamfer_distance(a: Samples | npt.ArrayLike, b: Samples | npt.ArrayLike, workers: int = 1) -> float:
    """Symmetric mean squared nearest-neighbour distance, times 1000."""
    pa = np.asarray(a.points if isinstance(a, Samples) else a, dtype=np.float64)
    pb = np.asarray(b.points if isinstance(b, Samples) else b, dtype=np.float64)
    if len(pa) == 0 or len(pb) == 0:
        raise ValueError("chamfer distance needs non-empty point sets")
    da, _ = _one_sided_sq(pa, pb, workers)
    db, _ = _one_sided_sq(pb, pa, workers)
    return CD_SCALE * (float(da.mean()) + float(db.mean()))


def normal_consistency(a: Samples, b: Samples, workers: int = 1) -> float:
    """Mean absolute cosine between each sample's normal and its nearest neighbour's, averaged both ways."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("normal consistency needs non-empty sample sets")
    for s in (a, b):
        if np.any(np.linalg.norm(s.normals, axis=1) < 1e-12):
            raise ValueError("zero-length normal in samples")
    ia = nearest_indices(a.points, b.points, workers)
    ib = nearest_indices(b.points, a.points, workers)
    ca = np.abs(np.einsum("ij,ij->i", a.normals, b.normals[ia]))
    cb = np.abs(np.einsum("ij,ij->i", b.normals, a.normals[ib]))
    return 0.5 * (float(ca.mean()) + float(cb.mean()))


def _quad_triangles(grid: AnchorGrid):
    """Per row, the alternating triangle pair of each quad, as index triples into the flat positions."""
    n_t, n_p = grid.n_theta, grid.n_phi
    j, i = np.meshgrid(np.arange(n_p), np.arange(n_t), indexing="ij")
    i1 = (i + 1) % n_t
    flat = lambda jj, ii: jj * n_t + ii  # noqa: E731
    t0 = np.stack([flat(j, i), flat(j + 1, i), flat(j + 1, i1)], axis=-1)
    t1 = np.stack([flat(j, i), flat(j + 1, i1), flat(j, i1)], axis=-1)
    return np.stack([t0, t1], axis=2).reshape(n_p, 2 * n_t, 3)


def uv_fold_check(grid: AnchorGrid) -> int:
    """Count triangles whose normal points against that of the previous triangle in the same row.

    Quads ``(j, i), (j+1, i), (j+1, i+1), (j, i+1)`` are split along the
    ``(j, i)-(j+1, i+1)`` diagonal; triangles collapsed onto a pole are skipped.
    """
    pos = grid.positions.reshape(-1, 3)
    count = 0
    for j, row in enumerate(_quad_triangles(grid)):
        if j == 0:
            row = row[0::2]
        elif j == grid.n_phi - 1:
            row = row[1::2]
        c = pos[row]
        nrm = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
        dots = np.einsum("ij,ij->i", nrm, np.roll(nrm, 1, axis=0))
        count += int(np.count_nonzero(dots < 0))
    return count


def anchor_grid_to_mesh(grid: AnchorGrid) -> TriangleMesh:
    """Triangulate an anchor grid with per-vertex UVs.

    Each pole is one vertex with a triangle fan around it; interior rows carry
    ``n_theta + 1`` vertices, the last repeating the first at ``u = 1``.
    """
    n_t, n_p = grid.n_theta, grid.n_phi
    ring = np.concatenate([grid.positions[1:-1], grid.positions[1:-1, :1]], axis=1)
    verts = np.concatenate([grid.positions[0, :1], ring.reshape(-1, 3), grid.positions[-1, :1]])
    u = np.arange(n_t + 1) / n_t
    v = np.arange(1, n_p) / n_p
    uu, vv = np.meshgrid(u, v)
    uv = np.concatenate([[[0.5, 0.0]], np.stack([uu, vv], axis=-1).reshape(-1, 2), [[0.5, 1.0]]])

    north, south = 0, len(verts) - 1
    idx = lambda j, i: 1 + (j - 1) * (n_t + 1) + i  # noqa: E731
    i = np.arange(n_t)
    tris = [np.stack([np.full(n_t, north), idx(1, i), idx(1, i + 1)], axis=1)]
    for j in range(1, n_p - 1):
        a, b, c, d = idx(j, i), idx(j + 1, i), idx(j + 1, i + 1), idx(j, i + 1)
        tris.append(np.stack([np.stack([a, b, c], 1), np.stack([a, c, d], 1)], axis=1).reshape(-1, 3))
    tris.append(np.stack([idx(n_p - 1, i), np.full(n_t, south), idx(n_p - 1, i + 1)], axis=1))
    return TriangleMesh(verts, np.concatenate(tris), uv)


@dataclass(frozen=True)
class MetricsReport:
    cd: float
    nc: float
    samples_used: int
    seed: int
    fold_count: int | None = None
    residual: float | None = None
    iterations: int | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def table(self) -> str:
        rows = [
            ("Chamfer distance (x1000)", f"{self.cd:.6f}"),
            ("Normal consistency", f"{self.nc:.6f}"),
            ("Samples per mesh", str(self.samples_used)),
            ("Seed", str(self.seed)),
        ]
        if self.fold_count is not None:
            rows.append(("UV folds", str(self.fold_count)))
        if self.residual is not None:
            rows.append(("Mean |s| residual", f"{self.residual:.6g}"))
        if self.iterations is not None:
            rows.append(("Iterations", str(self.iterations)))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def evaluate(a: TriangleMesh, b: TriangleMesh, n: int = 10_000, seed: int = 42, workers: int = 1) -> MetricsReport:
    """Compare two meshes from ``n`` samples each, drawn with the same seed."""
    sa, sb = sample_surface(a, n, seed), sample_surface(b, n, seed)
    return MetricsReport(chamfer_distance(sa, sb, workers), normal_consistency(sa, sb, workers), n, seed)
