"""Exact nearest-triangle queries: point-triangle closest points and an AABB tree."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from sdfshrink.mesh import TriangleMesh
from sdfshrink.sdf.base import as_points

# closest-feature codes returned alongside closest points
FACE, VERT_A, VERT_B, VERT_C, EDGE_AB, EDGE_BC, EDGE_CA = range(7)


def closest_point_on_triangle(p, a, b, c):
    """Row-wise closest point on triangle ``(a, b, c)`` to ``p``.

    All inputs are ``(N, 3)``. Returns ``(points, region)`` where ``region``
    names the Voronoi feature (vertex, edge or face) holding the closest point,
    following the classic seven-region case analysis.
    """
    ab, ac = b - a, c - a
    ap, bp, cp = p - a, p - b, p - c
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    in_a = (d1 <= 0) & (d2 <= 0)
    in_b = (d3 >= 0) & (d4 <= d3)
    in_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    in_c = (d6 >= 0) & (d5 <= d6)
    in_ca = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    in_bc = (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0)

    with np.errstate(divide="ignore", invalid="ignore"):
        t_ab = d1 / (d1 - d3)
        t_ca = d2 / (d2 - d6)
        t_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        denom = 1.0 / (va + vb + vc)
        v_face = vb * denom
        w_face = vc * denom

    conds = [in_a, in_b, in_ab, in_c, in_ca, in_bc]
    region = np.select(conds, [VERT_A, VERT_B, EDGE_AB, VERT_C, EDGE_CA, EDGE_BC], default=FACE)
    out = np.select(
        [r[:, None] for r in conds],
        [a, b, a + t_ab[:, None] * ab, c, a + t_ca[:, None] * ac, b + t_bc[:, None] * (c - b)],
        default=a + ab * v_face[:, None] + ac * w_face[:, None],
    )
    return out, region


def _box_dist2(p, lo, hi):
    d = np.maximum(np.maximum(lo - p, 0.0), p - hi)
    return np.einsum("ij,ij->i", d, d)


@dataclass(frozen=True)
class NearestResult:
    points: npt.NDArray[np.float64]
    triangle: npt.NDArray[np.int64]
    distance: npt.NDArray[np.float64]
    region: npt.NDArray[np.int64]


class MeshBvh:
    """Axis-aligned bounding box tree over a triangle mesh.

    Queries are answered for whole batches of points at once: each round
    tests the current (point, node) frontier against the best distance found
    so far and expands only the surviving nodes. Ties between equidistant
    triangles go to the lowest triangle index, matching a linear scan.
    """

    def __init__(self, mesh: TriangleMesh, leaf_size: int = 8):
        if len(mesh.triangles) == 0:
            raise ValueError("cannot build a BVH over an empty mesh")
        self.mesh = mesh
        self.leaf_size = leaf_size
        corners = mesh.corners
        self._a, self._b, self._c = corners[:, 0], corners[:, 1], corners[:, 2]
        tri_lo, tri_hi = corners.min(axis=1), corners.max(axis=1)
        centroids = corners.mean(axis=1)

        lo, hi, left, right, start, count = [], [], [], [], [], []
        order = np.arange(len(corners))
        perm: list[np.ndarray] = []
        stack = [(order, -1, 0)]
        while stack:
            idx, parent, side = stack.pop()
            node = len(lo)
            if parent >= 0:
                (left if side == 0 else right)[parent] = node
            lo.append(tri_lo[idx].min(axis=0))
            hi.append(tri_hi[idx].max(axis=0))
            left.append(-1)
            right.append(-1)
            if len(idx) <= leaf_size:
                start.append(sum(len(x) for x in perm))
                count.append(len(idx))
                perm.append(idx)
                continue
            start.append(-1)
            count.append(0)
            cen = centroids[idx]
            axis = int(np.argmax(cen.max(axis=0) - cen.min(axis=0)))
            ranked = idx[np.argsort(cen[:, axis], kind="stable")]
            half = len(ranked) // 2
            stack.append((ranked[half:], node, 1))
            stack.append((ranked[:half], node, 0))
        self.lo, self.hi = np.array(lo), np.array(hi)
        self.left, self.right = np.array(left), np.array(right)
        self.start, self.count = np.array(start), np.array(count)
        self.perm = np.concatenate(perm)

    def leaves(self) -> list[np.ndarray]:
        """Triangle ids stored in each leaf."""
        return [self.perm[s:s + n] for s, n in zip(self.start, self.count) if n > 0]

    def _test(self, q, tri, p, best):
        pts, region = closest_point_on_triangle(p[q], self._a[tri], self._b[tri], self._c[tri])
        diff = p[q] - pts
        d2 = np.einsum("ij,ij->i", diff, diff)
        order = np.lexsort((tri, d2, q))
        q, tri, d2, pts, region = q[order], tri[order], d2[order], pts[order], region[order]
        first = np.ones(len(q), dtype=bool)
        first[1:] = q[1:] != q[:-1]
        q, tri, d2, pts, region = q[first], tri[first], d2[first], pts[first], region[first]
        bd2, btri = best["d2"][q], best["tri"][q]
        better = (d2 < bd2) | ((d2 == bd2) & (tri < btri))
        q = q[better]
        best["d2"][q] = d2[better]
        best["tri"][q] = tri[better]
        best["pts"][q] = pts[better]
        best["region"][q] = region[better]

    def _expand_leaves(self, q, nodes):
        n = self.count[nodes]
        qq = np.repeat(q, n)
        offs = np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n)
        return qq, self.perm[np.repeat(self.start[nodes], n) + offs]

    def query(self, points: npt.ArrayLike) -> NearestResult:
        p = as_points(points)
        m = len(p)
        best = {
            "d2": np.full(m, np.inf),
            "tri": np.full(m, np.iinfo(np.int64).max, dtype=np.int64),
            "pts": np.zeros((m, 3)),
            "region": np.zeros(m, dtype=np.int64),
        }
        # greedy descent to a nearby leaf seeds a tight bound
        q = np.arange(m)
        node = np.zeros(m, dtype=np.int64)
        while True:
            inner = self.left[node] >= 0
            if not inner.any():
                break
            l, r = self.left[node[inner]], self.right[node[inner]]
            pl = p[inner]
            go_left = _box_dist2(pl, self.lo[l], self.hi[l]) <= _box_dist2(pl, self.lo[r], self.hi[r])
            node[inner] = np.where(go_left, l, r)
        self._test(*self._expand_leaves(q, node), p, best)

        fq, fn = q, np.zeros(m, dtype=np.int64)
        while len(fq):
            keep = _box_dist2(p[fq], self.lo[fn], self.hi[fn]) <= best["d2"][fq]
            fq, fn = fq[keep], fn[keep]
            leaf = self.left[fn] < 0
            if leaf.any():
                self._test(*self._expand_leaves(fq[leaf], fn[leaf]), p, best)
            fq, fn = fq[~leaf], fn[~leaf]
            fq = np.concatenate([fq, fq])
            fn = np.concatenate([self.left[fn], self.right[fn]])
        return NearestResult(best["pts"], best["tri"], np.sqrt(best["d2"]), best["region"])


def brute_force_nearest(mesh: TriangleMesh, points: npt.ArrayLike) -> NearestResult:
    """Linear scan over every triangle; reference for :class:`MeshBvh`."""
    p = as_points(points)
    corners = mesh.corners
    f = len(corners)
    out_pts = np.zeros_like(p)
    out_tri = np.zeros(len(p), dtype=np.int64)
    out_d = np.zeros(len(p))
    out_region = np.zeros(len(p), dtype=np.int64)
    for i, x in enumerate(p):
        pts, region = closest_point_on_triangle(np.broadcast_to(x, (f, 3)), corners[:, 0], corners[:, 1], corners[:, 2])
        diff = x - pts
        d2 = np.einsum("ij,ij->i", diff, diff)
        k = int(np.argmin(d2))
        out_pts[i], out_tri[i], out_d[i], out_region[i] = pts[k], k, np.sqrt(d2[k]), region[k]
    return NearestResult(out_pts, out_tri, out_d, out_region)


def nearest_on_mesh(bvh: MeshBvh, p) -> tuple[np.ndarray, int, float]:
    """Closest surface point, its triangle id and the distance for a single query point."""
    res = bvh.query(p)
    return res.points[0], int(res.triangle[0]), float(res.distance[0])
