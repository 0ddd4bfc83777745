"""Triangle meshes and Wavefront OBJ reading/writing."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from os import PathLike

import numpy as np
import numpy.typing as npt

DEGENERATE_AREA = 1e-12


class MeshWarning(UserWarning):
    """Recoverable mesh problems: dropped degenerate faces, non-manifold edges."""


class ObjFormatError(ValueError):
    pass


@dataclass(eq=False)
class TriangleMesh:
    vertices: npt.NDArray[np.float64]
    triangles: npt.NDArray[np.int64]
    uv: npt.NDArray[np.float64] | None = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.uv is not None:
            self.uv = np.asarray(self.uv, dtype=np.float64).reshape(-1, 2)
            if len(self.uv) != len(self.vertices):
                raise ValueError(f"{len(self.uv)} uv entries for {len(self.vertices)} vertices")
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise ValueError("triangle index out of range")

    @property
    def corners(self) -> npt.NDArray[np.float64]:
        """``(F, 3, 3)`` array of triangle corner positions."""
        return self.vertices[self.triangles]

    def face_cross(self) -> npt.NDArray[np.float64]:
        c = self.corners
        return np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])

    def face_areas(self) -> npt.NDArray[np.float64]:
        return 0.5 * np.linalg.norm(self.face_cross(), axis=1)

    def face_normals(self) -> npt.NDArray[np.float64]:
        cr = self.face_cross()
        n = np.linalg.norm(cr, axis=1, keepdims=True)
        return np.divide(cr, n, out=np.zeros_like(cr), where=n > 0)

    def flipped(self) -> TriangleMesh:
        return TriangleMesh(self.vertices.copy(), self.triangles[:, ::-1].copy(),
                            None if self.uv is None else self.uv.copy())

    def drop_degenerate(self, tol: float = DEGENERATE_AREA) -> TriangleMesh:
        keep = self.face_areas() >= tol
        if not keep.all():
            warnings.warn(f"dropped {int((~keep).sum())} degenerate triangle(s)", MeshWarning, stacklevel=2)
            return TriangleMesh(self.vertices, self.triangles[keep], self.uv)
        return self


def _welded_triangles(mesh: TriangleMesh) -> npt.NDArray[np.int64]:
    # coincident positions (e.g. a UV seam) count as one vertex
    _, inverse = np.unique(mesh.vertices, axis=0, return_inverse=True)
    return inverse.reshape(-1)[mesh.triangles]


def edge_face_counts(mesh: TriangleMesh) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    """Undirected edges (as sorted welded index pairs) and their incident triangle counts."""
    tris = _welded_triangles(mesh)
    edges = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    edges.sort(axis=1)
    return np.unique(edges, axis=0, return_counts=True)


def mesh_watertight_check(mesh: TriangleMesh) -> tuple[bool, int]:
    """Return ``(closed, boundary_edge_count)``.

    Closed means every undirected edge has exactly two incident triangles,
    after welding vertices with identical positions. The count covers every
    edge that violates this (open or non-manifold).
    """
    if len(mesh.triangles) == 0:
        return False, 0
    _, counts = edge_face_counts(mesh)
    bad = int(np.count_nonzero(counts != 2))
    return bad == 0, bad


def _fmt(x: float) -> str:
    s = format(float(x), ".9g")
    return "0" if s == "-0" else s


def save_obj(mesh: TriangleMesh, path: str | PathLike, mtl: tuple[str, str] | None = None) -> None:
    """Write ``mesh`` as OBJ. ``mtl`` is an optional ``(library file, material name)`` pair."""
    lines = []
    if mtl is not None:
        lines += [f"mtllib {mtl[0]}", f"usemtl {mtl[1]}"]
    lines += [f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}" for x, y, z in mesh.vertices]
    if mesh.uv is not None:
        lines += [f"vt {_fmt(u)} {_fmt(v)}" for u, v in mesh.uv]
        lines += [f"f {a}/{a} {b}/{b} {c}/{c}" for a, b, c in mesh.triangles + 1]
    else:
        lines += [f"f {a} {b} {c}" for a, b, c in mesh.triangles + 1]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_index(token: str, count: int, lineno: int) -> int:
    idx = int(token)
    idx = idx - 1 if idx > 0 else count + idx
    if not 0 <= idx < count:
        raise ObjFormatError(f"line {lineno}: index {token} out of range")
    return idx


def load_obj(path: str | PathLike) -> TriangleMesh:
    """Read an OBJ file, fan-triangulating polygons.

    When faces reference texture coordinates, each distinct ``(v, vt)`` pair
    becomes one output vertex, in order of first use.
    """
    verts: list[list[float]] = []
    tex: list[list[float]] = []
    faces: list[list[tuple[int, int | None]]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, *rest = line.split()
            try:
                if key == "v":
                    if len(rest) < 3:
                        raise ObjFormatError(f"line {lineno}: vertex needs 3 coordinates")
                    verts.append([float(t) for t in rest[:3]])
                elif key == "vt":
                    if len(rest) < 2:
                        raise ObjFormatError(f"line {lineno}: texture coordinate needs 2 values")
                    tex.append([float(t) for t in rest[:2]])
                elif key == "f":
                    if len(rest) < 3:
                        raise ObjFormatError(f"line {lineno}: face needs at least 3 vertices")
                    corners = []
                    for tok in rest:
                        parts = tok.split("/")
                        v = _parse_index(parts[0], len(verts), lineno)
                        t = _parse_index(parts[1], len(tex), lineno) if len(parts) > 1 and parts[1] else None
                        corners.append((v, t))
                    faces.append(corners)
            except ValueError as exc:
                if isinstance(exc, ObjFormatError):
                    raise
                raise ObjFormatError(f"line {lineno}: {exc}") from exc

    tris = [(f[0], f[k], f[k + 1]) for f in faces for k in range(1, len(f) - 1)]
    has_uv = bool(tris) and all(c[1] is not None for tri in tris for c in tri)
    if has_uv:
        remap: dict[tuple[int, int], int] = {}
        for tri in tris:
            for c in tri:
                remap.setdefault(c, len(remap))
        keys = list(remap)
        vertices = np.array([verts[v] for v, _ in keys], dtype=np.float64).reshape(-1, 3)
        uv = np.array([tex[t] for _, t in keys], dtype=np.float64).reshape(-1, 2)
        triangles = np.array([[remap[c] for c in tri] for tri in tris], dtype=np.int64).reshape(-1, 3)
        mesh = TriangleMesh(vertices, triangles, uv)
    else:
        triangles = np.array([[c[0] for c in tri] for tri in tris], dtype=np.int64).reshape(-1, 3)
        mesh = TriangleMesh(np.array(verts, dtype=np.float64).reshape(-1, 3), triangles)
    mesh = mesh.drop_degenerate()
    if len(mesh.triangles):
        _, counts = edge_face_counts(mesh)
        if np.any(counts > 2):
            warnings.warn(f"{path}: {int((counts > 2).sum())} non-manifold edge(s)", MeshWarning, stacklevel=2)
    return mesh


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> TriangleMesh:
    """Subdivided icosahedron with vertices projected onto the sphere, outward-wound."""
    t = (1.0 + 5.0 ** 0.5) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    v = [np.array(p, dtype=np.float64) / np.linalg.norm(p) for p in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = v[a] + v[b]
                v.append(m / np.linalg.norm(m))
                cache[key] = len(v) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return TriangleMesh(radius * np.array(v), np.array(faces))


def box_mesh(half_extents=(0.5, 0.5, 0.5), center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Closed 8-vertex, 12-triangle axis-aligned box, outward-wound."""
    h = np.asarray(half_extents, dtype=np.float64)
    corners = np.array([[x, y, z] for z in (-1, 1) for y in (-1, 1) for x in (-1, 1)], dtype=np.float64)
    faces = [
        (0, 2, 3), (0, 3, 1),  # -z
        (4, 5, 7), (4, 7, 6),  # +z
        (0, 1, 5), (0, 5, 4),  # -y
        (2, 6, 7), (2, 7, 3),  # +y
        (0, 4, 6), (0, 6, 2),  # -x
        (1, 3, 7), (1, 7, 5),  # +x
    ]
    return TriangleMesh(corners * h + np.asarray(center, dtype=np.float64), np.array(faces))
