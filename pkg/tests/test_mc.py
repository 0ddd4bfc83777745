import numpy as np
import numpy.testing as npt
import pytest

from oracles import sample_sphere
from sdfshrink.mc import marching_cubes
from sdfshrink.mc.marching import edge_crossing
from sdfshrink.mc.tables import CENTER, CENTER_LOOPS, EDGE_TABLE, EDGES, TRI_TABLE
from sdfshrink.mesh import mesh_watertight_check
from sdfshrink.metrics import chamfer_distance, sample_surface
from sdfshrink.sdf import GridSdf, box, sphere


def canonical(tris):
    """Triangles as a set, each rotated to start at its smallest index (orientation kept)."""
    out = set()
    for t in np.asarray(tris).reshape(-1, 3):
        k = int(np.argmin(t))
        out.add(tuple(int(x) for x in np.roll(t, -k)))
    return out


def random_closed_grid(seed, n=9):
    """Random values with a positive border, so every iso-surface is closed."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, n, n))
    v[[0, -1]] = v[:, [0, -1]] = v[:, :, [0, -1]] = 1.0
    return GridSdf(np.zeros(3), 0.25, v)


@pytest.fixture(scope="module")
def sphere27():
    return GridSdf.sample(sphere(1.0), (-1.3, -1.3, -1.3), (1.3, 1.3, 1.3), 27)


class TestTable:
    def test_trivial_cases_are_empty(self):
        assert TRI_TABLE[0] == () and TRI_TABLE[255] == ()

    def test_edge_table_matches_sign_changes(self):
        for case in range(256):
            below = [(case >> c) & 1 for c in range(8)]
            expected = sum(1 << e for e, (a, b) in enumerate(EDGES) if below[a] != below[b])
            assert EDGE_TABLE[case] == expected
            assert set(TRI_TABLE[case]) - {CENTER} == {e for e in range(12) if expected >> e & 1}

    def test_sign_flip_reverses_triangles(self):
        for case in range(256):
            flipped = [t[::-1] for t in np.reshape(TRI_TABLE[255 - case], (-1, 3))]
            assert canonical(TRI_TABLE[case]) == canonical(flipped)

    def test_at_most_twelve_triangles(self):
        assert max(len(t) for t in TRI_TABLE) <= 36

    def test_centre_vertex_only_for_long_loops(self):
        with_centre = [c for c in range(256) if CENTER_LOOPS[c]]
        assert len(with_centre) == 14
        for c in with_centre:
            assert len(CENTER_LOOPS[c]) in (9, 12)
            assert CENTER in TRI_TABLE[c]
            assert CENTER_LOOPS[255 - c] == CENTER_LOOPS[c]

    def test_single_corner_case(self):
        assert len(TRI_TABLE[1]) == 3


def test_edge_crossing_midpoint_and_singular():
    assert edge_crossing(np.array([0.0]), np.array([1.0]), np.array([-1.0]), np.array([1.0]))[0] == 0.5
    assert edge_crossing(np.array([0.0]), np.array([1.0]), np.array([-3.0]), np.array([1.0]))[0] == 0.75
    assert edge_crossing(np.array([2.0]), np.array([4.0]), np.array([1e-14]), np.array([1e-14]))[0] == 3.0


def test_all_positive_grid_is_empty():
    mesh = marching_cubes(GridSdf(np.zeros(3), 1.0, np.ones((4, 4, 4))))
    assert mesh.vertices.shape == (0, 3) and mesh.triangles.shape == (0, 3)


def test_single_negative_node_gives_closed_octahedron():
    v = np.ones((3, 3, 3))
    v[1, 1, 1] = -1.0
    mesh = marching_cubes(GridSdf(np.zeros(3), 1.0, v))
    assert len(mesh.vertices) == 6 and len(mesh.triangles) == 8
    assert mesh_watertight_check(mesh) == (True, 0)
    npt.assert_allclose(np.abs(mesh.vertices - 1).sum(axis=1), 0.5)


class TestSphere:
    def test_watertight(self, sphere27):
        assert mesh_watertight_check(marching_cubes(sphere27)) == (True, 0)

    def test_vertices_near_sphere(self, sphere27):
        mesh = marching_cubes(sphere27)
        r = np.linalg.norm(mesh.vertices, axis=1)
        assert np.abs(r - 1).max() <= np.sqrt(3) * sphere27.spacing

    def test_normals_point_outward(self, sphere27):
        mesh = marching_cubes(sphere27)
        centres = mesh.corners.mean(axis=1)
        assert np.all(np.einsum("ij,ij->i", mesh.face_normals(), centres) > 0)

    def test_chamfer_against_analytic_samples(self, sphere27):
        mesh = marching_cubes(sphere27)
        pts, _ = sample_sphere(10_000, 42)
        cd = chamfer_distance(sample_surface(mesh, 10_000, 42), pts)
        # root-mean-square nearest distance, back in world units
        assert np.sqrt(cd / 2000.0) <= 2 * sphere27.spacing

    def test_iso_offset_grows_surface(self, sphere27):
        mesh = marching_cubes(sphere27, iso=0.1)
        r = np.linalg.norm(mesh.vertices, axis=1)
        assert abs(r.mean() - 1.1) < 0.02


@pytest.mark.parametrize("seed", range(30))
def test_random_closed_fields_are_watertight(seed):
    mesh = marching_cubes(random_closed_grid(seed))
    assert len(mesh.triangles) > 0
    assert mesh_watertight_check(mesh) == (True, 0)


@pytest.mark.parametrize("seed", range(6))
def test_sign_flip_symmetry_is_exact(seed):
    grid = random_closed_grid(seed)
    flipped = GridSdf(grid.origin, grid.spacing, -grid.values)
    a, b = marching_cubes(grid), marching_cubes(flipped)
    assert np.array_equal(a.vertices, b.vertices)
    assert canonical(a.triangles) == canonical(b.triangles[:, ::-1])


def test_nodes_exactly_on_surface_still_watertight():
    g = GridSdf.sample(box((0.5, 0.5, 0.5)), (-1, -1, -1), (1, 1, 1), 9)
    assert np.any(g.values == 0)
    assert mesh_watertight_check(marching_cubes(g)) == (True, 0)


def test_deterministic(sphere27):
    a, b = marching_cubes(sphere27), marching_cubes(sphere27)
    assert a.vertices.tobytes() == b.vertices.tobytes()
    assert a.triangles.tobytes() == b.triangles.tobytes()
