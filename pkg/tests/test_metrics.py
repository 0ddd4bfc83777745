import json

import numpy as np
import numpy.testing as npt
import pytest

from oracles import chamfer_bruteforce, normal_consistency_bruteforce
from sdfshrink.mesh import TriangleMesh, box_mesh, icosphere, mesh_watertight_check
from sdfshrink.metrics import (
    MetricsReport,
    Samples,
    anchor_grid_to_mesh,
    chamfer_distance,
    evaluate,
    normal_consistency,
    sample_surface,
    uv_fold_check,
)
from sdfshrink.shrink import init_sphere


def plane(flip=False):
    verts = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], float)
    tris = np.array([[0, 1, 2], [0, 2, 3]])
    return TriangleMesh(verts, tris[:, ::-1] if flip else tris)


class TestSampling:
    def test_points_inside_single_triangle(self):
        tri = TriangleMesh(np.array([[0, 0, 0], [2, 0, 0], [0, 1, 0]], float), np.array([[0, 1, 2]]))
        s = sample_surface(tri, 2000, seed=3)
        x, y = s.points[:, 0], s.points[:, 1]
        # barycentric coordinates (1 - x/2 - y, x/2, y)
        assert np.all(x >= 0) and np.all(y >= 0) and np.all(x / 2 + y <= 1 + 1e-15)
        assert np.all(s.points[:, 2] == 0)
        npt.assert_array_equal(s.normals, np.tile([0, 0, 1.0], (2000, 1)))

    def test_area_weighting(self):
        verts = np.array([[0, 0, 0], [1, 0, 0], [0, 2, 0], [10, 0, 0], [13, 0, 0], [10, 2, 0]], float)
        mesh = TriangleMesh(verts, np.array([[0, 1, 2], [3, 4, 5]]))
        npt.assert_allclose(mesh.face_areas(), [1, 3])
        s = sample_surface(mesh, 100_000, seed=42)
        share = np.mean(s.points[:, 0] >= 10)
        assert abs(share - 0.75) <= 0.01

    def test_icosphere_mean_radius(self):
        mesh = icosphere(3)
        r = np.linalg.norm(sample_surface(mesh, 10_000).points, axis=1)
        centres = mesh.corners.mean(axis=1)
        tess = 1 - np.einsum("ij,ij->i", mesh.face_normals(), centres).min()
        assert 1 - tess <= r.mean() <= 1

    def test_same_seed_same_samples(self):
        a, b = sample_surface(icosphere(2), 500, 7), sample_surface(icosphere(2), 500, 7)
        assert a.points.tobytes() == b.points.tobytes()
        assert sample_surface(icosphere(2), 500, 8).points.tobytes() != a.points.tobytes()

    def test_zero_area_mesh(self):
        flat = TriangleMesh(np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], float), np.array([[0, 1, 2]]))
        with pytest.raises(ValueError, match="zero"):
            sample_surface(flat, 10)


class TestChamfer:
    def test_identical_sets(self, rng):
        p = rng.normal(size=(50, 3))
        assert chamfer_distance(p, p) == 0.0

    def test_singletons(self):
        assert chamfer_distance([[0, 0, 0]], [[1, 0, 0]]) == 2000.0
        assert chamfer_distance([[0, 0, 0]], [[0.01, 0, 0]]) == pytest.approx(0.2, rel=1e-12)

    def test_symmetric(self, rng):
        a, b = rng.normal(size=(300, 3)), rng.normal(size=(200, 3))
        assert chamfer_distance(a, b) == chamfer_distance(b, a)

    def test_quadratic_scaling(self, rng):
        a, b = rng.normal(size=(300, 3)), rng.normal(size=(200, 3))
        assert chamfer_distance(2 * a, 2 * b) == pytest.approx(4 * chamfer_distance(a, b), rel=1e-12)

    @pytest.mark.parametrize("trial", range(5))
    def test_matches_brute_force(self, trial):
        rng = np.random.default_rng(trial)
        a, b = rng.normal(size=(500, 3)), rng.normal(size=(500, 3)) + 0.1
        assert abs(chamfer_distance(a, b) - chamfer_bruteforce(a, b)) <= 1e-12

    def test_workers_do_not_change_result(self, rng):
        a, b = rng.normal(size=(2000, 3)), rng.normal(size=(1500, 3))
        assert chamfer_distance(a, b, workers=1) == chamfer_distance(a, b, workers=4)

    def test_empty_is_rejected(self):
        with pytest.raises(ValueError):
            chamfer_distance(np.zeros((0, 3)), np.zeros((1, 3)))


class TestNormalConsistency:
    def test_mesh_against_itself(self):
        s = sample_surface(icosphere(2), 1000)
        assert normal_consistency(s, s) == 1.0

    def test_flipped_plane(self):
        a = sample_surface(plane(), 1000, seed=1)
        b = sample_surface(plane(flip=True), 1000, seed=2)
        assert np.all(b.normals[:, 2] == -1)
        assert normal_consistency(a, b) == pytest.approx(1.0, abs=1e-15)

    def test_sphere_vs_cube_matches_brute_force(self):
        a = sample_surface(icosphere(2), 500, seed=1)
        b = sample_surface(box_mesh((0.6, 0.6, 0.6)), 500, seed=2)
        nc = normal_consistency(a, b)
        assert nc < 1
        assert abs(nc - normal_consistency_bruteforce(a.points, a.normals, b.points, b.normals)) <= 1e-12

    def test_invariant_under_normal_flips(self, rng):
        a = sample_surface(icosphere(2), 400, seed=1)
        b = sample_surface(box_mesh(), 400, seed=2)
        signs = rng.choice([-1.0, 1.0], size=(400, 1))
        flipped = Samples(b.points, b.normals * signs)
        assert normal_consistency(a, flipped) == normal_consistency(a, b)

    def test_zero_normal_is_rejected(self):
        s = Samples(np.zeros((2, 3)), np.array([[0, 0, 1.0], [0, 0, 0]]))
        with pytest.raises(ValueError, match="zero-length"):
            normal_consistency(s, s)


class TestFolds:
    def test_exact_sphere_has_none(self):
        assert uv_fold_check(init_sphere(200, 100, 1.0)) == 0

    def test_swapped_column_anchors_fold(self):
        grid = init_sphere(40, 20, 1.0)
        pos = grid.positions.copy()
        pos[10, [5, 6]] = pos[10, [6, 5]]
        assert uv_fold_check(grid.with_positions(pos)) >= 1

    def test_swapped_row_anchors_fold(self):
        grid = init_sphere(40, 20, 1.0)
        pos = grid.positions.copy()
        pos[[8, 9], 3] = pos[[9, 8], 3]
        assert uv_fold_check(grid.with_positions(pos)) >= 1

    def test_ellipsoid_has_none(self):
        grid = init_sphere(30, 15, 1.0)
        assert uv_fold_check(grid.with_positions(grid.positions * [2.0, 0.5, 1.0])) == 0


class TestAnchorMesh:
    def test_counts_and_closure(self):
        grid = init_sphere(200, 100, 1.0)
        mesh = anchor_grid_to_mesh(grid)
        assert len(mesh.vertices) == 99 * 201 + 2
        assert len(mesh.triangles) == 2 * 200 * 99
        assert mesh_watertight_check(mesh) == (True, 0)

    def test_outward_normals(self):
        mesh = anchor_grid_to_mesh(init_sphere(24, 12, 1.0))
        centres = mesh.corners.mean(axis=1)
        assert np.all(np.einsum("ij,ij->i", mesh.face_normals(), centres) > 0)

    def test_uv_triangles_are_non_degenerate(self):
        mesh = anchor_grid_to_mesh(init_sphere(16, 8, 1.0))
        t = mesh.uv[mesh.triangles]
        e1, e2 = t[:, 1] - t[:, 0], t[:, 2] - t[:, 0]
        area = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        assert np.all(np.abs(area) > 0)

    def test_seam_duplicates_share_positions(self):
        mesh = anchor_grid_to_mesh(init_sphere(8, 4, 1.0))
        ring = mesh.vertices[1:10]
        npt.assert_array_equal(ring[0], ring[8])
        assert mesh.uv[1, 0] == 0 and mesh.uv[9, 0] == 1


class TestReport:
    def test_self_evaluation(self):
        report = evaluate(icosphere(2), icosphere(2), n=1000)
        assert report.cd == 0.0 and report.nc == 1.0

    def test_json_is_stable(self):
        r = MetricsReport(0.5, 0.99, 10, 42, fold_count=0)
        assert r.to_json() == r.to_json()
        data = json.loads(r.to_json())
        assert data == {"cd": 0.5, "fold_count": 0, "iterations": None, "nc": 0.99,
                        "residual": None, "samples_used": 10, "seed": 42}
        assert "UV folds" in r.table() and "Iterations" not in r.table()
