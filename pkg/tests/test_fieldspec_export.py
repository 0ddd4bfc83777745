import numpy as np
import pytest

from sdfshrink.export import checkerboard, read_ppm, save_textured_obj, write_ppm
from sdfshrink.fieldspec import FieldSpecError, parse_field
from sdfshrink.mesh import load_obj
from sdfshrink.metrics import anchor_grid_to_mesh
from sdfshrink.sdf import GridSdf, MlpSdf, save_grid, save_mlp
from sdfshrink.shrink import init_sphere


class TestFieldSpec:
    def test_sphere_with_centre(self):
        f = parse_field("sphere:0.5@1,0,0")
        assert f.eval([1.0, 0, 0])[0] == pytest.approx(-0.5)

    def test_box_and_rounded_box(self):
        assert parse_field("box:1,2,3").eval([2.0, 0, 0])[0] == pytest.approx(1.0)
        assert parse_field("box:1,1,1,0.25").eval([0.0, 0, 0])[0] == pytest.approx(-1.0)

    def test_capsule(self):
        assert parse_field("capsule:0,0,0,0,0,2,0.5").eval([1.0, 0, 1])[0] == pytest.approx(0.5)

    def test_union_and_intersection(self):
        u = parse_field("sphere:1+sphere:1@3,0,0")
        assert u.eval([1.5, 0, 0])[0] == pytest.approx(0.5)
        i = parse_field("sphere:1&sphere:1@1,0,0")
        assert i.eval([0.5, 0, 0])[0] == pytest.approx(-0.5)

    @pytest.mark.parametrize("spec", ["torus:1", "sphere:a", "sphere:1,2", "box:1,1", "sphere:1@0,0",
                                      "sphere:-1", "nonexistent_file"])
    def test_rejects(self, spec):
        with pytest.raises(FieldSpecError):
            parse_field(spec)

    def test_detects_file_formats(self, tmp_path):
        save_grid(GridSdf(np.zeros(3), 1.0, np.zeros((2, 2, 2))), tmp_path / "g.bin")
        save_mlp(MlpSdf.from_arrays([np.ones((1, 3))], [np.zeros(1)]), tmp_path / "m.txt")
        (tmp_path / "x.txt").write_text("hello")
        assert isinstance(parse_field(str(tmp_path / "g.bin")), GridSdf)
        assert isinstance(parse_field(str(tmp_path / "m.txt")), MlpSdf)
        with pytest.raises(FieldSpecError):
            parse_field(str(tmp_path / "x.txt"))


class TestTexture:
    def test_white_origin_and_cell_size(self):
        img = checkerboard(16)
        assert img[0, 0].tolist() == [255, 255, 255]
        assert img[0, 32].tolist() == [0, 0, 0] and img[0, 31].tolist() == [255, 255, 255]

    @pytest.mark.parametrize("cells", [0, 3, 7])
    def test_rejects_odd_or_tiny(self, cells):
        with pytest.raises(ValueError):
            checkerboard(cells)

    def test_ppm_round_trip(self, tmp_path):
        img = np.random.default_rng(0).integers(0, 256, (5, 7, 3), dtype=np.uint8)
        write_ppm(img, tmp_path / "x.ppm")
        assert np.array_equal(read_ppm(tmp_path / "x.ppm"), img)

    def test_payload_starting_with_whitespace_bytes(self, tmp_path):
        img = np.full((2, 2, 3), 32, dtype=np.uint8)  # 32 is ASCII space
        write_ppm(img, tmp_path / "x.ppm")
        assert np.array_equal(read_ppm(tmp_path / "x.ppm"), img)

    def test_textured_obj(self, tmp_path):
        mesh = anchor_grid_to_mesh(init_sphere(8, 4, 1.0))
        mtl, tex = save_textured_obj(mesh, tmp_path / "shape.obj", cells=4)
        assert mtl.name == "shape.mtl" and tex.name == "shape_checker.ppm"
        back = load_obj(tmp_path / "shape.obj")
        assert len(back.uv) == len(back.vertices)
        assert read_ppm(tex)[0, 0].tolist() == [255, 255, 255]
