import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import central_difference, relative_error
from sdfshrink.sdf import ScalarField3, box, capsule, intersection, sphere, union


def test_unit_sphere_center_and_outside(unit_sphere):
    npt.assert_array_equal(unit_sphere.eval([[0, 0, 0], [2, 0, 0]]), [-1.0, 1.0])


def test_union_takes_minimum():
    field = union(sphere(1.0), sphere(1.0, (3, 0, 0)))
    # 0.5 from each sphere surface
    assert field.eval([1.5, 0, 0])[0] == pytest.approx(0.5, abs=1e-15)
    assert field.eval([-2.0, 0, 0])[0] == pytest.approx(1.0)


def test_intersection_takes_maximum():
    field = intersection(sphere(1.0), sphere(1.0, (1, 0, 0)))
    assert field.eval([0.5, 0, 0])[0] == pytest.approx(-0.5)
    assert field.eval([-0.5, 0, 0])[0] == pytest.approx(0.5)


def test_operators_compose():
    a, b = sphere(1.0), sphere(0.5, (2, 0, 0))
    p = np.array([[1.2, 0.3, -0.1]])
    npt.assert_array_equal((a | b).eval(p), union(a, b).eval(p))
    npt.assert_array_equal((a & b).eval(p), intersection(a, b).eval(p))


def test_box_values():
    b = box((1.0, 2.0, 3.0))
    npt.assert_allclose(b.eval([[0, 0, 0], [2, 0, 0], [2, 3, 0]]), [-1.0, 1.0, np.sqrt(2.0)])


def test_rounded_box_corner_is_spherical():
    b = box((1.0, 1.0, 1.0), 0.25)
    corner = np.array([0.75, 0.75, 0.75])
    d = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
    assert b.eval(corner + 0.5 * d)[0] == pytest.approx(0.25)


def test_capsule_values():
    c = capsule((0, 0, 0), (0, 0, 2), 0.5)
    npt.assert_allclose(c.eval([[1, 0, 1], [0, 0, 3], [0, 0, 1]]), [0.5, 0.5, -0.5])


def test_parameter_validation():
    with pytest.raises(ValueError):
        sphere(0.0)
    with pytest.raises(ValueError):
        box((1, 1, 1), 2.0)
    with pytest.raises(ValueError):
        capsule((0, 0, 0), (1, 0, 0), -1)


def test_satisfies_protocol(unit_sphere, rounded_box):
    assert isinstance(unit_sphere, ScalarField3)
    assert isinstance(rounded_box, ScalarField3)


def test_eval_is_deterministic(rounded_box, rng):
    p = rng.uniform(-1, 1, (100, 3))
    assert rounded_box.eval(p).tobytes() == rounded_box.eval(p).tobytes()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_sphere_is_eikonal(p):
    g = sphere(1.0).grad(p)
    assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize(
    "field",
    [
        sphere(0.8, (0.1, -0.2, 0.3)),
        box((0.7, 0.5, 0.4), 0.1),
        box((0.6, 0.6, 0.3)),
        capsule((-0.5, 0.1, 0), (0.5, -0.2, 0.3), 0.3),
        union(sphere(0.6, (-0.5, 0, 0)), sphere(0.6, (0.5, 0, 0))),
    ],
    ids=["sphere", "rounded-box", "box", "capsule", "union"],
)
def test_gradient_matches_finite_differences(field, rng):
    p = rng.uniform(-1.2, 1.2, (400, 3))
    h = 1e-6
    fd = central_difference(field.eval, p, h)
    # skip points straddling a non-smooth set (box creases, medial axes)
    smooth = np.all(np.abs(central_difference(field.eval, p, 2 * h) - fd) < 1e-6, axis=1)
    assert smooth.sum() > 300
    assert relative_error(field.grad(p)[smooth], fd[smooth]).max() <= 1e-4
