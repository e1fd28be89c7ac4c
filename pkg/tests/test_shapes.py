import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from pompeiu_lab.errors import PreconditionError
from pompeiu_lab.shapes import (
    RigidMotion,
    StarShape,
    apply_motion,
    area,
    dump_shape,
    load_shape,
    min_radius_on_grid,
    shoelace_area,
)


def brute_force(shape: StarShape, phi: float) -> float:
    total = shape.mean_radius
    for m in range(1, shape.order + 1):
        total += shape.cos_coeffs[m - 1] * math.cos(m * phi)
        total += shape.sin_coeffs[m - 1] * math.sin(m * phi)
    return total


def test_disc_has_zero_derivative(disc):
    assert disc.eval(0.37, 1) == 0.0


def test_second_derivative_of_first_harmonic():
    shape = StarShape.from_coefficients(1.0, cos=[0.3])
    assert shape.eval(0.0, 2) == pytest.approx(-0.3, abs=1e-15)


def test_eval_matches_term_by_term_sum():
    shape = StarShape.from_coefficients(1.0, cos=[0.0, 0.0, 0.2])
    phi = np.random.default_rng(0).uniform(-math.pi, math.pi, 1000)
    values = shape.eval(phi)
    expected = np.array([brute_force(shape, p) for p in phi])
    np.testing.assert_allclose(values, expected, rtol=0, atol=1e-14)


def test_eval_rejects_fourth_derivative(bump):
    with pytest.raises(PreconditionError, match="0..3"):
        bump.eval(0.1, 4)


@pytest.mark.parametrize("deriv", [1, 2, 3])
def test_derivatives_match_finite_differences(deriv):
    shape = StarShape.from_coefficients(1.0, cos=[0.2, 0.0, 0.05], sin=[0.0, 0.1, 0.0])
    phi = np.random.default_rng(1).uniform(-math.pi, math.pi, 100)
    h = 1e-5
    numeric = (shape.eval(phi + h, deriv - 1) - shape.eval(phi - h, deriv - 1)) / (2 * h)
    exact = shape.eval(phi, deriv)
    assert np.all(np.abs(numeric - exact) <= 1e-6 * np.maximum(1.0, np.abs(exact)))


def test_area_of_discs():
    assert area(StarShape.disc(1.0)) == pytest.approx(math.pi, rel=1e-13)
    assert area(StarShape.disc(2.0)) == pytest.approx(4 * math.pi, rel=1e-13)


def test_area_of_first_harmonic_perturbation():
    shape = StarShape.from_coefficients(1.0, cos=[0.1])
    assert area(shape) == pytest.approx(math.pi * (1 + 0.1**2 / 2), rel=1e-13)


def test_positivity_bound_rejects_shape():
    with pytest.raises(ValidationError, match="positivity bound"):
        StarShape.from_coefficients(1.0, cos=[0.6], sin=[0.5])


def test_positivity_holds_on_grid():
    shape = StarShape.from_coefficients(1.0, cos=[0.3, 0.2], sin=[0.1, 0.25])
    assert shape.c1 == pytest.approx(0.15)
    assert min_radius_on_grid(shape) >= shape.c1 > 0
    assert shape.c2 == pytest.approx(1.85)


def test_coefficients_are_padded():
    shape = StarShape.from_coefficients(1.0, cos=[0.1, 0.2], sin=[0.05])
    assert shape.sin_coeffs == (0.05, 0.0)
    assert shape.order == 2


def test_shifted_moves_origin():
    shape = StarShape.from_coefficients(1.0, cos=[0.1, 0.05, 0.02], sin=[0.03, 0.0, 0.04])
    phi = np.linspace(-math.pi, math.pi, 50)
    moved = shape.shifted(0.7)
    np.testing.assert_allclose(moved.eval(phi), shape.eval(phi + 0.7), atol=1e-14)
    np.testing.assert_allclose(moved.eval(phi, 3), shape.eval(phi + 0.7, 3), atol=1e-13)


def test_identity_motion():
    np.testing.assert_array_equal(apply_motion(RigidMotion(), [1.0, 2.0]), [1.0, 2.0])


def test_quarter_turn():
    motion = RigidMotion(rotation=math.pi / 2)
    np.testing.assert_allclose(apply_motion(motion, [1.0, 0.0]), [0.0, 1.0], atol=1e-15)


def test_motion_then_inverse_is_identity():
    rng = np.random.default_rng(2)
    points = rng.uniform(-1, 1, size=(100, 2))
    motion = RigidMotion(rotation=1.3, translation=(0.4, -0.8))
    back = apply_motion(motion.inverse(), apply_motion(motion, points))
    np.testing.assert_allclose(back, points, atol=1e-14)


def test_compose_matches_sequential_application():
    first = RigidMotion(rotation=0.4, translation=(1.0, 0.0))
    second = RigidMotion(rotation=-1.1, translation=(0.2, 0.3))
    point = np.array([0.3, -0.7])
    np.testing.assert_allclose(
        apply_motion(second.compose(first), point),
        apply_motion(second, apply_motion(first, point)),
        atol=1e-15,
    )


def test_area_invariant_under_motion():
    shape = StarShape.from_coefficients(1.0, cos=[0.1, 0.15], sin=[0.0, 0.05])
    polygon = shape.boundary_points(4096)
    moved = apply_motion(RigidMotion(rotation=2.1, translation=(3.0, -1.5)), polygon)
    assert shoelace_area(moved) == pytest.approx(shoelace_area(polygon), rel=1e-8)
    assert shoelace_area(polygon) == pytest.approx(area(shape), rel=1e-5)


def test_load_shape(shapes_dir):
    shape = load_shape(shapes_dir / "bump.json")
    assert shape.mean_radius == 1.0
    assert shape.cos_coeffs == (0.2,)


def test_load_shape_missing_file(tmp_path):
    path = tmp_path / "nowhere.json"
    with pytest.raises(PreconditionError, match="nowhere.json"):
        load_shape(path)


def test_load_shape_names_positivity_bound(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"mean_radius": 1.0, "cos": [0.7], "sin": [0.4]}))
    with pytest.raises(PreconditionError, match="positivity bound"):
        load_shape(path)


def test_dump_shape_writes_coefficients(tmp_path):
    shape = StarShape.from_coefficients(1.5, cos=[0.1, 0.2], sin=[0.0, 0.3])
    path = tmp_path / "out.json"
    dump_shape(shape, path)
    assert json.loads(path.read_text()) == {
        "mean_radius": 1.5,
        "cos": [0.1, 0.2],
        "sin": [0.0, 0.3],
    }
