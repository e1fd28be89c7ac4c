import math

import numpy as np
import pytest
from scipy import integrate
from scipy import special as sp

from pompeiu_lab.errors import PreconditionError
from pompeiu_lab.pompeiu import (
    ComplexDirection,
    boundary_moment,
    direction_sweep,
    extract_moments,
    fit_moments,
    indicator_transform,
    inner_s_integral,
    laplace_weighted,
    max_abs_a,
    moment,
    pompeiu_integral,
    radial_integral,
    remainder_scaling,
    variety_direction,
    variety_moment,
    variety_theta,
)
from pompeiu_lab.shapes import RigidMotion, StarShape
from pompeiu_lab.special import j1_zeros


def disc_transform(k: float) -> float:
    return 2 * math.pi * sp.j1(k) / k


@pytest.mark.parametrize("k", [0.5, 2.0, 5.0])
def test_disc_transform_real_directions(disc, params_at, k):
    expected = disc_transform(k)
    for theta in (0.0, 0.7, 2.5):
        value = indicator_transform(disc, params_at(k), ComplexDirection.from_angle(theta))
        assert value == pytest.approx(expected, rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("k", [0.5, 2.0, 5.0])
def test_disc_transform_variety_directions(disc, params_at, k):
    expected = disc_transform(k)
    for s in (0.3, 1.0):
        value = indicator_transform(disc, params_at(k), variety_direction(s))
        assert value == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_direction_sweep_matches_single_evaluations(bump, params_at):
    params = params_at(2.5)
    samples = direction_sweep(bump, params, 8)
    assert len(samples) == 8
    for sample in samples:
        single = indicator_transform(bump, params, sample.direction)
        assert sample.value == pytest.approx(single, abs=1e-11)


def test_direction_sweep_needs_a_direction(disc, params_at):
    with pytest.raises(PreconditionError, match="n_dirs"):
        direction_sweep(disc, params_at(2.0), 0)


def test_disc_transform_vanishes_at_j1_zeros(disc, params_at):
    for zero in j1_zeros(5):
        samples = direction_sweep(disc, params_at(zero.value), 64)
        assert max(abs(s.value) for s in samples) <= 1e-9


def test_disc_pompeiu_integral_vanishes_at_j1_zeros(disc, params_at):
    rng = np.random.default_rng(0)
    for zero in j1_zeros(3):
        params = params_at(zero.value)
        for _ in range(20):
            motion = RigidMotion(
                rotation=rng.uniform(0, 2 * math.pi), translation=tuple(rng.uniform(-2, 2, 2))
            )
            theta = rng.uniform(0, 2 * math.pi)
            beta = [math.cos(theta), math.sin(theta)]
            assert abs(pompeiu_integral(disc, params, beta, motion)) <= 1e-9


def test_disc_transform_is_direction_independent(disc, params_at):
    values = np.array([s.value for s in direction_sweep(disc, params_at(2.0), 64)])
    assert np.max(np.abs(values - values[0])) <= 1e-10 * abs(values[0])


def test_opposite_direction_gives_conjugate(bump, params_at):
    params = params_at(3.0)
    direction = ComplexDirection.from_angle(0.7)
    forward = indicator_transform(bump, params, direction)
    backward = indicator_transform(bump, params, direction.negated())
    assert backward == pytest.approx(forward.conjugate(), abs=1e-11)


def test_translation_only_changes_phase(bump, params_at):
    params = params_at(3.0)
    beta = [0.6, 0.8]
    reference = abs(pompeiu_integral(bump, params, beta, RigidMotion()))
    for shift in [(0.5, 0.0), (-1.0, 2.0), (3.0, -0.25)]:
        moved = pompeiu_integral(bump, params, beta, RigidMotion(translation=shift))
        assert abs(moved) == pytest.approx(reference, abs=1e-11)


def test_pompeiu_integral_is_phase_times_transform(bump, params_at):
    params = params_at(3.0)
    motion = RigidMotion(rotation=0.9, translation=(0.5, -1.0))
    beta = np.array([0.6, 0.8])
    body = motion.matrix.T @ beta
    expected = np.exp(1j * 3.0 * (0.5 * 0.6 - 1.0 * 0.8)) * indicator_transform(
        bump, params, ComplexDirection(complex(body[0]), complex(body[1]))
    )
    assert pompeiu_integral(bump, params, beta, motion) == pytest.approx(expected, abs=1e-11)


def test_pompeiu_integral_rejects_non_unit_beta(bump, params_at):
    with pytest.raises(PreconditionError, match="unit"):
        pompeiu_integral(bump, params_at(1.0), [1.0, 1.0], RigidMotion())


def test_off_variety_direction_rejected():
    with pytest.raises(PreconditionError, match="off the variety"):
        ComplexDirection(1.0, 1.0)


@pytest.mark.parametrize("s", [0.5, 1.0, 3.0])
def test_variety_direction_residual(s):
    direction = variety_direction(s)
    assert direction.residual <= 1e-13
    assert not direction.is_real


@pytest.mark.parametrize("s", [0.2, 0.8, 1.5])
def test_boundary_moment_on_variety_matches_closed_form(bump, params_at, s):
    params = params_at(3.0)
    via_theta = boundary_moment(bump, params, variety_theta(s))
    direct = variety_moment(bump, params, s)
    assert via_theta == pytest.approx(direct, abs=1e-10 * max(1.0, abs(direct)))


def test_variety_theta_lands_on_the_variety():
    theta = variety_theta(0.75)
    assert np.cos(theta) == pytest.approx(0.75j, abs=1e-15)
    assert np.sin(theta) == pytest.approx(1.25, abs=1e-15)


@pytest.mark.parametrize("c", [0.05, 0.15 + 0.1j, 3.0 + 1.0j, -2.0j, 10.0])
def test_radial_integral_matches_adaptive_quadrature(c):
    F = 1.3
    re, _ = integrate.quad(lambda r: (r * np.exp(1j * c * r)).real, 0, F, epsabs=1e-14)
    im, _ = integrate.quad(lambda r: (r * np.exp(1j * c * r)).imag, 0, F, epsabs=1e-14)
    assert complex(radial_integral(c, F)) == pytest.approx(complex(re, im), abs=1e-13)


def test_radial_integral_at_zero_frequency():
    np.testing.assert_allclose(radial_integral(0.0, [1.0, 2.0]), [0.5, 2.0], atol=1e-16)


def test_max_abs_a(bump, params_at):
    assert max_abs_a(bump, params_at(3.0)) == pytest.approx(3.6, rel=1e-12)
    assert max_abs_a(StarShape.disc(2.0), params_at(1.5), origin=0.4) == pytest.approx(3.0)


def test_inner_integral_requires_decay():
    with pytest.raises(PreconditionError, match="must exceed"):
        inner_s_integral(2.0, 1.0, 1.5)


def test_inner_integral_at_zero_b():
    assert inner_s_integral(1.0, 0.0, 9.0) == pytest.approx(0.1, abs=1e-13)


def test_remainder_decays_like_inverse_square():
    a, b = 1.8807, 1.5841
    A_values = [50.0, 100.0, 200.0]
    scaled = remainder_scaling(a, b, A_values)
    for i in range(2):
        expected = ((a + A_values[i + 1]) / (a + A_values[i])) ** 2
        assert scaled[i] / scaled[i + 1] == pytest.approx(expected, rel=0.05)
    assert scaled[0] == pytest.approx(abs(b) / (a + 50.0) ** 2, rel=0.05)


def test_laplace_weighted_orderings_agree(bump, params_at):
    params = params_at(3.0)
    phi_outer = laplace_weighted(bump, params, 50.0)
    s_outer = laplace_weighted(bump, params, 50.0, s_outer=True)
    assert phi_outer == pytest.approx(s_outer, abs=1e-9)


def test_laplace_weighted_leading_terms(bump, params_at):
    params = params_at(3.0)
    A = 1e4
    i0 = moment(bump, params, 0).value
    i1 = moment(bump, params, 1).value
    weighted = laplace_weighted(bump, params, A)
    assert abs(A * weighted - i0 + i1 / A) <= 1e-6 * abs(i0)


def test_laplace_weighted_requires_large_a(bump, params_at):
    with pytest.raises(PreconditionError, match="max\\|a\\|"):
        laplace_weighted(bump, params_at(3.0), 3.0)


def test_disc_moments_vanish(disc, params_at):
    for j in (0, 1, 5, 30):
        assert moment(disc, params_at(3.0), j).value == 0


def test_scaled_and_direct_moments_agree(bump, params_at):
    params = params_at(3.0)
    scaled = moment(bump, params, 40)
    direct = moment(bump, params, 40, scaled=False)
    assert scaled.log_scale == pytest.approx(40 * math.log(3.6), rel=1e-12)
    assert scaled.value == pytest.approx(direct.value, rel=1e-9)
    assert scaled.error_estimate <= 1e-11


def test_moment_origin_matches_shifted_shape(params_at):
    shape = StarShape.from_coefficients(1.0, cos=[0.1, 0.05], sin=[0.0, 0.08])
    params = params_at(2.0)
    tau = 0.6
    rotated = moment(shape, params, 3, origin=tau)
    shifted = moment(shape.shifted(tau), params, 3)
    assert rotated.value == pytest.approx(shifted.value, abs=1e-11)


def test_large_moment_index_stays_finite(bump, params_at):
    report = moment(bump, params_at(3.0), 2000)
    assert math.isfinite(report.log_abs)
    assert abs(report.scaled_value) < 10.0


@pytest.mark.parametrize("j", [-1, 2001, 1.5])
def test_moment_index_range(bump, params_at, j):
    with pytest.raises(PreconditionError, match="0..2000"):
        moment(bump, params_at(3.0), j)


def test_extracted_moments_match_direct_ones(bump, params_at):
    params = params_at(3.0)
    grid = np.geomspace(1e2, 1e4, 12)
    fit = fit_moments(bump, params, 1, grid)
    i0 = moment(bump, params, 0).value
    i1 = moment(bump, params, 1).value
    assert fit.moments[0] == pytest.approx(i0, rel=1e-6)
    assert fit.moments[1] == pytest.approx(i1, rel=1e-4)
    assert fit.a_grid == sorted(fit.a_grid)
    assert len(fit.weighted) == 12


def test_extracted_moments_of_disc_vanish(disc, params_at):
    moments = extract_moments(disc, params_at(2.0), 1, np.geomspace(1e2, 1e4, 12))
    assert max(abs(m) for m in moments) <= 1e-12


def test_extraction_preconditions(bump, params_at):
    params = params_at(3.0)
    with pytest.raises(PreconditionError, match="j_max \\+ 3"):
        fit_moments(bump, params, 1, [1e2, 1e4])
    with pytest.raises(PreconditionError, match="two decades"):
        fit_moments(bump, params, 1, np.linspace(100.0, 500.0, 8))
    with pytest.raises(PreconditionError, match="must exceed"):
        fit_moments(bump, params, 1, np.geomspace(2.0, 1e3, 8))
