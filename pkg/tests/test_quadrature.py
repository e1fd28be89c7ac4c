import math

import numpy as np
import pytest
from scipy import special as sp

from pompeiu_lab.errors import ConvergenceError, PreconditionError
from pompeiu_lab.quadrature import MIN_PANELS, halfline_integral, periodic_integral, periodic_rule


def test_periodic_exponential_of_cosine():
    result = periodic_integral(lambda phi: np.exp(np.cos(phi)), 1e-13)
    assert result.value.real == pytest.approx(2 * math.pi * sp.i0(1.0), abs=1e-12)
    assert result.error_estimate <= 1e-13
    assert result.nodes_used == 64


def test_periodic_trigonometric_polynomial_is_exact():
    result = periodic_integral(lambda phi: np.cos(phi) ** 2, 1e-14)
    assert result.value.real == pytest.approx(math.pi, abs=1e-14)


def test_periodic_rule_fixed_nodes():
    value = periodic_rule(lambda phi: np.cos(3 * phi) ** 2, 16)
    assert value == pytest.approx(math.pi, abs=1e-14)


def test_periodic_nonsmooth_integrand_fails():
    with pytest.raises(ConvergenceError) as info:
        periodic_integral(lambda phi: np.abs(np.sin(phi)), 1e-12, max_nodes=1024)
    assert info.value.estimate > 1e-12


def test_periodic_vector_integrand():
    weights = np.arange(1, 4)

    def g(phi):
        return np.exp(np.cos(phi))[:, None] * weights[None, :]

    result = periodic_integral(g, 1e-13)
    expected = 2 * math.pi * sp.i0(1.0) * weights
    np.testing.assert_allclose(result.value.real, expected, rtol=0, atol=5e-12)


def test_periodic_complex_integrand():
    result = periodic_integral(lambda phi: np.exp(1j * np.sin(phi)), 1e-13)
    assert result.value.real == pytest.approx(2 * math.pi * sp.j0(1.0), abs=1e-12)
    assert abs(result.value.imag) <= 1e-13


def test_periodic_rejects_nonpositive_tolerance():
    with pytest.raises(PreconditionError, match="positive"):
        periodic_integral(np.cos, 0.0)


def test_halfline_exponential():
    result = halfline_integral(lambda s: np.exp(-2 * s), 2.0, 1e-12)
    assert result.value.real == pytest.approx(0.5, abs=1e-11)


def test_halfline_oscillating_exponential():
    rate = 1 - 1j
    result = halfline_integral(lambda s: np.exp(-rate * s), 1.0, 1e-12)
    assert result.value == pytest.approx(1 / rate, abs=1e-10)


def test_halfline_vector_integrand():
    rates = np.array([1.0, 2.0, 4.0])
    result = halfline_integral(lambda s: np.exp(-np.outer(s, rates)), 1.0, 1e-12)
    np.testing.assert_allclose(result.value.real, 1 / rates, rtol=0, atol=1e-10)


def test_halfline_preconditions():
    with pytest.raises(PreconditionError, match="decay_rate"):
        halfline_integral(np.exp, 0.0)
    with pytest.raises(PreconditionError, match="tolerance"):
        halfline_integral(lambda s: np.exp(-s), 1.0, -1.0)


def test_halfline_cut_covers_growing_envelope():
    def g(s):
        return s * np.exp(-2 * s)

    base = halfline_integral(g, 2.0, 1e-12)
    doubled = halfline_integral(g, 2.0, 1e-12, s_max_factor=2.0)
    assert abs(base.value - 0.25) <= 1e-12
    assert abs(doubled.value - base.value) <= 2e-12
    assert base.error_estimate <= 1.5e-12


def test_halfline_matches_denser_reference():
    a, b, A = 1.0, 0.5, 10.0

    def g(s):
        return np.exp(-s * (a + A) + 1j * np.sqrt(s**2 + 1) * b)

    result = halfline_integral(g, a + A, 1e-12)
    reference = halfline_integral(g, a + A, 1e-14, min_panels=2 * MIN_PANELS)
    assert abs(result.value - reference.value) <= 1e-12
    assert abs(reference.value - 1 / (a + A) * np.exp(1j * b)) < 0.01 / (a + A)
