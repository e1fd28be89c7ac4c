"""Quadrature for periodic integrands and for decaying integrands on [0, inf).

Integrands are vectorized callables: they receive a 1-D array of nodes and return an
array whose leading axis runs over the nodes. Trailing axes are integrated
independently, so a single call can integrate many related functions at once.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, PreconditionError

logger = logging.getLogger(__name__)

MIN_NODES = 64
MAX_NODES = 2**20
GAUSS_ORDER = 20
MIN_PANELS = 4
MAX_PANELS = 2**14
MAX_CUT_DOUBLINGS = 8

_EPS = np.finfo(float).eps

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureResult:
    """Value of an integral, the last doubling difference, and the node count."""

    value: complex | np.ndarray
    error_estimate: float
    nodes_used: int
    scale: float = 0.0


def _roundoff_floor(scale: float) -> float:
    return 64.0 * _EPS * scale


def periodic_rule(g: Integrand, n: int) -> complex | np.ndarray:
    """Equally spaced rule on [-pi, pi) with n nodes."""
    h = 2.0 * math.pi / n
    phi = -math.pi + h * np.arange(n)
    return h * np.asarray(g(phi)).sum(axis=0)


def periodic_integral(
    g: Integrand,
    tol: float = 1e-12,
    *,
    min_nodes: int = MIN_NODES,
    max_nodes: int = MAX_NODES,
    rtol: float = 0.0,
) -> QuadratureResult:
    """Integrate a smooth 2*pi-periodic g over one period by node doubling.

    The first comparison is between min_nodes/2 and min_nodes nodes; each doubling
    evaluates g only at the new midpoints. Stops when |I_2N - I_N| <= tol (or
    rtol times the integral of |g|, or the round-off floor of the sum).
    """
    if tol <= 0:
        raise PreconditionError(f"tolerance must be positive, got {tol}")

    n = max(min_nodes // 2, 2)
    h = 2.0 * math.pi / n
    values = np.asarray(g(-math.pi + h * np.arange(n)))
    total = h * values.sum(axis=0)
    scale = h * np.abs(values).sum(axis=0)

    while True:
        midpoints = -math.pi + h * (np.arange(n) + 0.5)
        values = np.asarray(g(midpoints))
        refined = 0.5 * total + 0.5 * h * values.sum(axis=0)
        scale = 0.5 * scale + 0.5 * h * np.abs(values).sum(axis=0)
        n *= 2
        h *= 0.5

        estimate = float(np.max(np.abs(refined - total)))
        total = refined
        top_scale = float(np.max(scale))
        target = max(tol, rtol * top_scale, _roundoff_floor(top_scale))
        if estimate <= target:
            logger.debug("periodic rule converged: %d nodes, estimate %.2e", n, estimate)
            return QuadratureResult(
                value=_squeeze(total), error_estimate=estimate, nodes_used=n, scale=top_scale
            )
        if n >= max_nodes:
            raise ConvergenceError(
                f"periodic rule did not converge with {n} nodes "
                f"(estimate {estimate:.3e} > tolerance {target:.3e})",
                estimate=estimate,
            )


@lru_cache(maxsize=8)
def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _composite_gauss(g: Integrand, start: float, stop: float, panels: int, order: int):
    nodes, weights = _gauss_legendre(order)
    half = 0.5 * (stop - start) / panels
    centers = start + half * (2.0 * np.arange(panels) + 1.0)
    s = (centers[:, None] + half * nodes[None, :]).ravel()
    w = np.tile(half * weights, panels)
    values = np.asarray(g(s))
    w = w.reshape((-1,) + (1,) * (values.ndim - 1))
    return (w * values).sum(axis=0), (w * np.abs(values)).sum(axis=0)


def halfline_integral(
    g: Integrand,
    decay_rate: float,
    tol: float = 1e-12,
    *,
    order: int = GAUSS_ORDER,
    min_panels: int = MIN_PANELS,
    max_panels: int = MAX_PANELS,
    s_max_factor: float = 1.0,
) -> QuadratureResult:
    """Integrate g over [0, inf) given |g(s)| <= C exp(-decay_rate * s).

    C is estimated by sampling |g(s)| exp(decay_rate * s) on [0, 5 / decay_rate]; the
    range is cut at s_max = ln(4 C / (decay_rate * tol)) / decay_rate. The cut is then
    doubled until the mass of |g| on [s_max, 2 s_max] is below tol / 2, which catches
    envelopes that keep growing past the sampling window (s e^{-s}, say).
    [0, s_max] is covered by composite Gauss-Legendre panels doubled until two
    successive panel counts agree; the reported estimate adds the tail mass.
    """
    if not decay_rate > 0:
        raise PreconditionError(f"decay_rate must be positive, got {decay_rate}")
    if tol <= 0:
        raise PreconditionError(f"tolerance must be positive, got {tol}")

    s_sample = np.linspace(0.0, 5.0 / decay_rate, 16)
    envelope = np.abs(np.asarray(g(s_sample)))
    envelope = envelope.reshape(len(s_sample), -1).max(axis=1) * np.exp(decay_rate * s_sample)
    bound = float(np.max(envelope)) / decay_rate
    if bound <= tol:
        s_max = 1.0 / decay_rate
    else:
        s_max = math.log(4.0 * bound / tol) / decay_rate

    for _ in range(MAX_CUT_DOUBLINGS):
        _, mass = _composite_gauss(g, s_max, 2.0 * s_max, min_panels, order)
        tail = float(np.max(mass))
        if tail <= 0.5 * tol:
            break
        s_max *= 2.0
    else:
        raise ConvergenceError(
            f"halfline tail mass {tail:.3e} on [{s_max:.4g}, {2 * s_max:.4g}] stays above "
            f"tolerance {tol:.3e}; is decay_rate {decay_rate:g} an actual bound?",
            estimate=tail,
        )
    s_max *= s_max_factor

    panels = min_panels
    previous, _ = _composite_gauss(g, 0.0, s_max, panels, order)
    while panels < max_panels:
        panels *= 2
        current, scale = _composite_gauss(g, 0.0, s_max, panels, order)
        estimate = float(np.max(np.abs(current - previous)))
        top_scale = float(np.max(scale))
        target = max(tol, _roundoff_floor(top_scale))
        if estimate <= target:
            return QuadratureResult(
                value=_squeeze(current),
                error_estimate=estimate + tail,
                nodes_used=panels * order,
                scale=top_scale,
            )
        previous = current
    raise ConvergenceError(
        f"halfline rule did not converge with {panels} panels on [0, {s_max:.4g}] "
        f"(estimate {estimate:.3e} > tolerance {tol:.3e})",
        estimate=estimate,
    )


def _squeeze(value):
    value = np.asarray(value)
    if value.ndim == 0:
        return complex(value)
    return value
