"""Bessel functions of the first kind, their zeros, and Gamma(3/2).

J_n(x) is evaluated by its power series for |x| <= SERIES_LIMIT and by Miller's
backward recurrence, normalized with J_0 + 2 * sum J_2k = 1, beyond it. Both paths
are vectorized over x.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, PreconditionError

logger = logging.getLogger(__name__)

MAX_ARGUMENT = 1e4
MAX_ORDER = 64
MAX_ZERO_INDEX = 50
SERIES_LIMIT = 8.0
SERIES_TERMS = 40
ZERO_RESIDUAL = 1e-12

# Values above this are rescaled during backward recurrence.
_RESCALE_AT = 1e150


@dataclass(frozen=True)
class BesselZero:
    """The index-th positive zero of J_order."""

    order: int
    index: int
    value: float

    @property
    def residual(self) -> float:
        return abs(float(bessel_j(self.order, self.value)))


def _check_arguments(n_max: int, x: np.ndarray) -> None:
    if not isinstance(n_max, (int, np.integer)) or n_max < 0:
        raise PreconditionError(f"Bessel order must be a nonnegative integer, got {n_max!r}")
    if n_max > MAX_ORDER:
        raise PreconditionError(f"Bessel order {n_max} exceeds supported maximum {MAX_ORDER}")
    if x.size and not np.all(np.isfinite(x)):
        raise PreconditionError("Bessel argument must be finite")
    if x.size and np.max(np.abs(x)) > MAX_ARGUMENT:
        raise PreconditionError(
            f"|x| = {np.max(np.abs(x)):.6g} outside supported range |x| <= {MAX_ARGUMENT:g}"
        )


def _series(n_max: int, x: np.ndarray) -> np.ndarray:
    half = x / 2.0
    quarter_sq = half * half
    out = np.empty((n_max + 1,) + x.shape)
    lead = np.ones_like(x)
    for n in range(n_max + 1):
        if n > 0:
            lead = lead * half / n
        term = lead.copy()
        total = term.copy()
        for k in range(1, SERIES_TERMS):
            term = -term * quarter_sq / (k * (k + n))
            total += term
        out[n] = total
    return out


def _miller(n_max: int, x: np.ndarray) -> np.ndarray:
    """Backward recurrence for x > 0, all orders 0..n_max."""
    x_top = float(np.max(x))
    start = int(x_top + 50.0 + 10.0 * x_top ** (1.0 / 3.0)) + n_max
    start += start % 2

    out = np.zeros((n_max + 1,) + x.shape)
    upper = np.zeros_like(x)
    current = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    two_over_x = 2.0 / x
    for n in range(start, 0, -1):
        # current holds J_n (unnormalized); step down to J_{n-1}
        lower = n * two_over_x * current - upper
        upper, current = current, lower
        if n - 1 <= n_max:
            out[n - 1] = current
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * current
        big = np.abs(current) > _RESCALE_AT
        if np.any(big):
            current[big] /= _RESCALE_AT
            upper[big] /= _RESCALE_AT
            norm[big] /= _RESCALE_AT
            out[:, big] /= _RESCALE_AT
    norm += current
    return out / norm


def bessel_j_orders(n_max: int, x) -> np.ndarray:
    """Return J_0(x)..J_{n_max}(x) stacked along a new leading axis."""
    x = np.asarray(x, dtype=float)
    _check_arguments(n_max, x)
    flat = x.ravel()
    magnitude = np.abs(flat)
    out = np.empty((n_max + 1, flat.size))

    small = magnitude <= SERIES_LIMIT
    if np.any(small):
        out[:, small] = _series(n_max, magnitude[small])
    if np.any(~small):
        out[:, ~small] = _miller(n_max, magnitude[~small])

    # J_n(-x) = (-1)^n J_n(x)
    negative = flat < 0
    if np.any(negative):
        odd = np.arange(n_max + 1) % 2 == 1
        out[np.ix_(odd, negative)] *= -1.0
    return out.reshape((n_max + 1,) + x.shape)


def bessel_j(n: int, x):
    """J_n(x) for a scalar or array x; returns a float for scalar input."""
    values = bessel_j_orders(n, x)[n]
    if np.ndim(values) == 0:
        return float(values)
    return values


def bessel_j_prime(n: int, x):
    """J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2, with J_{-1} = -J_1."""
    table = bessel_j_orders(n + 1, x)
    lower = -table[1] if n == 0 else table[n - 1]
    values = 0.5 * (lower - table[n + 1])
    if np.ndim(values) == 0:
        return float(values)
    return values


def _j1(x: float) -> float:
    return bessel_j(1, x)


@lru_cache(maxsize=None)
def bessel_j1_zero(m: int) -> BesselZero:
    """The m-th positive zero of J_1, bracketed in ((m - 1/4) pi, (m + 3/4) pi)."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise PreconditionError(f"zero index must be a positive integer, got {m!r}")
    if m > MAX_ZERO_INDEX:
        raise PreconditionError(f"zero index {m} exceeds supported maximum {MAX_ZERO_INDEX}")

    lo = (m - 0.25) * math.pi
    hi = (m + 0.75) * math.pi
    value = brentq(_j1, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    zero = BesselZero(order=1, index=int(m), value=float(value))
    if zero.residual > ZERO_RESIDUAL:
        raise ConvergenceError(
            f"J_1 zero #{m} residual {zero.residual:.3e} exceeds {ZERO_RESIDUAL:g}",
            estimate=zero.residual,
        )
    logger.debug("j_1,%d = %.17g (residual %.2e)", m, zero.value, zero.residual)
    return zero


def j1_zeros(count: int) -> list[BesselZero]:
    """First `count` zeros of J_1 in increasing order."""
    return [bessel_j1_zero(m) for m in range(1, count + 1)]


def gamma_three_halves() -> float:
    """Gamma(3/2) = sqrt(pi) / 2."""
    return math.sqrt(math.pi) / 2.0
