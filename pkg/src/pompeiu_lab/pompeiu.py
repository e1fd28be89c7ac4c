"""Rigid-motion integrals, the indicator transform, and the boundary moment sequence.

Notation: f is the radius function of the shape, a(phi) = k f cos phi and
b(phi) = k f sin phi. A direction alpha = (alpha1, alpha2) lives on the complex
quadric alpha1^2 + alpha2^2 = 1; real unit vectors are the special case.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ConsistencyError, ConvergenceError, PreconditionError
from .models import PompeiuParams
from .quadrature import QuadratureResult, halfline_integral, periodic_integral
from .shapes import RigidMotion, StarShape

logger = logging.getLogger(__name__)

VARIETY_TOL = 1e-12
MAX_MOMENT_INDEX = 2000
DIRECT_MOMENT_LIMIT = 20
AMAX_GRID = 4096

# |cF| below which the radial closed form is replaced by its Taylor series.
SERIES_SWITCH = 0.2
_SERIES_COEFFS = [(p + 1) / math.factorial(p + 2) for p in range(14)]


@dataclass(frozen=True)
class ComplexDirection:
    """A point (alpha1, alpha2) of the variety alpha1^2 + alpha2^2 = 1."""

    alpha1: complex
    alpha2: complex

    def __post_init__(self):
        if self.residual > VARIETY_TOL:
            raise PreconditionError(
                f"direction ({self.alpha1}, {self.alpha2}) is off the variety: "
                f"|alpha1^2 + alpha2^2 - 1| = {self.residual:.3e} > {VARIETY_TOL:g}"
            )

    @classmethod
    def from_angle(cls, theta: float) -> "ComplexDirection":
        return cls(complex(math.cos(theta)), complex(math.sin(theta)))

    @property
    def residual(self) -> float:
        return abs(self.alpha1**2 + self.alpha2**2 - 1.0)

    @property
    def is_real(self) -> bool:
        return self.alpha1.imag == 0.0 and self.alpha2.imag == 0.0

    def negated(self) -> "ComplexDirection":
        return ComplexDirection(-self.alpha1, -self.alpha2)


def variety_direction(s: float) -> ComplexDirection:
    """The point (i s, sqrt(s^2 + 1)) of the variety, positive real branch."""
    return ComplexDirection(1j * s, complex(math.sqrt(s * s + 1.0)))


@dataclass(frozen=True)
class MomentReport:
    """I_j = scaled_value * exp(log_scale)."""

    j: int
    log_scale: float
    scaled_value: complex
    error_estimate: float
    nodes_used: int = 0

    @property
    def value(self) -> complex:
        return self.scaled_value * math.exp(self.log_scale)

    @property
    def log_abs(self) -> float:
        magnitude = abs(self.scaled_value)
        if magnitude == 0.0:
            return -math.inf
        return math.log(magnitude) + self.log_scale


@dataclass(frozen=True)
class DirectionSample:
    direction: ComplexDirection
    value: complex
    error_estimate: float


@dataclass(frozen=True)
class MomentFit:
    """Least-squares fit of the weighted integral W(A) over an A-grid."""

    moments: list[complex]
    a_grid: list[float]
    weighted: list[complex]
    residual: float
    condition: float


def radial_integral(c, F):
    """Integral of rho * exp(i c rho) over [0, F], elementwise, c possibly complex."""
    c = np.asarray(c, dtype=complex)
    F = np.asarray(F, dtype=float)
    c, F = np.broadcast_arrays(c, F)
    z = 1j * c * F
    out = np.empty(z.shape, dtype=complex)

    small = np.abs(z) < SERIES_SWITCH
    if np.any(small):
        zs = z[small]
        series = np.zeros_like(zs)
        for coeff in reversed(_SERIES_COEFFS):
            series = series * zs + coeff
        out[small] = F[small] ** 2 * series
    large = ~small
    if np.any(large):
        zl = z[large]
        out[large] = (np.exp(zl) * (1.0 - zl) - 1.0) / c[large] ** 2
    return out


def _indicator_result(
    shape: StarShape, params: PompeiuParams, direction: ComplexDirection
) -> QuadratureResult:
    def integrand(phi):
        c = params.k * (direction.alpha1 * np.cos(phi) + direction.alpha2 * np.sin(phi))
        return radial_integral(c, shape.eval(phi))

    return periodic_integral(integrand, params.tol)


def indicator_transform(
    shape: StarShape, params: PompeiuParams, direction: ComplexDirection
) -> complex:
    """Integral of exp(i k alpha . x) over D, as one phi-integral with the radial part closed."""
    return _indicator_result(shape, params, direction).value


def indicator_transform_grid(
    shape: StarShape, params: PompeiuParams, thetas, *, min_nodes: int = 64
) -> QuadratureResult:
    """indicator_transform at every real direction (cos theta, sin theta) at once."""
    thetas = np.asarray(thetas, dtype=float)

    def integrand(phi):
        c = params.k * np.cos(phi[:, None] - thetas[None, :])
        return radial_integral(c, shape.eval(phi)[:, None])

    return periodic_integral(integrand, params.tol, min_nodes=min_nodes)


def direction_sweep(
    shape: StarShape, params: PompeiuParams, n_dirs: int
) -> list[DirectionSample]:
    """indicator_transform over n_dirs equally spaced real directions."""
    if n_dirs < 1:
        raise PreconditionError(f"n_dirs must be at least 1, got {n_dirs}")
    thetas = 2.0 * math.pi * np.arange(n_dirs) / n_dirs
    result = indicator_transform_grid(shape, params, thetas)
    return [
        DirectionSample(ComplexDirection.from_angle(t), complex(v), result.error_estimate)
        for t, v in zip(thetas, np.atleast_1d(result.value))
    ]


def pompeiu_integral(
    shape: StarShape, params: PompeiuParams, beta, motion: RigidMotion
) -> complex:
    """Integral of exp(i k beta . x) over the moved domain sigma(D).

    Evaluated by the change of variables x = R y + t, giving
    exp(i k beta . t) * indicator_transform(D, R^T beta), and cross-checked against a
    direct quadrature in world polar coordinates centred at t, where the moved
    boundary is r = f(psi - rotation).
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (2,) or abs(float(np.hypot(*beta)) - 1.0) > 1e-12:
        raise PreconditionError(f"beta must be a real unit 2-vector, got {beta.tolist()}")

    phase = np.exp(1j * params.k * float(beta @ np.asarray(motion.translation)))
    body = motion.matrix.T @ beta
    via_body = _indicator_result(
        shape, params, ComplexDirection(complex(body[0]), complex(body[1]))
    )

    def world(psi):
        c = params.k * (beta[0] * np.cos(psi) + beta[1] * np.sin(psi))
        return radial_integral(c, shape.eval(psi - motion.rotation))

    via_world = periodic_integral(world, params.tol)

    first = phase * via_body.value
    second = phase * via_world.value
    allowed = 10.0 * max(params.tol, via_body.error_estimate, via_world.error_estimate)
    if abs(first - second) > allowed:
        raise ConsistencyError(
            f"rigid-motion integral paths disagree: |{first} - {second}| = "
            f"{abs(first - second):.3e} > {allowed:.3e}",
            estimate=abs(first - second),
        )
    return complex(first)


def boundary_moment(shape: StarShape, params: PompeiuParams, theta: complex) -> complex:
    """Integral over one period of f' f exp(i k f cos(phi - theta)), theta complex."""
    theta = complex(theta)

    def integrand(phi):
        f = shape.eval(phi)
        return shape.eval(phi, 1) * f * np.exp(1j * params.k * f * np.cos(phi - theta))

    return periodic_integral(integrand, params.tol).value


def variety_moment(shape: StarShape, params: PompeiuParams, s: float) -> complex:
    """The boundary moment at cos theta = i s, sin theta = sqrt(s^2 + 1), written out in s."""
    root = math.sqrt(s * s + 1.0)

    def integrand(phi):
        f = shape.eval(phi)
        exponent = -s * params.k * f * np.cos(phi) + 1j * params.k * root * f * np.sin(phi)
        return shape.eval(phi, 1) * f * np.exp(exponent)

    return periodic_integral(integrand, params.tol).value


def variety_theta(s: float) -> complex:
    """Complex angle theta with cos theta = i s and sin theta = sqrt(s^2 + 1)."""
    return complex(np.arccos(1j * s))


def max_abs_a(shape: StarShape, params: PompeiuParams, origin: float = 0.0) -> float:
    """max over phi of |k f(phi) cos(phi - origin)|: grid sampling plus Newton polish."""
    phi = -math.pi + 2.0 * math.pi * np.arange(AMAX_GRID) / AMAX_GRID
    h = shape.eval(phi) * np.cos(phi - origin)
    best = int(np.argmax(np.abs(h)))
    sampled = float(abs(h[best]))

    x = float(phi[best])
    for _ in range(8):
        f0, f1, f2 = shape.eval(x), shape.eval(x, 1), shape.eval(x, 2)
        c, s = math.cos(x - origin), math.sin(x - origin)
        slope = f1 * c - f0 * s
        curvature = f2 * c - 2.0 * f1 * s - f0 * c
        if curvature == 0.0:
            break
        step = slope / curvature
        if abs(step) > math.pi / AMAX_GRID:
            break
        x -= step
        if abs(step) < 1e-15:
            break
    polished = abs(shape.eval(x) * math.cos(x - origin))
    return params.k * max(sampled, polished)


def _inner_batch(a: np.ndarray, b: np.ndarray, A: float, tol: float) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rate = a + A

    def integrand(s):
        root = np.sqrt(s * s + 1.0)
        return np.exp(-s[:, None] * rate[None, :] + 1j * root[:, None] * b[None, :])

    result = halfline_integral(integrand, float(np.min(rate)), tol)
    return np.asarray(result.value)


def inner_s_integral(a: float, b: float, A: float, tol: float = 1e-14) -> complex:
    """Integral over s in [0, inf) of exp(-s (a + A) + i sqrt(s^2 + 1) b)."""
    if not A > abs(a):
        raise PreconditionError(f"A = {A} must exceed |a| = {abs(a)} for the s-integral to decay")
    rate = a + A

    def integrand(s):
        return np.exp(-s * rate + 1j * np.sqrt(s * s + 1.0) * b)

    return halfline_integral(integrand, rate, tol).value


def remainder_scaling(a: float, b: float, A_values) -> list[float]:
    """(a + A) * |inner_s_integral - exp(i b) / (a + A)| for each A."""
    out = []
    for A in A_values:
        rate = a + A
        leading = np.exp(1j * b) / rate
        out.append(float(rate * abs(inner_s_integral(a, b, A) - leading)))
    return out


def laplace_weighted(
    shape: StarShape, params: PompeiuParams, A: float, *, s_outer: bool = False
) -> complex:
    """Integral over phi of f' f times inner_s_integral(a(phi), b(phi), A).

    With s_outer=True the same double integral is evaluated with the s-integral
    outermost, as an independent check of the ordering.
    """
    amax = max_abs_a(shape, params)
    if not A > amax:
        raise PreconditionError(f"A = {A} must exceed max|a| = {amax:.6g}")
    k = params.k
    inner_tol = max(params.tol * 1e-2, 1e-16)

    if not s_outer:

        def integrand(phi):
            f = shape.eval(phi)
            weight = shape.eval(phi, 1) * f
            inner = _inner_batch(k * f * np.cos(phi), k * f * np.sin(phi), A, inner_tol)
            return weight * inner

        return periodic_integral(integrand, params.tol).value

    def over_phi(s):
        def integrand(phi):
            f = shape.eval(phi)
            weight = (shape.eval(phi, 1) * f)[:, None]
            a = (k * f * np.cos(phi))[:, None]
            b = (k * f * np.sin(phi))[:, None]
            root = np.sqrt(s * s + 1.0)[None, :]
            return weight * np.exp(-s[None, :] * (a + A) + 1j * root * b)

        return np.atleast_1d(periodic_integral(integrand, inner_tol).value)

    return halfline_integral(over_phi, A - amax, params.tol).value


def moment(
    shape: StarShape,
    params: PompeiuParams,
    j: int,
    *,
    scaled: bool | None = None,
    origin: float = 0.0,
) -> MomentReport:
    """I_j = integral of f' f a^j exp(i b) over one period.

    For j <= 20 the integrand is used as is. Beyond that a^j is replaced by
    (a / max|a|)^j and log_scale = j ln max|a| (that is m Psi* for j = 2m), so the
    quadrature never sees values above max|f' f|. `origin` measures the angle of a and
    b from phi = origin instead of phi = 0.
    """
    if not isinstance(j, (int, np.integer)) or j < 0 or j > MAX_MOMENT_INDEX:
        raise PreconditionError(
            f"moment index must be an integer in 0..{MAX_MOMENT_INDEX}, got {j!r}"
        )
    use_scaled = j > DIRECT_MOMENT_LIMIT if scaled is None else scaled
    k = params.k
    log_scale = 0.0
    amax = 1.0
    if use_scaled:
        amax = max_abs_a(shape, params, origin)
        log_scale = j * math.log(amax)

    def integrand(phi):
        f = shape.eval(phi)
        a = k * f * np.cos(phi - origin) / amax
        b = k * f * np.sin(phi - origin)
        return shape.eval(phi, 1) * f * a**j * np.exp(1j * b)

    result = periodic_integral(integrand, params.tol, rtol=params.tol)
    return MomentReport(
        j=int(j),
        log_scale=log_scale,
        scaled_value=complex(result.value),
        error_estimate=result.error_estimate / max(1.0, result.scale),
        nodes_used=result.nodes_used,
    )


def fit_moments(
    shape: StarShape,
    params: PompeiuParams,
    j_max: int,
    A_grid,
    *,
    nuisance_terms: int = 4,
) -> MomentFit:
    """Fit A W(A) = sum_l (-1)^l I_l A^-l on the grid and return I_0..I_j_max.

    The monomials beyond j_max absorb the higher moments and the O(A^-2) correction
    of the s-integral; the fit runs in x = A_min / A so the design matrix is
    well scaled.
    """
    grid = np.asarray(sorted(float(A) for A in A_grid))
    if j_max < 0:
        raise PreconditionError(f"j_max must be nonnegative, got {j_max}")
    if grid.size < j_max + 3:
        raise PreconditionError(
            f"A-grid needs at least j_max + 3 = {j_max + 3} points, got {grid.size}"
        )
    if grid[-1] < 100.0 * grid[0]:
        raise PreconditionError(
            f"A-grid must span at least two decades, got [{grid[0]:g}, {grid[-1]:g}]"
        )
    amax = max_abs_a(shape, params)
    if grid[0] <= amax:
        raise PreconditionError(f"every A must exceed max|a| = {amax:.6g}, got {grid[0]:g}")

    # A * W is what gets fitted, so W is resolved to tol * A_min / A
    weighted = np.array(
        [
            laplace_weighted(
                shape, params.model_copy(update={"tol": params.tol * grid[0] / A}), A
            )
            for A in grid
        ]
    )
    columns = min(j_max + 1 + nuisance_terms, grid.size - 1)
    x = grid[0] / grid
    design = np.vander(x, columns, increasing=True)
    coeffs, *_ = linalg.lstsq(design.astype(complex), grid * weighted)
    fitted = design @ coeffs / grid
    residual = float(np.max(np.abs(fitted - weighted)))
    condition = float(np.linalg.cond(design))
    logger.debug(
        "moment fit: %d columns, condition %.3g, residual %.3g", columns, condition, residual
    )
    if residual > 1e-3 * float(np.max(np.abs(weighted))):
        raise ConvergenceError(
            f"moment fit ill-conditioned: residual {residual:.3e} exceeds "
            f"1e-3 * max|W| = {1e-3 * float(np.max(np.abs(weighted))):.3e}",
            estimate=residual,
        )

    moments = [complex((-1) ** l * coeffs[l] * grid[0] ** l) for l in range(j_max + 1)]
    return MomentFit(
        moments=moments,
        a_grid=grid.tolist(),
        weighted=[complex(w) for w in weighted],
        residual=residual,
        condition=condition,
    )


def extract_moments(
    shape: StarShape, params: PompeiuParams, j_max: int, A_grid, *, nuisance_terms: int = 4
) -> list[complex]:
    """I_0..I_j_max recovered from laplace_weighted on the A-grid."""
    return fit_moments(shape, params, j_max, A_grid, nuisance_terms=nuisance_terms).moments
