"""Minimize the direction-averaged Pompeiu defect over shape coefficients and wavenumber."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from pydantic import ValidationError
from scipy.optimize import minimize, minimize_scalar

from .errors import PreconditionError
from .models import PompeiuParams, SearchConfig
from .pompeiu import indicator_transform_grid
from .quadrature import periodic_rule
from .shapes import StarShape

logger = logging.getLogger(__name__)

MAX_SEARCH_ORDER = 6
MAX_BUDGET = 100_000


def direction_defect(shape: StarShape, params: PompeiuParams, n_theta: int = 128) -> float:
    """(1/2pi) * integral over theta of |indicator_transform(shape, (cos, sin) theta)|^2."""
    if n_theta < 128:
        raise PreconditionError(f"direction_defect needs at least 128 directions, got {n_theta}")

    def squared(theta):
        return np.abs(indicator_transform_grid(shape, params, theta).value) ** 2

    return float(np.real(periodic_rule(squared, n_theta))) / (2.0 * math.pi)


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    defect: float
    k: float
    cos_coeffs: tuple[float, ...]
    sin_coeffs: tuple[float, ...]


@dataclass
class DefectReport:
    """Best shape and wavenumber found, with the accepted-step trace."""

    shape: StarShape
    k: float
    defect: float
    trace: list[TracePoint] = field(default_factory=list)
    converged: bool = False
    evaluations: int = 0
    accepted_steps: int = 0
    message: str = ""
    rotation: float = 0.0


class _Gauge:
    """Maps optimizer vectors to (shape, k) with b_1 = 0 held fixed.

    Rotation leaves the defect unchanged, so the start shape is turned until its
    first harmonic is a_1 cos phi with a_1 >= 0 and b_1 stays out of the search.
    """

    def __init__(self, mean_radius: float, order: int, shape_free: bool, fixed: StarShape):
        self.mean_radius = mean_radius
        self.order = order
        self.shape_free = shape_free and order >= 1
        self.fixed = fixed

    def pack(self, shape: StarShape, k: float) -> np.ndarray:
        if not self.shape_free:
            return np.array([k])
        cos = np.zeros(self.order)
        sin = np.zeros(self.order)
        width = min(shape.order, self.order)
        cos[:width] = shape.cos_coeffs[:width]
        sin[:width] = shape.sin_coeffs[:width]
        return np.concatenate([cos, sin[1:], [k]])

    def unpack(self, x: np.ndarray) -> tuple[StarShape, float]:
        if not self.shape_free:
            return self.fixed, float(x[0])
        cos = tuple(x[: self.order].tolist())
        sin = (0.0, *x[self.order : 2 * self.order - 1].tolist())
        shape = StarShape(mean_radius=self.mean_radius, cos=cos, sin=sin)
        return shape, float(x[-1])


def gauge_rotation(shape: StarShape) -> float:
    """tau with shape.shifted(tau) having b_1 = 0 and a_1 >= 0."""
    if shape.order == 0:
        return 0.0
    return math.atan2(shape.sin_coeffs[0], shape.cos_coeffs[0])


def _simplex(x0: np.ndarray, step: float) -> np.ndarray:
    vertices = [x0]
    for i in range(x0.size):
        vertex = x0.copy()
        vertex[i] += step
        vertices.append(vertex)
    return np.array(vertices)


def minimize_defect(
    initial: StarShape,
    k_init: float,
    max_order: int = 3,
    budget: int = 20000,
    *,
    tol: float = 1e-12,
    optimize_shape: bool = True,
    config: SearchConfig | None = None,
) -> DefectReport:
    """Nelder-Mead on direction_defect over (a_1..a_M, b_2..b_M, k), mean_radius frozen.

    The start shape is first rotated by gauge_rotation (reported as rotation), so
    the returned shape is in that frame. Restarts from the best point with each step
    of config.restart_steps as the initial simplex edge. With optimize_shape=False,
    or max_order = 0, only k moves.
    """
    config = config or SearchConfig()
    if max_order > MAX_SEARCH_ORDER:
        raise PreconditionError(f"max_order {max_order} exceeds {MAX_SEARCH_ORDER}")
    if not 1 <= budget <= MAX_BUDGET:
        raise PreconditionError(f"budget must be in 1..{MAX_BUDGET}, got {budget}")
    if any(initial.cos_coeffs[max_order:] + initial.sin_coeffs[max_order:]):
        raise PreconditionError(f"initial shape has harmonics above max_order = {max_order}")
    if k_init <= 0:
        raise PreconditionError(f"k_init must be positive, got {k_init}")

    gauge = _Gauge(initial.mean_radius, max_order, optimize_shape, initial)
    rotation = gauge_rotation(initial) if gauge.shape_free else 0.0
    start = initial.shifted(rotation) if rotation else initial
    if rotation:
        logger.info("start shape rotated by %.6g to put b_1 = 0", rotation)

    cache: dict[bytes, float] = {}
    evaluations = 0

    def objective(x: np.ndarray) -> float:
        nonlocal evaluations
        key = x.tobytes()
        if key in cache:
            return cache[key]
        evaluations += 1
        try:
            shape, k = gauge.unpack(x)
            value = math.inf if k <= 0 else direction_defect(
                shape, PompeiuParams(k=k, tol=tol), config.directions
            )
        except (ValidationError, PreconditionError):
            value = math.inf
        cache[key] = value
        return value

    best_x = gauge.pack(start, k_init)
    best_f = objective(best_x)
    start_shape, start_k = gauge.unpack(best_x)
    trace = [TracePoint(0, best_f, start_k, start_shape.cos_coeffs, start_shape.sin_coeffs)]
    iteration = 0
    accepted = 0
    converged = False
    exhausted = False
    message = "simplex converged"

    def record(xk: np.ndarray) -> None:
        nonlocal iteration, accepted, best_f, best_x
        iteration += 1
        value = objective(np.asarray(xk))
        if value < best_f:
            best_f = value
            best_x = np.array(xk, copy=True)
            accepted += 1
            shape, k = gauge.unpack(best_x)
            trace.append(TracePoint(iteration, value, k, shape.cos_coeffs, shape.sin_coeffs))

    for step in config.restart_steps:
        remaining = budget - evaluations
        if remaining <= 0:
            exhausted = True
            break
        result = minimize(
            objective,
            best_x,
            method="Nelder-Mead",
            callback=record,
            options={
                "initial_simplex": _simplex(best_x, step),
                "xatol": config.simplex_tol,
                "fatol": math.inf,
                "maxfev": remaining,
            },
        )
        if result.fun < best_f:
            best_f = float(result.fun)
            best_x = np.array(result.x, copy=True)
            accepted += 1
            shape, k = gauge.unpack(best_x)
            trace.append(TracePoint(iteration, best_f, k, shape.cos_coeffs, shape.sin_coeffs))
        simplex = result.final_simplex[0]
        diameter = float(np.max(np.abs(simplex[1:] - simplex[0])))
        converged = diameter <= config.simplex_tol
        logger.info(
            "restart step %g: defect %.3e, simplex diameter %.2e, %d evaluations",
            step, best_f, diameter, evaluations,
        )
        # status 1: maxfev reached, cached points included
        if result.status == 1:
            exhausted = True
            break

    if exhausted and not converged:
        message = f"evaluation budget {budget} exhausted; returning best point found"
        logger.warning(message)
    elif not converged:
        message = "simplex did not contract below the tolerance"

    shape, k = gauge.unpack(best_x)
    return DefectReport(
        shape=shape,
        k=k,
        defect=best_f,
        trace=trace,
        converged=converged,
        evaluations=evaluations,
        accepted_steps=accepted,
        message=message,
        rotation=rotation,
    )


def defect_minima_in_k(
    shape: StarShape, k_values, *, tol: float = 1e-12, xatol: float = 1e-10
) -> list[float]:
    """Local minimizers of k -> direction_defect(shape, k), from a scan refined by Brent."""
    k_values = np.asarray(k_values, dtype=float)

    def defect(k: float) -> float:
        return direction_defect(shape, PompeiuParams(k=k, tol=tol))

    values = np.array([defect(k) for k in k_values])
    minima = []
    for i in range(1, len(k_values) - 1):
        if values[i] <= values[i - 1] and values[i] <= values[i + 1]:
            refined = minimize_scalar(
                defect,
                bounds=(k_values[i - 1], k_values[i + 1]),
                method="bounded",
                options={"xatol": xatol},
            )
            minima.append(float(refined.x))
    return minima
