"""Stationary points of Psi = ln(k^2 f^2 cos^2 phi) and the Laplace-method main term of I_2m.

Since a^2m = exp(m Psi), the moment I_2m is dominated by the global maximizers of Psi.
Two main terms are provided for each maximizer:

* predict_moment: the stated closed form
  Gamma(3/2) / (m gamma)^(3/2) * (i k f^2 f'' + f f''' / 2), evaluated after
  moving the maximizer to phi = 0 by an exact coefficient rotation.
* laplace_amplitude: the standard Laplace expansion of the integral of
  G exp(m Psi), G = f' f exp(i b), done in the original frame with the curvature
  Psi = Psi* - gamma t^2 / 2 + Psi''' t^3 / 6 and the cubic correction.

compare_asymptotics confronts both with the log-scaled direct quadrature.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import PreconditionError
from .models import Diagnostic, PompeiuParams, Severity
from .pompeiu import MomentReport, moment
from .shapes import StarShape
from .special import gamma_three_halves

logger = logging.getLogger(__name__)

GUARD_BAND = 1e-6
SCAN_POINTS = 4096
COS_FLOOR = 1e-12
STATIONARY_RESIDUAL = 1e-12
DEGENERATE_CURVATURE = 1e-8
MAXIMIZER_ATOL = 1e-9
FLAG_FRACTION = 0.01


def _check_cos(phi) -> np.ndarray:
    c = np.cos(np.asarray(phi, dtype=float))
    if np.any(np.abs(c) <= COS_FLOOR):
        raise PreconditionError(f"phi within {COS_FLOOR:g} of +-pi/2: |cos phi| too small for Psi")
    return c


def _scalar(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def psi(shape: StarShape, params: PompeiuParams, phi):
    c = _check_cos(phi)
    f = shape.eval(phi)
    return _scalar(np.log(params.k**2 * f**2 * c**2))


def psi_prime(shape: StarShape, params: PompeiuParams, phi):
    """2 f'/f - 2 tan phi."""
    c = _check_cos(phi)
    return _scalar(2.0 * shape.eval(phi, 1) / shape.eval(phi) - 2.0 * np.sin(phi) / c)


def psi_second(shape: StarShape, params: PompeiuParams, phi):
    """2 (f''/f - (f'/f)^2) - 2 / cos^2 phi."""
    c = _check_cos(phi)
    f = shape.eval(phi)
    ratio = shape.eval(phi, 1) / f
    return _scalar(2.0 * (shape.eval(phi, 2) / f - ratio**2) - 2.0 / c**2)


def psi_third(shape: StarShape, params: PompeiuParams, phi):
    c = _check_cos(phi)
    f = shape.eval(phi)
    f1, f2, f3 = shape.eval(phi, 1), shape.eval(phi, 2), shape.eval(phi, 3)
    ratio = f1 / f
    trig = 4.0 * np.sin(phi) / c**3
    return _scalar(2.0 * (f3 / f - 3.0 * f1 * f2 / f**2 + 2.0 * ratio**3) - trig)


def stationary_slope(shape: StarShape, params: PompeiuParams, phi: float) -> float:
    """d/dphi (f'/f - tan phi); negative at a non-degenerate maximizer."""
    return 0.5 * psi_second(shape, params, phi)


@dataclass(frozen=True)
class PhasePoint:
    """A zero of f'/f - tan phi, with the data the Laplace terms need."""

    phi: float
    psi_value: float
    gamma: float
    curvature: float
    f0: float
    f1: float
    f2: float
    f3: float
    degenerate: bool

    @property
    def is_maximum(self) -> bool:
        return self.curvature < 0

    @property
    def residual(self) -> float:
        return abs(self.f1 / self.f0 - math.tan(self.phi))


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Main term exp(log_main) * amplitude for one maximizer."""

    m: int
    log_main: float
    amplitude: complex
    origin_shift: float
    laplace_amplitude: complex = 0j
    laplace_order: float = 1.5

    @property
    def discrepancy(self) -> complex:
        """laplace_amplitude / amplitude; nan when the stated amplitude vanishes."""
        if self.amplitude == 0:
            return complex(math.nan, math.nan)
        return self.laplace_amplitude / self.amplitude


def _wrap(phi: float) -> float:
    wrapped = math.remainder(phi, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def _polish(shape: StarShape, params: PompeiuParams, phi: float) -> float:
    for _ in range(20):
        slope = psi_prime(shape, params, phi)
        if abs(slope) <= STATIONARY_RESIDUAL:
            break
        curvature = psi_second(shape, params, phi)
        if curvature == 0.0:
            break
        phi -= slope / curvature
    return phi


def _phase_point(shape: StarShape, params: PompeiuParams, phi: float) -> PhasePoint:
    curvature = psi_second(shape, params, phi)
    return PhasePoint(
        phi=_wrap(phi),
        psi_value=psi(shape, params, phi),
        gamma=abs(curvature),
        curvature=curvature,
        f0=shape.eval(phi),
        f1=shape.eval(phi, 1),
        f2=shape.eval(phi, 2),
        f3=shape.eval(phi, 3),
        degenerate=abs(curvature) < DEGENERATE_CURVATURE,
    )


def stationary_points(shape: StarShape, params: PompeiuParams) -> list[PhasePoint]:
    """Every zero of Psi', scanned on both branches between the poles of tan phi.

    Each branch (-pi/2, pi/2) and (pi/2, 3pi/2), minus a guard band at the poles, is
    sampled on SCAN_POINTS nodes; sign changes are bracketed with brentq and polished by
    Newton. Sorted by descending Psi.
    """
    roots: list[float] = []
    half = 0.5 * math.pi
    for centre in (0.0, math.pi):
        grid = np.linspace(centre - half + GUARD_BAND, centre + half - GUARD_BAND, SCAN_POINTS)
        slope = psi_prime(shape, params, grid)
        for i in np.flatnonzero(slope == 0.0):
            roots.append(float(grid[i]))
        for i in np.flatnonzero(slope[:-1] * slope[1:] < 0):
            root = brentq(
                lambda x: psi_prime(shape, params, x), grid[i], grid[i + 1], xtol=1e-15
            )
            roots.append(_polish(shape, params, root))

    points: list[PhasePoint] = []
    for root in sorted(roots):
        if points and abs(_wrap(root - points[-1].phi)) < 1e-10:
            continue
        points.append(_phase_point(shape, params, root))
    points.sort(key=lambda p: (-p.psi_value, p.phi))
    logger.debug("found %d stationary points", len(points))
    return points


def global_maximizers(
    shape: StarShape, params: PompeiuParams, points: list[PhasePoint] | None = None
) -> list[PhasePoint]:
    """Non-degenerate maxima whose Psi is within MAXIMIZER_ATOL of the top value."""
    if points is None:
        points = stationary_points(shape, params)
    top = max(p.psi_value for p in points)
    return [
        p
        for p in points
        if p.is_maximum and not p.degenerate and p.psi_value >= top - MAXIMIZER_ATOL
    ]


def laplace_amplitude(
    shape: StarShape, params: PompeiuParams, m: int, point: PhasePoint
) -> tuple[complex, float]:
    """Re-derived main term of I_2m at `point`, scaled by exp(-m Psi*).

    Returns (amplitude, order) where order is the power of m^-1 the amplitude decays
    with: 1/2 when f'(phi*) != 0, 3/2 when the leading term vanishes.
    """
    k = params.k
    phi = point.phi
    f0, f1, f2, f3 = point.f0, point.f1, point.f2, point.f3
    s, c = math.sin(phi), math.cos(phi)
    b = k * f0 * s
    b1 = k * (f1 * s + f0 * c)
    b2 = k * (f2 * s + 2.0 * f1 * c - f0 * s)
    phase = complex(math.cos(b), math.sin(b))
    gamma = point.gamma
    prefactor = math.sqrt(2.0 * math.pi / (m * gamma))

    g0 = f1 * f0 * phase
    if abs(f1) > 1e-10 * abs(f0):
        return prefactor * g0, 0.5

    g1 = (f2 * f0 + f1**2) * phase + 1j * f1 * f0 * b1 * phase
    g2 = (
        (f3 * f0 + 3.0 * f1 * f2) * phase
        + 2j * (f2 * f0 + f1**2) * b1 * phase
        + f1 * f0 * (1j * b2 - b1**2) * phase
    )
    psi3 = psi_third(shape, params, phi)
    correction = g2 / (2.0 * gamma) + g1 * psi3 / (2.0 * gamma**2)
    return prefactor * correction / m, 1.5


def predict_moment(
    shape: StarShape, params: PompeiuParams, m: int, point: PhasePoint
) -> AsymptoticPrediction:
    if point.degenerate:
        raise PreconditionError(
            f"stationary point phi = {point.phi:.6g} is degenerate "
            f"(|Psi''| < {DEGENERATE_CURVATURE:g})"
        )
    if m < 1:
        raise PreconditionError(f"m must be at least 1, got {m}")
    moved = shape.shifted(point.phi)
    f0, f2, f3 = moved.eval(0.0), moved.eval(0.0, 2), moved.eval(0.0, 3)
    amplitude = (
        gamma_three_halves()
        / (m * point.gamma) ** 1.5
        * (1j * params.k * f0**2 * f2 + 0.5 * f0 * f3)
    )
    laplace, order = laplace_amplitude(shape, params, m, point)
    return AsymptoticPrediction(
        m=int(m),
        log_main=m * point.psi_value,
        amplitude=complex(amplitude),
        origin_shift=point.phi,
        laplace_amplitude=complex(laplace),
        laplace_order=order,
    )


@dataclass(frozen=True)
class ComparisonRow:
    m: int
    direct: MomentReport
    log_abs_direct: float
    log_abs_predicted: float
    stated_ratio: complex
    laplace_ratio: complex
    single_point_ratio: complex
    flagged: bool


@dataclass
class AsymptoticComparison:
    """Direct I_2m against the summed main terms over the global maximizers."""

    maximizers: list[PhasePoint]
    rows: list[ComparisonRow]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def stated_ratio_variation(self) -> float:
        """Relative change of |stated ratio| between the last two m values."""
        if len(self.rows) < 2:
            return 0.0
        last, prev = abs(self.rows[-1].stated_ratio), abs(self.rows[-2].stated_ratio)
        return abs(last - prev) / prev if prev else math.inf

    @property
    def laplace_ratio_trend(self) -> list[float]:
        return [abs(row.laplace_ratio - 1.0) for row in self.rows]

    @property
    def discrepancy_factor(self) -> float:
        """|re-derived / stated| main term at the largest m, summed over maximizers."""
        if not self.rows:
            return math.nan
        row = self.rows[-1]
        if row.laplace_ratio == 0 or math.isnan(abs(row.laplace_ratio)):
            return math.nan
        return abs(row.stated_ratio / row.laplace_ratio)


def _ratio(value: complex, total: complex, magnitude: float) -> complex:
    if abs(total) <= 1e-12 * magnitude or magnitude == 0.0:
        return complex(math.nan, math.nan)
    return value / total


def compare_asymptotics(
    shape: StarShape, params: PompeiuParams, m_list: list[int]
) -> AsymptoticComparison:
    """Tabulate direct/predicted for I_2m over m_list."""
    if shape.is_disc:
        raise PreconditionError(
            "compare_asymptotics needs a non-disc shape: I_2m vanishes for a disc"
        )
    maximizers = global_maximizers(shape, params)
    if not maximizers:
        raise PreconditionError("every global maximizer of Psi is degenerate")
    top = max(p.psi_value for p in maximizers)

    diagnostics: list[Diagnostic] = []
    for point in maximizers:
        slope = stationary_slope(shape, params, point.phi)
        if point.f2 < 0 and slope >= 0:
            diagnostics.append(
                Diagnostic(
                    name="stationary_slope",
                    severity=Severity.WARNING,
                    message=(
                        f"f'' < 0 at phi = {point.phi:.6g} but "
                        f"d/dphi(f'/f - tan) = {slope:.3g}"
                    ),
                )
            )

    rows: list[ComparisonRow] = []
    for m in m_list:
        direct = moment(shape, params, 2 * m, scaled=True)
        predictions = [predict_moment(shape, params, m, p) for p in maximizers]
        reference = m * top
        weights = [math.exp(p.log_main - reference) for p in predictions]
        stated = sum(w * p.amplitude for w, p in zip(weights, predictions))
        laplace = sum(w * p.laplace_amplitude for w, p in zip(weights, predictions))
        value = direct.scaled_value * math.exp(direct.log_scale - reference)

        flagged = direct.error_estimate > FLAG_FRACTION * abs(direct.scaled_value)
        if flagged:
            diagnostics.append(
                Diagnostic(
                    name="direct_accuracy",
                    severity=Severity.WARNING,
                    message=(
                        f"m={m}: error estimate {direct.error_estimate:.3e} exceeds 1% of "
                        f"|I_2m| (scaled) = {abs(direct.scaled_value):.3e}"
                    ),
                    details={"m": m},
                )
            )
        stated_scale = sum(w * abs(p.amplitude) for w, p in zip(weights, predictions))
        laplace_scale = sum(w * abs(p.laplace_amplitude) for w, p in zip(weights, predictions))
        rows.append(
            ComparisonRow(
                m=int(m),
                direct=direct,
                log_abs_direct=direct.log_abs,
                log_abs_predicted=(reference + math.log(abs(stated)))
                if stated != 0
                else -math.inf,
                stated_ratio=_ratio(value, stated, stated_scale),
                laplace_ratio=_ratio(value, laplace, laplace_scale),
                single_point_ratio=_ratio(
                    value,
                    weights[0] * predictions[0].amplitude,
                    weights[0] * abs(predictions[0].amplitude),
                ),
                flagged=flagged,
            )
        )
        logger.info("m=%d: direct/stated = %s", m, rows[-1].stated_ratio)

    if len(maximizers) > 1:
        last = [predict_moment(shape, params, m_list[-1], p) for p in maximizers]
        signs = {
            math.copysign(1.0, p.laplace_amplitude.imag)
            for p in last
            if p.laplace_amplitude.imag
        }
        if len(signs) > 1:
            diagnostics.append(
                Diagnostic(
                    name="maximizer_cancellation",
                    severity=Severity.INFO,
                    message=(
                        "re-derived contributions of the global maximizers have imaginary parts "
                        "of opposite sign and cancel in the sum"
                    ),
                    details={"phi": [p.origin_shift for p in last]},
                )
            )
    return AsymptoticComparison(maximizers=maximizers, rows=rows, diagnostics=diagnostics)
