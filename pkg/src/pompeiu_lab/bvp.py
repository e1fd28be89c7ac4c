"""The overdetermined Helmholtz problem (lap + k^2) u = 1, u = 0 and u_N = 0 on S.

On the disc it is solved in closed form. On a general star shape the Dirichlet half
is fitted with interior Fourier-Bessel waves J_|n|(kr) e^{in phi}, and the size of
the normal derivative left over on S measures how far the shape is from admitting a
solution at k.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import PreconditionError
from .models import Severity, TrefftzConfig
from .shapes import StarShape
from .special import bessel_j, bessel_j1_zero, bessel_j_orders

logger = logging.getLogger(__name__)

J0_FLOOR = 1e-8


@dataclass(frozen=True)
class RadialSolution:
    """u(r) = (1/k^2) (1 - J0(kr) / J0(kR)), which vanishes on r = R."""

    R: float
    k: float

    def __post_init__(self):
        if self.R <= 0 or self.k <= 0:
            raise PreconditionError(f"R and k must be positive, got R={self.R}, k={self.k}")
        j0 = bessel_j(0, self.k * self.R)
        if abs(j0) <= J0_FLOOR:
            raise PreconditionError(
                f"kR = {self.k * self.R:.12g} is within reach of a J0 zero: "
                f"|J0(kR)| = {abs(j0):.3e} <= {J0_FLOOR:g}"
            )

    @property
    def j0_boundary(self) -> float:
        return bessel_j(0, self.k * self.R)

    def value(self, r):
        return (1.0 - bessel_j(0, self.k * np.asarray(r)) / self.j0_boundary) / self.k**2

    def radial_derivative(self, r):
        """u_r = J1(kr) / (k J0(kR)), using J0' = -J1."""
        return bessel_j(1, self.k * np.asarray(r)) / (self.k * self.j0_boundary)


@dataclass(frozen=True)
class ParticularSolution:
    """The constant profile u = 1/k^2."""

    R: float
    k: float

    def value(self, r):
        return np.full(np.shape(r), 1.0 / self.k**2)[()]

    def radial_derivative(self, r):
        return np.zeros(np.shape(r))[()]


@dataclass(frozen=True)
class DiscReport:
    solution: RadialSolution
    neumann_defect: float


def disc_overdetermined(R: float, k: float) -> DiscReport:
    """Closed-form solution on the disc and its Neumann defect |u_r(R)|."""
    solution = RadialSolution(R=R, k=k)
    defect = abs(float(solution.radial_derivative(R)))
    return DiscReport(solution=solution, neumann_defect=defect)


def residual_check(solution: RadialSolution | ParticularSolution, grid_step: float) -> float:
    """max |u'' + u'/r + k^2 u - 1| over interior radii, derivatives by centred differences."""
    if grid_step > 1e-2 * solution.R:
        raise PreconditionError(
            f"grid_step {grid_step:g} must be at most 1e-2 * R = {1e-2 * solution.R:g}"
        )
    r = np.linspace(0.05 * solution.R, 0.95 * solution.R, 181)
    h = grid_step
    ahead, centre, behind = solution.value(r + h), solution.value(r), solution.value(r - h)
    first = (ahead - behind) / (2.0 * h)
    second = (ahead - 2.0 * centre + behind) / h**2
    residual = second + first / r + solution.k**2 * centre - 1.0
    return float(np.max(np.abs(residual)))


def neumann_eigen_disc(R: float, mode: int) -> tuple[float, float]:
    """Wavenumber where J0(kr) has u_r(R) = 0, and the (constant) boundary value J0(kR)."""
    k = bessel_j1_zero(mode).value / R
    return k, bessel_j(0, k * R)


@dataclass(frozen=True)
class TrefftzSolution:
    """Least-squares Dirichlet fit of u_h = -1/k^2 on S and the leftover normal derivative."""

    k: float
    order: int
    coeffs: np.ndarray
    boundary_residual: float
    neumann_defect: float
    condition: float
    rank: int
    severity: Severity
    message: str
    dropped_orders: tuple[int, ...] = ()

    def coefficient(self, n: int) -> complex:
        return complex(self.coeffs[n + self.order])


def _boundary_frame(shape: StarShape, n_colloc: int):
    phi = 2.0 * math.pi * np.arange(n_colloc) / n_colloc
    f = shape.eval(phi)
    f1 = shape.eval(phi, 1)
    arclength = np.sqrt(f**2 + f1**2)
    weights = np.sqrt(arclength * 2.0 * math.pi / n_colloc)
    return phi, f, f1, arclength, weights


def trefftz_defect(
    shape: StarShape,
    k: float,
    N: int = 16,
    n_colloc: int = 128,
    *,
    dirichlet_tol: float = 1e-6,
    rcond: float = 1e-13,
    column_tol: float = 1e-10,
) -> TrefftzSolution:
    """Fit u_h = sum_{|n|<=N} c_n J_|n|(kr) e^{in phi} to -1/k^2 on S.

    Rows are weighted by the square root of the arclength element so that the
    residual and defect are discrete L2(S) norms. Orders +-n whose weighted column
    norm is below column_tol times the largest one vanish on S to working precision
    and are dropped in pairs (their coefficients are reported as 0). The kept columns
    are normalized before the orthogonal (QR with column pivoting) solve; the
    condition estimate is taken on the full unnormalized design.
    """
    if k <= 0:
        raise PreconditionError(f"wavenumber k must be positive, got {k}")
    if N < 0:
        raise PreconditionError(f"basis order N must be nonnegative, got {N}")
    if n_colloc < 4 * N + 16:
        raise PreconditionError(f"n_colloc = {n_colloc} must be at least 4N + 16 = {4 * N + 16}")

    phi, f, f1, arclength, weights = _boundary_frame(shape, n_colloc)
    orders = np.arange(-N, N + 1)
    table = bessel_j_orders(N + 1, k * f)
    jn = table[np.abs(orders)]
    lower = np.where(orders[:, None] == 0, -table[1][None, :], table[np.abs(np.abs(orders) - 1)])
    jn_prime = 0.5 * (lower - table[np.abs(orders) + 1])
    wave = np.exp(1j * np.outer(orders, phi))

    basis = (jn * wave).T
    design = weights[:, None] * basis
    rhs = -weights / k**2 + 0j

    singular = linalg.svdvals(design)
    condition = float(singular[0] / singular[-1]) if singular[-1] > 0 else math.inf

    norms = np.linalg.norm(design, axis=0)
    # +-n columns share one decision so even shapes keep c_{-n} = c_n
    pair_norms = np.maximum(norms, norms[::-1])
    kept = pair_norms >= column_tol * float(np.max(norms))
    dropped = sorted({int(abs(n)) for n in orders[~kept]})

    scale = norms[kept]
    scaled, _, rank, _ = linalg.lstsq(
        design[:, kept] / scale, rhs, cond=rcond, lapack_driver="gelsy"
    )
    coeffs = np.zeros(orders.size, dtype=complex)
    coeffs[kept] = scaled / scale

    boundary = basis @ coeffs + 1.0 / k**2
    boundary_residual = float(np.linalg.norm(weights * boundary))

    u_r = ((k * jn_prime * wave).T) @ coeffs
    u_phi = ((1j * orders[:, None] * jn * wave).T) @ coeffs
    normal = (f * u_r - (f1 / f) * u_phi) / arclength
    neumann_defect = float(np.linalg.norm(weights * normal))

    severity, message = Severity.OK, "Dirichlet fit converged"
    if dropped:
        severity = Severity.INFO
        message = (
            f"Dirichlet fit converged; dropped orders |n| in {dropped} that vanish on S "
            f"(condition {condition:.3g})"
        )
    if rank < int(np.count_nonzero(kept)):
        severity = Severity.WARNING
        message = (
            f"collocation system rank deficient: rank {rank} of {np.count_nonzero(kept)} "
            f"kept columns (condition {condition:.3g})"
        )
    if boundary_residual > dirichlet_tol:
        severity = Severity.CRITICAL
        message = (
            f"Dirichlet fit failed: boundary residual {boundary_residual:.3e} > {dirichlet_tol:g}"
        )
    logger.debug(
        "trefftz k=%.8g N=%d: residual %.3e defect %.3e cond %.3g dropped %s",
        k, N, boundary_residual, neumann_defect, condition, dropped,
    )
    return TrefftzSolution(
        k=float(k),
        order=int(N),
        coeffs=coeffs,
        boundary_residual=boundary_residual,
        neumann_defect=neumann_defect,
        condition=condition,
        rank=int(rank),
        severity=severity,
        message=message,
        dropped_orders=tuple(dropped),
    )


def scan_trefftz(
    shape: StarShape, k_values, config: TrefftzConfig | None = None
) -> list[TrefftzSolution]:
    """trefftz_defect over k_values, in the given order."""
    config = config or TrefftzConfig()
    return [
        trefftz_defect(
            shape,
            float(k),
            config.order,
            config.collocation,
            dirichlet_tol=config.dirichlet_tol,
            rcond=config.rcond,
            column_tol=config.column_tol,
        )
        for k in k_values
    ]
