"""Star-shaped domains r = f(phi) with f a trigonometric polynomial, and rigid motions."""

import json
import math
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import PreconditionError
from .quadrature import periodic_integral

POSITIVITY_GRID = 4096


class StarShape(BaseModel):
    """f(phi) = mean_radius + sum_m (a_m cos m phi + b_m sin m phi).

    Positivity is certified by c1 = mean_radius - sum_m (|a_m| + |b_m|) > 0, which
    bounds f from below everywhere; c2 = mean_radius + sum_m (|a_m| + |b_m|) bounds
    it from above.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    mean_radius: float = Field(gt=0)
    cos_coeffs: tuple[float, ...] = Field(default=(), alias="cos")
    sin_coeffs: tuple[float, ...] = Field(default=(), alias="sin")

    @model_validator(mode="before")
    @classmethod
    def _pad(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            cos = list(data.pop("cos", data.pop("cos_coeffs", ())) or ())
            sin = list(data.pop("sin", data.pop("sin_coeffs", ())) or ())
            width = max(len(cos), len(sin))
            data["cos"] = tuple(cos) + (0.0,) * (width - len(cos))
            data["sin"] = tuple(sin) + (0.0,) * (width - len(sin))
        return data

    @model_validator(mode="after")
    def _positive(self) -> "StarShape":
        if not all(math.isfinite(v) for v in self.cos_coeffs + self.sin_coeffs):
            raise ValueError("shape coefficients must be finite")
        if self.c1 <= 0:
            raise ValueError(
                f"positivity bound violated: c1 = mean_radius - sum(|a_m| + |b_m|) = "
                f"{self.c1:.6g} must be > 0"
            )
        return self

    @classmethod
    def disc(cls, radius: float = 1.0) -> "StarShape":
        return cls(mean_radius=radius)

    @classmethod
    def from_coefficients(cls, mean_radius: float, cos=(), sin=()) -> "StarShape":
        return cls(mean_radius=mean_radius, cos=tuple(cos), sin=tuple(sin))

    @property
    def order(self) -> int:
        return len(self.cos_coeffs)

    @property
    def c1(self) -> float:
        return self.mean_radius - float(
            np.sum(np.abs(self.cos_coeffs)) + np.sum(np.abs(self.sin_coeffs))
        )

    @property
    def c2(self) -> float:
        return self.mean_radius + float(
            np.sum(np.abs(self.cos_coeffs)) + np.sum(np.abs(self.sin_coeffs))
        )

    @property
    def is_disc(self) -> bool:
        return not any(self.cos_coeffs) and not any(self.sin_coeffs)

    def eval(self, phi, deriv: int = 0):
        """f^(deriv)(phi) by exact term-wise differentiation, deriv in 0..3."""
        if deriv not in (0, 1, 2, 3):
            raise PreconditionError(f"derivative order must be in 0..3, got {deriv!r}")
        phi = np.asarray(phi, dtype=float)
        total = np.full(phi.shape, self.mean_radius if deriv == 0 else 0.0)
        for m, (a, b) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            c = np.cos(m * phi)
            s = np.sin(m * phi)
            if deriv == 0:
                term = a * c + b * s
            elif deriv == 1:
                term = -a * s + b * c
            elif deriv == 2:
                term = -(a * c + b * s)
            else:
                term = a * s - b * c
            total = total + m**deriv * term
        if total.ndim == 0:
            return float(total)
        return total

    def shifted(self, tau: float) -> "StarShape":
        """The shape g(phi) = f(phi + tau): the same curve with the phi-origin at tau."""
        m = np.arange(1, self.order + 1)
        a = np.asarray(self.cos_coeffs, dtype=float)
        b = np.asarray(self.sin_coeffs, dtype=float)
        c, s = np.cos(m * tau), np.sin(m * tau)
        return StarShape(
            mean_radius=self.mean_radius,
            cos=tuple((a * c + b * s).tolist()),
            sin=tuple((-a * s + b * c).tolist()),
        )

    def boundary_points(self, n: int) -> np.ndarray:
        """n points of S at equally spaced phi, shape (n, 2)."""
        phi = 2.0 * math.pi * np.arange(n) / n
        r = self.eval(phi)
        return np.column_stack((r * np.cos(phi), r * np.sin(phi)))

    def to_dict(self) -> dict:
        return {
            "mean_radius": self.mean_radius,
            "cos": list(self.cos_coeffs),
            "sin": list(self.sin_coeffs),
        }


def area(shape: StarShape, tol: float = 1e-13) -> float:
    """(1/2) * integral of f^2 over one period."""
    result = periodic_integral(lambda phi: 0.5 * shape.eval(phi) ** 2, tol)
    return float(np.real(result.value))


def min_radius_on_grid(shape: StarShape, n: int = POSITIVITY_GRID) -> float:
    phi = 2.0 * math.pi * np.arange(n) / n
    return float(np.min(shape.eval(phi)))


def shoelace_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


class RigidMotion(BaseModel):
    """x -> R(rotation) x + translation."""

    model_config = ConfigDict(frozen=True)

    rotation: float = 0.0
    translation: tuple[float, float] = (0.0, 0.0)

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        return np.array([[c, -s], [s, c]])

    def inverse(self) -> "RigidMotion":
        back = self.matrix.T @ np.asarray(self.translation)
        return RigidMotion(rotation=-self.rotation, translation=(-back[0], -back[1]))

    def compose(self, other: "RigidMotion") -> "RigidMotion":
        """self after other."""
        t = self.matrix @ np.asarray(other.translation) + np.asarray(self.translation)
        return RigidMotion(rotation=self.rotation + other.rotation, translation=(t[0], t[1]))


def apply_motion(motion: RigidMotion, point) -> np.ndarray:
    """Rotate then translate; accepts one point (2,) or many (n, 2)."""
    point = np.asarray(point, dtype=float)
    return point @ motion.matrix.T + np.asarray(motion.translation)


def load_shape(path: Path) -> StarShape:
    """Read a shape JSON file {"mean_radius": r, "cos": [...], "sin": [...]}."""
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise PreconditionError(f"shape file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise PreconditionError(f"shape file {path} is not valid JSON: {e}") from None
    try:
        return StarShape.model_validate(data)
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        raise PreconditionError(f"invalid shape file {path}: {messages}") from None


def dump_shape(shape: StarShape, path: Path) -> None:
    """Write the shape JSON with coefficients as exact decimal text."""
    Path(path).write_text(json.dumps(shape.to_dict(), indent=2) + "\n")
