"""Configuration and parameter models for Pompeiu Lab."""

from enum import Enum
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Severity(str, Enum):
    OK = "ok"
    INFO = "info"
    WARNING = "warning"
    CRITICAL = "critical"


class Diagnostic(BaseModel):
    """A reported (not raised) numerical finding."""

    name: str
    severity: Severity
    message: str
    details: dict[str, Any] = Field(default_factory=dict)


def worst_severity(diagnostics: list[Diagnostic]) -> Severity:
    """Return the worst severity level among diagnostics."""
    if any(d.severity == Severity.CRITICAL for d in diagnostics):
        return Severity.CRITICAL
    if any(d.severity == Severity.WARNING for d in diagnostics):
        return Severity.WARNING
    return Severity.OK


class PompeiuParams(BaseModel):
    """Wavenumber and quadrature tolerance shared by the functionals."""

    model_config = ConfigDict(frozen=True)

    k: float = Field(gt=0)
    tol: float = Field(default=1e-12, ge=1e-14, le=1e-6)


class QuadratureConfig(BaseModel):
    tol: float = Field(default=1e-12, ge=1e-14, le=1e-6)


class TrefftzConfig(BaseModel):
    order: int = Field(default=16, ge=0, le=60)
    collocation: int = 128
    dirichlet_tol: float = 1e-6
    rcond: float = 1e-13
    column_tol: float = 1e-10

    @model_validator(mode="after")
    def _enough_nodes(self) -> "TrefftzConfig":
        if self.collocation < 4 * self.order + 16:
            raise ValueError(
                f"collocation={self.collocation} must be at least 4*order+16 = "
                f"{4 * self.order + 16}"
            )
        return self


class SearchConfig(BaseModel):
    budget: int = Field(default=20000, ge=1, le=100000)
    max_order: int = Field(default=3, ge=0, le=6)
    restart_steps: list[float] = Field(default_factory=lambda: [5e-2, 5e-3, 5e-4])
    simplex_tol: float = 1e-8
    directions: int = Field(default=128, ge=128)


class ExtractionConfig(BaseModel):
    a_min: float = 1e2
    a_max: float = 1e4
    points: int = 12
    nuisance_terms: int = 4


class AsymptoticsConfig(BaseModel):
    m_values: list[int] = Field(default_factory=lambda: [50, 100, 200, 400])


class LabConfig(BaseModel):
    """Tunable defaults for every experiment."""

    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)
    trefftz: TrefftzConfig = Field(default_factory=TrefftzConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    extraction: ExtractionConfig = Field(default_factory=ExtractionConfig)
    asymptotics: AsymptoticsConfig = Field(default_factory=AsymptoticsConfig)

    @classmethod
    def defaults(cls) -> "LabConfig":
        """Return default settings."""
        return cls()


class Command(str, Enum):
    FT = "ft"
    POMPEIU = "pompeiu"
    MOMENTS = "moments"
    EXTRACT = "extract"
    ASYMPT = "asympt"
    BVP = "bvp"
    SCAN = "scan"
    SEARCH = "search"
    ZEROS = "zeros"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """Fully resolved configuration of one CLI command."""

    command: Command
    shape_path: Path | None = None
    k: float | Literal["auto"] = "auto"
    tol: float = Field(default=1e-12, ge=1e-14, le=1e-6)
    output_path: Path | None = None
    output_format: OutputFormat = OutputFormat.CSV
    options: dict[str, Any] = Field(default_factory=dict)

    @field_validator("shape_path")
    @classmethod
    def _shape_exists(cls, path: Path | None) -> Path | None:
        if path is not None and not path.exists():
            raise ValueError(f"shape file not found: {path}")
        return path

    @field_validator("k")
    @classmethod
    def _positive_k(cls, k: float | str) -> float | str:
        if k != "auto" and k <= 0:
            raise ValueError(f"wavenumber k must be positive, got {k}")
        return k

    def header(self) -> dict[str, Any]:
        """Flat view embedded at the top of every report."""
        data = self.model_dump(mode="json")
        options = data.pop("options")
        data.update({f"option.{key}": value for key, value in sorted(options.items())})
        return data
