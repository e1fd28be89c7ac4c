from pathlib import Path

import pytest

from pompeiu_lab.models import PompeiuParams
from pompeiu_lab.shapes import StarShape
from pompeiu_lab.special import bessel_j1_zero

SHAPES_DIR = Path(__file__).resolve().parent.parent / "shapes"


@pytest.fixture
def shapes_dir() -> Path:
    return SHAPES_DIR


@pytest.fixture
def disc() -> StarShape:
    return StarShape.disc(1.0)


@pytest.fixture
def bump() -> StarShape:
    """1 + 0.2 cos phi."""
    return StarShape.from_coefficients(1.0, cos=[0.2])


@pytest.fixture
def ellipse_like() -> StarShape:
    """1 + 0.2 cos 2 phi."""
    return StarShape.from_coefficients(1.0, cos=[0.0, 0.2])


@pytest.fixture
def j11() -> float:
    return bessel_j1_zero(1).value


@pytest.fixture
def params_at():
    def make(k: float, tol: float = 1e-12) -> PompeiuParams:
        return PompeiuParams(k=k, tol=tol)

    return make
