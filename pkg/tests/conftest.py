import pytest

from obfcap.model import INFINITE, PathLossModel, SystemConfig


@pytest.fixture
def fig2_config():
    """rho = 1, M = 2 with a unit cell and unit intensity."""
    return SystemConfig(lam=1.0, radius=1.0, beams=2, power=1.0)


@pytest.fixture
def large_cell():
    return SystemConfig(lam=10.0, radius=INFINITE, beams=2, power=1.0)


ALL_MODELS = [
    PathLossModel.unbounded(4),
    PathLossModel.unbounded(2.5),
    PathLossModel.bounded(4),
    PathLossModel.bounded(2.5),
    PathLossModel.guard_zone(4, 0.5),
    PathLossModel.shifted(4),
]
