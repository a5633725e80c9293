import pytest

from vwapopt import MarketParams, VolumeModel, build_deterministic_path, make_power_impact


@pytest.fixture
def quadratic():
    return make_power_impact(0.5, 2.0)


@pytest.fixture
def baseline_params():
    return MarketParams(s0=100.0, mu=-0.5, sigma=0.0, T=2.0, x=1.0)


@pytest.fixture
def unit_path():
    return build_deterministic_path(VolumeModel.constant(1.0, 200), 2.0)
