import math

import pytest

from hyposc import ModelParams, canonical_state
from hyposc.dynamics import IntegrationConfig, Mode, integrate


@pytest.fixture(scope="session")
def params():
    return ModelParams(omega=1.0, radius=1.0)


@pytest.fixture(scope="session")
def case_a(params):
    """Reference bounded orbit (E = 0.4, L^2 = 1/4) over ten periods."""
    e, l_sq = 0.4, 0.25
    period = math.pi / math.sqrt(0.2)
    state = canonical_state(e, l_sq, params)
    cfg = IntegrationConfig(t_span=(0.0, 10.0 * period))
    traj = integrate(state, params, cfg, Mode.OSCILLATOR)
    return {"e": e, "l_sq": l_sq, "period": period, "state": state, "traj": traj}


@pytest.fixture(scope="session")
def neg_l2_traj(params):
    """Bounded negative-L^2 orbit (E = 1/4, L^2 = -1) over two periods."""
    e, l_sq = 0.25, -1.0
    period = 2.0 * math.pi / math.sqrt(2.0)
    state = canonical_state(e, l_sq, params)
    cfg = IntegrationConfig(t_span=(0.0, 2.0 * period))
    traj = integrate(state, params, cfg, Mode.OSCILLATOR)
    return {"e": e, "l_sq": l_sq, "period": period, "state": state, "traj": traj}
