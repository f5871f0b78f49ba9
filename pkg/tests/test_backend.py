import numpy as np
import pytest

from offtsim import _backend, core
from offtsim.core import CouplerConvention as CC

pytestmark = pytest.mark.skipif(len(_backend.available()) < 2, reason="compiled kernel not built")


@pytest.mark.parametrize("n", [2, 8, 64, 1024])
@pytest.mark.parametrize("conv", list(CC))
def test_backends_agree(n, conv, rng):
    plan = core.plan_network(n, conv)
    x = rng.normal(size=(n, 5)) + 1j * rng.normal(size=(n, 5))
    arms = rng.normal(0, 0.3, plan.n_arms)
    a = core._run(plan, x, arm_phases=arms, backend="python")
    b = core._run(plan, x, arm_phases=arms, backend="cython")
    assert np.max(np.abs(a - b)) < 1e-13


def test_unknown_backend():
    with pytest.raises(ValueError):
        core.propagate(core.plan_network(4), np.ones(4), backend="fortran")
