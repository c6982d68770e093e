import numpy as np
import pytest

from quartic_synapse.model_dynamics import ModelParams, Stimulus
from quartic_synapse.quartic_geometry import QuarticSpec


def make_params(r1=6.4, b=-2.3, b_tilde=-2.2, alpha=0.22, V=2700.0,
                epsilon=0.02):
    quartic = QuarticSpec(Q=0.05, c=(-3.0,) * 4, r=(r1, 4.0, 2.0, 0.0))
    stimulus = Stimulus(V=V, t_start=0.0, t_end=0.04, timescale="fast")
    return ModelParams(epsilon=epsilon, a=-1.0, b=b, a_tilde=-1.0,
                       b_tilde=b_tilde, alpha=alpha, quartic=quartic,
                       stimulus=stimulus)


@pytest.fixture(scope="session")
def fig3_params():
    return make_params()


@pytest.fixture(scope="session")
def fig6_params():
    return make_params(r1=5.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
