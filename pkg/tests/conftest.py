"""Shared fixtures: the four reference models and the extremal field.

The base parameter set is beta=0.5, gamma=0.1, mu=0.1, p_I=0.3, T=50;
the unit control cost C selects the regime: C=5 gives the one-switch
synthesis, C=2 the two-switch synthesis, C=30 the never-screen corner,
C=1 pushes the first-switch curve outside the unit box.
"""

import pytest

from sisctrl.model import RawParameters, derive


def make_model(C, horizon=50.0):
    return derive(RawParameters(beta=0.5, gamma=0.1, mu=0.1, p_I=0.3,
                                horizon=horizon, unit_control_cost=C))


@pytest.fixture(scope="session")
def m_one():
    return make_model(5.0)


@pytest.fixture(scope="session")
def m_two():
    return make_model(2.0)


@pytest.fixture(scope="session")
def m_no():
    return make_model(30.0)


@pytest.fixture(scope="session")
def m_out():
    return make_model(1.0)


@pytest.fixture(scope="session")
def field_summaries(m_one, m_two):
    """Per-extremal facts on the 200-state mesh, shared by the acceptance
    criteria that consume the extremal field (built once per session)."""
    from sisctrl.verification import extremal_summaries

    return [(m, extremal_summaries(m, 200)) for m in (m_one, m_two)]
