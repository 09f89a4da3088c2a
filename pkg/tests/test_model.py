"""Derived constants, regime classification, and equilibria."""

import math

import numpy as np
import pytest

from sisctrl.errors import AssumptionViolation, ControlOutOfRange, InvalidParameter
from sisctrl.model import (
    Branch,
    Ordering,
    RawParameters,
    SubCase,
    classify_regime,
    derive,
    equilibria,
)

from conftest import make_model


def test_derived_constants_one_switch(m_one):
    assert m_one.A == 0.5
    assert m_one.B == pytest.approx(0.3, abs=1e-15)
    assert m_one.mu_I == pytest.approx(0.03, abs=1e-15)
    assert m_one.R0 == pytest.approx(2.5, abs=1e-12)
    assert m_one.Delta == pytest.approx(0.15, abs=1e-15)
    assert m_one.r0_plus == pytest.approx(0.6872983346207417, abs=1e-15)
    assert m_one.r0_minus == pytest.approx(-0.08729833462074170, abs=1e-15)
    assert m_one.rmu_plus == pytest.approx(0.6, abs=1e-15)
    assert m_one.x_bar_C == pytest.approx(0.5, abs=1e-15)
    assert m_one.xS_sup == pytest.approx(0.31270166537925825, abs=1e-15)
    assert m_one.xT_sup == m_one.r0_plus


def test_regime_one_switch(m_one):
    assert m_one.regime.branch is Branch.ONE_SWITCH
    assert m_one.regime.sub_case is SubCase.GENERIC
    assert m_one.regime.ordering is Ordering.BELOW_MEAN
    assert classify_regime(m_one) == m_one.regime


def test_regime_two_switch(m_two):
    assert m_two.x_bar_C == pytest.approx(0.8, abs=1e-15)
    assert m_two.regime.branch is Branch.TWO_SWITCH
    assert m_two.regime.sub_case is SubCase.GENERIC
    assert m_two.regime.ordering is Ordering.ABOVE_R0
    assert m_two.xS_sup == m_two.x_bar_C
    assert m_two.xT_sup == pytest.approx(0.7000000000000001, abs=1e-15)


def test_degenerate_sub_cases(m_no, m_out):
    assert m_no.regime.branch is Branch.ONE_SWITCH
    assert m_no.regime.sub_case is SubCase.NO_SWITCH_EVER
    assert m_no.xS_sup <= 0.0
    assert m_out.regime.branch is Branch.TWO_SWITCH
    assert m_out.regime.sub_case is SubCase.FIRST_SWITCH_OUTSIDE_UNIT_BOX
    assert m_out.xS_sup > 1.0


def test_imperfect_test_rejected():
    with pytest.raises(AssumptionViolation):
        derive(RawParameters(beta=0.5, gamma=0.1, mu=0.1, p_I=0.3, eta=0.1,
                             horizon=50, unit_control_cost=5.0))
    with pytest.raises(AssumptionViolation):
        derive(RawParameters(beta=0.5, gamma=0.1, mu=0.1, p_I=0.3, pi=0.9,
                             horizon=50, unit_control_cost=5.0))


def test_subcritical_rejected():
    with pytest.raises(AssumptionViolation):
        derive(RawParameters(beta=0.15, gamma=0.1, mu=0.1, p_I=0.3,
                             horizon=50, unit_control_cost=5.0))


def test_invalid_ranges_rejected():
    with pytest.raises(InvalidParameter):
        derive(RawParameters(beta=-0.5, gamma=0.1, mu=0.1, p_I=0.3,
                             horizon=50, unit_control_cost=5.0))
    with pytest.raises(InvalidParameter):
        derive(RawParameters(beta=0.5, gamma=0.1, mu=0.1, p_I=1.3,
                             horizon=50, unit_control_cost=5.0))
    with pytest.raises(InvalidParameter):
        derive(RawParameters(beta=0.5, gamma=0.1, mu=0.1, p_I=0.3, horizon=50))
    with pytest.raises(InvalidParameter):
        derive(RawParameters(beta=0.5, gamma=0.1, mu=0.1, p_I=0.3, horizon=50,
                             unit_control_cost=5.0, cost_detection=1.0,
                             cost_treatment=1.0, cost_infected=1.0))


def test_cost_triple_scaling():
    """With perfect testing and delta=0, C reduces to
    mu (C_D + C_T p_I) / (C_I p_I)."""
    m = derive(RawParameters(beta=0.5, gamma=0.1, mu=0.1, p_I=0.3, horizon=50,
                             cost_detection=2.0, cost_treatment=3.0,
                             cost_infected=1.0))
    expected = (0.1 / 0.03) * (2.0 * 0.1 + 3.0 * 0.1 * 0.3)
    assert m.C == pytest.approx(expected, rel=1e-14)


def test_equilibria_full_screening(m_one):
    rm, rp = equilibria(m_one, m_one.mu_I)
    assert rm == pytest.approx(0.0, abs=1e-15)
    assert rp == pytest.approx(0.6, abs=1e-15)


def test_equilibria_no_screening(m_one):
    rm, rp = equilibria(m_one, 0.0)
    assert rm == pytest.approx(-0.08729833462074170, abs=1e-14)
    assert rp == pytest.approx(0.6872983346207417, abs=1e-14)


def test_equilibria_half_screening(m_one):
    rm, rp = equilibria(m_one, 0.015)
    # roots of -0.5 x^2 + 0.3 x + 0.015
    for r in (rm, rp):
        assert -0.5 * r * r + 0.3 * r + 0.015 == pytest.approx(0.0, abs=1e-15)
    assert rm < 0.0 < rp


def test_equilibria_control_gate(m_one):
    with pytest.raises(ControlOutOfRange):
        equilibria(m_one, m_one.mu_I * 1.5)
    with pytest.raises(ControlOutOfRange):
        equilibria(m_one, -0.01)


def test_upper_equilibrium_decreasing_in_w(m_one, m_two):
    for m in (m_one, m_two):
        rps = [equilibria(m, w)[1] for w in np.linspace(0.0, m.mu_I, 120)]
        assert np.all(np.diff(rps) < 0.0)
        rms = [equilibria(m, w)[0] for w in np.linspace(0.0, m.mu_I, 120)]
        assert all(r <= 0.0 for r in rms)
        assert all(0.0 <= r < 1.0 for r in rps)


def test_reflection_center_identity(m_one, m_two):
    # x_bar_C is the state where C f'(x) = -1
    for m in (m_one, m_two):
        assert m.C * m.f_prime(m.x_bar_C) == pytest.approx(-1.0, rel=1e-12)


def test_switch_sup_identity():
    """2 x_bar_C - r0_plus = 1/(A C) + r0_minus for random valid draws."""
    rng = np.random.default_rng(7)
    for _ in range(50):
        beta = float(rng.uniform(0.3, 1.5))
        gamma = float(rng.uniform(0.01, 0.2))
        mu = float(rng.uniform(0.01, 0.2))
        if beta / (gamma + mu) <= 1.0:
            continue
        m = derive(RawParameters(beta=beta, gamma=gamma, mu=mu,
                                 p_I=float(rng.uniform(0.05, 0.9)), horizon=50,
                                 unit_control_cost=float(rng.uniform(0.5, 20))))
        lhs = 2.0 * m.x_bar_C - m.r0_plus
        rhs = 1.0 / (m.A * m.C) + m.r0_minus
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_ordering_equivalences():
    rng = np.random.default_rng(11)
    for _ in range(100):
        beta = float(rng.uniform(0.3, 1.5))
        gamma = float(rng.uniform(0.01, 0.2))
        mu = float(rng.uniform(0.01, 0.2))
        if beta / (gamma + mu) <= 1.0:
            continue
        m = derive(RawParameters(beta=beta, gamma=gamma, mu=mu,
                                 p_I=float(rng.uniform(0.05, 0.9)), horizon=50,
                                 unit_control_cost=float(rng.uniform(0.5, 20))))
        assert (m.x_bar_C < m.r_bar_plus) == (2.0 < m.C * (m.B + m.sqrt_Delta))
        assert (m.x_bar_C >= m.r0_plus) == (1.0 >= m.C * m.sqrt_Delta)


def test_boundary_tie_goes_one_switch():
    """C exactly at 1/sqrt(Delta) puts x_bar_C = r0_plus on the one-switch side."""
    probe = make_model(2.0)
    m = make_model(1.0 / probe.sqrt_Delta)
    if m.x_bar_C == m.r0_plus:
        assert m.regime.branch is Branch.ONE_SWITCH
        assert m.regime.ordering is Ordering.ABOVE_R0
