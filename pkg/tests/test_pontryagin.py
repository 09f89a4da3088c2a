"""Hamiltonian, feasible curves and backward extremals."""

import math

import numpy as np
import pytest

from sisctrl.curves import t_S, x_S_of_xT
from sisctrl.errors import PoleAtRoot, StepInvalid
from sisctrl.pontryagin import (
    backward_extremal,
    extremal_field,
    hamiltonian,
    lambda_inf,
    lambda_ncl,
    lambda_sup,
    minimizing_control,
)


def test_hamiltonian_terminal(m_one):
    assert hamiltonian(m_one, 0.37, 0.0, 0.0) == pytest.approx(0.37, abs=1e-15)


def test_hamiltonian_switching_locus(m_one):
    h0 = hamiltonian(m_one, 0.4, m_one.C, 0.0)
    h1 = hamiltonian(m_one, 0.4, m_one.C, m_one.mu_I)
    assert h0 == h1


def test_hamiltonian_bang_bang_minimizer(m_one):
    rng = np.random.default_rng(67)
    grid = np.linspace(0.0, m_one.mu_I, 100)
    for _ in range(100):
        x = float(rng.uniform(0.0, 1.0))
        lam = float(rng.uniform(-2.0, 2.0 * m_one.C))
        best_grid = min(hamiltonian(m_one, x, lam, float(w)) for w in grid)
        w_star = minimizing_control(m_one, x, lam)
        assert hamiltonian(m_one, x, lam, w_star) == pytest.approx(best_grid, abs=1e-12)


def test_minimizing_control_tie(m_one):
    assert minimizing_control(m_one, 0.4, 0.0) == 0.0
    assert minimizing_control(m_one, 0.4, 2.0 * m_one.C) == m_one.mu_I
    assert minimizing_control(m_one, 0.4, m_one.C) == 0.0


def test_lambda_inf_basics(m_one):
    assert lambda_inf(m_one, 0.3, 0.3) == 0.0
    with pytest.raises(PoleAtRoot):
        lambda_inf(m_one, m_one.r0_plus, 0.3)


def test_lambda_inf_decreasing(m_one):
    x_T = 0.3
    xs = np.linspace(m_one.r0_minus + 0.01, m_one.r0_plus - 0.01, 1000)
    vals = [lambda_inf(m_one, float(x), x_T) for x in xs]
    assert np.all(np.diff(vals) < 0.0)


def test_lambda_inf_hits_C_at_switch_state(m_one, m_two):
    for m in (m_one, m_two):
        for x_T in np.linspace(m.r0_minus + 0.05, m.xT_sup - 0.02, 15):
            x_s = x_S_of_xT(m, float(x_T))
            assert lambda_inf(m, x_s, float(x_T)) == pytest.approx(m.C, abs=1e-10)


def test_lambda_sup_basics(m_two):
    assert lambda_sup(m_two, 0.3, 0.3) == pytest.approx(m_two.C, rel=1e-12)
    with pytest.raises(PoleAtRoot):
        lambda_sup(m_two, m_two.rmu_plus, 0.3)


def test_lambda_sup_reflection(m_two):
    rng = np.random.default_rng(71)
    for _ in range(30):
        x_ref = float(rng.uniform(0.05, 0.55))
        refl = 2.0 * m_two.x_bar_C - x_ref
        if abs(m_two.f(refl)) < 1e-12:
            continue
        assert lambda_sup(m_two, refl, x_ref) == pytest.approx(m_two.C, abs=1e-10)


def test_lambda_ncl_pole(m_one):
    with pytest.raises(PoleAtRoot):
        lambda_ncl(m_one, m_one.B / (2.0 * m_one.A))
    assert lambda_ncl(m_one, 0.0) == pytest.approx(-1.0 / m_one.B, rel=1e-12)


def test_backward_extremal_invariants(m_one, m_two):
    for m in (m_one, m_two):
        for x_T in (0.1, 0.4, 0.68, 0.9):
            ext = backward_extremal(m, x_T, m.horizon / 2e4)
            assert ext.adjoints[-1] == 0.0
            pre = ext.times < m.horizon
            assert float(ext.adjoints[pre].min()) > 0.0
            assert ext.hamiltonian_drift < 1e-7
            assert ext.switch_times.size <= 2
            assert ext.controls[-1] == 0.0


def test_extremal_switch_states_solve_quadratic(m_two):
    """Switch states are the roots of x - x_T + C (mu_I + f(x)) = 0."""
    x_T = m_two.r0_plus
    ext = backward_extremal(m_two, x_T, m_two.horizon / 1e5)
    assert ext.switch_times.size == 2
    for x_sw in ext.switch_states:
        g = x_sw - x_T + m_two.C * (m_two.mu_I + m_two.f(x_sw))
        assert g == pytest.approx(0.0, abs=1e-6)
    assert float(ext.switch_states.sum()) == pytest.approx(
        2.0 * m_two.x_bar_C, abs=1e-6)


def test_extremal_agrees_with_curves(m_one, m_two):
    """The extremal's last switch reproduces (x_S(x_T), t_S(x_S))."""
    for m in (m_one, m_two):
        for x_T in np.linspace(0.2, m.xT_sup - 0.02, 6):
            ext = backward_extremal(m, float(x_T), m.horizon / 1e5)
            if ext.switch_times.size == 0:
                continue
            x_s = x_S_of_xT(m, float(x_T))
            ts = t_S(m, x_s)
            if not (0.0 < ts < m.horizon):
                continue
            assert ext.switch_states[-1] == pytest.approx(x_s, abs=1e-6)
            assert ext.switch_times[-1] == pytest.approx(ts, abs=1e-6)


def test_no_singular_dwell(m_one, m_two):
    step = 50.0 / 2e4
    for m in (m_one, m_two):
        for x_T in (0.3, 0.6, 0.9):
            ext = backward_extremal(m, x_T, step)
            near = np.abs(ext.adjoints - m.C) < 1e-9
            if near.any():
                dt = np.diff(ext.times)
                dwell = float(np.sum(dt[near[:-1]]))
                assert dwell < 2.0 * step


def test_step_gate(m_one):
    with pytest.raises(StepInvalid):
        backward_extremal(m_one, 0.5, 0.0)
    with pytest.raises(StepInvalid):
        backward_extremal(m_one, 1.5, 0.01)


def test_extremal_field_count(m_one):
    field = extremal_field(m_one, np.linspace(0.1, 0.9, 5), 0.01)
    assert len(field) == 5
