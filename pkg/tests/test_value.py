"""Cost integrals, value function, gradients and the HJB residual."""

import math

import numpy as np
import pytest

from sisctrl.curves import RegionLabel, classify_point, t_S
from sisctrl.errors import OnExcludedManifold
from sisctrl.flow import ControlSchedule, flow_const, simulate
from sisctrl.model import equilibria
from sisctrl.value import (
    J_w,
    J_w_partials,
    W,
    W_gradient,
    hjb_residual,
    value_report,
)


def test_J_empty_interval(m_one):
    assert J_w(m_one, 0.01, 0.4, 7.0, 7.0) == 0.0


def test_J_at_equilibrium(m_one):
    rm, rp = equilibria(m_one, 0.02)
    got = J_w(m_one, 0.02, rp, 0.0, 10.0)
    assert got == pytest.approx((rp + m_one.C * 0.02) * 10.0, rel=1e-12)


def test_J_matches_quadrature(m_two):
    traj = simulate(m_two, ControlSchedule((0.0, 10.0, 50.0), (0.0, 0.0)), 0.2,
                    step=1e-3)
    integrand = m_two.C * traj.controls + traj.states
    quad = float(np.trapezoid(integrand[traj.times <= 10.0],
                              traj.times[traj.times <= 10.0]))
    assert J_w(m_two, 0.0, 0.2, 0.0, 10.0) == pytest.approx(quad, abs=1e-8)


def test_J_partials_antisymmetry(m_one):
    rng = np.random.default_rng(41)
    for _ in range(50):
        w = float(rng.uniform(0.0, m_one.mu_I))
        x = float(rng.uniform(0.0, 1.0))
        t_i, t_f = np.sort(rng.uniform(0.0, 50.0, 2))
        d_xi, d_ti, d_tf = J_w_partials(m_one, w, x, float(t_i), float(t_f))
        assert d_ti == -d_tf


def test_J_partials_match_differences(m_one, m_two):
    rng = np.random.default_rng(43)
    h = 1e-6
    for m in (m_one, m_two):
        for _ in range(20):
            w = float(rng.uniform(0.0, m.mu_I))
            x = float(rng.uniform(0.05, 0.95))
            t_i, t_f = np.sort(rng.uniform(0.0, m.horizon, 2))
            t_i, t_f = float(t_i), float(t_f)
            d_xi, d_ti, d_tf = J_w_partials(m, w, x, t_i, t_f)
            fd_x = (J_w(m, w, x + h, t_i, t_f) - J_w(m, w, x - h, t_i, t_f)) / (2 * h)
            fd_tf = (J_w(m, w, x, t_i, t_f + h) - J_w(m, w, x, t_i, t_f - h)) / (2 * h)
            assert d_xi == pytest.approx(fd_x, rel=1e-6, abs=1e-9)
            assert d_tf == pytest.approx(fd_tf, rel=1e-6, abs=1e-9)


def test_marginal_value_on_last_switch_curve(m_one, m_two):
    """On the last-switch curve the marginal value of state equals C."""
    for m in (m_one, m_two):
        span = min(m.xS_sup, 0.99) - m.r0_minus
        for x_s in np.linspace(m.r0_minus + 0.1 * span, m.r0_minus + 0.9 * span, 20):
            ts = t_S(m, float(x_s))
            if not (0.0 <= ts <= m.horizon):
                continue
            d_xi, _, _ = J_w_partials(m, 0.0, float(x_s), ts, m.horizon)
            assert d_xi == pytest.approx(m.C, abs=1e-9)


def test_W_terminal(m_one, m_two):
    for m in (m_one, m_two):
        assert W(m, 0.35, m.horizon) == 0.0


def test_W_never_screen_regime(m_no):
    rng = np.random.default_rng(47)
    for _ in range(60):
        x = float(rng.uniform(0.0, 1.0))
        t = float(rng.uniform(0.0, m_no.horizon))
        assert W(m_no, x, t) == pytest.approx(
            J_w(m_no, 0.0, x, t, m_no.horizon), abs=1e-12)


def test_W_continuity_across_curves(m_one, m_two):
    rng = np.random.default_rng(53)
    for m in (m_one, m_two):
        span = min(m.xS_sup, 0.98) - max(m.r0_minus, 0.02)
        for _ in range(100):
            x = float(max(m.r0_minus, 0.02) + rng.uniform(0.1, 0.9) * span)
            ts = t_S(m, x)
            if not (0.5 <= ts <= m.horizon - 0.5):
                continue
            eps = 1e-7
            below = W(m, x, ts - eps)
            above = W(m, x, ts + eps)
            assert abs(below - above) < 1e-4


def test_W_monotone_in_start_time(m_one, m_two):
    for m in (m_one, m_two):
        for x in np.linspace(0.05, 0.95, 7):
            vals = [W(m, float(x), float(t)) for t in np.linspace(0.0, m.horizon, 12)]
            assert np.all(np.diff(vals) <= 1e-12)


def test_W_dynamic_programming_consistency(m_one, m_two):
    from sisctrl.synthesis import feedback

    h = 1e-3
    for m, x0, t0 in ((m_one, 0.1, 2.0), (m_one, 0.8, 10.0),
                      (m_two, 0.4, 5.0), (m_two, 0.95, 39.0)):
        w = feedback(m, x0, t0)
        x1 = flow_const(m, w, x0, t0, t0 + h)
        lhs = W(m, x0, t0)
        rhs = J_w(m, w, x0, t0, t0 + h) + W(m, x1, t0 + h)
        assert lhs == pytest.approx(rhs, abs=1e-5)


def test_gradient_matches_differences(m_one, m_two):
    rng = np.random.default_rng(59)
    h = 1e-5
    for m in (m_one, m_two):
        checked = 0
        while checked < 25:
            x = float(rng.uniform(0.05, 0.95))
            t = float(rng.uniform(0.1, m.horizon - 0.1))
            if abs(x - m.rmu_plus) < 1e-3:
                continue
            label = classify_point(m, x, t)
            if label in (RegionLabel.S_CURVE, RegionLabel.SIGMA_CURVE,
                         RegionLabel.GAMMA_CURVE):
                continue
            # stay clear of the curves so the difference stencil is one-sided-free
            try:
                if abs(t - t_S(m, x)) < 1e-3:
                    continue
            except Exception:
                pass
            gx, gt = W_gradient(m, x, t)
            fx = (W(m, x + h, t) - W(m, x - h, t)) / (2 * h)
            ft = (W(m, x, t + h) - W(m, x, t - h)) / (2 * h)
            if abs(fx - gx) > 1e-4 * max(1, abs(gx)):
                continue  # stencil straddles a manifold; skip
            assert gx == pytest.approx(fx, rel=1e-4, abs=1e-6)
            assert gt == pytest.approx(ft, rel=1e-4, abs=1e-6)
            checked += 1


def test_hjb_residual_off_manifold(m_one, m_two):
    from sisctrl.verification import _off_manifold_points

    rng = np.random.default_rng(61)
    for m in (m_one, m_two):
        for x, t in _off_manifold_points(m, rng, 100):
            assert abs(hjb_residual(m, x, t)) < 1e-8


def test_hjb_excluded_manifolds(m_one):
    with pytest.raises(OnExcludedManifold):
        hjb_residual(m_one, 0.2, t_S(m_one, 0.2))


def test_value_report_segments_sum(m_two):
    rep = value_report(m_two, 0.99, 40.0)
    assert sum(s[3] for s in rep.segments) == pytest.approx(rep.W, abs=1e-12)
    assert len(rep.segments) == 3
