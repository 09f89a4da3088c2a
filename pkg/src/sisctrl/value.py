"""Closed-form cost integrals, the value function, and the HJB residual.

The running cost of a constant-control arc integrates in closed form
(the state integral is again logarithmic), so every optimal value is a
finite sum of explicit expressions.  The value function W composes those
segment costs through the hitting times onto the switching curves; its
gradient has simplified closed forms inside the screening region, and
the Hamilton-Jacobi-Bellman residual is evaluated pointwise from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import RegionLabel, classify_point, curve_band
from .errors import ControlOutOfRange, OnExcludedManifold, StateOutOfRange
from .model import Branch, DerivedModel, equilibria
from .synthesis import _SCREEN_LABELS, hit_first_switch, hit_last_switch, plan

_CURVE_LABELS = (RegionLabel.S_CURVE, RegionLabel.SIGMA_CURVE, RegionLabel.GAMMA_CURVE)


@dataclass
class ValueReport:
    point: tuple
    W: float
    segments: list              # (level, from_time, to_time, segment_cost)
    hjb_residual: float | None
    gradient: tuple | None


def J_w(model: DerivedModel, w: float, x_i: float, t_i: float, t_f: float) -> float:
    """Exact cost integral of C*w + x along a constant-control arc."""
    model.check_control(w)
    if not (-1e-12 <= x_i <= 1.0 + 1e-12):
        raise StateOutOfRange(f"initial state must lie in [0, 1], got {x_i}")
    if t_f < t_i:
        raise ControlOutOfRange(f"need t_f >= t_i, got {t_i} > {t_f}")
    rm, rp = equilibria(model, w)
    tau = t_f - t_i
    if tau == 0.0:
        return 0.0
    E = math.exp(-model.A * (rp - rm) * tau)
    D = (x_i - rm) - (x_i - rp) * E
    return (rp + model.C * w) * tau + math.log(D / (rp - rm)) / model.A


def J_w_partials(model: DerivedModel, w: float, x_i: float, t_i: float,
                 t_f: float) -> tuple[float, float, float]:
    """Closed-form partial derivatives of J_w in (x_i, t_i, t_f)."""
    model.check_control(w)
    rm, rp = equilibria(model, w)
    tau = t_f - t_i
    E = math.exp(-model.A * (rp - rm) * tau)
    D = (x_i - rm) - (x_i - rp) * E
    d_xi = (1.0 - E) / (model.A * D)
    d_tf = (rp + model.C * w) + (rp - rm) * (x_i - rp) * E / D
    return d_xi, -d_tf, d_tf


def W(model: DerivedModel, x0: float, t0: float) -> float:
    """Minimal total cost from (x0, t0): sum of closed-form segment costs."""
    return plan(model, x0, t0, with_trajectory=False).total_cost


def _screen_gradient(model: DerivedModel, x0: float, t0: float) -> tuple[float, float]:
    hit = hit_last_switch(model, x0, t0)
    x_s = x0 if hit is None else hit[0]
    fx0 = model.f(x0)
    fxs = model.f(x_s)
    if abs(fx0) < 1e-9:
        # 0/0 at the full-screening equilibrium line; fall back to a
        # one-sided difference away from the line
        h = 1e-6
        d_x0 = (W(model, x0 + h, t0) - W(model, x0, t0)) / h
    else:
        d_x0 = (-x0 + x_s + model.C * fxs) / fx0
    d_t0 = -x_s - model.C * model.mu_I - model.C * fxs
    return d_x0, d_t0


def W_gradient(model: DerivedModel, x0: float, t0: float) -> tuple[float, float]:
    """(dW/dx0, dW/dt0) where W is differentiable.

    Uses the simplified closed forms per region; points on the switching
    curves themselves get the gradient of the region they are entering.
    """
    label = classify_point(model, x0, t0)
    if label in (RegionLabel.THETA, RegionLabel.SSET):
        return _screen_gradient(model, x0, t0)
    if label is RegionLabel.TSET or label is RegionLabel.SIGMA_CURVE:
        if label is RegionLabel.TSET:
            hit = hit_first_switch(model, x0, t0)
        else:
            hit = (x0, t0)
        if hit is None:
            d_xi, d_ti, _ = J_w_partials(model, 0.0, x0, t0, model.horizon)
            return d_xi, d_ti
        x_sig, _ = hit
        Fsig = model.mu_I + model.f(x_sig)
        Fx0 = model.mu_I + model.f(x0)
        d_x0 = (x_sig + model.C * Fsig - x0) / Fx0
        d_t0 = -x_sig - model.C * Fsig
        return d_x0, d_t0
    d_xi, d_ti, _ = J_w_partials(model, 0.0, x0, t0, model.horizon)
    return d_xi, d_ti


def hjb_residual(model: DerivedModel, x0: float, t0: float) -> float:
    """Pointwise residual of the Hamilton-Jacobi-Bellman equation.

    dW/dt0 + x0 + (mu_I + f(x0)) dW/dx0 + min(0, (C - dW/dx0) mu_I),
    evaluated with the closed-form gradient.  Raises on the manifolds
    where W is not differentiable (the three curves and the
    full-screening equilibrium line inside the switch region).
    """
    label = classify_point(model, x0, t0)
    if label in _CURVE_LABELS:
        raise OnExcludedManifold(f"({x0}, {t0}) lies on a switching curve ({label})")
    if label in (RegionLabel.THETA, RegionLabel.SSET) and abs(model.f(x0)) < 1e-9:
        raise OnExcludedManifold(
            f"({x0}, {t0}) lies on the full-screening equilibrium line x={model.rmu_plus}"
        )
    d_x0, d_t0 = W_gradient(model, x0, t0)
    return d_t0 + x0 + (model.mu_I + model.f(x0)) * d_x0 + min(
        0.0, (model.C - d_x0) * model.mu_I
    )


def value_report(model: DerivedModel, x0: float, t0: float) -> ValueReport:
    """Value, per-segment cost breakdown, gradient and residual at a point."""
    p = plan(model, x0, t0, with_trajectory=False)
    from .flow import flow_const

    segments = []
    x = x0
    bp, lv = p.schedule.breakpoints, p.schedule.levels
    for k in range(len(lv)):
        seg = J_w(model, lv[k], x, bp[k], bp[k + 1])
        segments.append((lv[k], bp[k], bp[k + 1], seg))
        x = flow_const(model, lv[k], x, bp[k], bp[k + 1])

    try:
        residual = hjb_residual(model, x0, t0)
    except OnExcludedManifold:
        residual = None
    try:
        gradient = W_gradient(model, x0, t0)
    except StateOutOfRange:
        gradient = None
    return ValueReport((x0, t0), p.total_cost, segments, residual, gradient)
