"""Optimal feedback law, curve hitting times, and full optimal plans.

The feedback is bang-bang: screen at the maximal rate mu_I inside the
switch region (Theta in the one-switch regime, the set S in the
two-switch regime) and not at all elsewhere.  Hitting times onto the
switching curves are found by marching the closed-form arc against the
closed-form curve and refining the sign change by bisection; no ODE
event detection is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import (
    RegionLabel,
    _sigma_domain,
    _t_S_raw,
    _t_sigma_raw,
    classify_point,
    t_S,
)
from .errors import InternalConsistencyError, NotInSwitchRegion, RegimeMismatch
from .flow import ControlSchedule, Trajectory, flow_const, simulate
from .model import Branch, DerivedModel, equilibria

_MARCH_NODES = 512


def _flow_scalar(model: DerivedModel, rm: float, rp: float, x0: float,
                 tau: float) -> float:
    """Scalar constant-control flow for the tight bisection loops."""
    E = math.exp(-model.A * (rp - rm) * tau)
    return (rp * (x0 - rm) - E * rm * (x0 - rp)) / ((x0 - rm) - E * (x0 - rp))


def _t_S_scalar(model: DerivedModel, x_s: float) -> float:
    ac = model.A * model.C
    num = 1.0 - ac * (x_s - model.r0_plus)
    den = 1.0 - ac * (x_s - model.r0_minus)
    if num <= 0.0 or den <= 0.0:
        return -math.inf
    return model.horizon - math.log(num / den) / model.sqrt_Delta


def _bisect_time(g, a: float, b: float) -> float:
    """Refine a sign change of g on [a, b] down to floating-point resolution."""
    ga = g(a)
    for _ in range(90):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if g(m) * ga > 0.0:
            a = m
        else:
            b = m
    return b

_SCREEN_LABELS = (RegionLabel.THETA, RegionLabel.SSET, RegionLabel.SIGMA_CURVE)


@dataclass
class OptimalPlan:
    initial: tuple
    switches: list              # (time, state, new_level)
    schedule: ControlSchedule
    trajectory: Trajectory | None
    total_cost: float
    region: RegionLabel


def feedback(model: DerivedModel, x: float, t: float) -> float:
    """Optimal control level at a point of the strip.

    On-curve points take the control of the region being entered: 0 on
    the last-switch and Gamma curves, mu_I on the first-switch curve.
    """
    if classify_point(model, x, t) in _SCREEN_LABELS:
        return model.mu_I
    return 0.0


def _g_last_switch(model: DerivedModel, x, t):
    """Signed crossing function for the last-switch search (array friendly).

    Negative before the mu_I arc meets the curve S, positive after.
    States past the one-switch asymptote count as crossed; states still
    above x_bar_C in the two-switch regime count as not crossed.
    """
    xa = np.asarray(x, dtype=float)
    ta = np.asarray(t, dtype=float)
    g = ta - np.asarray(_t_S_raw(model, xa), dtype=float)
    if model.regime.branch is Branch.ONE_SWITCH:
        g = np.where(xa >= model.xS_sup, np.inf, g)
    else:
        g = np.where(xa > model.x_bar_C, -np.inf, g)
    return g


def hit_last_switch(model: DerivedModel, x0: float, t0: float):
    """First meeting of the mu_I-controlled arc from (x0, t0) with curve S.

    Returns (state, time); a start already on S returns itself.  The
    geometry guarantees a crossing from inside the switch region, so a
    missing crossing is reported as an internal inconsistency by plan().
    """
    label = classify_point(model, x0, t0)
    if label is RegionLabel.S_CURVE:
        return x0, t0
    if label not in _SCREEN_LABELS:
        raise NotInSwitchRegion(f"({x0}, {t0}) is not in the screening region (label {label})")

    w = model.mu_I
    ts = np.linspace(t0, model.horizon, _MARCH_NODES + 1)
    xs = flow_const(model, w, x0, t0, ts)
    g = _g_last_switch(model, xs, ts)
    crossed = np.nonzero(g >= 0.0)[0]
    if crossed.size == 0:
        return None
    i = int(crossed[0])
    if i == 0:
        return x0, t0

    rm, rp = equilibria(model, w)
    one_switch = model.regime.branch is Branch.ONE_SWITCH

    def g_scalar(t):
        x = _flow_scalar(model, rm, rp, x0, t - t0)
        if one_switch:
            if x >= model.xS_sup:
                return math.inf
        elif x > model.x_bar_C:
            return -math.inf
        return t - _t_S_scalar(model, x)

    t_hat = _bisect_time(g_scalar, float(ts[i - 1]), float(ts[i]))
    return _flow_scalar(model, rm, rp, x0, t_hat - t0), t_hat


def _g_first_switch(model: DerivedModel, x, t):
    """Signed crossing function for the first-switch search.

    Positive while the w=0 arc is still above the curve sigma, negative
    once it has passed below; +inf to the right of sigma's asymptote
    (nothing to cross yet), and past x_bar_C the sign is taken against
    the tangency time.
    """
    xa = np.asarray(x, dtype=float)
    ta = np.asarray(t, dtype=float)
    lo, hi = _sigma_domain(model)
    tS_xbc = float(_t_S_raw(model, model.x_bar_C))
    inner = np.clip(xa, lo * (1 + 1e-15), hi * (1 - 1e-15))
    g = ta - np.asarray(_t_sigma_raw(model, inner), dtype=float)
    g = np.where(xa >= hi, np.inf, g)
    g = np.where(xa <= lo, ta - tS_xbc, g)
    return g


def hit_first_switch(model: DerivedModel, x0: float, t0: float):
    """First meeting of the w=0 arc from (x0, t0) with the curve sigma.

    Returns (state, time), the point itself for a start on sigma, or
    None when the arc reaches the horizon (or slides under the tangency
    point) without meeting the curve; the caller then never screens.
    """
    if model.regime.branch is not Branch.TWO_SWITCH:
        raise RegimeMismatch("the one-switch synthesis has no first-switch curve")
    label = classify_point(model, x0, t0)
    if label is RegionLabel.SIGMA_CURVE:
        return x0, t0
    if label is not RegionLabel.TSET:
        raise NotInSwitchRegion(f"({x0}, {t0}) is not in the pre-switch region (label {label})")

    ts = np.linspace(t0, model.horizon, _MARCH_NODES + 1)
    xs = flow_const(model, 0.0, x0, t0, ts)
    g = _g_first_switch(model, xs, ts)
    crossed = np.nonzero(g <= 0.0)[0]
    if crossed.size == 0:
        return None
    i = int(crossed[0])
    if i == 0:
        return x0, t0

    rm, rp = equilibria(model, 0.0)
    lo, hi = _sigma_domain(model)
    tS_xbc = _t_S_scalar(model, model.x_bar_C)

    def g_scalar(t):
        x = _flow_scalar(model, rm, rp, x0, t - t0)
        if x >= hi:
            return math.inf
        if x <= lo:
            return t - tS_xbc
        refl = 2.0 * model.x_bar_C - x
        arg = (refl * (x - model.rmu_plus)) / ((refl - model.rmu_plus) * x)
        return t - (_t_S_scalar(model, refl) - math.log(abs(arg)) / model.B)

    t_hat = _bisect_time(g_scalar, float(ts[i - 1]), float(ts[i]))
    x_hat = _flow_scalar(model, rm, rp, x0, t_hat - t0)
    if x_hat <= model.x_bar_C and t_hat >= tS_xbc:
        return None
    return x_hat, t_hat


def _schedule_cost(model: DerivedModel, schedule: ControlSchedule, x0: float) -> float:
    from .value import J_w

    bp, lv = schedule.breakpoints, schedule.levels
    total = 0.0
    x = x0
    for k in range(len(lv)):
        total += J_w(model, lv[k], x, bp[k], bp[k + 1])
        x = flow_const(model, lv[k], x, bp[k], bp[k + 1])
    return total


def plan(model: DerivedModel, x0: float, t0: float, step: float | None = None,
         with_trajectory: bool = True) -> OptimalPlan:
    """Drive the process optimally from (x0, t0): the full closed-loop plan.

    Classifies the point, chains the hitting-time searches, and
    assembles the piecewise-constant schedule with its (at most two)
    switches.  With with_trajectory=True the schedule is also integrated
    numerically and total_cost comes from that quadrature; otherwise the
    cost is the exact sum of closed-form segment costs.
    """
    T = model.horizon
    label = classify_point(model, x0, t0)
    if t0 >= T:
        sched = ControlSchedule(breakpoints=(T,), levels=())
        traj = simulate(model, sched, x0, step) if with_trajectory else None
        return OptimalPlan((x0, t0), [], sched, traj, 0.0, label)

    switches: list[tuple] = []
    if label in _SCREEN_LABELS:
        hit = hit_last_switch(model, x0, t0)
        if hit is None:
            raise InternalConsistencyError(
                f"mu_I arc from ({x0}, {t0}) inside the switch region never met curve S"
            )
        x_s, t_s_hat = hit
        if t_s_hat <= t0:
            sched = ControlSchedule((t0, T), (0.0,))
        else:
            sched = ControlSchedule((t0, t_s_hat, T), (model.mu_I, 0.0))
            switches.append((t_s_hat, x_s, 0.0))
    elif label is RegionLabel.TSET:
        hit = hit_first_switch(model, x0, t0)
        if hit is None:
            sched = ControlSchedule((t0, T), (0.0,))
        else:
            x_sig, t_sig_hat = hit
            hit2 = hit_last_switch(model, x_sig, t_sig_hat)
            if hit2 is None:
                raise InternalConsistencyError(
                    f"mu_I arc from the first switch ({x_sig}, {t_sig_hat}) never met curve S"
                )
            x_s, t_s_hat = hit2
            if t_sig_hat <= t0:
                sched = ControlSchedule((t0, t_s_hat, T), (model.mu_I, 0.0))
                switches.append((t_s_hat, x_s, 0.0))
            else:
                sched = ControlSchedule((t0, t_sig_hat, t_s_hat, T), (0.0, model.mu_I, 0.0))
                switches.append((t_sig_hat, x_sig, model.mu_I))
                switches.append((t_s_hat, x_s, 0.0))
    else:
        sched = ControlSchedule((t0, T), (0.0,))

    if with_trajectory:
        traj = simulate(model, sched, x0, step)
        cost = traj.cost
    else:
        traj = None
        cost = _schedule_cost(model, sched, x0)
    return OptimalPlan((x0, t0), switches, sched, traj, cost, label)
