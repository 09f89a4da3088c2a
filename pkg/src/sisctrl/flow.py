"""Closed-form flow of the controlled logistic ODE and a numeric oracle.

For a constant control level w the dynamics dx/dt = mu_I - w + f(x)
factors as -A (x - r_minus)(x - r_plus) and integrates in closed form by
partial fractions.  `flow_const` and `time_to_reach` implement that
solution and its inverse.  `simulate` is a deliberately independent
fixed-step fourth-order integrator for arbitrary piecewise-constant
schedules; it never calls the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import (
    ControlOutOfRange,
    ScheduleInvalid,
    StateOutOfRange,
    StepInvalid,
    Unreachable,
)
from .model import DerivedModel, equilibria


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise-constant control: levels[i] applies on [breakpoints[i], breakpoints[i+1])."""

    breakpoints: tuple
    levels: tuple

    def validate(self, model: DerivedModel) -> None:
        bp = np.asarray(self.breakpoints, dtype=float)
        lv = np.asarray(self.levels, dtype=float)
        if bp.ndim != 1 or bp.size < 1:
            raise ScheduleInvalid("breakpoints must be a non-empty 1-d sequence")
        if lv.size != bp.size - 1:
            raise ScheduleInvalid(
                f"need exactly one level per interval: {bp.size} breakpoints, {lv.size} levels"
            )
        if bp.size > 1 and not np.all(np.diff(bp) > 0):
            raise ScheduleInvalid("breakpoints must be strictly increasing")
        if not math.isclose(bp[-1], model.horizon, rel_tol=0.0, abs_tol=1e-9):
            raise ScheduleInvalid(f"schedule must end at the horizon T={model.horizon}")
        if lv.size and (lv.min() < -1e-15 or lv.max() > model.mu_I + 1e-15):
            raise ScheduleInvalid(f"all levels must lie in [0, {model.mu_I}]")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    switch_events: list = field(default_factory=list)
    cost: float = 0.0


def _roots(model: DerivedModel, w: float) -> tuple[float, float]:
    return equilibria(model, w)


def flow_const(model: DerivedModel, w: float, x0, t0: float, t):
    """State at time(s) t of the constant-control flow started at (x0, t0).

    Accepts scalar or array x0 / t (broadcast together).  Uses the
    rational closed form in (r_minus, r_plus, exp(-A (r_plus - r_minus) tau));
    the exponential always carries a non-positive exponent so large
    horizons underflow cleanly to the equilibrium r_plus.
    """
    model.check_control(w)
    x0a = np.asarray(x0, dtype=float)
    ta = np.asarray(t, dtype=float)
    if np.any(x0a < -1e-12) or np.any(x0a > 1.0 + 1e-12):
        raise StateOutOfRange(f"initial state must lie in [0, 1], got {x0}")
    if np.any(ta < t0 - 1e-12):
        raise Unreachable("flow is only evaluated forward in time (t >= t0)")

    rm, rp = _roots(model, w)
    gap = rp - rm
    E = np.exp(-model.A * gap * np.maximum(ta - t0, 0.0))
    num = rp * (x0a - rm) - E * rm * (x0a - rp)
    den = (x0a - rm) - E * (x0a - rp)
    out = num / den
    # the rational form is 0/0-adjacent exactly at the equilibrium
    out = np.where(np.abs(x0a - rp) < 1e-13, rp, out)
    out = np.clip(out, 0.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def time_to_reach(model: DerivedModel, w: float, x0: float, t0: float, x_target: float) -> float:
    """Time at which the constant-control flow from (x0, t0) reaches x_target.

    The flow is monotone toward the attracting equilibrium r_plus, so a
    target is reachable only if it lies strictly between x0 and r_plus
    (or equals x0).  That sign configuration is validated up front, which
    keeps the logarithm argument positive; there is no silent
    wrong-branch answer.
    """
    model.check_control(w)
    if not (-1e-12 <= x0 <= 1.0 + 1e-12):
        raise StateOutOfRange(f"initial state must lie in [0, 1], got {x0}")
    rm, rp = _roots(model, w)
    if x_target == x0:
        return t0
    toward_rp = (x_target - x0) * (rp - x0)
    past_rp = (x_target - rp) * (x0 - rp)
    if toward_rp <= 0.0 or past_rp <= 0.0 or x_target == rp:
        raise Unreachable(
            f"x_target={x_target} is not on the forward orbit from x0={x0} "
            f"(monotone flow toward r_plus={rp})"
        )
    arg = ((x_target - rm) * (x0 - rp)) / ((x_target - rp) * (x0 - rm))
    tau = math.log(arg) / (model.A * (rp - rm))
    return t0 + tau


@njit(cache=True)
def _rk4_segment(A, B, mu_I, Ccost, w, x0, t0, t1, n_steps):
    """Fixed-step RK4 on one constant-control interval, cost carried along.

    Returns the sample arrays (including both endpoints) and the
    accumulated cost over the segment.  The running cost integrand
    Ccost*w + x is integrated with the same RK4 stages as the state, so
    quadrature and dynamics share order and nodes.
    """
    h = (t1 - t0) / n_steps
    xs = np.empty(n_steps + 1)
    cs = np.empty(n_steps + 1)
    xs[0] = x0
    cs[0] = 0.0
    x = x0
    c = 0.0
    for i in range(n_steps):
        k1x = mu_I - w + B * x - A * x * x
        k1c = Ccost * w + x
        x2 = x + 0.5 * h * k1x
        k2x = mu_I - w + B * x2 - A * x2 * x2
        k2c = Ccost * w + x2
        x3 = x + 0.5 * h * k2x
        k3x = mu_I - w + B * x3 - A * x3 * x3
        k3c = Ccost * w + x3
        x4 = x + h * k3x
        k4x = mu_I - w + B * x4 - A * x4 * x4
        k4c = Ccost * w + x4
        x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        c = c + (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        xs[i + 1] = x
        cs[i + 1] = c
    return xs, cs


def rk4_final_states(model: DerivedModel, w, x0, tau, step: float):
    """Vectorized fixed-step RK4 endpoint for a batch of constant-control arcs.

    w, x0, tau are same-length arrays; each arc i is integrated over
    elapsed time tau[i] with a per-arc step tau[i]/ceil(tau[i]/step) so
    no arc exceeds the requested step.  Used as a fast independent check
    of flow_const over large random batches.
    """
    if step <= 0:
        raise StepInvalid("step must be positive")
    w = np.asarray(w, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    tau = np.asarray(tau, dtype=float)
    n = np.maximum(np.ceil(tau / step).astype(np.int64), 1)
    h = tau / n
    n_max = int(n.max())
    x = x0.copy()
    A, B, mu_I = model.A, model.B, model.mu_I
    for i in range(n_max):
        active = i < n
        ha = np.where(active, h, 0.0)
        k1 = mu_I - w + B * x - A * x * x
        x2 = x + 0.5 * ha * k1
        k2 = mu_I - w + B * x2 - A * x2 * x2
        x3 = x + 0.5 * ha * k2
        k3 = mu_I - w + B * x3 - A * x3 * x3
        x4 = x + ha * k3
        k4 = mu_I - w + B * x4 - A * x4 * x4
        x = x + (ha / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def simulate(model: DerivedModel, schedule: ControlSchedule, x0: float,
             step: float | None = None) -> Trajectory:
    """Numeric integration of a piecewise-constant schedule from x0.

    Fourth-order fixed-step integration, split exactly at the schedule
    breakpoints; running cost integral of C*w + x accumulated with the
    same stages.  Default step is horizon/1e5.
    """
    schedule.validate(model)
    if not (-1e-12 <= x0 <= 1.0 + 1e-12):
        raise StateOutOfRange(f"initial state must lie in [0, 1], got {x0}")
    if step is None:
        step = model.horizon / 1e5
    if step <= 0:
        raise StepInvalid("step must be positive")

    bp = [float(b) for b in schedule.breakpoints]
    lv = [float(l) for l in schedule.levels]

    if len(bp) == 1:
        t0 = bp[0]
        return Trajectory(
            times=np.array([t0]),
            states=np.array([float(np.clip(x0, 0.0, 1.0))]),
            controls=np.array([0.0]),
            switch_events=[],
            cost=0.0,
        )

    t_parts, x_parts, w_parts = [], [], []
    switch_events = []
    x = float(np.clip(x0, 0.0, 1.0))
    total = 0.0
    for k in range(len(lv)):
        t_a, t_b, w = bp[k], bp[k + 1], lv[k]
        n_steps = max(int(math.ceil((t_b - t_a) / step)), 1)
        xs, cs = _rk4_segment(model.A, model.B, model.mu_I, model.C, w, x, t_a, t_b, n_steps)
        ts = np.linspace(t_a, t_b, n_steps + 1)
        if k > 0 and lv[k] != lv[k - 1]:
            switch_events.append((t_a, x, lv[k - 1], lv[k]))
        first = 0 if k == 0 else 1
        t_parts.append(ts[first:])
        x_parts.append(xs[first:])
        w_parts.append(np.full(ts.size - first, w))
        x = float(xs[-1])
        total += float(cs[-1])

    return Trajectory(
        times=np.concatenate(t_parts),
        states=np.concatenate(x_parts),
        controls=np.concatenate(w_parts),
        switch_events=switch_events,
        cost=total,
    )
