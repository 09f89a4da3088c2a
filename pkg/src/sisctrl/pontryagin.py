"""Pontryagin machinery: Hamiltonian, feasible curves, backward extremals.

The Hamiltonian is affine in the control, so the minimizer is bang-bang
with switching function C - lambda.  A field of extremals is generated
by integrating the state-adjoint pair backward from the transversality
condition lambda(T) = 0, refining every crossing of lambda = C by
bisection inside the step so the control kink is not smeared.  The
extremals independently reproduce the switching curves of the synthesis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import PoleAtRoot, StepInvalid
from .model import DerivedModel


@dataclass
class Extremal:
    final_state: float
    times: np.ndarray           # ascending
    states: np.ndarray
    adjoints: np.ndarray
    controls: np.ndarray
    switch_times: np.ndarray    # ascending, forward-time order
    switch_states: np.ndarray
    hamiltonian_drift: float    # max |H - x_T| over all samples


def hamiltonian(model: DerivedModel, x: float, lam: float, w: float) -> float:
    """(C - lambda) w + x + lambda (mu_I + f(x)), the normal-multiplier Hamiltonian."""
    return (model.C - lam) * w + x + lam * (model.mu_I + model.f(x))


def minimizing_control(model: DerivedModel, x: float, lam: float) -> float:
    """Pointwise Hamiltonian minimizer; ties at lambda = C resolve to 0."""
    return model.mu_I if lam > model.C else 0.0


def lambda_inf(model: DerivedModel, x: float, x_T: float) -> float:
    """Lower feasible curve (x_T - x) / (mu_I + f(x)); poles at r0_minus and r0_plus."""
    den = model.mu_I + model.f(x)
    if abs(den) < 1e-14:
        raise PoleAtRoot(f"x={x} is a root of mu_I + f, the lower feasible curve has a pole")
    return (x_T - x) / den


def lambda_sup(model: DerivedModel, x: float, x_ref: float) -> float:
    """Upper feasible curve through the switch point (x_ref, C); poles at roots of f."""
    den = model.f(x)
    if abs(den) < 1e-14:
        raise PoleAtRoot(f"x={x} is a root of f, the upper feasible curve has a pole")
    return (x_ref - x + model.C * model.f(x_ref)) / den


def lambda_ncl(model: DerivedModel, x: float) -> float:
    """Adjoint nullcline -1/f'(x)."""
    den = model.f_prime(x)
    if abs(den) < 1e-14:
        raise PoleAtRoot(f"f'({x}) = 0, the adjoint nullcline has a pole")
    return -1.0 / den


@njit(cache=True)
def _pair_step(A, B, mu_I, x, lam, dt, w):
    """One RK4 step of the state-adjoint pair (dt may be negative)."""
    k1x = mu_I - w + B * x - A * x * x
    k1l = -1.0 - lam * (B - 2.0 * A * x)
    x2 = x + 0.5 * dt * k1x
    l2 = lam + 0.5 * dt * k1l
    k2x = mu_I - w + B * x2 - A * x2 * x2
    k2l = -1.0 - l2 * (B - 2.0 * A * x2)
    x3 = x + 0.5 * dt * k2x
    l3 = lam + 0.5 * dt * k2l
    k3x = mu_I - w + B * x3 - A * x3 * x3
    k3l = -1.0 - l3 * (B - 2.0 * A * x3)
    x4 = x + dt * k3x
    l4 = lam + dt * k3l
    k4x = mu_I - w + B * x4 - A * x4 * x4
    k4l = -1.0 - l4 * (B - 2.0 * A * x4)
    xn = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    ln = lam + (dt / 6.0) * (k1l + 2.0 * k2l + 2.0 * k3l + k4l)
    return xn, ln


@njit(cache=True)
def _backward_kernel(A, B, mu_I, C, x_T, T, h):
    cap = int(T / h) + 64
    ts = np.empty(cap)
    xs = np.empty(cap)
    ls = np.empty(cap)
    ws = np.empty(cap)
    sw_t = np.empty(8)
    sw_x = np.empty(8)
    n_sw = 0

    t = T
    x = x_T
    lam = 0.0
    w = 0.0
    idx = 0
    ts[idx] = t
    xs[idx] = x
    ls[idx] = lam
    ws[idx] = w

    while t > 0.0 and -0.1 <= x <= 1.1 and idx < cap - 1:
        step = min(h, t)
        xn, ln = _pair_step(A, B, mu_I, x, lam, -step, w)
        if (ln - C) * (lam - C) < 0.0:
            # the switching function changes sign inside this step:
            # bisect the sub-step length, restart from the refined kink
            a = 0.0
            b = step
            for _ in range(60):
                m = 0.5 * (a + b)
                _, lm = _pair_step(A, B, mu_I, x, lam, -m, w)
                if (lm - C) * (lam - C) > 0.0:
                    a = m
                else:
                    b = m
            tau = 0.5 * (a + b)
            xm, _ = _pair_step(A, B, mu_I, x, lam, -tau, w)
            t -= tau
            x = xm
            lam = C
            if n_sw < 8:
                sw_t[n_sw] = t
                sw_x[n_sw] = x
                n_sw += 1
            w = mu_I if w == 0.0 else 0.0
        else:
            t -= step
            x = xn
            lam = ln
        idx += 1
        ts[idx] = t
        xs[idx] = x
        ls[idx] = lam
        ws[idx] = w

    return ts[: idx + 1], xs[: idx + 1], ls[: idx + 1], ws[: idx + 1], sw_t[:n_sw], sw_x[:n_sw]


def backward_extremal(model: DerivedModel, x_T: float, step: float) -> Extremal:
    """Backward extremal through the transversality point (x_T, lambda=0) at T.

    Integration stops at t = 0 or when the state leaves [-0.1, 1.1]
    (extremals may exit the physical box backward in time; they still
    trace the feasible-curve field).
    """
    if step <= 0:
        raise StepInvalid("step must be positive")
    if not (0.0 <= x_T <= 1.0):
        raise StepInvalid(f"final state must lie in [0, 1], got {x_T}")
    ts, xs, ls, ws, sw_t, sw_x = _backward_kernel(
        model.A, model.B, model.mu_I, model.C, x_T, model.horizon, step
    )
    # reverse into forward-time order
    ts, xs, ls, ws = ts[::-1].copy(), xs[::-1].copy(), ls[::-1].copy(), ws[::-1].copy()
    H = (model.C - ls) * ws + xs + ls * (model.mu_I + model.f(xs))
    drift = float(np.max(np.abs(H - x_T))) if H.size else 0.0
    order = np.argsort(sw_t)
    return Extremal(
        final_state=x_T,
        times=ts,
        states=xs,
        adjoints=ls,
        controls=ws,
        switch_times=sw_t[order],
        switch_states=sw_x[order],
        hamiltonian_drift=drift,
    )


def extremal_field(model: DerivedModel, final_states, step: float) -> list[Extremal]:
    """Backward extremals for a mesh of final states."""
    return [backward_extremal(model, float(xt), step) for xt in final_states]
