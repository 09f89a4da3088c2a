"""Independent ground-truth oracles for the analytic synthesis.

Two deliberately simple verifiers: an exhaustive grid search over every
admissible schedule with at most two switches (screening off, on, off),
costed with exact closed-form segment integrals so discretization of the
switch times is the only error source; and a backward-induction dynamic
program on a state-time lattice with explicit Euler steps and linear
interpolation.  Neither touches the switching-curve machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import GridTooCoarse, InvalidParameter
from .flow import ControlSchedule
from .model import DerivedModel, equilibria


@dataclass
class OracleReport:
    point: tuple
    best_schedule: ControlSchedule
    best_cost: float
    analytic_cost: float
    gap: float
    grid_spec: dict


@dataclass
class DPTable:
    x_nodes: np.ndarray
    t_nodes: np.ndarray
    values: np.ndarray          # shape (len(x_nodes), len(t_nodes))


def _flow_vec(model: DerivedModel, rm, rp, x0, tau):
    """Closed-form constant-control flow, broadcast over arrays."""
    E = np.exp(-model.A * (rp - rm) * tau)
    num = rp * (x0 - rm) - E * rm * (x0 - rp)
    den = (x0 - rm) - E * (x0 - rp)
    return num / den


def _J_vec(model: DerivedModel, rm, rp, Cw, x0, tau):
    """Closed-form segment cost, broadcast over arrays."""
    E = np.exp(-model.A * (rp - rm) * tau)
    D = (x0 - rm) - (x0 - rp) * E
    cost = (rp + Cw) * tau + np.log(D / (rp - rm)) / model.A
    # empty segments cost exactly zero (the log is pure roundoff there)
    return np.where(np.asarray(tau) == 0.0, 0.0, cost)


@njit(cache=True)
def _family3_scan(tg, E_tail, first, x1m, rm0, rp0, rm1, rp1, A, CmuI, T,
                  log_norm):
    """Best (t1, t2) pair of the off/on/off family for a batch of starts.

    The cost of a (0, mu_I, 0) schedule is affine in two logarithms whose
    arguments multiply into a single expression affine in the state x1 at
    the first switch: if den is the flow denominator of the screening arc
    and den_t the one of the tail arc, then den * den_t = x1 * U + V with
    U, V depending only on (t1, t2).  The pair sweep therefore shares all
    exponentials across starts, and candidates are screened against the
    running best in the exponential domain (one multiply and a compare),
    taking the logarithm only when a candidate actually improves; a
    marginally better candidate lost to the rounding of that screen can
    only raise the reported minimum by an ulp-level amount.
    """
    n = tg.shape[0]
    m = x1m.shape[0]
    best = np.full(m, np.inf)
    bi = np.full(m, -1, np.int64)
    bj = np.full(m, -1, np.int64)
    thr = np.full(m, np.inf)                # exp(A * best)
    k1 = A * (rp1 - rm1)
    inv_A = 1.0 / A
    fexp = np.exp(-A * first)               # exp(-A * cost of the leading free arc)
    for i in range(n):
        ti = tg[i]
        for j in range(i, n):
            tau12 = tg[j] - ti
            E12 = np.exp(-k1 * tau12)
            P = rp1 - rm1 * E12
            Q = rm1 * rp1 * (E12 - 1.0)
            R = 1.0 - E12
            S = rp1 * E12 - rm1
            a = 1.0 - E_tail[j]
            b = rp0 * E_tail[j] - rm0
            U = a * P + b * R
            V = a * Q + b * S
            G = (rp1 + CmuI) * tau12 + rp0 * (T - tg[j]) - log_norm
            eG = np.exp(-A * G)
            for s in range(m):
                arg = x1m[s, i] * U + V
                if 0.0 < arg < thr[s] * fexp[s, i] * eG:
                    c = first[s, i] + G + np.log(arg) * inv_A
                    if c < best[s]:
                        best[s] = c
                        bi[s] = i
                        bj[s] = j
                        thr[s] = np.exp(A * c)
    return best, bi, bj


def _brute_force_batch(model: DerivedModel, x0s, t0: float,
                       n_grid: int) -> list[OracleReport]:
    """Grid search over all at-most-two-switch schedules, batched over x0.

    Families searched: screening never on; on from the start until t1;
    and off / on over (t1, t2) / off again, for all grid pairs t1 <= t2.
    Every candidate cost is an exact sum of closed-form segment
    integrals.
    """
    T = model.horizon
    tg = np.linspace(t0, T, n_grid)
    tail = T - tg
    rm1, rp1 = equilibria(model, model.mu_I)
    rm0, rp0 = equilibria(model, 0.0)
    CmuI = model.C * model.mu_I
    x0a = np.asarray(x0s, dtype=float)[:, None]

    # family 1: never screen
    cost0 = np.asarray(_J_vec(model, rm0, rp0, 0.0, x0a[:, 0], T - t0))

    # family 2: screen from t0 until t1, then free
    x_at_t1 = _flow_vec(model, rm1, rp1, x0a, (tg - t0)[None, :])
    c2 = _J_vec(model, rm1, rp1, CmuI, x0a, (tg - t0)[None, :]) \
        + _J_vec(model, rm0, rp0, 0.0, x_at_t1, tail[None, :])
    i2 = np.argmin(c2, axis=1)

    # family 3: free until t1, screen on (t1, t2), free after t2
    first = np.asarray(_J_vec(model, rm0, rp0, 0.0, x0a, (tg - t0)[None, :]))
    x1m = np.ascontiguousarray(_flow_vec(model, rm0, rp0, x0a, (tg - t0)[None, :]))
    E_tail = np.exp(-model.A * (rp0 - rm0) * tail)
    log_norm = (math.log(rp1 - rm1) + math.log(rp0 - rm0)) / model.A
    c3, i3, j3 = _family3_scan(tg, E_tail, np.ascontiguousarray(first), x1m,
                               rm0, rp0, rm1, rp1, model.A, CmuI, T, log_norm)

    reports = []
    for s in range(len(x0a)):
        k2 = int(i2[s])
        candidates = [
            (float(cost0[s]), ControlSchedule((t0, T), (0.0,))),
            (float(c2[s, k2]),
             ControlSchedule((t0, T), (0.0,)) if tg[k2] <= t0
             else (ControlSchedule((t0, T), (model.mu_I,)) if tg[k2] >= T
                   else ControlSchedule((t0, float(tg[k2]), T), (model.mu_I, 0.0)))),
            (float(c3[s]),
             _family3_schedule(model, t0, T, float(tg[i3[s]]), float(tg[j3[s]]))),
        ]
        best_cost, best_sched = min(candidates, key=lambda c: c[0])
        reports.append(OracleReport(
            point=(float(x0a[s, 0]), t0),
            best_schedule=best_sched,
            best_cost=best_cost,
            analytic_cost=math.nan,
            gap=math.nan,
            grid_spec={"n_grid": n_grid},
        ))
    return reports


def brute_force(model: DerivedModel, x0: float, t0: float,
                n_grid: int) -> OracleReport:
    """Best schedule among all candidates with at most two switch times.

    The report's analytic_cost is filled by compare(); standalone calls
    leave it NaN.
    """
    if n_grid < 2:
        raise InvalidParameter("n_grid must be at least 2")
    T = model.horizon
    if t0 >= T:
        return OracleReport(point=(x0, t0),
                            best_schedule=ControlSchedule((T,), ()),
                            best_cost=0.0, analytic_cost=math.nan,
                            gap=math.nan, grid_spec={"n_grid": n_grid})
    return _brute_force_batch(model, [x0], t0, n_grid)[0]


def _family3_schedule(model, t0, T, t1, t2):
    if t1 >= T:
        return ControlSchedule((t0, T), (0.0,))
    bps = [t0]
    lvs = []
    if t1 > t0:
        bps.append(t1)
        lvs.append(0.0)
    if t2 > bps[-1] and t2 < T:
        bps.append(t2)
        lvs.append(model.mu_I)
    elif t2 >= T:
        lvs.append(model.mu_I)
        bps.append(T)
        return ControlSchedule(tuple(bps), tuple(lvs))
    lvs.append(0.0)
    bps.append(T)
    return ControlSchedule(tuple(bps), tuple(lvs))


def compare(model: DerivedModel, points, n_grid: int) -> tuple[list[OracleReport], dict]:
    """Brute-force vs analytic value over a batch of points.

    Groups the points by t0 so the expensive exponential tables of the
    two-switch family are built once per distinct start time.  Returns
    the per-point reports plus aggregate gap statistics.
    """
    from .value import W

    by_t0: dict[float, list[float]] = {}
    for x0, t0 in points:
        by_t0.setdefault(float(t0), []).append(float(x0))

    reports = []
    for t0, x0s in by_t0.items():
        if t0 >= model.horizon:
            batch = [brute_force(model, x0, t0, n_grid) for x0 in x0s]
        else:
            batch = _brute_force_batch(model, x0s, t0, n_grid)
        for rep in batch:
            rep.analytic_cost = W(model, rep.point[0], t0)
            rep.gap = rep.best_cost - rep.analytic_cost
            reports.append(rep)

    gaps = np.array([r.gap for r in reports])
    worst = reports[int(np.argmax(gaps))] if reports else None
    summary = {
        "max_gap": float(gaps.max()) if reports else 0.0,
        "min_gap": float(gaps.min()) if reports else 0.0,
        "mean_gap": float(gaps.mean()) if reports else 0.0,
        "worst_point": worst.point if worst else None,
        "n_points": len(reports),
    }
    return reports, summary


def dp_grid(model: DerivedModel, nx: int, nt: int) -> DPTable:
    """Backward-induction value table on a uniform state-time lattice.

    Explicit Euler step in the state, linear interpolation back onto the
    lattice, min over the two bang controls.  Intentionally the simplest
    possible scheme: its role is independence from the analytic path,
    not speed.
    """
    if nx < 16 or nt < 16:
        raise InvalidParameter("nx and nt must be at least 16")
    T = model.horizon
    h = T / nt
    max_fp = max(abs(model.B), abs(model.B - 2.0 * model.A))
    if h * max_fp >= 1.0:
        raise GridTooCoarse(
            f"time step {h} violates the stability bound 1/max|f'| = {1.0 / max_fp}"
        )
    xg = np.linspace(0.0, 1.0, nx + 1)
    tg = np.linspace(0.0, T, nt + 1)
    V = np.zeros((nx + 1, nt + 1))

    f = model.B * xg - model.A * xg * xg
    x_next0 = np.clip(xg + h * (model.mu_I + f), 0.0, 1.0)
    x_next1 = np.clip(xg + h * f, 0.0, 1.0)
    run0 = xg * h
    run1 = (model.C * model.mu_I + xg) * h
    for j in range(nt - 1, -1, -1):
        nxt = V[:, j + 1]
        V[:, j] = np.minimum(
            run0 + np.interp(x_next0, xg, nxt),
            run1 + np.interp(x_next1, xg, nxt),
        )
    return DPTable(x_nodes=xg, t_nodes=tg, values=V)
