"""Property checks shared by the CLI verify command and the test suite.

Each check returns a CheckResult; the acceptance tests run them at the
full documented sizes and tolerances, while the CLI can run them at
reduced sizes for a quick health report.  All randomness is seeded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import (
    _t_Gamma_raw,
    _t_S_raw,
    classify_point,
    curve_band,
    t_S,
    x_S_of_xT,
    x_T_of_xS,
    RegionLabel,
)
from .errors import OnExcludedManifold
from .flow import ControlSchedule, rk4_final_states, simulate
from .model import Branch, DerivedModel, SubCase
from .oracle import compare, dp_grid
from .pontryagin import backward_extremal
from .synthesis import plan
from .value import J_w, J_w_partials, W, W_gradient, hjb_residual


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rand_points(model: DerivedModel, rng, n: int, t_hi_frac: float = 1.0):
    x0 = rng.uniform(0.0, 1.0, n)
    t0 = rng.uniform(0.0, model.horizon * t_hi_frac, n)
    return x0, t0


def check_flow_agreement(models, n: int = 10000, step: float = 0.01,
                         tol: float = 1e-8, seed: int = 20240801) -> CheckResult:
    """Closed-form flow vs an independent fixed-step RK4 on random arcs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for model in models:
        w = rng.uniform(0.0, model.mu_I, n)
        x0 = rng.uniform(0.0, 1.0, n)
        t0 = rng.uniform(0.0, model.horizon, n)
        tau = rng.uniform(0.0, model.horizon - t0)
        disc = np.sqrt(model.B ** 2 + 4.0 * model.A * (model.mu_I - w))
        rm = (model.B - disc) / (2.0 * model.A)
        rp = (model.B + disc) / (2.0 * model.A)
        E = np.exp(-model.A * (rp - rm) * tau)
        exact = (rp * (x0 - rm) - E * rm * (x0 - rp)) / ((x0 - rm) - E * (x0 - rp))
        numeric = rk4_final_states(model, w, x0, tau, step)
        worst = max(worst, float(np.max(np.abs(exact - numeric))))
    return CheckResult("flow agreement", worst < tol,
                       f"max |closed form - RK4| = {worst:.3e} (tol {tol:g})")


def extremal_summaries(model: DerivedModel, n_xT: int, step: float | None = None,
                       lo: float = 0.005, hi: float = 0.995):
    """Compact per-extremal facts for the Hamiltonian and switch checks."""
    if step is None:
        step = model.horizon / 1e5
    out = []
    for x_T in np.linspace(lo, hi, n_xT):
        ext = backward_extremal(model, float(x_T), step)
        pre_T = ext.times < model.horizon
        out.append({
            "x_T": float(x_T),
            "drift": ext.hamiltonian_drift,
            "lam_T": float(ext.adjoints[-1]),
            "lam_min_pre_T": float(ext.adjoints[pre_T].min()) if pre_T.any() else math.inf,
            "n_switches": int(ext.switch_times.size),
            "switch_states": ext.switch_states.copy(),
            "final_control": float(ext.controls[-1]),
        })
    return out


def check_hamiltonian_constancy(models_summaries, tol: float = 1e-8) -> CheckResult:
    """Constancy of H along extremals, transversality, adjoint positivity."""
    worst = 0.0
    ok = True
    msgs = []
    for model, summaries in models_summaries:
        for s in summaries:
            worst = max(worst, s["drift"])
            if s["lam_T"] != 0.0:
                ok = False
                msgs.append(f"lambda(T) = {s['lam_T']} for x_T={s['x_T']}")
            if s["lam_min_pre_T"] <= 0.0:
                ok = False
                msgs.append(f"adjoint not positive before T for x_T={s['x_T']}")
    passed = ok and worst < tol
    detail = f"max |H - x_T| = {worst:.3e} (tol {tol:g})"
    if msgs:
        detail += "; " + "; ".join(msgs[:3])
    return CheckResult("Hamiltonian constancy", passed, detail)


def check_switch_structure(models_summaries, n_plans: int = 10000,
                           refl_tol: float = 1e-8, seed: int = 20240802) -> CheckResult:
    """At most two switches, terminal arc unscreened, reflected switch pairs."""
    rng = np.random.default_rng(seed)
    worst_refl = 0.0
    bad = []
    for model, summaries in models_summaries:
        for s in summaries:
            if s["n_switches"] > 2:
                bad.append(f"extremal x_T={s['x_T']} has {s['n_switches']} switches")
            if s["final_control"] != 0.0:
                bad.append(f"extremal x_T={s['x_T']} ends screening")
            if s["n_switches"] == 2:
                worst_refl = max(worst_refl, abs(
                    s["switch_states"][0] + s["switch_states"][1] - 2.0 * model.x_bar_C))
        n_here = n_plans // len(models_summaries)
        x0s, t0s = _rand_points(model, rng, n_here)
        for x0, t0 in zip(x0s, t0s):
            p = plan(model, float(x0), float(t0), with_trajectory=False)
            if len(p.switches) > 2:
                bad.append(f"plan from ({x0:.3f},{t0:.3f}) has {len(p.switches)} switches")
            lv = p.schedule.levels
            if len(lv) and lv[-1] != 0.0:
                bad.append(f"plan from ({x0:.3f},{t0:.3f}) ends screening")
            if len(p.switches) == 2:
                worst_refl = max(worst_refl, abs(
                    p.switches[0][1] + p.switches[1][1] - 2.0 * model.x_bar_C))
    passed = not bad and worst_refl < refl_tol
    detail = f"max reflection defect = {worst_refl:.3e} (tol {refl_tol:g})"
    if bad:
        detail += "; " + "; ".join(bad[:3])
    return CheckResult("switch structure", passed, detail)


def check_curve_geometry(models, n: int = 1500, second_diff_tol: float = 1e-8,
                         tangency_tol: float = 1e-6,
                         roundtrip_tol: float = 1e-10,
                         seed: int = 20240803) -> CheckResult:
    """Monotone concave last-switch curve, tangency with Gamma, inverse maps."""
    rng = np.random.default_rng(seed)
    issues = []
    worst_second = -math.inf
    worst_round = 0.0
    tangency_gap = 0.0
    for model in models:
        span = model.xS_sup - model.r0_minus
        xs = np.linspace(model.r0_minus + 1e-4 * span, model.xS_sup - 1e-4 * span, n)
        ts = np.asarray(_t_S_raw(model, xs), dtype=float)
        if not np.all(np.diff(ts) < 0.0):
            issues.append("last-switch curve not strictly decreasing")
        second = np.diff(ts, 2)
        worst_second = max(worst_second, float(second.max()))
        if model.regime.branch is Branch.TWO_SWITCH and model.x_bar_C < 1.0:
            h = 1e-5
            slope_S = float(_t_S_raw(model, model.x_bar_C + h)
                            - _t_S_raw(model, model.x_bar_C - h)) / (2 * h)
            slope_G = (_t_Gamma_raw(model, model.x_bar_C + h)
                       - _t_Gamma_raw(model, model.x_bar_C - h)) / (2 * h)
            tangency_gap = max(tangency_gap, abs(slope_S - slope_G))
        draws = rng.uniform(model.r0_minus + 1e-6, model.xS_sup - 1e-6, 1000)
        for x_s in draws:
            worst_round = max(worst_round,
                              abs(x_S_of_xT(model, x_T_of_xS(model, float(x_s))) - x_s))
    passed = (not issues and worst_second <= second_diff_tol
              and tangency_gap < tangency_tol and worst_round < roundtrip_tol)
    detail = (f"max second difference = {worst_second:.3e}, tangency gap = "
              f"{tangency_gap:.3e}, round-trip defect = {worst_round:.3e}")
    if issues:
        detail += "; " + "; ".join(issues)
    return CheckResult("curve geometry", passed, detail)


def _off_manifold_points(model: DerivedModel, rng, n: int, margin: float = 1e-3):
    """Random strip points at least `margin` from the non-smooth sets."""
    pts = []
    T = model.horizon
    while len(pts) < n:
        x = float(rng.uniform(0.01, 0.99))
        t = float(rng.uniform(margin, T - margin))
        if abs(x - model.rmu_plus) < margin:
            continue
        if model.r0_minus + margin < x < model.xS_sup - margin:
            if abs(t - float(_t_S_raw(model, x))) < margin:
                continue
        elif abs(x - model.xS_sup) < margin:
            continue
        if model.regime.branch is Branch.TWO_SWITCH:
            hi = 2.0 * model.x_bar_C - model.rmu_plus
            if model.x_bar_C < x < hi - margin:
                from .curves import _t_sigma_raw
                if abs(t - float(_t_sigma_raw(model, x))) < margin:
                    continue
            if abs(x - model.x_bar_C) < margin:
                continue
            if model.r0_plus + margin < x <= 1.0:
                if abs(t - _t_Gamma_raw(model, x)) < margin:
                    continue
                if x > model.x_bar_C:
                    from .curves import t_never_screen
                    if abs(t - t_never_screen(model, x)) < margin:
                        continue
            elif abs(x - model.r0_plus) < margin:
                continue
        pts.append((x, t))
    return pts


def check_hjb(models, n: int = 1000, n_fd: int = 100, tol: float = 1e-8,
              fd_tol: float = 1e-6, seed: int = 20240804) -> CheckResult:
    """HJB residual from closed-form gradients, cross-checked by differences."""
    rng = np.random.default_rng(seed)
    worst_res = 0.0
    worst_fd = 0.0
    skipped = 0
    for model in models:
        pts = _off_manifold_points(model, rng, n)
        for x, t in pts:
            try:
                worst_res = max(worst_res, abs(hjb_residual(model, x, t)))
            except OnExcludedManifold:
                skipped += 1
        h = 1e-5
        for x, t in pts[:n_fd]:
            gx, gt = W_gradient(model, x, t)
            fx = (W(model, x + h, t) - W(model, x - h, t)) / (2 * h)
            ft = (W(model, x, t + h) - W(model, x, t - h)) / (2 * h)
            worst_fd = max(worst_fd,
                           abs(fx - gx) / max(1.0, abs(gx)),
                           abs(ft - gt) / max(1.0, abs(gt)))
    passed = worst_res < tol and worst_fd < fd_tol
    return CheckResult(
        "HJB residual",
        passed,
        f"max |residual| = {worst_res:.3e} (tol {tol:g}), max gradient "
        f"rel. difference = {worst_fd:.3e} (tol {fd_tol:g}), skipped {skipped}",
    )


def check_brute_force(models, nx: int = 30, nt: int = 30, n_grid: int = 2000,
                      neg_tol: float = 1e-10, pos_tol: float = 5e-4) -> CheckResult:
    """Analytic value against the exhaustive two-switch schedule search."""
    worst_neg = 0.0
    worst_pos = 0.0
    for model in models:
        x0s = np.linspace(0.02, 0.98, nx)
        t0s = np.linspace(0.0, model.horizon, nt, endpoint=False)
        points = [(x, t) for x in x0s for t in t0s]
        _, summary = compare(model, points, n_grid)
        worst_neg = min(worst_neg, summary["min_gap"])
        worst_pos = max(worst_pos, summary["max_gap"])
    passed = worst_neg > -neg_tol and worst_pos < pos_tol
    return CheckResult(
        "brute-force optimality",
        passed,
        f"gap range [{worst_neg:.3e}, {worst_pos:.3e}] "
        f"(tols -{neg_tol:g} / +{pos_tol:g})",
    )


def check_dp(models, sizes=(500, 1000, 2000), tol: float = 2e-2,
             factor: float = 1.5, n_sub: int = 50,
             x_margin: float = 0.05) -> CheckResult:
    """Dynamic-programming table against W, plus self-convergence under refinement.

    Both comparisons are restricted to the interior band x in
    [x_margin, 1 - x_margin]: the value function's state derivative
    grows like 1/x toward the unstable screened equilibrium at x = 0,
    so linear interpolation cannot converge in max norm on a uniform
    grid right at that edge.
    """
    worst_err = 0.0
    worst_ratio = math.inf
    for model in models:
        tables = {s: dp_grid(model, s, s) for s in sizes}
        fine = tables[sizes[-1]]
        ii = np.unique(np.linspace(x_margin * sizes[-1],
                                   (1.0 - x_margin) * sizes[-1], n_sub).astype(int))
        jj = np.unique(np.linspace(0, 0.95 * sizes[-1], n_sub).astype(int))
        err = 0.0
        for i in ii:
            x = float(fine.x_nodes[i])
            for j in jj:
                t = float(fine.t_nodes[j])
                err = max(err, abs(fine.values[i, j] - W(model, x, t)))
        worst_err = max(worst_err, err)

        # self-convergence on the shared coarse sub-lattice, same interior band
        dists = []
        for a, b in zip(sizes[:-1], sizes[1:]):
            r = b // a
            sl = slice(int(math.ceil(x_margin * a)), int((1.0 - x_margin) * a) + 1)
            va = tables[a].values[sl]
            vb = tables[b].values[::r, ::r][sl]
            dists.append(float(np.max(np.abs(va - vb))))
        for d1, d2 in zip(dists[:-1], dists[1:]):
            worst_ratio = min(worst_ratio, d1 / d2 if d2 > 0 else math.inf)
    passed = worst_err < tol and worst_ratio >= factor
    return CheckResult(
        "dynamic programming",
        passed,
        f"max |DP - W| = {worst_err:.3e} (tol {tol:g}), refinement ratio "
        f">= {worst_ratio:.2f} (need {factor:g})",
    )


def check_degenerate(model_no_switch: DerivedModel,
                     model_outside_box: DerivedModel,
                     n: int = 20) -> CheckResult:
    """The two boundary regimes: never screen, and at most one switch."""
    from .synthesis import feedback

    issues = []
    if model_no_switch.regime.sub_case is not SubCase.NO_SWITCH_EVER:
        issues.append(f"expected NoSwitchEver, got {model_no_switch.regime.sub_case}")
    worst = 0.0
    for x in np.linspace(0.0, 1.0, n):
        for t in np.linspace(0.0, model_no_switch.horizon, n):
            if feedback(model_no_switch, float(x), float(t)) != 0.0:
                issues.append(f"screening prescribed at ({x:.2f},{t:.2f})")
            worst = max(worst, abs(
                W(model_no_switch, float(x), float(t))
                - J_w(model_no_switch, 0.0, float(x), float(t), model_no_switch.horizon)))
    if worst > 1e-12:
        issues.append(f"W deviates from the unscreened cost by {worst:.3e}")

    if model_outside_box.regime.sub_case is not SubCase.FIRST_SWITCH_OUTSIDE_UNIT_BOX:
        issues.append(f"expected FirstSwitchOutsideUnitBox, got "
                      f"{model_outside_box.regime.sub_case}")
    max_switches = 0
    for x in np.linspace(0.0, 1.0, n):
        for t in np.linspace(0.0, model_outside_box.horizon, n, endpoint=False):
            p = plan(model_outside_box, float(x), float(t), with_trajectory=False)
            max_switches = max(max_switches, len(p.switches))
    if max_switches > 1:
        issues.append(f"a plan used {max_switches} switches")
    return CheckResult(
        "degenerate regimes",
        not issues,
        "never-screen and single-switch boundary regimes behave as classified"
        if not issues else "; ".join(issues[:3]),
    )


def check_invariance(models, n: int = 10000, step_frac: float = 2000,
                     tol: float = 1e-12, seed: int = 20240805) -> CheckResult:
    """The unit interval is invariant under simulated random schedules."""
    rng = np.random.default_rng(seed)
    lo, hi = math.inf, -math.inf
    for model in models:
        T = model.horizon
        step = T / step_frac
        for _ in range(n // len(models)):
            x0 = float(rng.uniform(0.0, 1.0))
            k = int(rng.integers(1, 4))
            inner = np.sort(rng.uniform(0.0, T, k - 1))
            bps = tuple([0.0] + [float(b) for b in inner] + [T])
            if len(set(bps)) != len(bps):
                continue
            lvs = tuple(float(v) for v in rng.uniform(0.0, model.mu_I, k))
            traj = simulate(model, ControlSchedule(bps, lvs), x0, step)
            lo = min(lo, float(traj.states.min()))
            hi = max(hi, float(traj.states.max()))
    passed = lo >= -tol and hi <= 1.0 + tol
    return CheckResult("interval invariance", passed,
                       f"state range [{lo:.2e}, {hi:.6f}] within [-{tol:g}, 1+{tol:g}]")


def check_trichotomy(models, n: int = 1000, zero_tol: float = 1e-9,
                     margin: float = 1e-6, seed: int = 20240806) -> CheckResult:
    """Sign of C - dJ0/dx against membership in the extended switch region."""
    rng = np.random.default_rng(seed)
    issues = []
    worst_zero = 0.0
    for model in models:
        # the extended region uses the raw curve out to its true asymptote
        x_hi = 1.0 / (model.A * model.C) + model.r0_minus
        count = 0
        while count < n:
            x = float(rng.uniform(0.005, 0.995))
            t = float(rng.uniform(0.0, model.horizon * 0.999))
            inside = False
            if x < x_hi - margin:
                ts = float(_t_S_raw(model, x))
                if abs(t - ts) < margin:
                    continue
                inside = t < ts
            elif x < x_hi + margin:
                continue
            s = model.C - J_w_partials(model, 0.0, x, t, model.horizon)[0]
            if inside and s >= 0.0:
                issues.append(f"nonnegative sign inside at ({x:.3f},{t:.3f})")
            if not inside and s <= 0.0:
                issues.append(f"nonpositive sign outside at ({x:.3f},{t:.3f})")
            count += 1
        span = min(model.xS_sup, 0.99) - model.r0_minus
        for x_s in np.linspace(model.r0_minus + 0.05 * span,
                               model.r0_minus + 0.95 * span, 50):
            ts = t_S(model, float(x_s))
            if not (0.0 <= ts <= model.horizon):
                continue
            s = model.C - J_w_partials(model, 0.0, float(x_s), ts, model.horizon)[0]
            worst_zero = max(worst_zero, abs(s))
    passed = not issues and worst_zero < zero_tol
    detail = f"on-curve |C - dJ0/dx| <= {worst_zero:.3e} (tol {zero_tol:g})"
    if issues:
        detail += "; " + "; ".join(issues[:3])
    return CheckResult("marginal-cost trichotomy", passed, detail)


def run_all(model_one: DerivedModel, model_two: DerivedModel,
            model_no_switch: DerivedModel, model_outside_box: DerivedModel,
            scale: float = 1.0) -> list[CheckResult]:
    """Run every check, optionally at reduced sizes (scale < 1 for quick runs)."""
    def sz(v, lo=2):
        return max(int(v * scale), lo)

    models = [model_one, model_two]
    summaries = [
        (m, extremal_summaries(m, sz(100, 5), m.horizon / max(1e5 * scale, 1e3)))
        for m in models
    ]
    return [
        check_flow_agreement(models, n=sz(10000, 100)),
        check_hamiltonian_constancy(summaries),
        check_switch_structure(summaries, n_plans=sz(10000, 100)),
        check_curve_geometry(models, n=sz(1500, 100)),
        check_hjb(models, n=sz(1000, 50), n_fd=sz(100, 10)),
        check_brute_force(models, nx=sz(30, 5), nt=sz(30, 5), n_grid=sz(2000, 100)),
        check_dp(models, sizes=(sz(500, 64), sz(1000, 128), sz(2000, 256)),
                 tol=2e-2 * 2000.0 / sz(2000, 256)),
        check_degenerate(model_no_switch, model_outside_box, n=sz(20, 5)),
        check_invariance(models, n=sz(10000, 100)),
        check_trichotomy(models, n=sz(1000, 50)),
    ]
