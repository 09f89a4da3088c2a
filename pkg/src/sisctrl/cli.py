"""Command-line interface: derivation, planning, diagrams, value surfaces,
extremal fields, user-schedule simulation, and the verification suite.

Numeric artifacts are CSV (comma separated, '.' decimal, 17 significant
digits, written atomically) with a matplotlib rendering of each report
written alongside.  Exit codes: 0 success, 1 configuration error, 2
verification failure, 3 internal-consistency failure.

Any flag can also be supplied through the environment with the SISCTRL_
prefix (e.g. SISCTRL_X0=0.1), command-line values taking precedence.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from . import curves as curves_mod
from . import plots
from .errors import ConfigError, InternalConsistencyError, SisctrlError
from .flow import ControlSchedule, simulate
from .model import RawParameters, derive
from .oracle import dp_grid
from .pontryagin import extremal_field
from .synthesis import plan
from .value import value_report
from .verification import run_all

_FMT = "%.17g"

_PARAM_KEYS = {
    "beta", "gamma", "mu", "p_I", "eta", "delta", "pi", "horizon",
    "cost_detection", "cost_treatment", "cost_infected", "C",
}


def read_params(path: str) -> RawParameters:
    """Flat `name = value` parameter file with # comments; unknown keys error."""
    values: dict[str, float] = {}
    try:
        with open(path) as fh:
            for lineno, raw_line in enumerate(fh, 1):
                line = raw_line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'name = value'")
                key, _, val = line.partition("=")
                key = key.strip()
                if key not in _PARAM_KEYS:
                    raise ConfigError(f"{path}:{lineno}: unknown parameter {key!r}")
                if key in values:
                    raise ConfigError(f"{path}:{lineno}: duplicate parameter {key!r}")
                try:
                    values[key] = float(val.strip())
                except ValueError:
                    raise ConfigError(f"{path}:{lineno}: {val.strip()!r} is not a number")
    except OSError as exc:
        raise ConfigError(f"cannot read parameter file {path}: {exc}")
    if "C" in values:
        values["unit_control_cost"] = values.pop("C")
    try:
        return RawParameters(**values)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}")


def write_csv(path: str, header: list[str], rows) -> None:
    """Atomic CSV write with locale-independent formatting."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(
                    _FMT % v if isinstance(v, (int, float, np.floating)) else str(v)
                    for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _echo_model(model) -> None:
    fields = [
        "A", "B", "mu_I", "C", "Delta", "sqrt_Delta", "r0_minus", "r0_plus",
        "rmu_plus", "x_bar_C", "r_bar_plus", "xS_sup", "xT_sup", "R0", "horizon",
    ]
    for name in fields:
        print(f"{name} = " + _FMT % getattr(model, name))
    print(f"regime.branch = {model.regime.branch.value}")
    print(f"regime.sub_case = {model.regime.sub_case.value}")
    print(f"regime.ordering = {model.regime.ordering.value}")
    # classification uses exact floating-point comparisons with no epsilon
    # band; echo both sides of the branch condition so near-boundary runs
    # are easy to spot
    print("branch condition: x_bar_C = " + _FMT % model.x_bar_C
          + " vs r0_plus = " + _FMT % model.r0_plus)


def cmd_derive(model, args) -> int:
    _echo_model(model)
    return 0


def _require(args, name: str) -> float:
    v = getattr(args, name)
    if v is None:
        raise ConfigError(f"--{name} is required for this command")
    return v


def cmd_plan(model, args) -> int:
    x0 = _require(args, "x0")
    t0 = args.t0 if args.t0 is not None else 0.0
    p = plan(model, x0, t0, step=args.step)
    print(f"regime: {model.regime.branch.value} / {model.regime.sub_case.value}")
    print(f"start region: {p.region.value}")
    for k, (t, x, lvl) in enumerate(p.switches, 1):
        print(f"switch {k}: t = " + _FMT % t + ", x = " + _FMT % x
              + ", new level = " + _FMT % lvl)
    print("total cost = " + _FMT % p.total_cost)
    traj = p.trajectory
    run = np.concatenate([[0.0], np.cumsum(
        0.5 * (traj.times[1:] - traj.times[:-1])
        * ((model.C * traj.controls[1:] + traj.states[1:])
           + (model.C * traj.controls[:-1] + traj.states[:-1])))])
    write_csv(os.path.join(args.out, "trajectory.csv"),
              ["t", "x", "w", "running_cost"],
              zip(traj.times, traj.states, traj.controls, run))
    plots.plot_trajectory(traj.times, traj.states, traj.controls,
                          os.path.join(args.out, "trajectory.png"),
                          title=f"optimal plan from ({x0:g}, {t0:g})")
    return 0


def cmd_curves(model, args) -> int:
    nx = args.nx or 200
    nt = args.nt or 200
    diagram = curves_mod.build_diagram(model, nx, nt)
    rows = []
    for name, (xs, ts) in diagram.curve_samples.items():
        rows.extend((name, x, t) for x, t in zip(xs, ts))
    write_csv(os.path.join(args.out, "curves.csv"), ["curve_name", "x", "t"], rows)
    grid_rows = ((x, t, diagram.labels[i, j].value)
                 for i, x in enumerate(diagram.x_grid)
                 for j, t in enumerate(diagram.t_grid))
    write_csv(os.path.join(args.out, "regions.csv"), ["x", "t", "label"], grid_rows)
    plots.plot_diagram(model, diagram, os.path.join(args.out, "diagram.png"))
    print(f"wrote curves.csv, regions.csv, diagram.png to {args.out}")
    return 0


def cmd_value(model, args) -> int:
    nx = args.nx or 60
    nt = args.nt or 60
    xg = np.linspace(0.0, 1.0, nx)
    tg = np.linspace(0.0, model.horizon, nt)
    rows = []
    Wgrid = np.empty((nx, nt))
    for i, x in enumerate(xg):
        for j, t in enumerate(tg):
            rep = value_report(model, float(x), float(t))
            Wgrid[i, j] = rep.W
            label = curves_mod.classify_point(model, float(x), float(t))
            rows.append((x, t, rep.W,
                         rep.hjb_residual if rep.hjb_residual is not None else "nan",
                         label.value))
    write_csv(os.path.join(args.out, "value.csv"),
              ["x", "t", "W", "residual", "label"], rows)
    plots.plot_value_surface(xg, tg, Wgrid, os.path.join(args.out, "value.png"))
    print(f"wrote value.csv, value.png to {args.out}")
    return 0


def cmd_extremals(model, args) -> int:
    n = args.nx or 21
    step = args.step or model.horizon / 1e4
    field = extremal_field(model, np.linspace(0.01, 0.99, n), step)
    rows = []
    for ext in field:
        stride = max(len(ext.times) // 400, 1)
        for k in range(0, len(ext.times), stride):
            rows.append((ext.final_state, ext.times[k], ext.states[k],
                         ext.adjoints[k], ext.controls[k]))
    write_csv(os.path.join(args.out, "extremals.csv"),
              ["x_T", "t", "x", "lambda", "w"], rows)
    plots.plot_extremal_field(field, os.path.join(args.out, "extremals.png"))
    print(f"wrote extremals.csv, extremals.png to {args.out}")
    return 0


def cmd_simulate(model, args) -> int:
    if not args.breakpoints or not args.levels:
        raise ConfigError("simulate needs --breakpoints and --levels")
    try:
        bps = tuple(float(v) for v in args.breakpoints.split(","))
        lvs = tuple(float(v) for v in args.levels.split(","))
    except ValueError:
        raise ConfigError("--breakpoints/--levels must be comma-separated numbers")
    x0 = _require(args, "x0")
    traj = simulate(model, ControlSchedule(bps, lvs), x0, args.step)
    run = np.concatenate([[0.0], np.cumsum(
        0.5 * (traj.times[1:] - traj.times[:-1])
        * ((model.C * traj.controls[1:] + traj.states[1:])
           + (model.C * traj.controls[:-1] + traj.states[:-1])))])
    write_csv(os.path.join(args.out, "trajectory.csv"),
              ["t", "x", "w", "running_cost"],
              zip(traj.times, traj.states, traj.controls, run))
    plots.plot_trajectory(traj.times, traj.states, traj.controls,
                          os.path.join(args.out, "trajectory.png"),
                          title="user schedule")
    print("total cost = " + _FMT % traj.cost)
    return 0


def cmd_verify(model, args) -> int:
    raw = args._raw
    import dataclasses

    def with_C(c):
        return derive(dataclasses.replace(
            raw, unit_control_cost=c, cost_detection=None,
            cost_treatment=None, cost_infected=None))

    # a one-switch / two-switch pair around the given parameters (the branch
    # flips at C sqrt(Delta) = 1), plus the two degenerate corner regimes
    sd = model.sqrt_Delta
    m_one = model if model.x_bar_C <= model.r0_plus else with_C(2.0 / sd)
    m_two = model if model.x_bar_C > model.r0_plus else with_C(0.95 / sd)
    c = model.C
    m_no = model
    while m_no.regime.sub_case.value != "NoSwitchEver":
        c *= 2.0
        m_no = with_C(c)
    c = model.C
    m_out = model
    while m_out.regime.sub_case.value != "FirstSwitchOutsideUnitBox" and c > 1e-9:
        c *= 0.5
        m_out = with_C(c)
    if m_out.regime.sub_case.value != "FirstSwitchOutsideUnitBox":
        raise ConfigError("could not reach the FirstSwitchOutsideUnitBox regime "
                          "by shrinking C for these parameters")

    results = run_all(m_one, m_two, m_no, m_out, scale=args.scale)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    if args.out:
        write_csv(os.path.join(args.out, "verify.csv"),
                  ["check", "passed", "detail"],
                  ((r.name, int(r.passed), r.detail.replace(",", ";"))
                   for r in results))
    return 2 if failed else 0


_COMMANDS = {
    "derive": cmd_derive,
    "plan": cmd_plan,
    "curves": cmd_curves,
    "value": cmd_value,
    "extremals": cmd_extremals,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sisctrl",
        description="Analytic optimal screening synthesis for an SIS epidemic "
                    "in a fixed-size population.",
        epilog="Flags can be supplied via SISCTRL_<NAME> environment variables.",
    )
    p.add_argument("command", choices=sorted(_COMMANDS))
    p.add_argument("--params", required=False, help="flat key=value parameter file")
    p.add_argument("--out", default=".", help="output directory for CSV/figures")
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--nx", type=int, default=None)
    p.add_argument("--nt", type=int, default=None)
    p.add_argument("--ngrid", type=int, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--scale", type=float, default=0.05,
                   help="size multiplier for the verify command")
    p.add_argument("--breakpoints", default=None,
                   help="comma-separated schedule breakpoints for simulate")
    p.add_argument("--levels", default=None,
                   help="comma-separated control levels for simulate")
    return p


def _apply_env(args) -> None:
    for name in ("params", "out", "x0", "t0", "nx", "nt", "ngrid",
                 "step", "tol", "scale", "breakpoints", "levels"):
        if getattr(args, name) in (None, ".") or name in ("out",):
            env = os.environ.get("SISCTRL_" + name.upper())
            if env is not None and getattr(args, name) in (None, "."):
                cast = {"params": str, "out": str, "breakpoints": str,
                        "levels": str, "nx": int, "nt": int, "ngrid": int}.get(name, float)
                setattr(args, name, cast(env))


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _apply_env(args)
    try:
        if not args.params:
            raise ConfigError("--params is required")
        raw = read_params(args.params)
        model = derive(raw)
        args._raw = raw
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](model, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InternalConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 3
    except SisctrlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
