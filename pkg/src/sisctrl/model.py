"""Parameter ingestion, derived constants and regime classification.

The controlled dynamics is the scalar logistic-with-inflow equation

    dx/dt = mu_I - w + f(x),      f(x) = B*x - A*x**2,

obtained from the two-compartment SIS system on a fixed population by
eliminating the susceptible fraction.  Everything downstream (flows,
switching curves, value function) is expressed in the reduced constants
computed here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import AssumptionViolation, ControlOutOfRange, InvalidParameter


class Branch(enum.Enum):
    """Which synthesis applies: one switching curve, or first+last."""

    ONE_SWITCH = "OneSwitchSynthesis"
    TWO_SWITCH = "TwoSwitchSynthesis"


class SubCase(enum.Enum):
    GENERIC = "Generic"
    NO_SWITCH_EVER = "NoSwitchEver"
    FIRST_SWITCH_OUTSIDE_UNIT_BOX = "FirstSwitchOutsideUnitBox"


class Ordering(enum.Enum):
    """Position of the reflection center x_bar_C among the equilibria means."""

    BELOW_MEAN = "x_bar_C < r_bar_plus"
    BETWEEN = "r_bar_plus < x_bar_C < r0_plus"
    ABOVE_R0 = "r0_plus <= x_bar_C"


@dataclass(frozen=True)
class Regime:
    branch: Branch
    sub_case: SubCase
    ordering: Ordering


@dataclass(frozen=True)
class RawParameters:
    """Epidemiological, operational and cost inputs.

    Either the three unit costs (cost_detection, cost_treatment,
    cost_infected) or the pre-scaled unit control cost ``unit_control_cost``
    must be provided, not both.
    """

    beta: float
    gamma: float
    mu: float
    p_I: float
    eta: float = 0.0
    delta: float = 0.0
    pi: float = 1.0
    horizon: float = 1.0
    cost_detection: float | None = None
    cost_treatment: float | None = None
    cost_infected: float | None = None
    unit_control_cost: float | None = None

    def validate(self) -> None:
        for name in ("beta", "gamma", "mu", "horizon"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidParameter(f"{name} must be a finite positive number, got {v!r}")
        for name in ("p_I", "eta", "delta", "pi"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise InvalidParameter(f"{name} must lie in [0, 1], got {v!r}")
        costs = (self.cost_detection, self.cost_treatment, self.cost_infected)
        have_triple = all(c is not None for c in costs)
        have_any = any(c is not None for c in costs)
        if self.unit_control_cost is not None:
            if have_any:
                raise InvalidParameter(
                    "unit_control_cost is mutually exclusive with the cost triple"
                )
            if not (math.isfinite(self.unit_control_cost) and self.unit_control_cost > 0):
                raise InvalidParameter("unit_control_cost must be a finite positive number")
        else:
            if not have_triple:
                raise InvalidParameter(
                    "provide either unit_control_cost or all of "
                    "cost_detection, cost_treatment, cost_infected"
                )
            for name in ("cost_detection", "cost_treatment", "cost_infected"):
                v = getattr(self, name)
                if not (math.isfinite(v) and v > 0):
                    raise InvalidParameter(f"{name} must be a finite positive number, got {v!r}")


@dataclass(frozen=True)
class DerivedModel:
    """All reduced constants of the screening control problem.

    A, B are the quadratic/linear coefficients of f; mu_I the infected
    inflow rate; C the rescaled unit control cost.  r0_minus/r0_plus are
    the equilibria under w=0, rmu_plus = B/A the endemic equilibrium under
    full screening.  x_bar_C is the reflection center of switch-state
    pairs, xS_sup the supremum of last-switch states and xT_sup the right
    end of the domain of the last-switch-state map.
    """

    A: float
    B: float
    mu_I: float
    C: float
    Delta: float
    sqrt_Delta: float
    r0_minus: float
    r0_plus: float
    rmu_plus: float
    x_bar_C: float
    r_bar_plus: float
    xS_sup: float
    xT_sup: float
    R0: float
    horizon: float
    regime: Regime

    def f(self, x):
        return self.B * x - self.A * x * x

    def f_prime(self, x):
        return self.B - 2.0 * self.A * x

    def drift(self, x, w):
        """Right-hand side mu_I - w + f(x) of the controlled dynamics."""
        return self.mu_I - w + self.f(x)

    def check_control(self, w) -> None:
        import numpy as np

        if np.any(np.asarray(w) < -1e-15) or np.any(np.asarray(w) > self.mu_I + 1e-15):
            raise ControlOutOfRange(f"control level must lie in [0, {self.mu_I}]")


def _classify(A: float, B: float, mu_I: float, C: float) -> tuple[float, float, Regime]:
    """Compute xS_sup, xT_sup and the Regime tag.

    Exact IEEE comparisons, no epsilon band: the regime boundaries are
    measure-zero and ties go to the one-switch / generic side (closed
    inequality x_bar_C <= r0_plus).
    """
    Delta = B * B + 4.0 * A * mu_I
    sq = math.sqrt(Delta)
    r0_plus = (B + sq) / (2.0 * A)
    rmu_plus = B / A
    x_bar_C = (1.0 + B * C) / (2.0 * A * C)
    r_bar_plus = 0.5 * (rmu_plus + r0_plus)

    if x_bar_C <= r0_plus:
        branch = Branch.ONE_SWITCH
        xS_sup = 2.0 * x_bar_C - r0_plus
        xT_sup = r0_plus
    else:
        branch = Branch.TWO_SWITCH
        xS_sup = x_bar_C
        xT_sup = r0_plus + A * C * (x_bar_C - r0_plus) ** 2

    if branch is Branch.ONE_SWITCH and xS_sup <= 0.0:
        sub = SubCase.NO_SWITCH_EVER
    elif branch is Branch.TWO_SWITCH and xS_sup > 1.0:
        sub = SubCase.FIRST_SWITCH_OUTSIDE_UNIT_BOX
    else:
        sub = SubCase.GENERIC

    if r0_plus <= x_bar_C:
        ordering = Ordering.ABOVE_R0
    elif x_bar_C < r_bar_plus:
        ordering = Ordering.BELOW_MEAN
    else:
        ordering = Ordering.BETWEEN

    return xS_sup, xT_sup, Regime(branch, sub, ordering)


def derive(raw: RawParameters) -> DerivedModel:
    """Validate raw parameters and compute every reduced constant."""
    raw.validate()
    if raw.eta != 0.0 or raw.pi != 1.0:
        raise AssumptionViolation(
            f"perfect sensitivity (eta=0) and fully effective treatment (pi=1) "
            f"are required; got eta={raw.eta}, pi={raw.pi}"
        )
    R0 = raw.beta / (raw.gamma + raw.mu)
    if R0 <= 1.0:
        raise AssumptionViolation(f"basic reproduction number must exceed 1, got R0={R0}")

    A = raw.beta
    B = raw.beta - (raw.gamma + raw.mu)
    mu_I = raw.p_I * raw.mu
    mu_I_tilde = (1.0 - raw.eta) * raw.pi * mu_I

    if raw.unit_control_cost is not None:
        C = raw.unit_control_cost
    else:
        if mu_I_tilde == 0.0:
            raise InvalidParameter("p_I = 0 gives no infected inflow; the control cost is undefined")
        per_test = (raw.cost_detection / raw.cost_infected) * raw.mu
        per_treat = (raw.cost_treatment / raw.cost_infected) * raw.mu * (
            (1.0 - raw.eta) * raw.p_I + raw.delta * (1.0 - raw.p_I)
        )
        C = (raw.mu / mu_I_tilde) * (per_test + per_treat)

    Delta = B * B + 4.0 * A * mu_I
    sq = math.sqrt(Delta)
    xS_sup, xT_sup, regime = _classify(A, B, mu_I, C)

    return DerivedModel(
        A=A,
        B=B,
        mu_I=mu_I,
        C=C,
        Delta=Delta,
        sqrt_Delta=sq,
        r0_minus=(B - sq) / (2.0 * A),
        r0_plus=(B + sq) / (2.0 * A),
        rmu_plus=B / A,
        x_bar_C=(1.0 + B * C) / (2.0 * A * C),
        r_bar_plus=0.5 * (B / A + (B + sq) / (2.0 * A)),
        xS_sup=xS_sup,
        xT_sup=xT_sup,
        R0=R0,
        horizon=raw.horizon,
        regime=regime,
    )


def classify_regime(model: DerivedModel) -> Regime:
    """Recompute the regime tag from the reduced constants."""
    _, _, regime = _classify(model.A, model.B, model.mu_I, model.C)
    return regime


def equilibria(model: DerivedModel, w: float) -> tuple[float, float]:
    """Both roots of -A x^2 + B x + (mu_I - w) = 0, lower first."""
    model.check_control(w)
    disc = model.B * model.B + 4.0 * model.A * (model.mu_I - w)
    sq = math.sqrt(disc)
    return (model.B - sq) / (2.0 * model.A), (model.B + sq) / (2.0 * model.A)
