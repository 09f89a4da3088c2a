"""Switching and limit curves in the (x, t) strip, and region classification.

Three curves organize the strip [0,1] x [0,T]:

  S      last-switch curve t_S: the locus where the control drops to 0 so
         that the uncontrolled arc lands on its final state exactly at T;
  sigma  first-switch curve t_sigma (two-switch regime only): where the
         control jumps from 0 to mu_I so the controlled arc meets S at
         the reflected state;
  Gamma  the uncontrolled arc through the tangency point (x_bar_C,
         t_S(x_bar_C)).  To the right of x_bar_C the never-screen
         region is bounded below by the uncontrolled arc tangent to
         sigma from above (see t_never_screen); this boundary coincides
         with Gamma whenever sigma stays below Gamma, but sits strictly
         above it when sigma overshoots near the tangency point.

All three have explicit log closed forms; no root finding is used.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain, RegimeMismatch
from .model import Branch, DerivedModel


class RegionLabel(enum.Enum):
    THETA = "Theta"
    S_CURVE = "S_curve"
    THETA_COMPLEMENT = "ThetaComplement"
    V = "V"
    GAMMA_CURVE = "Gamma_curve"
    SSET = "Sset"
    SIGMA_CURVE = "Sigma_curve"
    TSET = "Tset"


@dataclass
class SynthesisDiagram:
    x_grid: np.ndarray
    t_grid: np.ndarray
    labels: np.ndarray          # object array of RegionLabel, shape (len(x), len(t))
    curve_samples: dict         # name -> (x array, t array)


def curve_band(model: DerivedModel) -> float:
    """Half-width of the on-curve classification band."""
    return 1e-12 * max(1.0, model.horizon)


def _t_S_raw(model: DerivedModel, x_s):
    """Last-switch time formula without the domain gate (array friendly)."""
    ac = model.A * model.C
    num = 1.0 - ac * (np.asarray(x_s, dtype=float) - model.r0_plus)
    den = 1.0 - ac * (np.asarray(x_s, dtype=float) - model.r0_minus)
    with np.errstate(divide="ignore", invalid="ignore"):
        return model.horizon - np.log(num / den) / model.sqrt_Delta


def t_S(model: DerivedModel, x_s: float) -> float:
    """Time of last switch for a switch state x_s.

    Strictly decreasing and concave on its domain.  In the one-switch
    regime the right endpoint x_S_sup is a vertical asymptote and the
    sentinel -inf is returned there; in the two-switch regime the value
    at x_S_sup = x_bar_C is finite.
    """
    if not (model.r0_minus < x_s <= model.xS_sup):
        raise OutOfDomain(
            f"last-switch state must lie in ({model.r0_minus}, {model.xS_sup}], got {x_s}"
        )
    if model.regime.branch is Branch.ONE_SWITCH and x_s == model.xS_sup:
        # the right endpoint is the vertical asymptote itself: the
        # denominator vanishes analytically but not in floating point
        return -math.inf
    val = float(_t_S_raw(model, x_s))
    if math.isnan(val):
        return -math.inf
    return val


def t_S_prime(model: DerivedModel, x_s: float) -> float:
    """Slope of the last-switch curve (always negative on the domain)."""
    if not (model.r0_minus < x_s <= model.xS_sup):
        raise OutOfDomain(
            f"last-switch state must lie in ({model.r0_minus}, {model.xS_sup}], got {x_s}"
        )
    ac = model.A * model.C
    return -model.A * model.C ** 2 / (
        (1.0 - ac * (x_s - model.r0_plus)) * (1.0 - ac * (x_s - model.r0_minus))
    )


def _sigma_domain(model: DerivedModel) -> tuple[float, float]:
    # left end is x_bar_C itself: the curve extends to the tangency point
    return model.x_bar_C, 2.0 * model.x_bar_C - model.rmu_plus


def _t_sigma_raw(model: DerivedModel, x_sigma):
    xs = np.asarray(x_sigma, dtype=float)
    refl = 2.0 * model.x_bar_C - xs
    arg = (refl * (xs - model.rmu_plus)) / ((refl - model.rmu_plus) * xs)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _t_S_raw(model, refl) - np.log(np.abs(arg)) / model.B


def t_sigma(model: DerivedModel, x_sigma: float) -> float:
    """Time of first switch for a first-switch state x_sigma.

    A mu_I-controlled arc started at (x_sigma, t_sigma(x_sigma)) reaches
    the last-switch curve exactly at the reflected state 2 x_bar_C -
    x_sigma.  Only the two-switch regime has this curve; the domain runs
    from the tangency abscissa x_bar_C to the vertical asymptote at
    2 x_bar_C - rmu_plus.
    """
    if model.regime.branch is not Branch.TWO_SWITCH:
        raise RegimeMismatch("the one-switch synthesis has no first-switch curve")
    lo, hi = _sigma_domain(model)
    if not (lo <= x_sigma < hi):
        raise OutOfDomain(f"first-switch state must lie in [{lo}, {hi}), got {x_sigma}")
    if x_sigma == lo:
        return t_S(model, model.x_bar_C)
    return float(_t_sigma_raw(model, x_sigma))


def _t_Gamma_raw(model: DerivedModel, x):
    xa = np.asarray(x, dtype=float)
    arg = ((xa - model.r0_minus) * (model.x_bar_C - model.r0_plus)) / (
        (xa - model.r0_plus) * (model.x_bar_C - model.r0_minus)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(_t_S_raw(model, model.x_bar_C)) + np.log(np.abs(arg)) / model.sqrt_Delta


def t_Gamma(model: DerivedModel, x: float) -> float:
    """Uncontrolled arc through the tangency point (x_bar_C, t_S(x_bar_C)).

    Defined in the two-switch regime for x in (r0_plus, 1]; meets the
    last-switch curve tangentially at x_bar_C.
    """
    if model.regime.branch is not Branch.TWO_SWITCH:
        raise RegimeMismatch("the one-switch synthesis has no Gamma curve")
    if not (model.r0_plus < x <= 1.0):
        raise OutOfDomain(f"Gamma curve is defined on ({model.r0_plus}, 1], got {x}")
    if x == model.x_bar_C:
        return t_S(model, model.x_bar_C)
    return float(_t_Gamma_raw(model, x))


@functools.lru_cache(maxsize=32)
def _sigma_excess_table(model: DerivedModel):
    """Running maximum of t_sigma - t_Gamma over the first-switch domain.

    Near the tangency abscissa the first-switch curve can rise above the
    uncontrolled arc through the tangency point.  An uncontrolled arc
    started above the first-switch curve is the arc t_Gamma(.) + s with
    s = t - t_Gamma(x); it meets the first-switch curve at some smaller
    abscissa iff s does not exceed the running maximum of the gap
    t_sigma - t_Gamma over the abscissas it still has to traverse.  The
    table caches that running maximum on a dense grid together with a
    refined global maximum (abscissa and value); when the gap is never
    positive the global maximum degenerates to zero and the boundary of
    the never-screen region reduces to the arc through the tangency
    point itself.
    """
    lo, hi = _sigma_domain(model)
    xs = np.linspace(lo, hi, 4097)[1:-1]
    gap = np.asarray(_t_sigma_raw(model, xs) - _t_Gamma_raw(model, xs), dtype=float)
    prefix = np.maximum.accumulate(gap)
    i = int(np.argmax(gap))
    if gap[i] <= 0.0:
        return xs, prefix, lo, 0.0
    # golden-section polish of the smooth interior maximum
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, len(xs) - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = float(_t_sigma_raw(model, c) - _t_Gamma_raw(model, c))
    fd = float(_t_sigma_raw(model, d) - _t_Gamma_raw(model, d))
    for _ in range(120):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = float(_t_sigma_raw(model, c) - _t_Gamma_raw(model, c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = float(_t_sigma_raw(model, d) - _t_Gamma_raw(model, d))
        if b - a < 1e-14:
            break
    x_hat = 0.5 * (a + b)
    gap_max = float(_t_sigma_raw(model, x_hat) - _t_Gamma_raw(model, x_hat))
    return xs, prefix, x_hat, max(gap_max, float(gap[i]))


def t_never_screen(model: DerivedModel, x: float) -> float:
    """Time above which a start at x never screens (two-switch regime).

    For abscissas up to the gap maximizer x_hat this is the first-switch
    curve itself; beyond it, the uncontrolled arc tangent to the
    first-switch curve at x_hat, i.e. t_Gamma(x) shifted up by the
    maximal excess of t_sigma over t_Gamma.  An uncontrolled arc started
    strictly below this boundary (and above the first-switch curve)
    still meets the first-switch curve, so screening later is optimal
    there; at or above it the arc clears the curve and never screening
    is optimal.
    """
    if model.regime.branch is not Branch.TWO_SWITCH:
        raise RegimeMismatch("the one-switch synthesis has no first-switch curve")
    if not (model.x_bar_C < x <= 1.0):
        raise OutOfDomain(
            f"never-screen boundary is defined on ({model.x_bar_C}, 1], got {x}")
    xs, prefix, x_hat, gap_max = _sigma_excess_table(model)
    if gap_max <= 0.0:
        return t_Gamma(model, x)
    if x >= x_hat:
        return float(_t_Gamma_raw(model, x)) + gap_max
    idx = int(np.searchsorted(xs, x))
    running = float(prefix[idx - 1]) if idx > 0 else 0.0
    here = float(_t_sigma_raw(model, x) - _t_Gamma_raw(model, x))
    return float(_t_Gamma_raw(model, x)) + max(running, here, 0.0)


def x_S_of_xT(model: DerivedModel, x_T: float) -> float:
    """Last-switch state that lands on final state x_T at the horizon.

    Minus-branch root of the switch-state quadratic
    x + C (mu_I + f(x)) = x_T; the discriminant kappa is nonnegative on
    the whole domain (r0_minus, xT_sup] and is clamped against roundoff
    at the right endpoint.
    """
    if not (model.r0_minus < x_T <= model.xT_sup):
        raise OutOfDomain(
            f"final state must lie in ({model.r0_minus}, {model.xT_sup}], got {x_T}"
        )
    kappa = model.x_bar_C ** 2 + model.mu_I / model.A - x_T / (model.C * model.A)
    return model.x_bar_C - math.sqrt(max(kappa, 0.0))


def x_T_of_xS(model: DerivedModel, x_s: float) -> float:
    """Final state reached at the horizon from a last switch at x_s (inverse map)."""
    if not (model.r0_minus < x_s < model.xS_sup):
        raise OutOfDomain(
            f"last-switch state must lie in ({model.r0_minus}, {model.xS_sup}), got {x_s}"
        )
    return model.C * (model.mu_I + model.f(x_s)) + x_s


def classify_point(model: DerivedModel, x: float, t: float) -> RegionLabel:
    """Region membership of a point of the strip [0,1] x [0,T].

    Points within the band |t - curve(x)| <= 1e-12 max(1,T) of a curve
    get the curve's label; these one-dimensional sets carry the control
    of the region being entered.
    """
    band = curve_band(model)
    if model.regime.branch is Branch.ONE_SWITCH:
        if model.r0_minus < x < model.xS_sup:
            ts = t_S(model, x)
            if abs(t - ts) <= band:
                return RegionLabel.S_CURVE
            if t < ts:
                return RegionLabel.THETA
        return RegionLabel.THETA_COMPLEMENT

    xbc = model.x_bar_C
    sig_hi = 2.0 * xbc - model.rmu_plus
    if x <= xbc:
        ts = t_S(model, x) if x > model.r0_minus else math.inf
        if abs(t - ts) <= band:
            # the tangency endpoint itself belongs to the first-switch curve
            return RegionLabel.SIGMA_CURVE if abs(x - xbc) <= band else RegionLabel.S_CURVE
        if t >= ts:
            return RegionLabel.V
        return RegionLabel.SSET
    # x > x_bar_C (only possible when x_bar_C < 1)
    tsig = float(_t_sigma_raw(model, x)) if x < sig_hi else -math.inf
    if abs(t - tsig) <= band:
        return RegionLabel.SIGMA_CURVE
    if t < tsig:
        return RegionLabel.SSET
    tb = t_never_screen(model, x)
    if tb <= tsig + band:
        # boundary is the first-switch curve itself: nothing waits here
        return RegionLabel.V
    if abs(t - tb) <= band:
        return RegionLabel.GAMMA_CURVE
    if t > tb:
        return RegionLabel.V
    return RegionLabel.TSET


def build_diagram(model: DerivedModel, nx: int = 200, nt: int = 200,
                  n_curve: int = 400) -> SynthesisDiagram:
    """Sample region labels on a lattice and the curves as polylines.

    Curve polylines are sampled over their full analytic domains
    (including negative switch states, useful for plotting) while the
    label grid covers only the physical strip.
    """
    T = model.horizon
    xg = np.linspace(0.0, 1.0, nx)
    tg = np.linspace(0.0, T, nt)
    labels = np.empty((nx, nt), dtype=object)
    for i, x in enumerate(xg):
        for j, t in enumerate(tg):
            labels[i, j] = classify_point(model, x, t)

    curves: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    eps = 1e-9 * max(1.0, abs(model.xS_sup - model.r0_minus))
    xs = np.linspace(model.r0_minus + eps, model.xS_sup - eps, n_curve)
    curves["S"] = (xs, np.asarray(_t_S_raw(model, xs), dtype=float))
    if model.regime.branch is Branch.TWO_SWITCH:
        lo, hi = _sigma_domain(model)
        xsig = np.linspace(lo + eps, hi - eps, n_curve)
        curves["sigma"] = (xsig, np.asarray(_t_sigma_raw(model, xsig), dtype=float))
        xga = np.linspace(model.r0_plus + eps, 1.0, n_curve)
        curves["Gamma"] = (xga, np.array([_t_Gamma_raw(model, v) for v in xga]))
    return SynthesisDiagram(x_grid=xg, t_grid=tg, labels=labels, curve_samples=curves)
