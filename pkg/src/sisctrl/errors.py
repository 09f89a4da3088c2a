"""Exception hierarchy shared by all sisctrl modules."""


class SisctrlError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(SisctrlError):
    """A raw parameter is outside its admissible range."""


class AssumptionViolation(SisctrlError):
    """A structural assumption of the reduced problem fails.

    Raised when the test is not perfectly sensitive (eta != 0), treatment
    is not fully effective (pi != 1), or the basic reproduction number is
    not above one.
    """


class ControlOutOfRange(SisctrlError):
    """Control level outside [0, mu_I]."""


class StateOutOfRange(SisctrlError):
    """State outside the invariant interval [0, 1]."""


class Unreachable(SisctrlError):
    """Target state is not on the forward orbit of the constant-control flow."""


class ScheduleInvalid(SisctrlError):
    """Piecewise-constant control schedule violates its invariants."""


class OutOfDomain(SisctrlError):
    """Argument outside the domain of a switching/limit curve."""


class RegimeMismatch(SisctrlError):
    """Requested a curve or operation that does not exist in this regime."""


class NotInSwitchRegion(SisctrlError):
    """Hitting-time query started outside the corresponding control region."""


class PoleAtRoot(SisctrlError):
    """Feasible-curve evaluation at a pole of its denominator."""


class StepInvalid(SisctrlError):
    """Non-positive integration step."""


class GridTooCoarse(SisctrlError):
    """Dynamic-programming grid fails the explicit-step stability check."""


class OnExcludedManifold(SisctrlError):
    """HJB residual requested on a manifold where the value function is not C1."""


class ConfigError(SisctrlError):
    """Invalid CLI configuration or parameter file."""


class InternalConsistencyError(SisctrlError):
    """A structural property guaranteed by the synthesis failed numerically."""
