"""Exception types shared across the package.

Numerical failures carry enough state (last accepted time, best iterate,
furthest parameter reached) for callers to log or resume.
"""


class Tfe10Error(Exception):
    """Base class for all package errors."""


# ---------------------------------------------------------------- odecore


class IntegrationError(Tfe10Error):
    def __init__(self, message, t_last=None, partial=None):
        super().__init__(message)
        self.t_last = t_last
        self.partial = partial


class StepSizeUnderflow(IntegrationError):
    """Step size fell below floating-point spacing (stiff failure / singularity)."""


class MaxStepsExceeded(IntegrationError):
    """Step budget exhausted before reaching the end of the span."""


class NonFiniteState(IntegrationError):
    """NaN or Inf produced on an accepted step."""


class NoSignChange(Tfe10Error):
    """Event function does not change sign over the requested segment."""


class NonFiniteEntry(Tfe10Error):
    """Finite-difference Jacobian produced a NaN/Inf entry."""


# ---------------------------------------------------------------- oscillator


class NoRealEquilibrium(Tfe10Error):
    """Constant states of the interface oscillation ODE exist only for n in (9/8, 9/7)."""


class NoConvergence(Tfe10Error):
    """Poincare returns did not settle within the integration budget."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class EscapedToEquilibrium(Tfe10Error):
    """Trajectory settled at a constant state instead of a cycle."""


class InconsistentBracket(Tfe10Error):
    """Bisection bracket endpoints classify identically."""


class UndecidedRegion(Tfe10Error):
    """Classification budget insufficient to decide an outcome near the bifurcation."""


# ---------------------------------------------------------------- eigensolver


class MobilityUnderflow(Tfe10Error):
    """Regularized mobility underflowed below 1e-300."""


class NewtonStalled(Tfe10Error):
    """Damped Newton could not reduce the residual to tolerance."""

    def __init__(self, message, best_x=None, best_residual=None, history=None):
        super().__init__(message)
        self.best_x = best_x
        self.best_residual = best_residual
        self.history = history or []


class BadInitialGuess(Tfe10Error):
    """Residual map not evaluable (or non-finite) at the initial guess."""


class BranchStalled(Tfe10Error):
    """Continuation could not advance past n_star even at the minimum step."""

    def __init__(self, message, n_star=None, partial=None):
        super().__init__(message)
        self.n_star = n_star
        self.partial = partial


class DomainTooShort(Tfe10Error):
    """Truncation domain too short for the requested far-field decay."""


# ---------------------------------------------------------------- asymptotics


class OutOfValidity(Tfe10Error):
    """Closed-form expression evaluated outside its validity region."""


class GridTooCoarse(Tfe10Error):
    """Sample grid too coarse for finite-difference gradients."""
