"""Exception hierarchy shared by all modules."""


class DipolarMediaError(Exception):
    """Base class for every error raised by this package."""


class ConvergenceError(DipolarMediaError):
    """An iterative or quadrature procedure did not reach its tolerance.

    Attributes
    ----------
    estimate : object
        Best value reached before giving up.
    error : float
        Achieved error estimate (or residual).
    trajectory : list
        Optional history of iterates for diagnosis.
    """

    def __init__(self, message, estimate=None, error=float("nan"), trajectory=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.trajectory = list(trajectory) if trajectory is not None else []


class InvalidIntegrandError(DipolarMediaError, ValueError):
    """The integrand returned NaN."""


class PoleError(DipolarMediaError, ValueError):
    """Evaluation requested exactly on (or numerically at) a pole."""


class SeriesRadiusError(DipolarMediaError, ValueError):
    """A truncated power series was evaluated outside its regime of validity."""


class RegimeWarning(UserWarning):
    """Inputs lie outside the regime in which an approximation was derived."""


class SamplingStallError(DipolarMediaError):
    """Rejection sampling exhausted its attempt budget."""


class SingularSystemError(DipolarMediaError):
    """Coupled-dipole system is (numerically) singular.

    Attributes
    ----------
    condition : float
        Estimated condition number of the system matrix.
    """

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class ConfigError(DipolarMediaError, ValueError):
    """Invalid run configuration (CLI)."""


class NoRootError(DipolarMediaError):
    """A root search found no sign change in its bracket."""
