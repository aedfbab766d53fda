"""Exception hierarchy.

Two families matter to callers (and to the CLI exit status):
:class:`DomainError` for inputs outside an operation's preconditions and
:class:`NumericalError` for computations that broke down.
"""


class QnmError(Exception):
    """Base class for all package errors."""


class DomainError(QnmError, ValueError):
    """Input violates an operation's precondition."""


class NumericalError(QnmError, ArithmeticError):
    """A numerical procedure failed or detected a singularity."""


class NearSingularError(NumericalError):
    """Assembled operator is numerically singular (likely a QNF nearby)."""

    def __init__(self, s, condition):
        self.s = s
        self.condition = condition
        super().__init__(
            f"operator near-singular at s={s!r}: condition estimate {condition:.3e}"
        )


class SingularBoundaryError(NumericalError):
    """The boundary system at x=1 is singular for this (s, lambda)."""

    def __init__(self, s, lam, condition=float("inf")):
        self.s = s
        self.lam = lam
        self.condition = condition
        super().__init__(
            f"boundary system singular for s={s!r}, lambda={lam!r} "
            f"(condition {condition:.3e}); increase lambda"
        )


class ContinuedFractionPoleError(NumericalError):
    """Zero denominator met during the backward continued-fraction sweep."""

    def __init__(self, s, index):
        self.s = s
        self.index = index
        super().__init__(
            f"continued fraction hit a pole at k={index} for s={s!r}; perturb the depth"
        )


class BandReductionError(NumericalError):
    """Pivot underflow while reducing a banded recurrence to three terms."""


class WindowTooSmallError(NumericalError):
    """Asymptotic 2x2 fit is ill-conditioned over the requested window."""


class InsufficientDataError(DomainError):
    """Not enough coefficients for a tail diagnostic."""


class EvolutionBlowUp(NumericalError):
    """Time integration exceeded the blow-up threshold.

    The partial trajectory is kept on ``trajectory``.
    """

    def __init__(self, t, norm, trajectory):
        self.t = t
        self.norm = norm
        self.trajectory = trajectory
        super().__init__(f"solution norm {norm:.3e} exceeded threshold at t={t:.6g}")


class GevreyOracleError(NumericalError):
    """A derivative oracle returned a non-finite value."""

    def __init__(self, n, x):
        self.n = n
        self.x = x
        super().__init__(f"derivative oracle returned non-finite value at n={n}, x={x!r}")
