"""Exception types raised by the solvers."""


class DiscriminationError(Exception):
    """Base class for every error raised by this package."""


class NonHermitian(DiscriminationError, ValueError):
    pass


class NegativeOperator(DiscriminationError, ValueError):
    pass


class InvalidDensityMatrix(DiscriminationError, ValueError):
    pass


class InvalidPovm(DiscriminationError, ValueError):
    pass


class DimensionMismatch(DiscriminationError, ValueError):
    pass


class InvalidPrior(DiscriminationError, ValueError):
    pass


class InvalidWeights(DiscriminationError, ValueError):
    pass


class NonUnitaryRep(DiscriminationError, ValueError):
    pass


class LinearlyDependent(DiscriminationError, ValueError):
    pass


class ProblemTooLarge(DiscriminationError, ValueError):
    pass


class SingularNormalizer(DiscriminationError, RuntimeError):
    pass


class InfeasibleCertificate(DiscriminationError):
    """A dual certificate violates ``Y <= sum_i w_ij mu_i rho_i`` for some outcome j."""

    def __init__(self, message, *, outcome, violation):
        super().__init__(message)
        self.outcome = outcome
        self.violation = violation


class ConvergenceFailure(DiscriminationError, RuntimeError):
    """The iteration budget ran out before the requested gap was reached.

    ``best_gap`` is the smallest gap seen and ``partial`` holds the best
    solution object available at that point (may be None).
    """

    def __init__(self, message, *, best_gap, partial=None):
        super().__init__(message)
        self.best_gap = best_gap
        self.partial = partial


class DegenerateKernel(UserWarning):
    """The equalizing operator has a kernel of dimension >= 2 on the joint support.

    A valid solution is still returned, flagged ``unique=False``.
    """
