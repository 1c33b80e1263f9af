"""Exception and warning types shared across the package."""


class CausalRegError(Exception):
    """Base class for all errors raised by this package."""


class NonFiniteInput(CausalRegError):
    pass


class DimensionMismatch(CausalRegError):
    pass


class ZeroVarianceColumn(CausalRegError):
    def __init__(self, column, name=None):
        self.column = column
        self.name = name
        label = f"{column}" if name is None else f"{column} ({name})"
        super().__init__(f"column {label} has zero sample variance; cannot normalize")


class NoConvergence(CausalRegError):
    """Iterative solver hit its sweep budget; carries the last iterate."""

    def __init__(self, max_iterations, coefficients, max_delta):
        self.max_iterations = max_iterations
        self.coefficients = coefficients
        self.max_delta = max_delta
        super().__init__(
            f"no convergence after {max_iterations} sweeps "
            f"(last max coefficient change {max_delta:.3e})"
        )


class BracketingFailure(CausalRegError):
    pass


class AllEigenvaluesTruncated(CausalRegError):
    pass


class NonFiniteLikelihood(CausalRegError):
    pass


class EmptyGrid(CausalRegError):
    pass


class FoldTooSmall(CausalRegError):
    pass


class EmptyRecords(CausalRegError):
    pass


class DimensionTooSmall(CausalRegError):
    pass


class SchemaError(CausalRegError):
    pass


class SingularSystemWarning(UserWarning):
    """Rank-deficient system solved through the pseudoinverse fallback."""


class TargetAboveOlsWarning(UserWarning):
    """Requested coefficient norm exceeds the unregularized solution norm."""


class NormFloorWarning(UserWarning):
    """Norm target at or below the numerical floor; nearest achievable returned."""


class DegenerateSpectrumWarning(UserWarning):
    """Covariance spectrum nearly isotropic; confounding strength not identifiable."""


class SlowConvergenceWarning(UserWarning):
    """Coordinate descent stalled near tolerance; last iterate accepted."""
