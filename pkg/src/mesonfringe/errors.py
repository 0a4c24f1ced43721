"""Exception types shared across the package."""


class MesonFringeError(Exception):
    """Base class for all package errors."""


class DimensionExceeded(MesonFringeError):
    def __init__(self, count, max_dim, where="sector"):
        self.count = count
        self.max_dim = max_dim
        super().__init__(
            f"{where} dimension exceeds max_dim={max_dim} (at least {count} states)")


class InfeasibleCharges(MesonFringeError):
    pass


class PathInvalid(MesonFringeError):
    pass


class NotInBasis(MesonFringeError):
    pass


class NoConvergence(MesonFringeError):
    def __init__(self, iterations, residual, what="solver"):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"{what} did not converge after {iterations} iterations "
            f"(residual {residual:.3e})")


class FitDiverged(MesonFringeError):
    pass


class AmbiguousFrequency(MesonFringeError):
    pass


class InsufficientPoints(MesonFringeError):
    pass


class ConfigError(MesonFringeError):
    pass
