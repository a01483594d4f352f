"""Exception types shared across the package."""


class CovertBcError(Exception):
    """Base class for all package-specific errors."""


class ModelFormatError(CovertBcError):
    """Raised when a model/family file fails to parse or violates the schema."""


class AbsoluteContinuityViolation(CovertBcError):
    """KL divergence D(p||q) requested with p(i) > 0 but q(i) = 0."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"p({index}) > 0 but q({index}) = 0: D(p||q) is infinite")


class DivisionSupportViolation(CovertBcError):
    """chi-squared form requested with q(i) = 0 where a numerator is nonzero."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"q({index}) = 0 with nonzero numerator at index {index}")


class DegenerateDivergence(CovertBcError):
    """Warden-output mixture is indistinguishable from the null distribution."""


class ZeroCapacity(CovertBcError):
    """All single-user divergence terms vanish; the covert capacity is zero."""
