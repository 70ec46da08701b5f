"""Exception and warning types shared across the package."""


class DecisionPriorError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(DecisionPriorError):
    """A configuration file or option is invalid."""


class DataError(DecisionPriorError):
    """Input data violates a declared contract (missing column, bad value)."""


class SamplerError(DecisionPriorError):
    """The sampler cannot run (non-finite density at start, bad settings)."""


class DegenerateFitError(DecisionPriorError):
    """A distribution fit is impossible for the given sample moments.

    Carries the offending sample mean and variance so callers can report
    what made the fit degenerate.
    """

    def __init__(self, message: str, mean: float, variance: float):
        super().__init__(f"{message} (mean={mean!r}, variance={variance!r})")
        self.mean = mean
        self.variance = variance


class NotFittedError(DecisionPriorError):
    """An estimator method requiring a fit was called before fit()."""


class UnseenLevelWarning(UserWarning):
    """A categorical level absent from the training data was mapped to the
    reference level."""
