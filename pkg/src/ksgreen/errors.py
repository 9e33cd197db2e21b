"""Exception hierarchy shared by all ksgreen modules."""


class KsgreenError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(KsgreenError):
    """Invalid or inconsistent run configuration."""


class RealRootError(KsgreenError):
    """The factorized symbol roots are real (S >= 1): the kernel would
    oscillate globally and the time step is unusable at these parameters."""

    def __init__(self, s_value, message=None):
        self.s_value = s_value
        if message is None:
            message = (
                f"real-root regime: S = {s_value:.6g} >= 1; "
                "reduce the time step (or increase nu)"
            )
        super().__init__(message)


class DegenerateSpectrumError(KsgreenError):
    """A vanishing eigenvalue was encountered in the modal sum."""


class PartitionError(KsgreenError):
    """Row partitions do not tile the requested index range."""


class CacheMismatchError(KsgreenError):
    """An operator cache file does not match the requested parameters."""


class BlowUpError(KsgreenError):
    """The integration produced non-finite or runaway values."""

    def __init__(self, step_index, message=None):
        self.step_index = step_index
        if message is None:
            message = f"solution blew up at step {step_index}"
        super().__init__(message)


class SeedingUnstableError(KsgreenError):
    """The requested seeding strategy is outside its stable regime."""


class StatisticsError(KsgreenError):
    """Not enough samples to compute the requested statistic."""
