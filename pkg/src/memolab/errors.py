"""Exception types shared across the lab.

Every failure mode that an operation promises to report carries a stable
``code`` string so the CLI can map it to an exit status and a CSV-safe
identifier.
"""


class MemolabError(Exception):
    """Base class for all reportable failures."""

    code = "error"


class HorizonInsufficientError(MemolabError):
    """A Monte-Carlo search ran out of horizon or cells before certifying."""

    code = "horizon-insufficient"


class FiniteSupportProcessError(MemolabError):
    """Schedule estimation was asked for a certainly-finite process."""

    code = "finite-support-process"


class BoundedLossError(MemolabError):
    """A witness pair was requested from a bounded loss."""

    code = "bounded-loss"


class CoverTooSmallError(MemolabError):
    """A cover handed to the general partition has too few cells."""

    code = "cover-too-small"


class HypothesisViolatedError(MemolabError):
    """A probe set fails the cardinality or separation hypotheses."""

    code = "hypothesis-violated"


class TestNonconvergentError(MemolabError):
    """The fooling loop could not certify a switch index within its cap."""

    code = "test-nonconvergent"


class ScheduleTooDenseError(MemolabError):
    """A schedule requires more intervals than can be materialized."""

    code = "schedule-too-dense"


class ConfigError(MemolabError):
    """An experiment config failed validation."""

    code = "config-invalid"
