"""Exception hierarchy shared by all semilab modules."""


class SemilabError(Exception):
    """Base class for all semilab errors."""


class AccuracyError(SemilabError):
    """A series or quadrature failed to reach the requested tolerance."""


class DomainError(SemilabError, ValueError):
    """An argument lies outside the documented domain or branch."""


class UnsupportedDegreeError(DomainError):
    """Polynomial degree above the supported cap."""


class GrowthError(SemilabError):
    """A function grows too fast for the series/integral to converge."""


class DegenerateInputError(SemilabError):
    """Input makes the estimator degenerate (e.g. all-zero weights)."""


class RangeError(SemilabError):
    """A search or bracketing range was too small (sup attained at boundary,
    no crossing found, ...)."""


class InadmissibleError(SemilabError):
    """A potential fails an admissibility requirement (e.g. V unbounded
    below on the sampling range)."""


class ConfigError(SemilabError, ValueError):
    """An experiment configuration failed validation."""
