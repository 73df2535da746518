"""Exception hierarchy shared by all modules."""


class MwtrapError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MwtrapError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(DomainError):
    """A field point coincides with a current-carrying segment."""

    def __init__(self, message, point_index=None, segment_index=None):
        super().__init__(message)
        self.point_index = point_index
        self.segment_index = segment_index


class ConvergenceError(MwtrapError, RuntimeError):
    """An iterative solver ran out of iterations.

    ``last_iterate`` holds the final estimate and ``history`` the sequence of
    iterates, so callers can inspect how far the solver got.
    """

    def __init__(self, message, last_iterate=None, history=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.history = list(history) if history is not None else []


class FitError(ConvergenceError):
    """A least-squares fit failed to converge or could not be seeded."""


class SeedError(FitError):
    """Automatic seeding could not locate a resonance in the data."""


class OptimizationError(MwtrapError, RuntimeError):
    """The geometry objective returned a non-finite value."""

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class ParseError(MwtrapError, ValueError):
    """Malformed input file. ``lineno`` is 1-based when known."""

    def __init__(self, message, path=None, lineno=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if lineno is not None:
            where += f":{lineno}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.lineno = lineno


class ConfigError(MwtrapError, ValueError):
    """Configuration schema violation. ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
