"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed value for an operation (bit length, duplicates, ranges)."""


class ParameterError(ValueError):
    """Parameter outside its documented domain."""


class SizeViolationError(ValueError):
    """A supplied subset exceeds the size the property quantifies over."""


class EnumerationBudgetError(RuntimeError):
    """Exact enumeration would exceed the configured budget; use a sampled audit."""


class UnverifiedExtractorError(RuntimeError):
    """An operation requiring a verified extractor received an unverified one."""


class MissingBuildError(RuntimeError):
    """A graph or set build needed by the operation has not been constructed."""


class SeedSpaceError(RuntimeError):
    """The full seed space is too large to enumerate exactly."""


class SearchFailedError(RuntimeError):
    """Randomized search exhausted its retry budget."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best
