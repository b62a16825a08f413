"""Exception types shared across the package."""


class NotInGroupError(ValueError):
    """Matrix does not belong to the requested matrix group."""


class DegenerateCandidateError(ValueError):
    """Candidate has no usable difference between its two sides."""


class EvaluationError(ValueError):
    """A basis entry could not be evaluated at a data point."""

    def __init__(self, message: str, entry: str | None = None, point=None):
        super().__init__(message)
        self.entry = entry
        self.point = point


class RangeLimitError(ValueError):
    """A feature argument fell outside the prime-counting table."""


class ResourceLimitError(RuntimeError):
    """A configured memory or size cap was exceeded."""

    def __init__(self, message: str, partial_count: int | None = None):
        super().__init__(message)
        self.partial_count = partial_count


class CatalogIntegrityError(RuntimeError):
    """A curated group entry failed its build-time validation."""


class ConfigError(ValueError):
    """Run configuration is missing or malformed."""
