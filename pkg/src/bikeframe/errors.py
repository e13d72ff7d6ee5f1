"""Exception types shared across the package."""


class BikeframeError(Exception):
    """Base class for all package errors."""


class DomainError(BikeframeError):
    """An argument lies outside the mathematical domain of an operation."""


class BuildFailure(BikeframeError):
    """Frame construction failed: a derived tube is degenerate or a junction
    solve has no real solution."""


class DegenerateTube(BikeframeError):
    """A tube is too short to discretize (< 1e-6 m)."""


class SingularSystem(BikeframeError):
    """The reduced stiffness system is singular or numerically indefinite."""


class MissingLabel(BikeframeError):
    """A load-case recipe requires a tagged node the model does not carry."""


class SchemaError(BikeframeError):
    """A delimited file has a missing, extra, or misnamed column."""


class ParseError(BikeframeError):
    """A delimited file cell failed to parse; message carries row/column."""


class EmptyInput(BikeframeError):
    """An analysis was requested on an empty set of usable rows."""


class InsufficientData(BikeframeError):
    """Fewer rows than the statistic needs (e.g. correlation on < 2 rows)."""
