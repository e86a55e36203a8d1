"""
Exceptions raised by elastostrain.

All errors derive from `ValueError`, so code that only guards against bad values keeps working.
The CLI maps the families below onto exit codes.
"""
import copy
from typing import Optional


class ElastostrainError(ValueError):
    """Base class for all elastostrain errors."""


class ConfigurationError(ElastostrainError):
    """Parameters that cannot be honoured (window too long, sub-window too short, unknown key...)."""


class DomainError(ElastostrainError):
    """A value outside the domain of an operation (point outside the phantom, silent frame...)."""


class DegenerateInputError(ElastostrainError):
    """Correlation input with zero variance."""


class FrameMismatchError(ElastostrainError):
    """Pre and post frames that do not share shape or acquisition metadata."""


class EstimationError(ElastostrainError):
    """An estimator could not produce a value."""


class DegenerateROIError(ElastostrainError):
    """A region of interest whose values have no spread."""


class RFFParseError(ElastostrainError):
    """
    A malformed RFF file.

    >>> str(RFFParseError("bad magic 'RFX1'", offset=0))
    "bad magic 'RFX1' (at byte offset 0)"
    """

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


def with_context(error: ElastostrainError, context: str) -> ElastostrainError:
    """
    A copy of `error`, of the same class, whose message starts with `context`.

    >>> e = with_context(EstimationError("window failed"), "applied_strain=0.08 seed=1")
    >>> type(e).__name__, str(e)
    ('EstimationError', 'applied_strain=0.08 seed=1: window failed')
    """
    annotated = copy.copy(error)
    annotated.args = (f"{context}: {error}",)
    return annotated
