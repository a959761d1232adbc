"""
Exception hierarchy for inobody.

Every error raised on purpose by the library derives from InobodyError, so the
CLI can tell input problems (exit 2) from failed computations (exit 1).
"""


class InobodyError(Exception):
    """Base class for all library errors."""


class DimensionError(InobodyError, ValueError):
    """Vector, matrix or polytope dimensions do not match, or an index is out of range."""


class DomainError(InobodyError, ValueError):
    """A parameter lies outside its validity range."""


class ParseError(InobodyError, ValueError):
    """Malformed JSON or text input."""


class BorelError(InobodyError):
    """Input was required to be Borel-fixed and is not."""


class GenericityError(InobodyError):
    """Random charts kept disagreeing after the retry cap."""


class ZariskiError(InobodyError):
    """No valid Zariski decomposition exists within the listed curves."""


class BodyError(InobodyError):
    """A body does not satisfy the preconditions of an extraction."""


INPUT_ERRORS = (DimensionError, DomainError, ParseError)
