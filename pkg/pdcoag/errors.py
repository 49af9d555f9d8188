"""Error types raised by pdcoag.

All errors derive from ValueError so callers that only care about bad input can
catch that, while the CLI maps the whole family to exit code 2.
"""

from enum import Enum


class ErrorKind(Enum):
    """Kinds of failure for differentiated handling."""

    DOMAIN = "domain"  # argument outside its mathematical domain
    CONSISTENCY = "consistency"  # masses that do not add up
    NUMERIC = "numeric"  # root finding or special function failure
    SIZE = "size"  # combinatorial guard
    UNSUPPORTED = "unsupported"  # valid parameters without a construction
    TRUNCATION = "truncation"  # lazy extension ran past max_atoms
    USAGE = "usage"  # caller misuse of a statistical test


class PDError(ValueError):
    """Base class for pdcoag errors."""

    kind: ErrorKind = ErrorKind.DOMAIN


class DomainError(PDError):
    kind = ErrorKind.DOMAIN


class ConsistencyError(PDError):
    kind = ErrorKind.CONSISTENCY


class NumericError(PDError):
    kind = ErrorKind.NUMERIC


class SizeError(PDError):
    kind = ErrorKind.SIZE


class UnsupportedParametersError(PDError):
    kind = ErrorKind.UNSUPPORTED


class TruncationError(PDError):
    kind = ErrorKind.TRUNCATION


class UsageError(PDError):
    kind = ErrorKind.USAGE
