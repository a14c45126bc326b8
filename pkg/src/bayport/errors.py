"""Exception taxonomy.

Two branches matter to callers: :class:`DataError` (malformed or
insufficient input data; CLI exit code 3) and :class:`NumericalError`
(violated mathematical preconditions or failed factorizations; CLI exit
code 4).
"""

from __future__ import annotations

__all__ = [
    "BayportError",
    "DataError",
    "NumericalError",
    "NotSpd",
    "IndefiniteMatrix",
    "InvalidDf",
    "DegenerateSample",
    "InsufficientSample",
    "ZeroWealth",
    "InvalidSelector",
    "DegenerateVariance",
    "TooFewSamples",
    "InsufficientData",
    "ParseError",
    "NonMonotoneDates",
    "RaggedRow",
]


class BayportError(Exception):
    """Base class for every error raised by this package."""


class DataError(BayportError):
    """Malformed, inconsistent, or insufficient input data."""


class NumericalError(BayportError):
    """A mathematical precondition failed or a factorization broke down."""


class NotSpd(NumericalError):
    """Matrix is not symmetric positive definite."""


class IndefiniteMatrix(NumericalError):
    """Symmetric matrix has an eigenvalue too negative to be rounding noise."""


class InvalidDf(NumericalError):
    """Degrees-of-freedom parameter out of its valid range."""


class DegenerateSample(NumericalError):
    """Sample covariance is singular (too few rows, collinear columns, ...)."""


class InsufficientSample(NumericalError):
    """Too few observations for the requested posterior degrees of freedom."""


class ZeroWealth(NumericalError):
    """Current wealth is zero, so the weight scaling factor is undefined."""


class InvalidSelector(NumericalError):
    """Selector matrix is not full row rank with at most as many rows as assets."""


class DegenerateVariance(NumericalError):
    """A variance required for standardization is zero or negative."""


class TooFewSamples(NumericalError):
    """Batch is too small for the requested statistic."""


class InsufficientData(DataError):
    """Dataset is too short for the requested window/horizon layout."""


class ParseError(DataError):
    """Unparseable cell or malformed CSV structure."""


class NonMonotoneDates(DataError):
    """Date column is not strictly ascending."""


class RaggedRow(DataError):
    """CSV row width differs from the header width."""
