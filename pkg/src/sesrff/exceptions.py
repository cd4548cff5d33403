"""Exception hierarchy.

Every error raised on bad input derives from :class:`ValueError` so callers
that only care about "invalid argument" can catch that; the numerical
failures additionally derive from :class:`numpy.linalg.LinAlgError`.
"""

import numpy as np


class SESError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(SESError, ValueError):
    pass


class UnsupportedDimensionError(SESError, ValueError):
    pass


class NumericDomainError(SESError, ValueError):
    pass


class ContractViolationError(SESError, ValueError):
    pass


class UndefinedMetricError(SESError, ValueError):
    pass


class LabelDomainError(SESError, ValueError):
    pass


class InvalidSplitError(SESError, ValueError):
    pass


class InvalidFoldsError(SESError, ValueError):
    pass


class UnsupportedMethodError(SESError, ValueError):
    pass


class DatasetParseError(SESError, ValueError):
    """Malformed line in a sparse text file."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class RankDeficientError(SESError, np.linalg.LinAlgError):
    """Normal equations are singular; a positive regularizer is needed."""


class SingularPriorError(SESError, np.linalg.LinAlgError):
    pass


class DegenerateSystemError(SESError, ValueError):
    pass
