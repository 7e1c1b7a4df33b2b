"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures to stable process exit statuses without a lookup table of its own.
"""


class CapacityError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class DimensionError(CapacityError, ValueError):
    """Array shapes do not agree."""

    exit_code = 2


class InvalidDistribution(CapacityError, ValueError):
    """A vector violates the probability simplex constraints."""

    exit_code = 2


class ChannelFileError(CapacityError, ValueError):
    """A channel file could not be parsed.

    ``line`` and ``column`` are 1-based positions when known.
    """

    exit_code = 2

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class SingularChannel(CapacityError):
    """The channel rows (or vectorized states) are not linearly independent."""

    exit_code = 3


class NoConvergence(CapacityError):
    """The Newton solve for the free natural parameters hit its iteration cap."""

    exit_code = 3


class SubsetSearchInconclusive(CapacityError):
    """No input subset passed the all-inputs optimality check.

    ``report`` holds the best lower bound found (a ``CapacityReport``).
    """

    exit_code = 4

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class RankDeficient(CapacityError):
    """A matrix logarithm was requested of a (numerically) singular matrix.

    ``index`` identifies the offending state of a cq channel when known.
    """

    exit_code = 5

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotHermitian(CapacityError, ValueError):
    exit_code = 2


class MaxIterExceeded(CapacityError):
    """An iterative solver ran out of iterations before meeting its tolerance.

    The best bounds reached are kept on ``lower``/``upper`` and the final
    input distribution on ``input_dist``.
    """

    exit_code = 6

    def __init__(self, message, lower=None, upper=None, input_dist=None, trace=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.input_dist = input_dist
        self.trace = trace


class NoSignChange(CapacityError, ValueError):
    """Bisection bracket does not straddle a root."""

    exit_code = 2
