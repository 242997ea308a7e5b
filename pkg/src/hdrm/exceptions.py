"""Exception hierarchy shared by the library and the command line."""


class HdrmError(Exception):
    """Base class for all data and contract errors raised by hdrm."""


class DataError(HdrmError, ValueError):
    """Input data cannot be turned into a valid dataset."""


class DimensionError(HdrmError, ValueError):
    """Matrix or dataset shapes do not conform."""


class SampleSizeError(HdrmError, ValueError):
    """A group is too small for the requested estimator."""


class DegenerateError(HdrmError, ArithmeticError):
    """The statistic cannot be formed (zero hypothesis, zero variance estimate, ...)."""


class BudgetError(HdrmError, ValueError):
    """A subsample budget expression cannot be parsed or resolved."""
