"""Exception hierarchy shared across the package."""


class VmofError(Exception):
    """Base class for all errors raised by this package."""


class BudgetExhausted(VmofError):
    """No function evaluations remain in the global budget."""


class NonFiniteObjective(VmofError):
    """A problem returned NaN or an infinite objective value."""


class DimensionMismatch(VmofError, ValueError):
    pass


class OutOfBounds(VmofError, ValueError):
    pass


class IndivisibleGrouping(VmofError, ValueError):
    pass


class ConfigInvalid(VmofError, ValueError):
    pass


class UnknownProblem(VmofError, KeyError):
    pass


class NoAnalyticFront(VmofError):
    pass


class UnsupportedObjectiveCount(VmofError, ValueError):
    pass


class MissingCell(VmofError, KeyError):
    pass
