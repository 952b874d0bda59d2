"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI: config errors -> 2, budget errors -> 3,
numeric errors -> 4.
"""


class OrbitLabError(Exception):
    """Base class for all package errors."""


class ConfigInvalid(OrbitLabError):
    """A config file / flag combination failed validation."""


class BudgetError(OrbitLabError):
    """An enumeration or search exceeded its configured budget."""


class BudgetExceeded(BudgetError):
    pass


class PlateauBudget(BudgetError):
    pass


class NumericError(OrbitLabError):
    """A numerical procedure failed to meet its contract."""


class ZeroSlot(NumericError):
    pass


class InvalidParameter(NumericError):
    pass


class PreconditionNorm(NumericError):
    pass


class OutOfRange(NumericError):
    pass


class DegenerateForm(NumericError):
    pass


class IllConditioned(NumericError):
    pass


class QuadratureDiverged(NumericError):
    pass


class TailTooLarge(NumericError):
    pass


class CutoffTooSmall(NumericError):
    pass


class SingularL(NumericError):
    pass


class CoordInconsistent(NumericError):
    pass


class TruncationUnsafe(NumericError):
    pass


class SlowConvergence(NumericError):
    pass


class MaxIterations(NumericError):
    pass


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigInvalid):
        return 2
    if isinstance(exc, BudgetError):
        return 3
    if isinstance(exc, OrbitLabError):
        return 4
    return 1
