"""Exception hierarchy.

Everything raised on purpose derives from :class:`CltkError`; the CLI maps
:class:`UsageError` to exit status 2 and every other subclass to 1.
"""


class CltkError(Exception):
    """Base class for computation errors."""


class UsageError(CltkError, ValueError):
    pass


# forms
class MissingIndex(CltkError, ValueError):
    pass


class HeckeViolation(CltkError, ValueError):
    pass


class NotNormalized(CltkError, ValueError):
    pass


class IndexOutOfRange(CltkError, IndexError):
    pass


class InvalidForm(CltkError, ValueError):
    pass


# analytic / lfunc
class PoleAtNonpositiveInteger(CltkError, ValueError):
    pass


class PoleAtOne(CltkError, ValueError):
    pass


class GammaPole(CltkError, ValueError):
    pass


class TruncationBudgetExceeded(CltkError, RuntimeError):
    pass


class CoefficientTableTooSmall(CltkError, ValueError):
    def __init__(self, msg: str, needed: int | None = None):
        super().__init__(msg)
        self.needed = needed


# rankin
class OutsideDomain(CltkError, ValueError):
    pass


class FitIllConditioned(CltkError, RuntimeError):
    pass


class RadiiInvalid(CltkError, ValueError):
    pass


# mainterm / levinson
class DegenerateShift(CltkError, ValueError):
    pass


class BadNormalization(CltkError, ValueError):
    pass


class NonpositiveR(CltkError, ValueError):
    pass
