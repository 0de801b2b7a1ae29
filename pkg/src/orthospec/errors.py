"""Exception hierarchy.

Every error carries the process exit code the command-line front end uses
for it: 2 for invalid input, 3 for numerical failure, 4 for a broken
internal invariant.
"""


class OrthospecError(Exception):
    exit_code = 1


class InputError(OrthospecError, ValueError):
    """Invalid input: bad config, a value outside an operation's domain."""

    exit_code = 2


class NumericalError(OrthospecError, ArithmeticError):
    """A computation could not reach its accuracy or completeness target."""

    exit_code = 3


class InvariantViolation(OrthospecError, AssertionError):
    exit_code = 4


# input / domain errors
class BadDeterminant(InputError):
    pass


class EmptyGenerators(InputError):
    pass


class NotHyperbolic(InputError):
    pass


class NotPrimitive(InputError):
    def __init__(self, message, root=None, power=None):
        super().__init__(message)
        self.root = root
        self.power = power


class NotExceptional(InputError):
    pass


class NotRegular(InputError):
    pass


class OutOfRegion(InputError):
    pass


class ModulusOutOfRange(InputError):
    pass


class BeyondCutoff(InputError):
    pass


class AlphaForbidden(InputError):
    pass


class DecayTooSlow(InputError):
    pass


class NotDisjoint(InputError):
    pass


class NotSimple(InputError):
    pass


class ConfigError(InputError):
    pass


# numerical failures
class RejectBoundary(NumericalError):
    """delta is numerically indistinguishable from 2."""


class DegenerateDelta(RejectBoundary):
    pass


class AccuracyLoss(NumericalError):
    pass


class Underflow(NumericalError):
    def __init__(self, message, log_value=None, sign=1.0):
        super().__init__(message)
        self.log_value = log_value
        self.sign = sign


class BudgetExceeded(NumericalError):
    pass


class IncompleteEnumeration(NumericalError):
    pass


class CutoffInsufficient(NumericalError):
    pass


class NonConvergent(NumericalError):
    pass
