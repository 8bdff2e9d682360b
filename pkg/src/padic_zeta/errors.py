"""Exception types raised across the package."""


class PadicZetaError(Exception):
    """Base class for all library errors."""


# p-adic substrate
class PrecisionError(PadicZetaError, ArithmeticError):
    """An operation needs more p-adic precision than its operands carry."""


class SimpleRootViolation(PadicZetaError):
    """A root could not be isolated as a simple root at working precision."""


# exact algebra
class DenominatorVanishesAtRoot(PadicZetaError, ZeroDivisionError):
    pass


class NotSquarefree(PadicZetaError, ValueError):
    pass


class PrecisionExhausted(PadicZetaError):
    pass


# dynamics
class PoleHit(PadicZetaError, ZeroDivisionError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"orbit hits a pole at iterate {index}")


class DegreeGuardExceeded(PadicZetaError, ValueError):
    pass


class IrrationalCriticalPoint(PadicZetaError, ValueError):
    pass


class DegenerateCriticalPoint(PadicZetaError, ValueError):
    pass


class HypothesisViolation(PadicZetaError, ValueError):
    """Input map violates a hypothesis of the identity being checked."""


class ConventionUnresolved(PadicZetaError):
    pass


# markov
class NotMarkovAtLevel(PadicZetaError):
    pass


class NonConstantDerivativeValuation(PadicZetaError):
    pass


class ExpansionViolation(PadicZetaError):
    pass


# transfer
class BranchInversionFailure(PadicZetaError):
    pass


class WeightVanishes(PadicZetaError, ValueError):
    pass


class HyperbolicityViolation(PadicZetaError):
    pass


class NonRepellingMultiplier(PadicZetaError, ValueError):
    pass


class MissingRootData(PadicZetaError, ValueError):
    pass


# hausdorff
class NonConvergence(PadicZetaError):
    pass


class Reducible(PadicZetaError, ValueError):
    pass


class NoRootInUnitInterval(PadicZetaError, ValueError):
    pass


# cli
class ConfigError(PadicZetaError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
