"""Exception types raised across the package."""


class ConfiguraError(Exception):
    """Base class for every error this package raises on purpose."""


class PreconditionFailed(ConfiguraError, ValueError):
    pass


# gf
class NotPrime(PreconditionFailed):
    pass


class NotPrimePower(PreconditionFailed):
    pass


class ZeroElement(PreconditionFailed):
    pass


class NotASubfield(PreconditionFailed):
    pass


class InternalInvariantViolation(ConfiguraError, RuntimeError):
    """Something that should be impossible happened; indicates a bug."""


# ruler
class BadMarks(PreconditionFailed):
    pass


class InvalidRuler(PreconditionFailed):
    pass


class NotCoprime(PreconditionFailed):
    pass


class NotASubset(PreconditionFailed):
    pass


class ModulusTooSmall(PreconditionFailed):
    pass


class EmptyRange(PreconditionFailed):
    pass


class ModulusBelowGolombBound(PreconditionFailed):
    pass


class NotADivisor(PreconditionFailed):
    pass


class OutOfTable(PreconditionFailed, LookupError):
    pass


# construct
class NotPrimitiveRoot(PreconditionFailed):
    pass


class BadS(PreconditionFailed):
    pass


class EmptyLineSet(PreconditionFailed):
    pass


class NotConstant(ConfiguraError):
    """r_k varies over the point set, so the set is not a true orbit."""


# matrix
class DeltaTooBig(PreconditionFailed):
    pass


class BadC(PreconditionFailed):
    pass


class BadF(PreconditionFailed):
    pass


class TOdd(PreconditionFailed):
    pass


class NotRegular(PreconditionFailed):
    pass


class MatchingFailed(InternalInvariantViolation):
    pass


class ShapeMismatch(PreconditionFailed):
    pass


# extend
class InvalidAggregate(PreconditionFailed):
    pass


class CapacityExceeded(ConfiguraError):
    def __init__(self, msg, max_theta):
        super().__init__(msg)
        self.max_theta = max_theta


class ShapeTooSmall(PreconditionFailed):
    pass


class WeightsNotBinary(PreconditionFailed):
    pass


# spectrum
class RegistryConflict(ConfiguraError):
    """A produced witness contradicts an embedded nonexistence fact."""


class ReplayMismatch(ConfiguraError):
    def __init__(self, step, reason):
        super().__init__(f"step {step}: {reason}")
        self.step = step
        self.reason = reason


class NotPopulated(PreconditionFailed):
    pass
