"""Error hierarchy.

Every error belongs to exactly one family and each family maps to one CLI
exit code: input (2), numerical (3), precondition (4).
"""


class LoewnerError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(LoewnerError):
    """Malformed or inconsistent input files."""

    exit_code = 2


class NumericalError(LoewnerError):
    """A numerical operation broke down (singular pencil, ill-posed solve, ...)."""

    exit_code = 3


class PreconditionError(LoewnerError):
    """Arguments violate a documented precondition."""

    exit_code = 4


# input family
class ParseError(InputError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class SchemaError(InputError):
    pass


# numerical family
class SingularPencil(NumericalError):
    pass


class SingularE(NumericalError):
    pass


class SingularLoewner(NumericalError):
    pass


class SingularStep(NumericalError):
    pass


class SingularTransform(NumericalError):
    pass


class SingularResolvent(NumericalError):
    pass


class PencilNotRegular(NumericalError):
    pass


class NullSpaceDimension(NumericalError):
    pass


class DenominatorZero(NumericalError):
    pass


class ClosedLoopSingularAtPoint(NumericalError):
    pass


# precondition family
class InvalidModel(PreconditionError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class TooFewPoints(PreconditionError):
    pass


class CoincidentPoints(PreconditionError):
    pass


class RankTooLarge(PreconditionError):
    pass


class NotConjugateClosed(PreconditionError):
    pass


class ConflictingData(PreconditionError):
    pass


class IndexOutOfRange(PreconditionError):
    pass


class OutOfRange(PreconditionError):
    pass


class ZeroLeadingInput(PreconditionError):
    pass


class InsufficientData(PreconditionError):
    pass


class InsufficientExcitation(PreconditionError):
    pass


class UnsupportedTruncation(PreconditionError):
    pass


class PlantZeroAtPoint(PreconditionError):
    pass


class ReferenceUnityAtPoint(PreconditionError):
    pass


class WeightZeroAtPoint(PreconditionError):
    pass


class BranchPoint(PreconditionError):
    pass
