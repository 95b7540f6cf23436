"""Exception hierarchy shared by every estimator and loader."""


class DepmeterError(Exception):
    """Base class for all package errors."""


class ShapeError(DepmeterError, ValueError):
    pass


class ConstantColumn(DepmeterError, ValueError):
    pass


class CapabilityError(DepmeterError, ValueError):
    """A measure was asked for an arity or conditioning set it does not support."""


class ParamRange(DepmeterError, ValueError):
    pass


class NotPositiveDefinite(ParamRange):
    pass


class UnknownExperiment(DepmeterError, KeyError):
    pass


class NumericDegeneracy(DepmeterError, ArithmeticError):
    """Base for inputs on which a statistic is mathematically undefined."""


class DegenerateGeometry(NumericDegeneracy):
    pass


class DegenerateBlock(NumericDegeneracy):
    pass


class DegenerateResiduals(NumericDegeneracy):
    pass


class DegenerateRanks(NumericDegeneracy):
    pass


class SingularConditioning(NumericDegeneracy):
    pass


class NormalizationDegenerate(NumericDegeneracy):
    pass


class SchemaError(DepmeterError, ValueError):
    pass


class WindowMismatch(SchemaError):
    pass


class WindowMismatchWarning(UserWarning):
    pass
