"""Exception types shared across the package."""


class QutritChipError(Exception):
    """Base class."""


class DimensionError(QutritChipError, ValueError):
    pass


class DomainError(QutritChipError, ValueError):
    pass


class NumericalError(QutritChipError, ArithmeticError):
    """Raised when a computation hits a singular or undefined point."""


class SingularConversionError(NumericalError):
    pass


class ResonanceSingularityError(NumericalError):
    pass


class NotAResonanceError(QutritChipError, ValueError):
    pass


class UndefinedEfficiencyError(NumericalError):
    pass


class SingularDesignError(NumericalError):
    pass


class UndefinedConditionalError(NumericalError):
    pass
