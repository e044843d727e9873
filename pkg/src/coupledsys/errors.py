"""Exception hierarchy.

Every error carries the process exit code the CLI reports for it:
2 for violated preconditions, 4 for numerical failures.
"""


class CoupledSystemError(Exception):
    exit_code = 1

    @property
    def code(self):
        return type(self).__name__


class PreconditionError(CoupledSystemError, ValueError):
    exit_code = 2


class NumericalError(CoupledSystemError, ArithmeticError):
    exit_code = 4


class ParameterOutOfRange(PreconditionError):
    pass


class NoCharacteristicFunction(PreconditionError):
    pass


class NotInSpace(PreconditionError):
    pass


class NotInRange(PreconditionError):
    pass


class NotEigenvalue(PreconditionError):
    pass


class NotOnLevelSet(PreconditionError):
    pass


class OnSpectrum(PreconditionError):
    pass


class DegenerateDerivative(PreconditionError):
    pass


class ConfigError(PreconditionError):
    pass


class PoleEvaluation(NumericalError):
    pass


class SpectrumHit(NumericalError):
    pass


class OverflowRisk(NumericalError):
    pass


class ToleranceNotMet(NumericalError):
    pass


class WindowOverflow(NumericalError):
    pass


class FitAmbiguous(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass
