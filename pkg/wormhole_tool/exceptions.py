__author__ = 'wormhole-tool developers'


class ToolError(Exception):
    exit_code = 1

    def as_dict(self):
        return {'error': type(self).__name__, 'message': str(self), 'exit_code': self.exit_code}


class UsageError(ToolError):
    exit_code = 2


class ConfigurationError(ToolError):
    exit_code = 2


class StaleInputError(ToolError):
    exit_code = 4


class NumericalError(ToolError):
    exit_code = 3


class DimensionError(NumericalError):
    pass


class NonFiniteStateError(NumericalError):
    def __init__(self, message, step=None, index=None):
        super(NonFiniteStateError, self).__init__(message)
        self.step = step
        self.index = index


class StepSizeUnderflowError(NumericalError):
    def __init__(self, message, location=None):
        super(StepSizeUnderflowError, self).__init__(message)
        self.location = location


class BracketError(NumericalError):
    pass


class SingularSystemError(NumericalError):
    pass


class UnstableRunError(NumericalError):
    def __init__(self, message, s=None, index=None, record=None):
        super(UnstableRunError, self).__init__(message)
        self.s = s
        self.index = index
        self.record = record


class ConvergenceError(NumericalError):
    pass


class ConsistencyError(NumericalError):
    pass


class InsufficientDataError(NumericalError):
    pass


class DomainError(NumericalError):
    pass


class NongenericThresholdError(NumericalError):
    pass
