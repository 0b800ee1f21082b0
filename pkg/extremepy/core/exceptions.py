class ExtremePyError(Exception):
    ...


class InvalidParameterError(ExtremePyError, ValueError):
    ...


class InsufficientDataError(ExtremePyError):
    ...


class DegenerateDataError(ExtremePyError):
    ...


class UnsupportedModelError(ExtremePyError):
    ...


class NumericalFailure(ExtremePyError):
    ...


class ConfigurationError(ExtremePyError):
    ...
