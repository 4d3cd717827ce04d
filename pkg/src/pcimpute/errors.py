"""Exception hierarchy shared by every module."""


class PCImputeError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PCImputeError, ValueError):
    """Invalid model, process or distribution parameters."""


class StructuralError(PCImputeError, ValueError):
    """Arrays that should be aligned are not (length mismatch, wrong period)."""


class ArityError(PCImputeError, ValueError):
    """Wrong number or kind of auxiliary arguments."""


class SampleTooShortError(PCImputeError, ValueError):
    """The sample does not contain enough blocks or control observations."""


class UndefinedEstimateError(PCImputeError, ArithmeticError):
    """An estimator saw no qualifying events, so its value is undefined."""


class UnsupportedError(PCImputeError, NotImplementedError):
    """No closed form or joint law is available for this combination."""
