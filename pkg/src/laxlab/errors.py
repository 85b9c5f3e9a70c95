"""Exception types raised across laxlab."""


class LaxLabError(Exception):
    pass


class NonTraceless(LaxLabError, ValueError):
    pass


class SingularMatrix(LaxLabError, ValueError):
    pass


class LengthMismatch(LaxLabError, ValueError):
    pass


class JetOrderTooLow(LaxLabError, ValueError):
    pass


class ZeroSpectralParameter(LaxLabError, ValueError):
    pass


class InvalidIndex(LaxLabError, ValueError):
    pass


class NonConstantRatio(LaxLabError):
    def __init__(self, message, per_monomial=None):
        super().__init__(message)
        self.per_monomial = per_monomial or {}


class InsufficientSamples(LaxLabError, ValueError):
    pass


class NumericalBlowup(LaxLabError, FloatingPointError):
    pass


class CflViolation(LaxLabError, ValueError):
    pass


class CflWarning(UserWarning):
    pass


class ParseError(LaxLabError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ValidationError(LaxLabError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message
