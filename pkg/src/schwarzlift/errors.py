"""Exception hierarchy shared by every module."""


class SchwarzliftError(Exception):
    """Base class for all library errors."""


class DomainError(SchwarzliftError, ValueError):
    """An analytic expression was evaluated at a pole or on a branch cut."""

    def __init__(self, node, message="singular point", points=None):
        self.node = str(node)
        self.points = points
        super().__init__(f"{message} in sub-expression {self.node!r}")


class ParseError(SchwarzliftError, ValueError):
    def __init__(self, text, pos, message):
        self.text = text
        self.pos = pos
        pointer = " " * pos + "^"
        super().__init__(f"{message} at column {pos}\n  {text}\n  {pointer}")


class CriticalPoint(SchwarzliftError, ZeroDivisionError):
    """First derivative vanishes where a Schwarzian is requested."""


class DegenerateInput(SchwarzliftError, ValueError):
    pass


class ChartError(SchwarzliftError, ValueError):
    """Both h' and g' vanish, so neither chart is usable."""


class QuadratureError(SchwarzliftError, RuntimeError):
    pass


class PathError(SchwarzliftError, ValueError):
    pass


class BoundaryIndex(SchwarzliftError, IndexError):
    pass


class NegativeVariance(SchwarzliftError, ArithmeticError):
    pass


class InversionPole(SchwarzliftError, ZeroDivisionError):
    pass


class DisconjugacyFailure(SchwarzliftError, RuntimeError):
    def __init__(self, message, crossing=None):
        self.crossing = crossing
        super().__init__(message)


class NonconvergentLimit(SchwarzliftError, ArithmeticError):
    pass


class OutOfRange(SchwarzliftError, ValueError):
    pass


class MultipleCriticalPoints(SchwarzliftError, RuntimeError):
    def __init__(self, message, points=None):
        self.points = points
        super().__init__(message)


class InsufficientSamples(SchwarzliftError, ValueError):
    pass


class NotApplicable(SchwarzliftError, ValueError):
    pass


class ParamError(SchwarzliftError, ValueError):
    pass
