"""Exception hierarchy."""


class OstroError(Exception):
    """Base class for every error raised by this package."""


# expression layer
class ExprSyntaxError(OstroError):
    def __init__(self, message, position=None, expected=()):
        self.position = position
        self.expected = tuple(expected)
        where = f" at position {position}" if position is not None else ""
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message}{where}{exp}")


class UnknownIdentifier(OstroError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown identifier {name!r}")


class NonIntegerExponent(OstroError):
    pass


class DivisionBySymbol(OstroError):
    pass


class UnsupportedSymbol(OstroError):
    pass


class CyclicSubstitution(OstroError):
    pass


class MissingBinding(OstroError):
    def __init__(self, symbol):
        self.symbol = symbol
        super().__init__(f"no value bound for {symbol}")


class DivisionByZero(OstroError, ZeroDivisionError):
    pass


class RankUnstable(OstroError):
    pass


class SingularBlock(OstroError):
    pass


# model / constraint layer
class ModelError(OstroError):
    pass


class NonlinearAccelerations(ModelError):
    pass


class NoJetFreeCombination(ModelError):
    pass


class NotProjectable(ModelError):
    pass


class ClosureDiverged(OstroError):
    pass


class InconsistentSystem(OstroError):
    pass


class MismatchReport(OstroError):
    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


# dynamics
class UnsolvableConstraintResidual(OstroError):
    pass


class PathViolatesRelation(OstroError):
    pass


class NonFiniteState(OstroError):
    pass


class EndpointMismatch(OstroError):
    pass


class TooFewSamples(OstroError):
    pass


class UnwritableOutput(OstroError):
    pass
