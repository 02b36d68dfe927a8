"""Exception hierarchy.

Every domain failure derives from :class:`IrrevError` (itself a ``ValueError``)
so the CLI can map it to exit code 2 in one place.
"""


class IrrevError(ValueError):
    pass


class ZeroPolynomial(IrrevError):
    pass


class ZeroDenominator(IrrevError):
    pass


class InvalidDensity(IrrevError):
    pass


class AxisPole(InvalidDensity):
    pass


class NotNonnegative(InvalidDensity):
    pass


class NoStabilizingSolution(IrrevError):
    pass


RiccatiNoStabilizingSolution = NoStabilizingSolution


class RSingular(IrrevError):
    pass


class NotStrictlyProper(IrrevError):
    pass


class NotCoprime(IrrevError):
    pass


class NotHurwitz(IrrevError):
    pass


class PSingular(IrrevError):
    pass


class DegenerateOutput(IrrevError):
    pass


class NegativeLag(IrrevError):
    pass


class KIsMinusOne(IrrevError):
    pass


class Z0IsMinusOne(IrrevError):
    pass


class NotLossless(IrrevError):
    pass


class TooFewSamples(IrrevError):
    pass


class NonPositiveDt(IrrevError):
    pass


class AlgebraicLoop(IrrevError):
    pass


class UnstableClosedLoop(IrrevError):
    pass


class ZeroDirection(IrrevError):
    pass


class PathTooShort(IrrevError):
    pass
