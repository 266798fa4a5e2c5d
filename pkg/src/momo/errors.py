"""Exception types raised across the package."""


class MomoError(Exception):
    """Base class for all library errors."""


class DataError(MomoError, ValueError):
    """Input data violates a documented precondition."""


class NonWatertightMesh(DataError):
    pass


class DegenerateMesh(DataError):
    pass


class CyclicParents(DataError):
    pass


class InvalidBodySpec(DataError):
    pass


class PartCountMismatch(DataError):
    pass


class TooShort(DataError):
    pass


class NonOrthonormal(DataError):
    pass


class DegenerateSwing(DataError):
    """Raised only in strict mode; see :func:`momo.momentum.swing_twist`."""


class BadCutoff(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class HeterogeneousCorpus(DataError):
    pass


class LengthMismatch(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class ZeroDisplacement(DataError):
    pass


class UndefinedMeasure(DataError):
    """A ratio-based measure has a zero denominator.

    ``reason`` names the offending quantity.
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class BadConfig(DataError):
    pass
