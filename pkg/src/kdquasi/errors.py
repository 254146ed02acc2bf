"""Exception hierarchy shared by every module."""

from __future__ import annotations


class KDError(ValueError):
    """Base class for all validation and solver failures raised here."""


class DimensionMismatch(KDError):
    pass


class NotHermitian(KDError):
    pass


class DegenerateSpectrum(KDError):
    pass


class NotPositive(KDError):
    pass


class TraceNotOne(KDError):
    pass


class NotInDY(KDError):
    """Some level set of the conditioning variable carries zero probability."""


class LabelNotInRange(KDError):
    pass


class VanishingOverlap(KDError):
    """An eigenvector of A is (numerically) orthogonal to an eigenvector of B."""

    def __init__(self, a: int, b: int, magnitude: float):
        self.a = a
        self.b = b
        self.magnitude = magnitude
        super().__init__(
            f"overlap |<phi_a[{a}], phi_b[{b}]>| = {magnitude:.3e} is below tolerance"
        )


class SingularGram(KDError):
    pass


class PairMismatch(KDError):
    pass


class FrameDegenerated(KDError):
    pass


class MissingDual(KDError):
    pass


class NotInDB(KDError):
    """The state gives zero weight to some eigenvector of the conditioning observable."""


class NotBornCompatible(KDError):
    pass


class NormalizationError(KDError):
    pass
