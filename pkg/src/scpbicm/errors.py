"""Exception hierarchy shared by all scpbicm modules."""


class ScpBicmError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(ScpBicmError):
    """Submatrix dimensions disagree with the base matrix."""


class SpreadingMismatch(ScpBicmError):
    """Edge-spreading submatrices do not sum to the base matrix."""


class InvalidLength(ScpBicmError):
    """Coupling length does not exceed the coupling width."""


class LiftTooSmall(ScpBicmError):
    """Lift factor cannot separate parallel protograph edges."""


class RankDeficiencyUnresolved(ScpBicmError):
    """GF(2) elimination could not produce a systematic encoder."""


class UnsupportedOrder(ScpBicmError):
    """No constellation of the requested order/shape exists."""


class UnknownMapper(ScpBicmError):
    """Requested labeling is not a built-in construction."""


class BlockMismatch(ScpBicmError):
    """Length is not divisible into the required bit blocks."""


class ProfileMismatch(ScpBicmError):
    """Protection profile does not fit the interleaving scheme."""


class LengthMismatch(ScpBicmError):
    """Input length disagrees with the interleaver length."""


class DomainError(ScpBicmError):
    """Argument outside the mathematical domain of the function."""


class BracketError(ScpBicmError):
    """Search bracket does not enclose a threshold."""


class ConfigError(ScpBicmError):
    """Experiment configuration failed validation."""


class KindMismatch(ScpBicmError):
    """Results of different kinds cannot be compared."""
