"""Exception types shared across the package."""


class QmcmcError(Exception):
    """Base class for all package-specific errors."""


class NotErgodic(QmcmcError):
    """Kernel has no unique strictly positive stationary distribution."""


class NotReversible(QmcmcError):
    """Kernel violates detailed balance with respect to the given distribution."""


class NotSymmetric(QmcmcError):
    """An operator that must be symmetric is not (encoding bug signal)."""


class NotUnitary(QmcmcError):
    """Matrix is not unitary, or a circuit containing measurements was used
    where a unitary is required."""


class AddressingError(QmcmcError):
    """Qubit indices or names collide or are out of range."""


class PostSelectImpossible(QmcmcError):
    """Requested post-selection branch has (numerically) zero probability."""


class ConstructionInvalid(QmcmcError):
    """A walk-operator construction failed its build-time self-test."""


class Unsupported(QmcmcError):
    """Requested decomposition or construction is outside the supported set."""


class SchemaError(QmcmcError):
    """Serialized object or reference dataset does not match the expected schema."""
