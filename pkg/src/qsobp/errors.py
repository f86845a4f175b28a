"""Exception types shared across the package."""


class QsobpError(Exception):
    """Base class for all package-specific errors."""


class NegativeEntryError(QsobpError):
    """A probability entry is below the negativity tolerance."""


class NotNormalizedError(QsobpError):
    """Probability entries do not sum to one within tolerance."""


class DimensionMismatchError(QsobpError):
    """Operands have incompatible dimensions."""


class SizeOverflowError(QsobpError):
    """A configuration enumeration would exceed the configured cap."""


class PartitionIndexError(QsobpError):
    """A cell index does not belong to the expected partition class."""


class EmptyCompatibleSetError(QsobpError):
    """Internal invariant violation: a compatible set came out empty.

    Cannot happen for valid inputs, since the mother cell is always
    compatible with itself; raised defensively.
    """


class FixedPointInputError(QsobpError):
    """A limit predictor was called with an initial point that is already fixed."""


class CriticalLineError(QsobpError):
    """Parameters sit on a critical line where the requested closed form
    does not apply; the one-dimensional critical-line map must be used."""


class SchemaError(QsobpError):
    """A JSON document does not match the expected schema."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
