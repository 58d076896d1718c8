"""Exception types shared across the package."""


class QuanvKitError(Exception):
    """Base class for all quanvkit errors."""


class QubitCountOutOfRange(QuanvKitError):
    """Requested qubit count outside the supported [1, 16] range."""


class IndexOutOfRange(QuanvKitError):
    """Qubit or channel index not valid for the object it addresses."""


class QubitMismatch(QuanvKitError):
    """Two objects that must share a qubit count do not."""


class TooFewQubits(QuanvKitError):
    """Circuit construction needs more qubits than were given."""


class ParamIndexOutOfRange(QuanvKitError):
    """Parameter index does not address a tunable rotation."""


class InvariantViolation(QuanvKitError):
    """A documented data invariant does not hold."""


class ImageSmallerThanKernel(QuanvKitError):
    """Image extent is smaller than the kernel; valid padding yields nothing."""


class ValueOutOfRange(QuanvKitError):
    """Numeric data outside its documented range."""


class LayerShapeUnderflow(QuanvKitError):
    """An intermediate feature map is smaller than the next layer's kernel."""


class UnsupportedFormat(QuanvKitError):
    """File format or dtype not supported by a loader."""


class CorruptFile(QuanvKitError):
    """File exists but its content cannot be decoded or is non-finite."""


class SchemaError(QuanvKitError):
    """Config document does not match the schema; message carries the field path."""


class InvalidGridPoint(QuanvKitError):
    """Benchmark grid point violates config invariants; skipped, not fatal."""


class InsufficientData(QuanvKitError):
    """Not enough records to evaluate any trend axis."""


class DegenerateData(QuanvKitError):
    """Data rank or label structure too poor for the requested analysis."""


class ShapeMismatch(QuanvKitError):
    """Arrays that must agree in shape do not."""


class NonOverlappingLabels(QuanvKitError):
    """Train and test label sets do not overlap as required."""
