"""Exception types shared across the toolkit."""


class PatReconError(Exception):
    """Base class for all toolkit errors."""


class DuplicateSensor(PatReconError):
    """Two sensors snapped to the same grid node."""


class OutOfGrid(PatReconError):
    """A requested position falls outside the grid."""


class WrapContamination(PatReconError):
    """Simulation length would let periodic wrap-around reach a sensor."""


class DimensionMismatch(PatReconError):
    """Array dimensions do not agree with the declared geometry."""


class DegenerateCrop(PatReconError):
    """Augmentation could not find a valid crop window."""


class DegenerateRange(PatReconError):
    """Normalization of an image whose values are all equal."""


class CorruptManifest(PatReconError):
    """Dataset manifest is unreadable or structurally invalid."""


class ShapeMismatch(PatReconError):
    """Declared tensor shape disagrees with the stored byte length."""


class UnsupportedVersion(PatReconError):
    """Dataset manifest version is not supported by this reader."""
