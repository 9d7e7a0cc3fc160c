"""Exception taxonomy shared across the pipeline."""


class BuildingClfError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGeometryError(BuildingClfError):
    """Degenerate, self-intersecting, or otherwise unusable geometry."""


class InvalidInputError(BuildingClfError):
    """Operation called with arguments outside its contract."""


class InvalidConfigError(BuildingClfError):
    """Configuration values that cannot be honored (bad ratios, thresholds...)."""


class InvalidStateError(BuildingClfError):
    """Operation requires state that is absent (empty index, empty mask...)."""


class DataError(BuildingClfError):
    """Malformed input data: unknown labels, broken files, checksum mismatch."""


class TrainingDivergedError(BuildingClfError):
    """Non-finite loss or gradient encountered during optimization."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class UndefinedValueError(BuildingClfError):
    """Quantity is undefined for the given inputs (e.g. kappa at p_e = 1)."""
