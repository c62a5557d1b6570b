"""Exception types shared across the package."""


class SuperpixError(Exception):
    """Base class for all superpix errors."""


class PpmError(SuperpixError, ValueError):
    """Malformed, truncated or unsupported PPM/PGM data."""


class InvalidSettingsError(SuperpixError, ValueError):
    """Settings violate an invariant (e.g. more superpixels than pixels)."""


class DimensionMismatchError(SuperpixError, ValueError):
    """Two rasters that must share dimensions do not."""


class LabelCapacityError(SuperpixError, ValueError):
    """An output format cannot represent the label values present."""
