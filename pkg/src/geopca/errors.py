"""Exception types.  Each derives from the builtin it refines so callers can catch broadly."""


class ShapeError(ValueError):
    """Array dimensions do not fit the operation."""


class RankError(ValueError):
    """A requested component lies in the numerically null part of the spectrum."""


class UndefinedMeasureError(ValueError):
    """A ratio was requested on data with zero total variance."""


class FormatError(ValueError):
    """A container file is malformed."""


class VersionError(FormatError):
    pass


class ChecksumError(FormatError):
    pass
