"""Exception classes used throughout the denoising package."""

__all__ = ("CapacityError", "FormatError", "StageError", "TruncatedDataError")


class FormatError(ValueError):
    """Raised when a file (IDX, model, profile, PGM or configuration file)
    does not conform to its expected format.
    """

    pass


class TruncatedDataError(FormatError):
    """Raised when a file ends before the amount of data promised by its
    header could be read.
    """

    pass


class CapacityError(ValueError):
    """Raised when an exact enumeration is requested for a machine that is
    too large to be enumerated.
    """

    pass


class StageError(RuntimeError):
    """Raised when a stage of the experiment pipeline fails. The original
    exception is available as ``__cause__``.
    """

    stage: str

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage} stage failed: {message}")
        self.stage = stage
