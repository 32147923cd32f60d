"""Exception types shared across the toolkit."""


class SslInstructError(Exception):
    """Base class for all toolkit errors."""


class DecodeError(SslInstructError):
    """Raised when an image stream cannot be decoded to RGB8."""


class InvalidAngle(SslInstructError):
    """Raised for rotation angles outside {0, 90, 180, 270}."""


class DegenerateImage(SslInstructError):
    """Raised when an image is too small for the requested operation."""


class PointOutOfBounds(SslInstructError):
    """Raised when an annotation point lies outside the image."""


class WindowOutOfBounds(SslInstructError):
    """Raised when a pixel neighborhood extends past the image border."""


class RejectionExhausted(SslInstructError):
    """Raised when rejection sampling hits its draw budget. Callers skip the image."""


class GrayscaleSource(SslInstructError):
    """Raised when a colorization source image is (near-)grayscale."""


class EmptyRegion(SslInstructError):
    """Raised when a correspondence region contains no candidate patches."""


class RegionTooSmall(SslInstructError):
    """Raised when a region cannot supply a target plus two distinct distractors."""


class DuplicateId(SslInstructError):
    """Raised when sample ids collide during mixing."""


class SchemaError(SslInstructError):
    """Raised on manifest schema violations.

    Carries the record index and field when the violation is local to one record.
    """

    def __init__(self, message, index=None, field=None):
        if index is not None:
            message = f"record {index}: {message}"
        super().__init__(message)
        self.index = index
        self.field = field
