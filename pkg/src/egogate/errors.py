"""Exception types raised across the package."""


class EgogateError(Exception):
    """Base class for all errors raised by egogate."""


class WavFormatError(EgogateError, ValueError):
    """The file is not a WAV file this reader understands."""


class ClipTooShortError(EgogateError, ValueError):
    """The clip is shorter than one analysis window."""


class TrainingError(EgogateError, RuntimeError):
    """Training could not run or diverged."""
