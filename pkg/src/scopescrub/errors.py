"""Exception hierarchy shared across the pipeline."""


class ScopeScrubError(Exception):
    """Base class for all errors raised by this package."""


# --- media engine ---

class IoError(ScopeScrubError):
    """File missing, unreadable, or a filesystem operation failed."""


class NotAVideo(ScopeScrubError):
    """The file could not be decoded as a video."""


class ToolFailure(ScopeScrubError):
    """The external media tool exited with an error."""

    def __init__(self, message, stderr_excerpt=""):
        super().__init__(message)
        self.stderr_excerpt = stderr_excerpt


class DiskFull(ToolFailure):
    """The media tool failed because the target filesystem is full."""


class SegmentUnreadable(ScopeScrubError):
    """One of the input segments could not be probed."""

    def __init__(self, index, path, cause=""):
        super().__init__(f"segment {index} unreadable: {cause}")
        self.index = index
        self.path = path


class IntervalOutOfRange(ScopeScrubError):
    """A time interval lies outside the video timeline."""


class Cancelled(ScopeScrubError):
    """The operation was cancelled cooperatively."""


class Interrupted(ScopeScrubError):
    """A shutdown request stopped the job between stages."""


class VerificationFailed(ScopeScrubError):
    """A finished output did not pass de-identification checks."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# --- detector ---

class EmptyImage(ScopeScrubError):
    """Classifier received an image with no pixels."""


class ClassifierFailure(ScopeScrubError):
    """The frame classifier raised while scoring a frame."""


class ConfigInvalid(ScopeScrubError):
    """Detector or application configuration violates its invariants."""


# --- registry ---

class RegistryLocked(ScopeScrubError):
    """Another writer holds the registry lock."""


# --- orchestrator / service ---

class ValidationError(ScopeScrubError):
    """A case or request failed validation."""


class UnknownJob(ScopeScrubError):
    """No job exists with the given id."""


# --- benchmark ---

class MissingPair(ScopeScrubError):
    """A (machine, video) group lacks one of the two modes."""


class TooFewSamples(ScopeScrubError):
    """Not enough values to bootstrap a confidence interval."""


class BenchDataError(ScopeScrubError):
    """Benchmark records are empty or malformed."""
