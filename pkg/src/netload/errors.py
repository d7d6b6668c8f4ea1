"""Exception types shared across the toolkit.

Every error the public API can raise derives from NetloadError so callers
can catch the whole family with one clause. Validation failures carry the
offending field name when one is known, which the HTTP service and CLI
surface verbatim.
"""

from __future__ import annotations


class NetloadError(Exception):
    """Base class for all toolkit errors."""

    kind = "error"


class ValidationError(NetloadError):
    """A user-supplied parameter violates its contract."""

    kind = "validation-error"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class FrameLengthError(ValidationError):
    """Frame length P outside the legal [60, 1514] byte range."""

    kind = "invalid-frame-length"


class FeatureConflictError(ValidationError):
    """More than one generation feature (frames/duration/burst) supplied."""

    kind = "feature-conflict"


class TruncatedFrameError(NetloadError):
    """Raw frame bytes too short to be a valid Ethernet frame."""

    kind = "truncated-frame"


class EmptyPlanError(NetloadError):
    """The requested load/duration combination yields zero frames."""

    kind = "empty-plan"


class OvershootError(NetloadError):
    """Frame count was under-computed: one more frame would still fit."""

    kind = "overshoot-violation"


class PcapError(NetloadError):
    """Capture file is not readable as pcap."""

    kind = "bad-magic"


class TruncatedRecordError(PcapError):
    """Capture file ends mid-record."""

    kind = "truncated-record"

    def __init__(self, message: str, record_index: int):
        super().__init__(message)
        self.record_index = record_index


class EmptyCaptureError(NetloadError):
    """Measurement requires at least one captured frame."""

    kind = "empty-capture"


class NonMonotoneTimestampsError(NetloadError):
    """Captured timestamps go backwards."""

    kind = "non-monotone-timestamps"


class PortUnavailableError(NetloadError):
    """Transmit port could not be opened."""

    kind = "port-unavailable"


class SendFailureError(NetloadError):
    """Transmit aborted mid-run; partial frame count reported."""

    kind = "send-failure"

    def __init__(self, message: str, frames_sent: int = 0):
        super().__init__(message)
        self.frames_sent = frames_sent


class PortBusyError(NetloadError):
    """Another run currently owns the requested port."""

    kind = "port-busy"


class UnknownRunError(NetloadError):
    """No run record with the given id."""

    kind = "unknown-run"


class NotRunningError(NetloadError):
    """Operation requires a run in the running state."""

    kind = "not-running"
