"""Exception types raised by the pipeline stages."""


class ScanPlanError(Exception):
    """Base class for all library-specific errors."""


class ValidationError(ScanPlanError):
    """Invalid input data or configuration (CLI exit code 2)."""


class StageError(ScanPlanError):
    """A pipeline stage failed while processing valid input (CLI exit code 3)."""


# --- ingest ---------------------------------------------------------------

class MalformedRecord(ValidationError):
    def __init__(self, reason, line=None):
        self.line = line
        self.reason = reason
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


class UnsortedTimestamps(ValidationError):
    pass


class EmptyLog(ValidationError):
    pass


class MissingPose(StageError):
    def __init__(self, timestamp):
        self.timestamp = timestamp
        super().__init__(f"no pose for scan timestamp {timestamp!r}")


# --- registration ---------------------------------------------------------

class IcpDiverged(StageError):
    def __init__(self, message, pair_index=None):
        self.pair_index = pair_index
        if pair_index is not None:
            message = f"scan pair {pair_index}: {message}"
        super().__init__(message)


class InsufficientOverlap(StageError):
    def __init__(self, message, pair_index=None):
        self.pair_index = pair_index
        if pair_index is not None:
            message = f"scan pair {pair_index}: {message}"
        super().__init__(message)


class NoOverlap(StageError):
    pass


class DegenerateGeometry(StageError):
    pass


# --- preprocess / segmentation ---------------------------------------------

class CloudTooSmall(ValidationError):
    pass


class NoPlaneFound(StageError):
    pass


# --- planning ---------------------------------------------------------------

class UnreachableStandoff(StageError):
    pass


class EmptySurface(StageError):
    pass


class NoPath(StageError):
    def __init__(self, message, leg_index=None):
        self.leg_index = leg_index
        if leg_index is not None:
            message = f"leg {leg_index}: {message}"
        super().__init__(message)


class StartOrGoalOccupied(StageError):
    pass


class StopPointBlocked(StageError):
    def __init__(self, message, stop_index=None):
        self.stop_index = stop_index
        if stop_index is not None:
            message = f"stop {stop_index}: {message}"
        super().__init__(message)


# --- boundary editing --------------------------------------------------------

class NonPlanarEdit(ValidationError):
    pass


class SelfIntersectingPolygon(ValidationError):
    pass
