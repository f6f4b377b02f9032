"""Exception hierarchy shared across the toolchain.

Every error carries a short machine-readable ``category`` used by the CLI for
exit codes and by the HTTP service for error payloads.
"""


class PipelineError(Exception):
    """Base class for all toolchain errors."""

    category = "error"


class NetworkParseError(PipelineError):
    category = "network-parse"


class ProjectionError(PipelineError):
    category = "projection"


class GeometryError(PipelineError):
    category = "geometry"


class UnknownJunctionError(PipelineError):
    category = "unknown-junction"


class EmptyNetworkError(PipelineError):
    category = "empty-network"


class ToleranceExceeded(PipelineError):
    """Nearest junction found but farther than the matching tolerance.

    Recoverable: carries the best candidate so callers can confirm and retry
    with a wider tolerance.
    """

    category = "tolerance"

    def __init__(self, junction_id, distance, tol):
        super().__init__(
            f"nearest junction {junction_id!r} is {distance:.2f} m away "
            f"(tolerance {tol:.2f} m)"
        )
        self.junction_id = junction_id
        self.distance = distance
        self.tol = tol


class SchemaError(PipelineError):
    category = "schema"


class SchemaDriftError(SchemaError):
    """Remote payload no longer matches the configured column mapping."""

    category = "schema-drift"

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class WindowAlignmentError(PipelineError):
    category = "window-alignment"

    def __init__(self, message, nearest_start=None, nearest_end=None):
        super().__init__(message)
        self.nearest_start = nearest_start
        self.nearest_end = nearest_end


class WindowDataError(PipelineError):
    """Requested window covers bins that do not exist in the dataset."""

    category = "no-data"

    def __init__(self, message, covered=(), missing=()):
        super().__init__(message)
        self.covered = list(covered)
        self.missing = list(missing)


class TransportError(PipelineError):
    category = "transport"

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class RateLimitError(TransportError):
    category = "rate-limit"


class BoundingBoxError(PipelineError):
    category = "bbox"


class BoundingBoxTooLarge(BoundingBoxError):
    category = "bbox-too-large"


class ToolMissingError(PipelineError):
    category = "tool-missing"


class ConversionError(PipelineError):
    category = "conversion"

    def __init__(self, message, stderr=""):
        super().__init__(message)
        self.stderr = stderr


class VehicleIdError(PipelineError):
    category = "vehicle-id"


class DuplicateFlowIdError(PipelineError):
    category = "duplicate-flow-id"


class FlowCompileError(PipelineError):
    category = "flow-compile"


class VehrouteParseError(PipelineError):
    category = "vehroute-parse"


class ComparisonError(PipelineError):
    category = "comparison"


class TraciConnectionError(PipelineError):
    category = "traci-connect"


class TraciProtocolError(PipelineError):
    category = "traci-protocol"


class TraciCommandError(PipelineError):
    """Server answered a command with a non-OK status."""

    category = "traci-command"

    def __init__(self, command, message):
        super().__init__(f"command 0x{command:02x} failed: {message}")
        self.command = command


class ManifestError(PipelineError):
    category = "manifest"
