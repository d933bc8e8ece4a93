"""
Enumerations and numeric constants for the F4MS engine.

Everything that the model, the engine and the partitioner agree on by name
lives here: implementation kinds, connector kinds, trace event kinds and the
fixed numeric ranges of cost annotations.
"""

from enum import Enum


# =============================================================================
# Implementation Kinds
# =============================================================================
# A component is realized either in software or in hardware. The string
# values are the literals used in system descriptions and CLI output.

class Kind(str, Enum):
    SOFTWARE = "SW"
    HARDWARE = "HW"

    def __str__(self) -> str:
        return self.value


ALL_KINDS = (Kind.SOFTWARE, Kind.HARDWARE)


# =============================================================================
# Port Directions
# =============================================================================

class Direction(str, Enum):
    INPUT = "input"
    OUTPUT = "output"


# =============================================================================
# Scheduling Connectors
# =============================================================================
# Sequence / ExclusiveChoice are scheduling connectors, Parallel /
# Synchronization are parallelism connectors.

class ConnectorKind(str, Enum):
    SEQUENCE = "seq"
    PARALLEL = "par"
    EXCLUSIVE_CHOICE = "xor"
    SYNCHRONIZATION = "sync"

    @property
    def title(self) -> str:
        return CONNECTOR_TITLES[self]


CONNECTOR_TITLES = {
    ConnectorKind.SEQUENCE: "Sequence",
    ConnectorKind.PARALLEL: "Parallel",
    ConnectorKind.EXCLUSIVE_CHOICE: "ExclusiveChoice",
    ConnectorKind.SYNCHRONIZATION: "Synchronization",
}

SCHEDULING_CONNECTORS = frozenset({ConnectorKind.SEQUENCE, ConnectorKind.EXCLUSIVE_CHOICE})
PARALLELISM_CONNECTORS = frozenset({ConnectorKind.PARALLEL, ConnectorKind.SYNCHRONIZATION})


# =============================================================================
# Trace Events
# =============================================================================

class EventKind(str, Enum):
    COMPONENT_START = "ComponentStart"
    COMPONENT_END = "ComponentEnd"
    TOKEN_MOVE = "TokenMove"
    MESSAGE_TRANSFER = "MessageTransfer"
    CHOICE_TAKEN = "ChoiceTaken"
    SYNC_COMPLETE = "SyncComplete"
    # Warning: last-writer-wins discarded a message at an input port
    MESSAGE_DROPPED = "MessageDropped"


# =============================================================================
# Numeric Ranges
# =============================================================================

MICRO_UNITS = 1_000_000         # 1 time/area/energy unit = 10^6 micro-units
MAX_FRACTION_DIGITS = 6         # decimals in descriptions carry at most 6 digits

SECURITY_MIN = 0
SECURITY_MAX = 5

DEFAULT_STEP_LIMIT = 10_000
DEFAULT_SEED = 0

EXHAUSTIVE_FREE_LIMIT = 24      # 2^24 mappings at most
EVALUATION_CHUNK = 4096         # mappings handed to the evaluator at a time
REPORT_ENTRY_LIMIT = 256        # best entries a search report keeps


# =============================================================================
# CLI Exit Status
# =============================================================================

class ExitStatus(int, Enum):
    SUCCESS = 0
    DIAGNOSTICS = 1
    USAGE = 2
    RUNTIME = 3


# =============================================================================
# Helper Functions
# =============================================================================

def parse_kind(text: str) -> Kind:
    """
    Convert a kind literal ("SW"/"HW", case-insensitive) to a Kind.

    Args:
        text: Kind literal

    Returns:
        The matching Kind

    Raises:
        ValueError: If the literal names no kind
    """
    try:
        return Kind(text.upper())
    except ValueError:
        raise ValueError(f"Unknown kind: {text!r} (expected SW or HW)") from None


def parse_connector_kind(text: str) -> ConnectorKind:
    """Convert a connector kind literal ("seq", "par", "xor", "sync")."""
    try:
        return ConnectorKind(text)
    except ValueError:
        raise ValueError(f"Unknown connector kind: {text!r}") from None
