"""
Constants package for the F4MS engine.

This package provides centralized constants for:
- Implementation, connector and event kinds, numeric ranges, exit codes
- The DRMS component catalogue, protocol tags and demo scenarios

Usage:
    from constants import Kind, ConnectorKind, DEFAULT_STEP_LIMIT
    from constants.drms import PROTOCOL_TAGS, get_scenario_config
"""

from .kinds import (
    Kind,
    ALL_KINDS,
    Direction,
    ConnectorKind,
    SCHEDULING_CONNECTORS,
    PARALLELISM_CONNECTORS,
    EventKind,
    MICRO_UNITS,
    MAX_FRACTION_DIGITS,
    SECURITY_MIN,
    SECURITY_MAX,
    DEFAULT_STEP_LIMIT,
    DEFAULT_SEED,
    EXHAUSTIVE_FREE_LIMIT,
    EVALUATION_CHUNK,
    REPORT_ENTRY_LIMIT,
    ExitStatus,
    parse_kind,
    parse_connector_kind,
)

from .drms import (
    DRMS_COMPONENTS,
    DRMS_BEHAVIOR_NAMES,
    DRMS_SYSTEM_FILE,
    PROTOCOL_STEPS,
    PROTOCOL_TAGS,
    DEMO_USER_CONFIG,
    DEMO_CONTENT_CONFIG,
    DEMO_SCENARIO_CONFIG,
    RENEWAL_EXTENSION,
    get_scenario_config,
    get_available_scenarios,
    get_component_name,
)

__all__ = [
    # Kinds
    "Kind", "ALL_KINDS", "Direction",
    "ConnectorKind", "SCHEDULING_CONNECTORS", "PARALLELISM_CONNECTORS",
    "EventKind",
    "MICRO_UNITS", "MAX_FRACTION_DIGITS", "SECURITY_MIN", "SECURITY_MAX",
    "DEFAULT_STEP_LIMIT", "DEFAULT_SEED", "EXHAUSTIVE_FREE_LIMIT", "EVALUATION_CHUNK", "REPORT_ENTRY_LIMIT",
    "ExitStatus", "parse_kind", "parse_connector_kind",

    # DRMS
    "DRMS_COMPONENTS", "DRMS_BEHAVIOR_NAMES", "DRMS_SYSTEM_FILE",
    "PROTOCOL_STEPS", "PROTOCOL_TAGS",
    "DEMO_USER_CONFIG", "DEMO_CONTENT_CONFIG", "DEMO_SCENARIO_CONFIG", "RENEWAL_EXTENSION",
    "get_scenario_config", "get_available_scenarios", "get_component_name",
]
