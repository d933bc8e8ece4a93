"""
DRMS component catalogue, protocol tags and demo scenario configuration.

Contains the ten business-model components with their behavior names,
the six protocol messages in issuance order, and the scripted demo world.
"""


# =============================================================================
# Component Catalogue
# =============================================================================
# Component id -> display name and behavior. The ids are those used by
# systems/drms_business_model.f4ms.

DRMS_COMPONENTS = {
    "db": {"name": "Database", "behavior": "database"},
    "browser": {"name": "Browser", "behavior": "browser"},
    "webapp": {"name": "Web application", "behavior": "web_application"},
    "license_srv": {"name": "License server", "behavior": "license_server"},
    "license_gen": {"name": "License generator", "behavior": "license_generator"},
    "license_enc": {"name": "Encryption license", "behavior": "license_encryption"},
    "adapter": {"name": "Smart adapter", "behavior": "smart_adapter"},
    "keygen": {"name": "Key generator", "behavior": "key_generator"},
    "content_enc": {"name": "Content encryption", "behavior": "content_encryption"},
    "reader": {"name": "Reader", "behavior": "reader"},
}

DRMS_BEHAVIOR_NAMES = frozenset(c["behavior"] for c in DRMS_COMPONENTS.values())

DRMS_SYSTEM_FILE = "drms_business_model.f4ms"


# =============================================================================
# Issuance Protocol
# =============================================================================
# Data tags of the six protocol messages, in the order they must appear.

PROTOCOL_STEPS = (
    ("content_request", "User requests a digital content"),
    ("info_demand", "Content server asks for user information"),
    ("user_info", "User fills in the requested information"),
    ("license_request", "Content server requests a license"),
    ("license", "License server generates, wraps and signs the license"),
    ("authorization", "Content server delivers license and protected content"),
)

PROTOCOL_TAGS = tuple(tag for tag, _ in PROTOCOL_STEPS)

# Branch labels emitted on the browser / web application guard ports
ROUTE_REQUEST = "request"
ROUTE_DELIVER = "deliver"
ROUTE_USER = "user"
ROUTE_LICENSE = "license"
ROUTE_CONTENT = "content"

DEFAULT_RENDITION = "default"


# =============================================================================
# Demo World
# =============================================================================

DEMO_USER_CONFIG = {
    "user_id": "alice",
    "name": "Alice",
    "device_class": "desktop",
}

DEMO_CONTENT_CONFIG = {
    "content_id": "song-001",
    "plaintext": b"F4MS demo track: twelve bars of protected audio",
    "renditions": {
        "mobile": b"F4MS demo track (mobile cut)",
    },
    "rules": {"expires_at": 100, "max_plays": 3, "device_class": None},
}

RENEWAL_EXTENSION = 100     # renewed licenses expire this long after max(now, old expiry)


DEMO_SCENARIO_CONFIG = {
    "issue": {
        "description": "Run the six-step issuance protocol",
        "plays": 0,
        "renew": False,
        "report": False,
    },
    "consume": {
        "description": "Issue a license, then play the content at --now",
        "plays": 1,
        "renew": False,
        "report": False,
    },
    "renew": {
        "description": "Issue, renew past the old expiry, then play with the new license",
        "plays": 1,
        "renew": True,
        "report": False,
    },
    "report": {
        "description": "Issue, play until the plays run out, then print the usage report",
        "plays": 4,
        "renew": False,
        "report": True,
    },
}


def get_scenario_config(name: str) -> dict:
    """
    Get configuration for a demo scenario.

    Args:
        name: Scenario name (case-insensitive): issue, consume, renew or report

    Returns:
        Configuration dict or None if not found
    """
    return DEMO_SCENARIO_CONFIG.get(name.lower())


def get_available_scenarios() -> list:
    """Get list of available demo scenario names."""
    return list(DEMO_SCENARIO_CONFIG.keys())


def get_component_name(component_id: str) -> str:
    """Display name of a DRMS component (the id itself if unknown)."""
    entry = DRMS_COMPONENTS.get(component_id)
    return entry["name"] if entry else component_id
