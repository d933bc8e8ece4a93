"""
Reference DRM system built on the F4MS engine.

Modules are imported directly (drm.service, drm.reader, ...); only the
domain types and errors are re-exported here.
"""

from .errors import (
    DrmError,
    Denial,
    BadSignature,
    Revoked,
    WrongUser,
    Expired,
    PlaysExhausted,
    WrongDevice,
    DecryptFailure,
)
from .rules import ContentItem, DeviceClass, License, UsageRules, UserProfile

__all__ = [
    "DrmError", "Denial", "BadSignature", "Revoked", "WrongUser", "Expired",
    "PlaysExhausted", "WrongDevice", "DecryptFailure",
    "ContentItem", "DeviceClass", "License", "UsageRules", "UserProfile",
]
