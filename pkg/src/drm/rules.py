"""
DRM domain types: device classes, usage rules, content items, user
profiles and signed licenses.

A license is serialized in the canonical tree syntax with its keys in the
order license_id, content_id, user_id, rules, wrapped_key, signature. The
signed bytes are the single-line serialization of everything before the
signature field.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional

from drm.errors import InvalidRules
from sysdesc.tree import dumps_inline, loads


class DeviceClass(str, Enum):
    DESKTOP = "desktop"
    MOBILE = "mobile"
    READER_DEVICE = "reader_device"


def parse_device_class(value: Optional[str]) -> Optional[DeviceClass]:
    if value is None or isinstance(value, DeviceClass):
        return value
    try:
        return DeviceClass(value)
    except ValueError:
        raise InvalidRules(f"unknown device class {value!r}") from None


@dataclass(frozen=True)
class UsageRules:
    """
    Consumption constraints carried by a license.

    Attributes:
        expires_at: Last timestamp at which the content may be consumed
        max_plays: Number of successful consumptions allowed
        device_class: Device class the content is restricted to
    """
    expires_at: Optional[int] = None
    max_plays: Optional[int] = None
    device_class: Optional[DeviceClass] = None

    def validate(self) -> "UsageRules":
        """
        Raises:
            InvalidRules: If no rule is set or max_plays < 1
        """
        if self.expires_at is None and self.max_plays is None and self.device_class is None:
            raise InvalidRules("usage rules must set at least one of expires_at, max_plays, device_class")
        if self.max_plays is not None and self.max_plays < 1:
            raise InvalidRules(f"max_plays must be >= 1, got {self.max_plays}")
        return self

    def with_expiry(self, expires_at: int) -> "UsageRules":
        return replace(self, expires_at=expires_at)

    def to_tree(self) -> Dict[str, Any]:
        return {
            "expires_at": self.expires_at,
            "max_plays": self.max_plays,
            "device_class": self.device_class.value if self.device_class else None,
        }

    @classmethod
    def from_tree(cls, tree: Dict[str, Any]) -> "UsageRules":
        return cls(
            expires_at=tree.get("expires_at"),
            max_plays=tree.get("max_plays"),
            device_class=parse_device_class(tree.get("device_class")),
        )


@dataclass(frozen=True)
class ContentItem:
    content_id: str
    plaintext: bytes
    renditions: Dict[DeviceClass, bytes] = field(default_factory=dict)


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    info: Dict[str, str] = field(default_factory=dict)

    @property
    def device_class(self) -> DeviceClass:
        return parse_device_class(self.info.get("device_class", DeviceClass.DESKTOP.value))


@dataclass(frozen=True)
class License:
    license_id: str
    content_id: str
    user_id: str
    rules: UsageRules
    wrapped_key: bytes
    signature: bytes = b""

    def unsigned_tree(self) -> Dict[str, Any]:
        return {
            "license_id": self.license_id,
            "content_id": self.content_id,
            "user_id": self.user_id,
            "rules": self.rules.to_tree(),
            "wrapped_key": self.wrapped_key.hex(),
        }

    def signed_bytes(self) -> bytes:
        """The exact byte sequence covered by the signature."""
        return dumps_inline(self.unsigned_tree()).encode("utf-8")

    def to_tree(self) -> Dict[str, Any]:
        tree = self.unsigned_tree()
        tree["signature"] = self.signature.hex()
        return tree

    def serialize(self) -> bytes:
        return dumps_inline(self.to_tree()).encode("utf-8")

    @classmethod
    def from_tree(cls, tree: Dict[str, Any]) -> "License":
        return cls(
            license_id=tree["license_id"],
            content_id=tree["content_id"],
            user_id=tree["user_id"],
            rules=UsageRules.from_tree(tree["rules"]),
            wrapped_key=bytes.fromhex(tree["wrapped_key"]),
            signature=bytes.fromhex(tree.get("signature", "")),
        )

    @classmethod
    def deserialize(cls, data: bytes) -> "License":
        return cls.from_tree(loads(data.decode("utf-8"), "<license>"))

    def with_signature(self, signature: bytes) -> "License":
        return replace(self, signature=signature)
