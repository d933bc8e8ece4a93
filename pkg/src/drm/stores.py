"""
Server-side DRM stores.

ContentServerStore holds the catalog (rules template plus encrypted
packages per rendition) and usage counters; it never sees a clear content
key. LicenseServerStore holds registered users with their public keys, the
content key store, issued and revoked licenses and the signing key pair.

Both stores serialize every request behind a lock and, when given a path,
write their whole state through to one canonical tree file after each
mutation.
"""

import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Set, Union

from constants.drms import DEFAULT_RENDITION
from drm.crypto import KeyPair
from drm.errors import (
    DuplicateContent, DuplicateUser, UnknownContent, UnknownLicense, UnknownUser,
)
from drm.rules import License, UsageRules, UserProfile
from utils.persistence import load_tree, save_tree


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class CatalogEntry:
    content_id: str
    rules_template: UsageRules
    packages: Dict[str, bytes]          # rendition name -> ciphertext

    def package_for(self, rendition: Optional[str]) -> bytes:
        """Ciphertext of a rendition, falling back to the default one."""
        return self.packages.get(rendition or DEFAULT_RENDITION, self.packages[DEFAULT_RENDITION])

    def listing(self) -> Dict[str, Any]:
        return {"content_id": self.content_id, "rules": self.rules_template.to_tree()}


@dataclass
class UsageCounters:
    downloads: int = 0
    consumptions: int = 0
    denials: Dict[str, int] = field(default_factory=dict)

    def to_tree(self) -> Dict[str, Any]:
        return {
            "downloads": self.downloads,
            "consumptions": self.consumptions,
            "denials": dict(sorted(self.denials.items())),
        }


class ContentServerStore:
    """Catalog of encrypted content plus per-content usage counters."""

    def __init__(self, path: Optional[PathLike] = None):
        self.path = Path(path) if path else None
        self.catalog: Dict[str, CatalogEntry] = {}
        self.usage: Dict[str, UsageCounters] = {}
        self._lock = threading.Lock()

    # -- catalog --------------------------------------------------------------

    def add_entry(self, content_id: str, rules_template: UsageRules, packages: Dict[str, bytes]) -> CatalogEntry:
        """
        Raises:
            DuplicateContent: If content_id is already listed
        """
        with self._lock:
            if content_id in self.catalog:
                raise DuplicateContent(f"content {content_id!r} is already in the catalog")
            entry = CatalogEntry(content_id, rules_template, dict(packages))
            self.catalog[content_id] = entry
            self.usage[content_id] = UsageCounters()
            self._persist()
        logger.info("catalog: listed %s (%d rendition(s))", content_id, len(packages))
        return entry

    def entry(self, content_id: str) -> CatalogEntry:
        try:
            return self.catalog[content_id]
        except KeyError:
            raise UnknownContent(f"no content {content_id!r} in the catalog") from None

    def __contains__(self, content_id: str) -> bool:
        return content_id in self.catalog

    def listing(self) -> List[Dict[str, Any]]:
        return [self.catalog[cid].listing() for cid in sorted(self.catalog)]

    # -- usage ----------------------------------------------------------------

    def counters(self, content_id: str) -> UsageCounters:
        self.entry(content_id)
        return self.usage[content_id]

    def record_download(self, content_id: str):
        with self._lock:
            self.counters(content_id).downloads += 1
            self._persist()

    def record_consumption(self, content_id: str):
        with self._lock:
            self.counters(content_id).consumptions += 1
            self._persist()

    def record_denial(self, content_id: str, reason: str):
        with self._lock:
            denials = self.counters(content_id).denials
            denials[reason] = denials.get(reason, 0) + 1
            self._persist()

    # -- persistence ----------------------------------------------------------

    def to_tree(self) -> Dict[str, Any]:
        return {
            "catalog": [
                {
                    "content_id": cid,
                    "rules": entry.rules_template.to_tree(),
                    "packages": {name: data.hex() for name, data in sorted(entry.packages.items())},
                }
                for cid, entry in sorted(self.catalog.items())
            ],
            "usage": {cid: counters.to_tree() for cid, counters in sorted(self.usage.items())},
        }

    def _persist(self):
        if self.path:
            save_tree(self.path, self.to_tree())

    @classmethod
    def load(cls, path: PathLike) -> "ContentServerStore":
        tree = load_tree(path)
        store = cls(path)
        for item in tree.get("catalog", []):
            store.catalog[item["content_id"]] = CatalogEntry(
                item["content_id"],
                UsageRules.from_tree(item["rules"]),
                {name: bytes.fromhex(data) for name, data in item["packages"].items()},
            )
        for cid, counters in tree.get("usage", {}).items():
            store.usage[cid] = UsageCounters(counters["downloads"], counters["consumptions"],
                                             dict(counters["denials"]))
        return store


@dataclass
class UserRecord:
    profile: UserProfile
    public_key: bytes


@dataclass
class KeyRecord:
    content_key: bytes
    rules_template: UsageRules


class LicenseServerStore:
    """Users, content keys, issued and revoked licenses, signing key pair."""

    def __init__(self, signing: KeyPair, path: Optional[PathLike] = None):
        self.signing = signing
        self.path = Path(path) if path else None
        self.users: Dict[str, UserRecord] = {}
        self.keys: Dict[str, KeyRecord] = {}
        self.licenses: Dict[str, License] = {}
        self.revoked: Set[str] = set()
        self._lock = threading.Lock()

    def add_user(self, profile: UserProfile, public_key: bytes) -> UserRecord:
        with self._lock:
            if profile.user_id in self.users:
                raise DuplicateUser(f"user {profile.user_id!r} is already registered")
            record = self.users[profile.user_id] = UserRecord(profile, public_key)
            self._persist()
        return record

    def user(self, user_id: str) -> UserRecord:
        try:
            return self.users[user_id]
        except KeyError:
            raise UnknownUser(f"no registered user {user_id!r}") from None

    def add_content_key(self, content_id: str, content_key: bytes, rules_template: UsageRules):
        with self._lock:
            if content_id in self.keys:
                raise DuplicateContent(f"a key for content {content_id!r} is already stored")
            self.keys[content_id] = KeyRecord(content_key, rules_template)
            self._persist()

    def key_record(self, content_id: str) -> KeyRecord:
        try:
            return self.keys[content_id]
        except KeyError:
            raise UnknownContent(f"no key stored for content {content_id!r}") from None

    def record_license(self, license: License):
        with self._lock:
            self.licenses[license.license_id] = license
            self._persist()
        logger.info("license server: issued %s for %s/%s", license.license_id,
                    license.user_id, license.content_id)

    def license(self, license_id: str) -> License:
        try:
            return self.licenses[license_id]
        except KeyError:
            raise UnknownLicense(f"no issued license {license_id!r}") from None

    def revoke(self, license_id: str):
        with self._lock:
            self.revoked.add(license_id)
            self._persist()
        logger.info("license server: revoked %s", license_id)

    def is_revoked(self, license_id: str) -> bool:
        return license_id in self.revoked

    def to_tree(self) -> Dict[str, Any]:
        return {
            "signing": {"private": self.signing.private.hex(), "public": self.signing.public.hex()},
            "users": [
                {"user_id": uid, "info": dict(sorted(rec.profile.info.items())),
                 "public_key": rec.public_key.hex()}
                for uid, rec in sorted(self.users.items())
            ],
            "keys": [
                {"content_id": cid, "content_key": rec.content_key.hex(), "rules": rec.rules_template.to_tree()}
                for cid, rec in sorted(self.keys.items())
            ],
            "licenses": [lic.to_tree() for _, lic in sorted(self.licenses.items())],
            "revoked": sorted(self.revoked),
        }

    def _persist(self):
        if self.path:
            save_tree(self.path, self.to_tree())

    @classmethod
    def load(cls, path: PathLike) -> "LicenseServerStore":
        tree = load_tree(path)
        signing = KeyPair(bytes.fromhex(tree["signing"]["private"]), bytes.fromhex(tree["signing"]["public"]))
        store = cls(signing, path)
        for item in tree.get("users", []):
            store.users[item["user_id"]] = UserRecord(UserProfile(item["user_id"], dict(item["info"])),
                                                      bytes.fromhex(item["public_key"]))
        for item in tree.get("keys", []):
            store.keys[item["content_id"]] = KeyRecord(bytes.fromhex(item["content_key"]),
                                                       UsageRules.from_tree(item["rules"]))
        for item in tree.get("licenses", []):
            lic = License.from_tree(item)
            store.licenses[lic.license_id] = lic
        store.revoked.update(tree.get("revoked", []))
        return store
