"""
Client-side license enforcement.

A ReaderState belongs to one user. It holds the user's key pair, the
license server's verification key, a view of the shared revocation list and
the play counter of every license it has consumed. Checks run in a fixed
order and the first failing one is reported; a denial leaves the state
untouched.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Set, Union

from drm.crypto import CryptoSuite, KeyPair
from drm.errors import (
    BadSignature, Expired, PlaysExhausted, Revoked, WrongDevice, WrongUser,
)
from drm.rules import DeviceClass, License, parse_device_class
from utils.persistence import load_tree, save_tree


logger = logging.getLogger(__name__)


@dataclass
class ReaderState:
    """
    Attributes:
        user_id: Owner of this reader
        keys: The owner's key pair
        suite: Crypto suite shared with the servers
        server_public: License server verification key
        device_class: Device the reader runs on
        revoked: Revoked license ids (shared with the license server)
        plays_used: Successful consumptions per license id
        path: Where plays_used is persisted, if anywhere
    """
    user_id: str
    keys: KeyPair
    suite: CryptoSuite
    server_public: bytes
    device_class: DeviceClass = DeviceClass.DESKTOP
    revoked: Set[str] = field(default_factory=set)
    plays_used: Dict[str, int] = field(default_factory=dict)
    path: Optional[Path] = None

    def plays(self, license: License) -> int:
        return self.plays_used.get(license.license_id, 0)

    def check(self, license: License, now: int, device: DeviceClass):
        """
        Run every usage check without decrypting.

        Raises:
            BadSignature, Revoked, WrongUser, Expired, PlaysExhausted, WrongDevice
        """
        if not self.suite.verify(license.signature, license.signed_bytes(), self.server_public):
            raise BadSignature(f"license {license.license_id} does not verify")
        if license.license_id in self.revoked:
            raise Revoked(f"license {license.license_id} has been revoked")
        if license.user_id != self.user_id:
            raise WrongUser(f"license {license.license_id} belongs to {license.user_id!r}")
        rules = license.rules
        if rules.expires_at is not None and now > rules.expires_at:
            raise Expired(f"license expired at {rules.expires_at} (now {now})")
        if rules.max_plays is not None and self.plays(license) >= rules.max_plays:
            raise PlaysExhausted(f"all {rules.max_plays} play(s) used")
        if rules.device_class is not None and device != rules.device_class:
            raise WrongDevice(f"license is for {rules.device_class.value}, device is {device.value}")

    def consume(
        self,
        license: License,
        ciphertext: bytes,
        now: int,
        device: Union[DeviceClass, str, None] = None,
    ) -> bytes:
        """
        Play protected content under a license.

        Args:
            license: The signed license
            ciphertext: Content encrypted under the licensed content key
            now: Current timestamp
            device: Consuming device class (the reader's own by default)

        Returns:
            The plaintext

        Raises:
            Denial: The first failed check (see `check`), or DecryptFailure
        """
        device = parse_device_class(device) or self.device_class
        self.check(license, now, device)
        content_key = self.suite.unwrap_key(license.wrapped_key, self.keys.private)
        plaintext = self.suite.sym_decrypt(ciphertext, content_key)

        self.plays_used[license.license_id] = self.plays(license) + 1
        self.save()
        logger.info("reader %s: played %s (%d used)", self.user_id, license.content_id,
                    self.plays_used[license.license_id])
        return plaintext

    def save(self):
        if self.path:
            save_tree(self.path, {"user_id": self.user_id, "plays_used": dict(sorted(self.plays_used.items()))})

    def restore(self):
        """Reload plays_used from `path` if the file exists."""
        if self.path and self.path.exists():
            self.plays_used = dict(load_tree(self.path)["plays_used"])
