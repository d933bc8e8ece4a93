"""
DRM service facade.

Owns the crypto suite, both server stores and the users' key pairs, and
runs license issuance as an engine scenario over the DRMS business model.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, NamedTuple, Optional, Union

import numpy as np

from constants.drms import DEFAULT_RENDITION, DRMS_SYSTEM_FILE, PROTOCOL_TAGS
from constants.kinds import DEFAULT_SEED
from core.behaviors import default_registry
from core.engine import Engine, SimConfig
from core.graph import SystemModel
from core.trace import Trace
from drm.behaviors import Session, installed_content, session_states
from drm.crypto import CryptoSuite, KeyPair, ProductionSuite
from drm.errors import BadSignature, Denial, DrmError, DuplicateContent
from drm.reader import ReaderState
from drm.rules import ContentItem, License, UsageRules, UserProfile
from drm.stores import CatalogEntry, ContentServerStore, LicenseServerStore
from sysdesc.system import parse_system_file
from utils.logging import log_success


logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
SYSTEMS_DIR = PROJECT_ROOT / "systems"


def load_drms_model(path: Optional[Path] = None) -> SystemModel:
    """Parse the shipped DRMS business model (or another file using its behaviors)."""
    return parse_system_file(path or SYSTEMS_DIR / DRMS_SYSTEM_FILE, default_registry())


class Issuance(NamedTuple):
    license: License
    ciphertext: bytes
    trace: Trace


@dataclass(frozen=True)
class UsageReport:
    content_id: str
    downloads: int
    consumptions: int
    denials: Dict[str, int] = field(default_factory=dict)

    @property
    def total_denials(self) -> int:
        return sum(self.denials.values())

    def to_tree(self) -> Dict[str, Any]:
        return {
            "content_id": self.content_id,
            "downloads": self.downloads,
            "consumptions": self.consumptions,
            "denials": dict(sorted(self.denials.items())),
        }


def check_protocol_order(trace: Trace):
    """
    Verify the six protocol transfers appear once each, in order, at
    non-decreasing times.

    Raises:
        DrmError: If the trace breaks the issuance protocol
    """
    transfers = trace.transfers(PROTOCOL_TAGS)
    tags = tuple(e.detail["tag"] for e in transfers)
    if tags != PROTOCOL_TAGS:
        raise DrmError(f"protocol transfers out of order: {', '.join(tags) or 'none'}")
    times = [e.time for e in transfers]
    if times != sorted(times):
        raise DrmError("protocol transfer times decrease")


class DrmService:
    """
    Content server, license server and user key custody in one place.

    Usage:
        service = DrmService(DeterministicSuite(), seed=1)
        reader = service.register_user(UserProfile("alice", {"device_class": "desktop"}))
        service.submit_content(ContentItem("song", b"..."), UsageRules(max_plays=3))
        license, ciphertext, trace = service.run_issuance_protocol("alice", "song")
        plaintext = service.consume(reader, license, ciphertext, now=0)
    """

    def __init__(
        self,
        suite: Optional[CryptoSuite] = None,
        seed: int = DEFAULT_SEED,
        data_dir: Optional[Union[str, Path]] = None,
    ):
        """
        Args:
            suite: Crypto suite (production suite when None)
            seed: Seeds key generation, license ids and engine runs
            data_dir: Directory for write-through store files (memory only when None)
        """
        self.suite = suite or ProductionSuite()
        self.seed = seed
        self.data_dir = Path(data_dir) if data_dir else None
        self._rng = np.random.default_rng(seed)
        self._model: Optional[SystemModel] = None
        self._user_keys: Dict[str, KeyPair] = {}

        self.content_store = ContentServerStore(self._store_path("content_server"))
        self.license_store = LicenseServerStore(self.suite.generate_keypair(self._rng),
                                                self._store_path("license_server"))

    def _store_path(self, name: str) -> Optional[Path]:
        return self.data_dir / f"{name}.f4ms" if self.data_dir else None

    @property
    def model(self) -> SystemModel:
        if self._model is None:
            self._model = load_drms_model()
        return self._model

    # -- users ----------------------------------------------------------------

    def register_user(self, profile: UserProfile) -> ReaderState:
        """
        Register a user with a fresh key pair.

        Returns:
            The user's reader state

        Raises:
            DuplicateUser: If the user id is taken
        """
        keys = self.suite.generate_keypair(self._rng)
        self.license_store.add_user(profile, keys.public)
        self._user_keys[profile.user_id] = keys
        logger.info("registered user %s (%s)", profile.user_id, profile.device_class.value)
        return self.make_reader(profile.user_id)

    def make_reader(self, user_id: str) -> ReaderState:
        """A reader for a registered user, restoring persisted play counts if any."""
        record = self.license_store.user(user_id)
        reader = ReaderState(
            user_id=user_id,
            keys=self._user_keys[user_id],
            suite=self.suite,
            server_public=self.license_store.signing.public,
            device_class=record.profile.device_class,
            revoked=self.license_store.revoked,
            path=self._store_path(f"reader_{user_id}"),
        )
        reader.restore()
        return reader

    # -- content --------------------------------------------------------------

    def submit_content(self, item: ContentItem, rules_template: UsageRules) -> CatalogEntry:
        """
        Encrypt content under a fresh key and list it.

        The content server keeps only ciphertexts; the key goes to the
        license server's key store.

        Raises:
            DuplicateContent: If the content id is already known
            InvalidRules: If the rules template is empty or malformed
        """
        rules_template.validate()
        if item.content_id in self.content_store or item.content_id in self.license_store.keys:
            raise DuplicateContent(f"content {item.content_id!r} is already submitted")

        content_key = self.suite.gen_content_key(self._rng)
        packages = {DEFAULT_RENDITION: self.suite.sym_encrypt(item.plaintext, content_key)}
        for device_class, rendition in item.renditions.items():
            packages[device_class.value] = self.suite.sym_encrypt(rendition, content_key)

        self.license_store.add_content_key(item.content_id, content_key, rules_template)
        return self.content_store.add_entry(item.content_id, rules_template, packages)

    # -- issuance -------------------------------------------------------------

    def states_for(self, model: SystemModel, user_id: str, content_id: str) -> Dict[str, Any]:
        """Initial behavior states binding every DRM component of `model` to one session."""
        record = self.license_store.user(user_id)
        session = Session(
            suite=self.suite,
            content_store=self.content_store,
            license_store=self.license_store,
            user=record.profile,
            user_keys=self._user_keys[user_id],
            content_id=content_id,
        )
        return session_states(model, session)

    def run_issuance_protocol(
        self,
        user: Union[UserProfile, str],
        content_id: str,
        seed: Optional[int] = None,
        model: Optional[SystemModel] = None,
    ) -> Issuance:
        """
        Run the six-step issuance protocol on the engine.

        Args:
            user: Registered user (profile or id)
            content_id: Catalog content to license
            seed: Engine seed (service seed when None)
            model: DRMS model to run (the shipped one when None)

        Returns:
            Issuance(license, ciphertext, trace)

        Raises:
            UnknownUser, UnknownContent: Before the engine starts
            EngineError: Forwarded from the run
        """
        user_id = user.user_id if isinstance(user, UserProfile) else user
        self.license_store.user(user_id)
        self.content_store.entry(content_id)
        model = model or self.model

        config = SimConfig(seed=self.seed if seed is None else seed)
        states = self.states_for(model, user_id, content_id)
        trace = Engine(model, config, None, states, default_registry()).run()
        check_protocol_order(trace)

        license, ciphertext = installed_content(self._installed(model, trace).payload)
        self.content_store.record_download(content_id)
        log_success(logger, "issued %s for %s/%s", license.license_id, user_id, content_id)
        return Issuance(license, ciphertext, trace)

    @staticmethod
    def _installed(model: SystemModel, trace: Trace):
        for cid in sorted(model.spg.finals):
            if model.components[cid].behavior == "reader" and (cid, "installed") in trace.outputs:
                return trace.output(cid, "installed")
        raise DrmError("issuance finished without an installed license")

    # -- consumption and renewal ----------------------------------------------

    def consume(
        self,
        reader: ReaderState,
        license: License,
        ciphertext: bytes,
        now: int,
        device=None,
    ) -> bytes:
        """
        Consume through a reader and record the outcome in the usage counters.

        Raises:
            Denial: As raised by the reader
        """
        known = license.content_id in self.content_store
        try:
            plaintext = reader.consume(license, ciphertext, now, device)
        except Denial as denial:
            logger.info("denied %s: %s", license.license_id, denial.message)
            if known:
                self.content_store.record_denial(license.content_id, denial.reason)
            raise
        if known:
            self.content_store.record_consumption(license.content_id)
        return plaintext

    def renew_license(self, license: License, new_rules: UsageRules) -> License:
        """
        Re-issue a license with new rules and revoke the old one.

        Raises:
            BadSignature: If the presented license does not verify
            UnknownLicense: If the license server never issued it
            InvalidRules: If new_rules is empty or malformed
        """
        if not self.suite.verify(license.signature, license.signed_bytes(), self.license_store.signing.public):
            raise BadSignature(f"license {license.license_id} does not verify")
        self.license_store.license(license.license_id)
        new_rules.validate()

        unsigned = License(
            license_id="lic-" + self._rng.bytes(8).hex(),
            content_id=license.content_id,
            user_id=license.user_id,
            rules=new_rules,
            wrapped_key=license.wrapped_key,
        )
        renewed = unsigned.with_signature(self.suite.sign(unsigned.signed_bytes(),
                                                          self.license_store.signing.private))
        self.license_store.record_license(renewed)
        self.license_store.revoke(license.license_id)
        log_success(logger, "renewed %s as %s", license.license_id, renewed.license_id)
        return renewed

    def usage_report(self, content_id: str) -> UsageReport:
        """
        Raises:
            UnknownContent: If the content is not in the catalog
        """
        counters = self.content_store.counters(content_id)
        return UsageReport(content_id, counters.downloads, counters.consumptions, dict(counters.denials))
