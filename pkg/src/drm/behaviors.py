"""
Behaviors of the ten DRMS business-model components.

Every component's state is a ComponentState pointing at one shared
Session (crypto suite, both server stores, the requesting user and the
requested content). Message payloads are single-line tree documents,
except the adapter's rendition, the session key and the sealed content,
which are raw bytes.

The browser and the web application are driven by their firing count:

    browser   1: content_request        2: user_info          3: delivery
    webapp    1: info_demand            2: license_request
              3: content_query + session_request               4: authorization

Each of those firings also emits the routing label of its exclusive choice.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

from constants.drms import (
    DEFAULT_RENDITION, DRMS_COMPONENTS, ROUTE_CONTENT, ROUTE_DELIVER, ROUTE_LICENSE, ROUTE_REQUEST, ROUTE_USER,
)
from core.model import Behavior, BehaviorCall, BehaviorResult
from drm.crypto import CryptoSuite, KeyPair
from drm.errors import DrmError, UnknownContent
from drm.rules import License, UsageRules, UserProfile
from drm.stores import ContentServerStore, LicenseServerStore
from sysdesc.tree import dumps_inline, loads


logger = logging.getLogger(__name__)

ROUTE_PORT = "route"


@dataclass
class Session:
    """One issuance session: who asks for what, and the servers that answer."""
    suite: CryptoSuite
    content_store: ContentServerStore
    license_store: LicenseServerStore
    user: UserProfile
    user_keys: KeyPair
    content_id: str


@dataclass(frozen=True)
class ComponentState:
    session: Session
    phase: int = 0
    memo: Dict[str, Any] = field(default_factory=dict)

    def advance(self, **memo) -> "ComponentState":
        return replace(self, phase=self.phase + 1, memo={**self.memo, **memo})


def encode(tree: Any) -> bytes:
    return dumps_inline(tree).encode("utf-8")


def decode(payload: bytes) -> Any:
    return loads(payload.decode("utf-8"), "<message>")


def _state(call: BehaviorCall) -> ComponentState:
    if not isinstance(call.state, ComponentState):
        raise DrmError(f"component {call.component.id!r} has no DRM session state")
    return call.state


def _route(label: str) -> Dict[str, bytes]:
    return {ROUTE_PORT: label.encode("utf-8")}


# =============================================================================
# Content server side
# =============================================================================

def database(call: BehaviorCall) -> BehaviorResult:
    """Publish the catalog to the browser and the encrypted packages to the adapter."""
    state = _state(call)
    store = state.session.content_store
    packages = {
        cid: {name: data.hex() for name, data in sorted(entry.packages.items())}
        for cid, entry in sorted(store.catalog.items())
    }
    return call.result(state.advance(), catalog=encode({"items": store.listing()}), packages=encode(packages))


def browser(call: BehaviorCall) -> BehaviorResult:
    state = _state(call)
    session = state.session

    if state.phase == 0:
        listed = {item["content_id"] for item in decode(call.payload("catalog"))["items"]}
        if session.content_id not in listed:
            raise UnknownContent(f"content {session.content_id!r} is not in the catalog")
        logger.info("step 1: %s requests %s", session.user.user_id, session.content_id)
        request = {"user_id": session.user.user_id, "content_id": session.content_id}
        return call.result(state.advance(), content_request=encode(request), **_route(ROUTE_REQUEST))

    if state.phase == 1:
        fields = decode(call.payload("info_demand"))["fields"]
        info = {name: session.user.info.get(name, "") for name in fields}
        info["user_id"] = session.user.user_id
        info["public_key"] = session.user_keys.public.hex()
        logger.info("step 3: %s fills in %s", session.user.user_id, ", ".join(fields))
        return call.result(state.advance(), user_info=encode(info), **_route(ROUTE_REQUEST))

    return call.result(state.advance(), delivery=call.payload("authorization"), **_route(ROUTE_DELIVER))


INFO_FIELDS = ["name", "device_class"]


def web_application(call: BehaviorCall) -> BehaviorResult:
    state = _state(call)

    if state.phase == 0:
        request = decode(call.payload("content_request"))
        logger.info("step 2: content server asks %s for %s", request["user_id"], ", ".join(INFO_FIELDS))
        return call.result(state.advance(request=request),
                           info_demand=encode({"fields": INFO_FIELDS}), **_route(ROUTE_USER))

    if state.phase == 1:
        info = decode(call.payload("user_info"))
        request = state.memo["request"]
        order = {
            "user_id": request["user_id"],
            "content_id": request["content_id"],
            "device_class": info.get("device_class", ""),
        }
        logger.info("step 4: content server requests a license for %s/%s", order["user_id"], order["content_id"])
        return call.result(state.advance(info=info),
                           license_request=encode(order), **_route(ROUTE_LICENSE))

    if state.phase == 2:
        license_tree = decode(call.payload("license"))
        request, info = state.memo["request"], state.memo["info"]
        query = {"content_id": request["content_id"], "device_class": info.get("device_class", "")}
        session_request = {"user_id": request["user_id"], "public_key": info["public_key"]}
        return call.result(state.advance(license=license_tree),
                           content_query=encode(query), session_request=encode(session_request),
                           **_route(ROUTE_CONTENT))

    authorization = {
        "license": state.memo["license"],
        "wrapped_key": call.payload("wrapped_key").hex(),
        "sealed": call.payload("sealed").hex(),
    }
    logger.info("step 6: content server authorizes %s", state.memo["request"]["user_id"])
    return call.result(state.advance(), authorization=encode(authorization), **_route(ROUTE_USER))


def smart_adapter(call: BehaviorCall) -> BehaviorResult:
    """Select the package rendition for the requesting device class (default if none)."""
    state = _state(call)
    query = decode(call.payload("query"))
    renditions = decode(call.payload("packages")).get(query["content_id"])
    if renditions is None:
        raise UnknownContent(f"no package for content {query['content_id']!r}")
    chosen = query.get("device_class") if query.get("device_class") in renditions else DEFAULT_RENDITION
    logger.debug("adapter: %s rendition %s", query["content_id"], chosen)
    return call.result(state.advance(), rendition=bytes.fromhex(renditions[chosen]))


def key_generator(call: BehaviorCall) -> BehaviorResult:
    """Fresh session key, plus the same key wrapped for the requesting user."""
    state = _state(call)
    suite = state.session.suite
    request = decode(call.payload("session_request"))
    session_key = suite.gen_content_key(call.rng())
    wrapped = suite.wrap_key(session_key, bytes.fromhex(request["public_key"]))
    return call.result(state.advance(), key=session_key, wrapped_key=wrapped)


def content_encryption(call: BehaviorCall) -> BehaviorResult:
    state = _state(call)
    sealed = state.session.suite.sym_encrypt(call.payload("plaintext"), call.payload("key"))
    return call.result(state.advance(), ciphertext=sealed)


# =============================================================================
# License server side
# =============================================================================

def license_server(call: BehaviorCall) -> BehaviorResult:
    state = _state(call)
    store = state.session.license_store
    order = decode(call.payload("license_request"))
    user = store.user(order["user_id"])
    record = store.key_record(order["content_id"])
    body_order = {
        "user_id": order["user_id"],
        "content_id": order["content_id"],
        "rules": record.rules_template.to_tree(),
    }
    grant = {
        "user_id": order["user_id"],
        "content_id": order["content_id"],
        "public_key": user.public_key.hex(),
    }
    return call.result(state.advance(), license_order=encode(body_order), key_grant=encode(grant))


def license_generator(call: BehaviorCall) -> BehaviorResult:
    state = _state(call)
    order = decode(call.payload("license_order"))
    body = dict(order)
    body["license_id"] = "lic-" + call.rng().bytes(8).hex()
    logger.info("step 5: license generator creates %s", body["license_id"])
    return call.result(state.advance(), license_body=encode(body))


def license_encryption(call: BehaviorCall) -> BehaviorResult:
    """Wrap the content key for the user, sign the license and record it."""
    state = _state(call)
    session = state.session
    store = session.license_store
    body = decode(call.payload("license_body"))
    grant = decode(call.payload("key_grant"))

    content_key = store.key_record(body["content_id"]).content_key
    unsigned = License(
        license_id=body["license_id"],
        content_id=body["content_id"],
        user_id=body["user_id"],
        rules=UsageRules.from_tree(body["rules"]),
        wrapped_key=session.suite.wrap_key(content_key, bytes.fromhex(grant["public_key"])),
    )
    signed = unsigned.with_signature(session.suite.sign(unsigned.signed_bytes(), store.signing.private))
    store.record_license(signed)
    return call.result(state.advance(), license=encode(signed.to_tree()))


# =============================================================================
# Consumer side
# =============================================================================

def reader(call: BehaviorCall) -> BehaviorResult:
    """Open the delivery: unwrap the session key and remove the delivery seal."""
    state = _state(call)
    session = state.session
    delivery = decode(call.payload("delivery"))
    session_key = session.suite.unwrap_key(bytes.fromhex(delivery["wrapped_key"]), session.user_keys.private)
    protected = session.suite.sym_decrypt(bytes.fromhex(delivery["sealed"]), session_key)
    installed = {"license": delivery["license"], "content": protected.hex()}
    return call.result(state.advance(), installed=encode(installed))


def installed_content(payload: bytes) -> Tuple[License, bytes]:
    """Split a reader's `installed` payload into (license, protected content)."""
    tree = decode(payload)
    return License.from_tree(tree["license"]), bytes.fromhex(tree["content"])


_FUNCTIONS = {
    "database": (database, frozenset(), "publish catalog and encrypted packages"),
    "browser": (browser, frozenset(), "user agent: request, fill in info, forward delivery"),
    "web_application": (web_application, frozenset(), "content server front end"),
    "license_server": (license_server, None, "look up user and content key"),
    "license_generator": (license_generator, None, "create the license body"),
    "license_encryption": (license_encryption, None, "wrap content key and sign license"),
    "smart_adapter": (smart_adapter, None, "select rendition by device class"),
    "key_generator": (key_generator, None, "fresh session key, wrapped for the user"),
    "content_encryption": (content_encryption, None, "seal the rendition under the session key"),
    "reader": (reader, None, "open the delivery"),
}

DRM_BEHAVIORS = tuple(
    Behavior(entry["behavior"], *_FUNCTIONS[entry["behavior"]])
    for entry in DRMS_COMPONENTS.values()
)


def session_states(model, session: Session, behaviors: Optional[frozenset] = None) -> Dict[str, ComponentState]:
    """Initial state for every component of `model` that runs a DRM behavior."""
    names = behaviors or frozenset(_FUNCTIONS)
    return {
        cid: ComponentState(session)
        for cid, spec in model.components.items() if spec.behavior in names
    }
