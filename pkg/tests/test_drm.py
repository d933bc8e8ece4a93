from dataclasses import replace

import pytest

from constants import DEMO_CONTENT_CONFIG, PROTOCOL_TAGS
from core.trace import trace_export
from drm.crypto import DeterministicSuite
from drm.demo import build_demo_world, run_demo
from drm.errors import (
    BadSignature, Denial, DuplicateContent, DuplicateUser, InvalidRules, Revoked, UnknownContent, UnknownUser,
)
from drm.rules import ContentItem, License, UsageRules, UserProfile
from drm.stores import ContentServerStore, LicenseServerStore


PLAINTEXT = DEMO_CONTENT_CONFIG["plaintext"]


def signed_license(service, user_id, rules, license_id="lic-test"):
    """A license for song-001 signed by the service's license server."""
    store = service.license_store
    content_key = store.key_record("song-001").content_key
    unsigned = License(
        license_id=license_id,
        content_id="song-001",
        user_id=user_id,
        rules=rules,
        wrapped_key=service.suite.wrap_key(content_key, store.user(user_id).public_key),
    )
    return unsigned.with_signature(service.suite.sign(unsigned.signed_bytes(), store.signing.private))


@pytest.fixture
def bob(service):
    return service.register_user(UserProfile("bob", {"device_class": "mobile"}))


# -- usage rules ------------------------------------------------------------------

RULE_CASES = [
    # rules, now, device, prior plays, revoked, owner, tamper, expected denial
    ({"max_plays": 3}, 0, None, 0, False, "alice", None, None),
    ({"max_plays": 3}, 0, None, 2, False, "alice", None, None),
    ({"max_plays": 3}, 0, None, 3, False, "alice", None, "PlaysExhausted"),
    ({"max_plays": 1}, 0, None, 1, False, "alice", None, "PlaysExhausted"),
    ({"expires_at": 100}, 100, None, 0, False, "alice", None, None),
    ({"expires_at": 100}, 101, None, 0, False, "alice", None, "Expired"),
    ({"expires_at": 0}, 0, None, 0, False, "alice", None, None),
    ({"expires_at": 100}, -5, None, 0, False, "alice", None, None),
    ({"device_class": "mobile"}, 0, None, 0, False, "alice", None, "WrongDevice"),
    ({"device_class": "mobile"}, 0, "mobile", 0, False, "alice", None, None),
    ({"device_class": "desktop"}, 0, None, 0, False, "alice", None, None),
    ({"device_class": "desktop"}, 0, "reader_device", 0, False, "alice", None, "WrongDevice"),
    ({"max_plays": 3}, 0, None, 0, True, "alice", None, "Revoked"),
    ({"max_plays": 3}, 0, None, 0, False, "bob", None, "WrongUser"),
    ({"max_plays": 3}, 0, None, 0, False, "alice", "rules", "BadSignature"),
    ({"max_plays": 3}, 0, None, 0, False, "alice", "ciphertext", "DecryptFailure"),
    ({"expires_at": 10}, 20, None, 0, True, "alice", None, "Revoked"),
    ({"max_plays": 3}, 0, None, 0, True, "alice", "rules", "BadSignature"),
    ({"expires_at": 10}, 20, None, 0, False, "bob", None, "WrongUser"),
    ({"expires_at": 10, "max_plays": 1}, 20, None, 1, False, "alice", None, "Expired"),
    ({"max_plays": 1, "device_class": "mobile"}, 0, None, 1, False, "alice", None, "PlaysExhausted"),
    ({"device_class": "mobile"}, 0, None, 0, False, "alice", "ciphertext", "WrongDevice"),
    ({"expires_at": 100, "max_plays": 2, "device_class": "desktop"}, 50, None, 1, False, "alice", None, None),
    ({"expires_at": 100, "max_plays": 2, "device_class": "desktop"}, 50, None, 2, False, "alice", None,
     "PlaysExhausted"),
]


@pytest.mark.parametrize("rules, now, device, prior, revoked, owner, tamper, expected", RULE_CASES)
def test_usage_rules(world, bob, rules, now, device, prior, revoked, owner, tamper, expected):
    service, reader = world.service, world.reader
    license = signed_license(service, owner, UsageRules.from_tree(rules))
    ciphertext = service.content_store.entry("song-001").package_for(None)
    if revoked:
        service.license_store.revoke(license.license_id)
    if tamper == "rules":
        license = replace(license, rules=UsageRules(max_plays=99))
    if tamper == "ciphertext":
        ciphertext = ciphertext[:-1] + bytes([ciphertext[-1] ^ 1])
    if prior:
        reader.plays_used[license.license_id] = prior

    before = dict(reader.plays_used)
    if expected is None:
        assert reader.consume(license, ciphertext, now, device) == PLAINTEXT
        assert reader.plays(license) == prior + 1
    else:
        with pytest.raises(Denial) as info:
            reader.consume(license, ciphertext, now, device)
        assert info.value.reason == expected
        assert reader.plays_used == before


def test_empty_rules_are_invalid():
    with pytest.raises(InvalidRules):
        UsageRules().validate()
    with pytest.raises(InvalidRules):
        UsageRules(max_plays=0).validate()
    with pytest.raises(InvalidRules):
        UsageRules.from_tree({"device_class": "watch"})


def test_license_serialization_roundtrip(service):
    license = signed_license(service, "alice", UsageRules(expires_at=5, max_plays=2))
    assert License.deserialize(license.serialize()) == license
    assert b"signature" not in license.signed_bytes()


# -- issuance -------------------------------------------------------------------------

def test_issuance_runs_six_steps(world):
    issuance = world.service.run_issuance_protocol(world.user, world.content_id)
    transfers = issuance.trace.transfers(PROTOCOL_TAGS)
    assert [e.detail["tag"] for e in transfers] == list(PROTOCOL_TAGS)
    assert [e.time for e in transfers] == [2_000_000, 4_000_000, 5_000_000, 7_000_000, 13_000_000, 26_000_000]
    assert issuance.license.user_id == "alice"
    assert issuance.license.rules == UsageRules(expires_at=100, max_plays=3)
    assert world.service.license_store.license(issuance.license.license_id) == issuance.license
    assert world.service.consume(world.reader, issuance.license, issuance.ciphertext, 0) == PLAINTEXT


def test_issuance_is_reproducible():
    first = build_demo_world(DeterministicSuite(), seed=3)
    second = build_demo_world(DeterministicSuite(), seed=3)
    a = first.service.run_issuance_protocol("alice", "song-001")
    b = second.service.run_issuance_protocol("alice", "song-001")
    assert a.license == b.license
    assert trace_export(a.trace, "structured") == trace_export(b.trace, "structured")


def test_issuance_for_unknown_parties(service):
    with pytest.raises(UnknownContent):
        service.run_issuance_protocol("alice", "song-404")
    with pytest.raises(UnknownUser):
        service.run_issuance_protocol("mallory", "song-001")


def test_mobile_user_gets_mobile_rendition(service, bob):
    issuance = service.run_issuance_protocol("bob", "song-001")
    plaintext = service.consume(bob, issuance.license, issuance.ciphertext, 0)
    assert plaintext == DEMO_CONTENT_CONFIG["renditions"]["mobile"]


def test_duplicate_user(service):
    with pytest.raises(DuplicateUser):
        service.register_user(UserProfile("alice"))


# -- content submission -------------------------------------------------------------

def test_submitted_content_is_stored_encrypted(tmp_path):
    world = build_demo_world(DeterministicSuite(), seed=4, data_dir=tmp_path)
    stored = (tmp_path / "content_server.f4ms").read_text(encoding="utf-8")
    content_key = world.service.license_store.key_record("song-001").content_key
    assert PLAINTEXT.hex() not in stored
    assert content_key.hex() not in stored
    assert "song-001" in stored


def test_duplicate_submission(service):
    with pytest.raises(DuplicateContent):
        service.submit_content(ContentItem("song-001", b"again"), UsageRules(max_plays=1))


def test_empty_content(service):
    entry = service.submit_content(ContentItem("silence", b""), UsageRules(max_plays=1))
    assert len(entry.package_for(None)) == 28


def test_submission_needs_rules(service):
    with pytest.raises(InvalidRules):
        service.submit_content(ContentItem("song-002", b"x"), UsageRules())
    assert "song-002" not in service.content_store


# -- renewal ---------------------------------------------------------------------------

def test_renewal_revokes_the_old_license(world):
    service = world.service
    issuance = service.run_issuance_protocol(world.user, world.content_id)
    renewed = service.renew_license(issuance.license, issuance.license.rules.with_expiry(200))
    assert renewed.license_id != issuance.license.license_id
    assert renewed.rules.expires_at == 200
    assert service.consume(world.reader, renewed, issuance.ciphertext, 150) == PLAINTEXT
    with pytest.raises(Revoked):
        service.consume(world.reader, issuance.license, issuance.ciphertext, 0)


def test_renewal_checks(world):
    service = world.service
    issuance = service.run_issuance_protocol(world.user, world.content_id)
    with pytest.raises(InvalidRules):
        service.renew_license(issuance.license, UsageRules())
    forged = replace(issuance.license, rules=UsageRules(max_plays=1000))
    with pytest.raises(BadSignature):
        service.renew_license(forged, UsageRules(max_plays=1000))
    assert not service.license_store.is_revoked(issuance.license.license_id)


# -- usage reports -----------------------------------------------------------------------

def test_usage_report(world):
    service = world.service
    assert service.usage_report("song-001").to_tree() == {
        "content_id": "song-001", "downloads": 0, "consumptions": 0, "denials": {}}

    issuance = service.run_issuance_protocol(world.user, world.content_id)
    for _ in range(3):
        service.consume(world.reader, issuance.license, issuance.ciphertext, 0)
    with pytest.raises(Denial):
        service.consume(world.reader, issuance.license, issuance.ciphertext, 0)

    report = service.usage_report("song-001")
    assert (report.downloads, report.consumptions, report.denials) == (1, 3, {"PlaysExhausted": 1})
    assert report.total_denials == 1
    with pytest.raises(UnknownContent):
        service.usage_report("song-404")


# -- key confinement and persistence ---------------------------------------------------

def test_content_key_never_leaves_the_license_server(tmp_path):
    world = build_demo_world(DeterministicSuite(), seed=5, data_dir=tmp_path)
    issuance = world.service.run_issuance_protocol(world.user, world.content_id)
    world.service.consume(world.reader, issuance.license, issuance.ciphertext, 0)
    content_key = world.service.license_store.key_record("song-001").content_key.hex()

    exported = trace_export(issuance.trace) + trace_export(issuance.trace, "structured")
    assert content_key not in exported
    assert content_key not in issuance.license.serialize().decode("utf-8")
    for path in tmp_path.iterdir():
        if path.name != "license_server.f4ms":
            assert content_key not in path.read_text(encoding="utf-8"), path.name


def test_stores_reload(tmp_path):
    world = build_demo_world(DeterministicSuite(), seed=6, data_dir=tmp_path)
    issuance = world.service.run_issuance_protocol(world.user, world.content_id)
    world.service.renew_license(issuance.license, UsageRules(max_plays=1))

    content = ContentServerStore.load(tmp_path / "content_server.f4ms")
    assert content.to_tree() == world.service.content_store.to_tree()
    licenses = LicenseServerStore.load(tmp_path / "license_server.f4ms")
    assert licenses.to_tree() == world.service.license_store.to_tree()
    assert licenses.is_revoked(issuance.license.license_id)


def test_reader_restores_play_counts(tmp_path):
    world = build_demo_world(DeterministicSuite(), seed=6, data_dir=tmp_path)
    issuance = world.service.run_issuance_protocol(world.user, world.content_id)
    world.service.consume(world.reader, issuance.license, issuance.ciphertext, 0)
    assert world.service.make_reader("alice").plays(issuance.license) == 1


# -- demo scenarios ------------------------------------------------------------------------

def test_issue_scenario():
    result = run_demo("issue", suite=DeterministicSuite())
    assert result.ok
    assert sum(line.startswith("step ") for line in result.lines) == 6
    assert result.lines[1].startswith("step 1 t=2.000000 browser -> webapp: ")


def test_report_scenario():
    result = run_demo("report", suite=DeterministicSuite())
    assert result.verdict == "ok"
    assert result.lines[-1] == "report song-001: downloads=1 consumptions=3 denials=PlaysExhausted=1"
    assert "play 4 at now=0: denied PlaysExhausted" in result.lines


def test_consume_after_expiry():
    result = run_demo("consume", now=150, suite=DeterministicSuite())
    assert result.verdict == "denied:Expired"


def test_renew_scenario():
    result = run_demo("renew", now=150, suite=DeterministicSuite())
    assert result.ok
    assert any("denied Revoked" in line for line in result.lines)


def test_demo_is_reproducible():
    first = run_demo("report", now=0, suite=DeterministicSuite(), seed=2)
    second = run_demo("report", now=0, suite=DeterministicSuite(), seed=2)
    assert first.lines == second.lines


def test_unknown_scenario():
    with pytest.raises(ValueError):
        run_demo("pirate", suite=DeterministicSuite())
