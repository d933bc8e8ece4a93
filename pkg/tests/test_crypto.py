import numpy as np
import pytest

from drm.crypto import CONTENT_KEY_SIZE, NONCE_SIZE, TAG_SIZE, DeterministicSuite, ProductionSuite, get_suite
from drm.errors import DecryptFailure


@pytest.fixture(scope="module")
def production():
    suite = ProductionSuite()
    # RSA-2048 generation is slow; one pair serves the whole module
    return suite, suite.generate_keypair(), suite.generate_keypair()


@pytest.fixture(scope="module")
def deterministic():
    suite = DeterministicSuite()
    rng = np.random.default_rng(1)
    return suite, suite.generate_keypair(rng), suite.generate_keypair(rng)


@pytest.fixture(params=["production", "deterministic"])
def suite_and_keys(request):
    return request.getfixturevalue(request.param)


def flip_bit(data: bytes, index: int) -> bytes:
    position = index % (len(data) * 8)
    out = bytearray(data)
    out[position // 8] ^= 1 << (position % 8)
    return bytes(out)


def test_symmetric_roundtrip_and_tamper(suite_and_keys):
    suite, _, _ = suite_and_keys
    rng = np.random.default_rng(5)
    for _ in range(1000):
        key = suite.gen_content_key(rng)
        plaintext = rng.bytes(int(rng.integers(0, 200)))
        sealed = suite.sym_encrypt(plaintext, key)
        assert len(sealed) == len(plaintext) + NONCE_SIZE + TAG_SIZE
        assert suite.sym_decrypt(sealed, key) == plaintext
        with pytest.raises(DecryptFailure):
            suite.sym_decrypt(flip_bit(sealed, int(rng.integers(len(sealed) * 8))), key)


def test_wrong_key_fails(suite_and_keys):
    suite, _, _ = suite_and_keys
    rng = np.random.default_rng(6)
    sealed = suite.sym_encrypt(b"protected", suite.gen_content_key(rng))
    with pytest.raises(DecryptFailure):
        suite.sym_decrypt(sealed, suite.gen_content_key(rng))


def test_truncated_ciphertext(suite_and_keys):
    suite, _, _ = suite_and_keys
    with pytest.raises(DecryptFailure):
        suite.sym_decrypt(b"\x00" * (NONCE_SIZE + TAG_SIZE - 1), b"\x01" * CONTENT_KEY_SIZE)


def test_empty_plaintext(suite_and_keys):
    suite, _, _ = suite_and_keys
    key = suite.gen_content_key(np.random.default_rng(7))
    sealed = suite.sym_encrypt(b"", key)
    assert len(sealed) == 28
    assert suite.sym_decrypt(sealed, key) == b""


def test_key_wrapping(suite_and_keys):
    suite, alice, bob = suite_and_keys
    key = suite.gen_content_key(np.random.default_rng(8))
    wrapped = suite.wrap_key(key, alice.public)
    assert key not in wrapped
    assert suite.unwrap_key(wrapped, alice.private) == key
    with pytest.raises(DecryptFailure):
        suite.unwrap_key(wrapped, bob.private)


def test_signatures(suite_and_keys):
    suite, alice, bob = suite_and_keys
    message = b'{license_id: "lic-1"}'
    signature = suite.sign(message, alice.private)
    assert suite.verify(signature, message, alice.public)
    assert not suite.verify(signature, message + b" ", alice.public)
    assert not suite.verify(signature, message, bob.public)
    assert not suite.verify(flip_bit(signature, 3), message, alice.public)


def test_deterministic_suite_repeats():
    first, second = DeterministicSuite(), DeterministicSuite()
    a, b = np.random.default_rng(9), np.random.default_rng(9)
    key_a, key_b = first.gen_content_key(a), second.gen_content_key(b)
    assert key_a == key_b
    assert first.sym_encrypt(b"song", key_a) == second.sym_encrypt(b"song", key_b)
    assert first.generate_keypair(a) == second.generate_keypair(b)


def test_keypair_repr_hides_private_key():
    keys = DeterministicSuite().generate_keypair(np.random.default_rng(10))
    assert keys.private.hex() not in repr(keys)


def test_get_suite():
    assert isinstance(get_suite("production"), ProductionSuite)
    assert isinstance(get_suite("deterministic"), DeterministicSuite)
    with pytest.raises(ValueError):
        get_suite("rot13")
