"""
Pluggable crypto suites for the DRM system.

Every suite provides the same primitives: content key generation, an
authenticated symmetric cipher, asymmetric key wrapping and detached
signatures. Ciphertexts are laid out as nonce(12) || body || tag(16).

ProductionSuite uses AES-128-GCM, RSA-2048 OAEP(SHA-256) wrapping and
RSA-PSS(SHA-256) signatures. DeterministicSuite draws all key material from
the caller's numpy generator and derives nonces from the plaintext, so the
same seed yields the same bytes; its "signatures" are keyed hashes under the
public key and prove nothing about who signed. Use it for tests only.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from hmac import compare_digest
from typing import Optional

import numpy as np
from Crypto.Cipher import AES, PKCS1_OAEP
from Crypto.Hash import HMAC, SHA256, SHAKE256
from Crypto.PublicKey import RSA
from Crypto.Random import get_random_bytes
from Crypto.Signature import pss
from Crypto.Util.strxor import strxor

from drm.errors import DecryptFailure


NONCE_SIZE = 12
TAG_SIZE = 16
CONTENT_KEY_SIZE = 16
RSA_BITS = 2048


@dataclass(frozen=True)
class KeyPair:
    private: bytes
    public: bytes

    def __repr__(self) -> str:
        return f"KeyPair(public={self.public[:8].hex()}...)"


class CryptoSuite(ABC):
    """Interface shared by all suites."""

    name = "abstract"
    overhead = NONCE_SIZE + TAG_SIZE

    @abstractmethod
    def gen_content_key(self, rng: Optional[np.random.Generator] = None) -> bytes:
        ...

    @abstractmethod
    def sym_encrypt(self, plaintext: bytes, key: bytes) -> bytes:
        ...

    @abstractmethod
    def sym_decrypt(self, ciphertext: bytes, key: bytes) -> bytes:
        """
        Raises:
            DecryptFailure: On a wrong key or any modified byte
        """

    @abstractmethod
    def generate_keypair(self, rng: Optional[np.random.Generator] = None) -> KeyPair:
        ...

    @abstractmethod
    def wrap_key(self, content_key: bytes, public: bytes) -> bytes:
        ...

    @abstractmethod
    def unwrap_key(self, wrapped: bytes, private: bytes) -> bytes:
        """
        Raises:
            DecryptFailure: If the key was not wrapped for this private key
        """

    @abstractmethod
    def sign(self, message: bytes, private: bytes) -> bytes:
        ...

    @abstractmethod
    def verify(self, signature: bytes, message: bytes, public: bytes) -> bool:
        ...


# =============================================================================
# Production
# =============================================================================

class ProductionSuite(CryptoSuite):
    name = "production"

    def gen_content_key(self, rng=None) -> bytes:
        return get_random_bytes(CONTENT_KEY_SIZE)

    def sym_encrypt(self, plaintext: bytes, key: bytes) -> bytes:
        nonce = get_random_bytes(NONCE_SIZE)
        cipher = AES.new(key, AES.MODE_GCM, nonce=nonce, mac_len=TAG_SIZE)
        body, tag = cipher.encrypt_and_digest(plaintext)
        return nonce + body + tag

    def sym_decrypt(self, ciphertext: bytes, key: bytes) -> bytes:
        if len(ciphertext) < self.overhead:
            raise DecryptFailure("ciphertext shorter than nonce and tag")
        nonce, body, tag = ciphertext[:NONCE_SIZE], ciphertext[NONCE_SIZE:-TAG_SIZE], ciphertext[-TAG_SIZE:]
        try:
            cipher = AES.new(key, AES.MODE_GCM, nonce=nonce, mac_len=TAG_SIZE)
            return cipher.decrypt_and_verify(body, tag)
        except ValueError:
            raise DecryptFailure("authentication tag mismatch") from None

    def generate_keypair(self, rng=None) -> KeyPair:
        key = RSA.generate(RSA_BITS)
        return KeyPair(key.export_key(format="DER"), key.public_key().export_key(format="DER"))

    def wrap_key(self, content_key: bytes, public: bytes) -> bytes:
        return PKCS1_OAEP.new(RSA.import_key(public), hashAlgo=SHA256).encrypt(content_key)

    def unwrap_key(self, wrapped: bytes, private: bytes) -> bytes:
        try:
            return PKCS1_OAEP.new(RSA.import_key(private), hashAlgo=SHA256).decrypt(wrapped)
        except (ValueError, TypeError):
            raise DecryptFailure("key unwrap failed") from None

    def sign(self, message: bytes, private: bytes) -> bytes:
        return pss.new(RSA.import_key(private)).sign(SHA256.new(message))

    def verify(self, signature: bytes, message: bytes, public: bytes) -> bool:
        try:
            pss.new(RSA.import_key(public)).verify(SHA256.new(message), signature)
            return True
        except (ValueError, TypeError):
            return False


# =============================================================================
# Deterministic (tests and reproducible traces)
# =============================================================================

def _mac(key: bytes, data: bytes) -> bytes:
    return HMAC.new(key, data, digestmod=SHA256).digest()


def _sha256(data: bytes) -> bytes:
    return SHA256.new(data).digest()


class DeterministicSuite(CryptoSuite):
    name = "deterministic"

    @staticmethod
    def _rng(rng) -> np.random.Generator:
        return rng if rng is not None else np.random.default_rng(0)

    def gen_content_key(self, rng=None) -> bytes:
        return self._rng(rng).bytes(CONTENT_KEY_SIZE)

    def _keystream(self, key: bytes, nonce: bytes, size: int) -> bytes:
        return SHAKE256.new(key + nonce).read(size)

    def sym_encrypt(self, plaintext: bytes, key: bytes) -> bytes:
        nonce = _mac(key, b"nonce" + plaintext)[:NONCE_SIZE]
        body = strxor(plaintext, self._keystream(key, nonce, len(plaintext))) if plaintext else b""
        return nonce + body + _mac(key, nonce + body)[:TAG_SIZE]

    def sym_decrypt(self, ciphertext: bytes, key: bytes) -> bytes:
        if len(ciphertext) < self.overhead:
            raise DecryptFailure("ciphertext shorter than nonce and tag")
        nonce, body, tag = ciphertext[:NONCE_SIZE], ciphertext[NONCE_SIZE:-TAG_SIZE], ciphertext[-TAG_SIZE:]
        if not compare_digest(tag, _mac(key, nonce + body)[:TAG_SIZE]):
            raise DecryptFailure("authentication tag mismatch")
        return strxor(body, self._keystream(key, nonce, len(body))) if body else b""

    def generate_keypair(self, rng=None) -> KeyPair:
        private = self._rng(rng).bytes(32)
        return KeyPair(private, self.public_of(private))

    @staticmethod
    def public_of(private: bytes) -> bytes:
        return _sha256(b"pub" + private)

    @staticmethod
    def _wrapping_key(public: bytes) -> bytes:
        return _sha256(b"wrap" + public)[:CONTENT_KEY_SIZE]

    def wrap_key(self, content_key: bytes, public: bytes) -> bytes:
        return self.sym_encrypt(content_key, self._wrapping_key(public))

    def unwrap_key(self, wrapped: bytes, private: bytes) -> bytes:
        return self.sym_decrypt(wrapped, self._wrapping_key(self.public_of(private)))

    def sign(self, message: bytes, private: bytes) -> bytes:
        return _mac(self.public_of(private), message)

    def verify(self, signature: bytes, message: bytes, public: bytes) -> bool:
        try:
            HMAC.new(public, message, digestmod=SHA256).verify(signature)
            return True
        except ValueError:
            return False


SUITES = {
    ProductionSuite.name: ProductionSuite,
    DeterministicSuite.name: DeterministicSuite,
}


def get_suite(name: str) -> CryptoSuite:
    """
    Instantiate a crypto suite by name.

    Raises:
        ValueError: If the name is unknown
    """
    try:
        return SUITES[name]()
    except KeyError:
        raise ValueError(f"unknown crypto suite {name!r} (expected one of {sorted(SUITES)})") from None
