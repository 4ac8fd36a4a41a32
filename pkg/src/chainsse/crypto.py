"""Keyed primitives used by both search schemes.

One keyed PRF family (HMAC-SHA256 with a one-byte domain prefix) stands in
for the three independent PRFs the schemes call for; domain separation
makes the three indices behave as unrelated functions. Document encryption
is AES-GCM with an explicit nonce drawn from the caller's entropy source;
index encryption is AES-SIV, a deterministic wide-block mode whose only
structural leakage is plaintext equality. Transaction scripts sign with
Ed25519.

All functions are pure in their inputs and safe for concurrent use.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM, AESSIV
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    PublicFormat,
)

from .entropy import EntropySource
from .errors import AuthenticationError, ParameterError

SUPPORTED_BITS = (128, 256)
GCM_NONCE_LEN = 12

# Instrumentation for the benchmark reporter: cheap call counters, reset
# via reset_counters(). Not thread-safe; the bench driver is sequential.
counters = {"prf": 0, "sym": 0, "det": 0, "mac": 0}


def reset_counters() -> None:
    for k in counters:
        counters[k] = 0


@dataclass(frozen=True)
class KeyBundle:
    """Owner secret keys: k1 encrypts documents, k2 derives index keys."""

    k1: bytes
    k2: bytes

    @property
    def bits(self) -> int:
        return len(self.k1) * 8


def gen(security_param: int = 256, *, entropy: EntropySource) -> KeyBundle:
    """Sample a fresh key bundle of `security_param` bits per key."""
    if security_param not in SUPPORTED_BITS:
        raise ParameterError(f"unsupported security parameter {security_param}")
    nbytes = security_param // 8
    return KeyBundle(k1=entropy.read(nbytes), k2=entropy.read(nbytes))


def _check_key(key: bytes) -> int:
    if len(key) * 8 not in SUPPORTED_BITS:
        raise ParameterError(f"key must be 16 or 32 bytes, got {len(key)}")
    return len(key)


def prf(index: int, key: bytes, data: bytes) -> bytes:
    """Keyed PRF, output truncated to the key's own bit length.

    `index` selects one of three domain-separated instances.
    """
    if index not in (1, 2, 3):
        raise ParameterError(f"prf index must be 1, 2 or 3, got {index}")
    out_len = _check_key(key)
    counters["prf"] += 1
    return hmac.new(key, bytes([index]) + data, hashlib.sha256).digest()[:out_len]


def keyed_hash(key: bytes, message: bytes) -> bytes:
    """Keyed digest / MAC over an arbitrary-length message."""
    out_len = _check_key(key)
    counters["mac"] += 1
    return hmac.new(key, b"\x10" + message, hashlib.sha256).digest()[:out_len]


def sym_encrypt(key: bytes, plaintext: bytes, entropy: EntropySource) -> bytes:
    """Randomized authenticated encryption; the nonce travels in front."""
    _check_key(key)
    counters["sym"] += 1
    nonce = entropy.read(GCM_NONCE_LEN)
    return nonce + AESGCM(key).encrypt(nonce, plaintext, None)


def sym_decrypt(key: bytes, ciphertext: bytes) -> bytes:
    _check_key(key)
    if len(ciphertext) < GCM_NONCE_LEN + 16:
        raise AuthenticationError("ciphertext too short")
    try:
        return AESGCM(key).decrypt(ciphertext[:GCM_NONCE_LEN], ciphertext[GCM_NONCE_LEN:], None)
    except InvalidTag as exc:
        raise AuthenticationError("authenticated decryption failed") from exc


def _siv_key(key: bytes) -> bytes:
    # AES-SIV needs a double-length key; expand uniformly for both
    # supported sizes so the construction does not depend on k.
    h1 = hmac.new(key, b"\x20siv-1", hashlib.sha256).digest()
    h2 = hmac.new(key, b"\x20siv-2", hashlib.sha256).digest()
    return h1[:16] + h2[:16] if len(key) == 16 else h1 + h2


def det_encrypt(key: bytes, plaintext: bytes) -> bytes:
    """Deterministic encryption; |ciphertext| = |plaintext| + 16."""
    _check_key(key)
    counters["det"] += 1
    return AESSIV(_siv_key(key)).encrypt(plaintext, None)


def det_decrypt(key: bytes, ciphertext: bytes) -> bytes:
    _check_key(key)
    if len(ciphertext) < 16:
        raise AuthenticationError("ciphertext too short")
    try:
        return AESSIV(_siv_key(key)).decrypt(ciphertext, None)
    except InvalidTag as exc:
        raise AuthenticationError("authenticated decryption failed") from exc


def generate_signing_key(entropy: EntropySource) -> Ed25519PrivateKey:
    return Ed25519PrivateKey.from_private_bytes(entropy.read(32))


def verify_key_bytes(sk: Ed25519PrivateKey) -> bytes:
    return sk.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)


def sign(sk: Ed25519PrivateKey, message: bytes) -> bytes:
    return sk.sign(message)


def verify(vk: bytes, message: bytes, signature: bytes) -> bool:
    """True iff `signature` is valid; malformed inputs return False."""
    try:
        Ed25519PublicKey.from_public_bytes(vk).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False
