"""Cryptographic primitives used by every other module.

256-bit hashing (SHA-256), authenticated symmetric encryption (AES-256-GCM)
and deterministic ECDSA signatures on secp256k1. The elliptic-curve kernel
has two interchangeable implementations: a compiled extension for the hot
paths and a pure-Python fallback (see backend.py).

Randomness is always taken from an injectable source with a ``randbytes(n)``
method. Production callers pass None and get an OS-entropy source; tests pass
``random.Random(seed)`` for reproducible keys and nonces.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from . import aead
from .aead import Ciphertext
from .backend import active_backend
from .ecdsa import (
    PUBLIC_KEY_LEN,
    SIGNATURE_LEN,
    Signature,
    SigningKeyPair,
    compress_point,
    decompress_point,
    ecdh_shared_secret,
    gen_sig_keypair,
    sign,
    verify,
    verify_digest,
)

__all__ = [
    "Digest",
    "hash_bytes",
    "SymmetricKey",
    "Ciphertext",
    "encrypt",
    "decrypt",
    "Signature",
    "SigningKeyPair",
    "gen_sig_keypair",
    "sign",
    "verify",
    "verify_digest",
    "ecdh_shared_secret",
    "compress_point",
    "decompress_point",
    "ensure_rng",
    "active_backend",
    "PUBLIC_KEY_LEN",
    "SIGNATURE_LEN",
]

DIGEST_LEN = 32


@dataclass(frozen=True, order=True)
class Digest:
    """Fixed 32-byte SHA-256 output; equality is byte equality."""

    value: bytes

    def __post_init__(self):
        if len(self.value) != DIGEST_LEN:
            raise ValueError(f"digest must be {DIGEST_LEN} bytes")

    def hex(self) -> str:
        return self.value.hex()

    @classmethod
    def from_hex(cls, text: str) -> "Digest":
        return cls(bytes.fromhex(text))

    def __repr__(self) -> str:
        return f"Digest({self.value.hex()})"


ZERO_DIGEST = Digest(b"\x00" * DIGEST_LEN)


def hash_bytes(data: bytes) -> Digest:
    """SHA-256 of the input."""
    return Digest(hashlib.sha256(data).digest())


def ensure_rng(rng):
    """Pass through a seeded source, or default to OS entropy."""
    return rng if rng is not None else random.SystemRandom()


class SymmetricKey:
    """256-bit AEAD key with a per-instance nonce sequence.

    Nonces are salt(4) || counter(8): the salt is drawn once from the key
    holder's randomness source, the counter increments per encryption, so
    nonces never repeat for one holder and two holders of the same key bytes
    collide only on a 4-byte salt match.
    """

    __slots__ = ("secret", "_salt", "_counter")

    def __init__(self, secret: bytes, rng=None):
        if len(secret) != aead.KEY_LEN:
            raise ValueError(f"key must be {aead.KEY_LEN} bytes")
        self.secret = bytes(secret)
        self._salt = ensure_rng(rng).randbytes(4)
        self._counter = 0

    @classmethod
    def generate(cls, rng=None) -> "SymmetricKey":
        rng = ensure_rng(rng)
        return cls(rng.randbytes(aead.KEY_LEN), rng=rng)

    def next_nonce(self) -> bytes:
        nonce = self._salt + self._counter.to_bytes(8, "big")
        self._counter += 1
        return nonce

    def __eq__(self, other) -> bool:
        return isinstance(other, SymmetricKey) and self.secret == other.secret

    def __hash__(self) -> int:
        return hash(self.secret)

    def __repr__(self) -> str:
        return "SymmetricKey(<redacted>)"


def encrypt(key: SymmetricKey, plaintext: bytes, associated_data: bytes = b"") -> Ciphertext:
    """AEAD-encrypt under the key's next nonce, binding associated_data."""
    return aead.seal(key.secret, key.next_nonce(), plaintext, associated_data)


def decrypt(key: SymmetricKey, ct: Ciphertext, associated_data: bytes = b"") -> bytes:
    """Inverse of encrypt; raises AuthenticationError on any mismatch."""
    return aead.open_sealed(key.secret, ct, associated_data)
