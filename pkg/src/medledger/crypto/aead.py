"""Authenticated symmetric encryption: AES-256-GCM.

Wire layout of a ciphertext is nonce || body || tag with fixed 12-byte nonce
and 16-byte tag, so lengths are implied. The associated-data slot binds the
record's data-type label to the ciphertext.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ..errors import AuthenticationError, WireError

KEY_LEN = 32
NONCE_LEN = 12
TAG_LEN = 16


@dataclass(frozen=True)
class Ciphertext:
    nonce: bytes
    body: bytes
    tag: bytes

    def __post_init__(self):
        if len(self.nonce) != NONCE_LEN or len(self.tag) != TAG_LEN:
            raise ValueError("bad nonce or tag length")

    def to_wire(self) -> bytes:
        return self.nonce + self.body + self.tag

    @classmethod
    def from_wire(cls, raw: bytes) -> "Ciphertext":
        if len(raw) < NONCE_LEN + TAG_LEN:
            raise WireError("ciphertext shorter than nonce + tag")
        return cls(raw[:NONCE_LEN], raw[NONCE_LEN:-TAG_LEN], raw[-TAG_LEN:])


def seal(secret: bytes, nonce: bytes, plaintext: bytes, associated_data: bytes = b"") -> Ciphertext:
    """Encrypt with an explicit nonce. Callers own nonce uniqueness per key."""
    if len(secret) != KEY_LEN:
        raise ValueError(f"key must be {KEY_LEN} bytes")
    raw = AESGCM(secret).encrypt(nonce, plaintext, associated_data or None)
    return Ciphertext(nonce=nonce, body=raw[:-TAG_LEN], tag=raw[-TAG_LEN:])


def open_sealed(secret: bytes, ct: Ciphertext, associated_data: bytes = b"") -> bytes:
    """Decrypt and authenticate; raises AuthenticationError on any mismatch."""
    if len(secret) != KEY_LEN:
        raise ValueError(f"key must be {KEY_LEN} bytes")
    try:
        return AESGCM(secret).decrypt(ct.nonce, ct.body + ct.tag, associated_data or None)
    except InvalidTag as exc:
        raise AuthenticationError("ciphertext failed authentication") from exc
