"""ECDSA over secp256k1 with deterministic nonces (RFC 6979).

Signatures are computed over SHA-256 of the message and normalized to the
low-s form, so a given (key, message) pair always produces the same 64-byte
encoding. Verification is strict: it accepts only canonical low-s signatures
and returns False (never raises) on malformed points or out-of-range values.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from functools import lru_cache

from .backend import kernel
from .params import B, GX, GY, HALF_N, N, P

PUBLIC_KEY_LEN = 33
PRIVATE_KEY_LEN = 32
SIGNATURE_LEN = 64


@dataclass(frozen=True)
class Signature:
    """ECDSA signature scalars; s is kept in the lower half of the order."""

    r: int
    s: int

    def to_bytes(self) -> bytes:
        return self.r.to_bytes(32, "big") + self.s.to_bytes(32, "big")

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Signature":
        if len(raw) != SIGNATURE_LEN:
            raise ValueError(f"signature must be {SIGNATURE_LEN} bytes")
        return cls(int.from_bytes(raw[:32], "big"), int.from_bytes(raw[32:], "big"))


@dataclass(frozen=True)
class SigningKeyPair:
    """Compressed public point plus the private scalar."""

    public: bytes
    private: bytes

    def __repr__(self) -> str:  # keep the scalar out of logs
        return f"SigningKeyPair(public={self.public.hex()}, private=<redacted>)"


def compress_point(x: int, y: int) -> bytes:
    return bytes([2 + (y & 1)]) + x.to_bytes(32, "big")


@lru_cache(maxsize=8192)
def decompress_point(pub: bytes):
    """Compressed SEC1 bytes -> (x, y), or None if not a valid curve point."""
    if len(pub) != PUBLIC_KEY_LEN or pub[0] not in (2, 3):
        return None
    x = int.from_bytes(pub[1:], "big")
    if x >= P:
        return None
    y_sq = (x * x * x + B) % P
    y = pow(y_sq, (P + 1) // 4, P)
    if y * y % P != y_sq:
        return None
    if (y & 1) != (pub[0] & 1):
        y = P - y
    return (x, y)


def gen_sig_keypair(rng) -> SigningKeyPair:
    """Fresh keypair from the supplied randomness source (needs .randbytes)."""
    while True:
        d = int.from_bytes(rng.randbytes(32), "big")
        if 1 <= d < N:
            break
    x, y = kernel.mul_base(d)
    return SigningKeyPair(public=compress_point(x, y), private=d.to_bytes(32, "big"))


def _int2octets(v: int) -> bytes:
    return v.to_bytes(32, "big")


def _bits2int(raw: bytes) -> int:
    # hash length equals the order length for SHA-256/secp256k1: no shift
    return int.from_bytes(raw, "big")


def _nonces(d: int, h1: bytes):
    """RFC 6979 HMAC-SHA256 nonce sequence for private scalar d and digest h1."""
    seed = _int2octets(d) + _int2octets(_bits2int(h1) % N)
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + seed, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + seed, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        candidate = _bits2int(v)
        if 1 <= candidate < N:
            yield candidate
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


def sign(private: bytes, message: bytes) -> Signature:
    """Deterministic signature over SHA-256(message)."""
    d = int.from_bytes(private, "big")
    if not (len(private) == PRIVATE_KEY_LEN and 1 <= d < N):
        raise ValueError("invalid private scalar")
    h1 = hashlib.sha256(message).digest()
    z = _bits2int(h1) % N
    for k in _nonces(d, h1):
        x, _ = kernel.mul_base(k)
        r = x % N
        if r == 0:
            continue
        s = pow(k, -1, N) * (z + r * d) % N
        if s == 0:
            continue
        if s > HALF_N:
            s = N - s
        return Signature(r, s)
    raise AssertionError("unreachable: nonce stream exhausted")


def verify(public: bytes, message: bytes, sig: Signature) -> bool:
    """True iff sig is a canonical signature over SHA-256(message) under public."""
    return verify_digest(public, hashlib.sha256(message).digest(), sig)


def verify_digest(public: bytes, digest: bytes, sig: Signature) -> bool:
    """verify() for callers that already hold SHA-256 of the message."""
    try:
        r, s = sig.r, sig.s
    except AttributeError:
        return False
    if not (isinstance(r, int) and isinstance(s, int)):
        return False
    if not (1 <= r < N and 1 <= s <= HALF_N):
        return False
    if len(digest) != 32:
        return False
    point = decompress_point(bytes(public))
    if point is None:
        return False
    z = _bits2int(digest) % N
    w = pow(s, -1, N)
    got = kernel.mul_add(z * w % N, r * w % N, point[0], point[1])
    if got is None:
        return False
    return got[0] % N == r


def ecdh_shared_secret(private: bytes, public: bytes) -> bytes:
    """x-coordinate of private * public, as 32 bytes (raw ECDH)."""
    d = int.from_bytes(private, "big")
    if not 1 <= d < N:
        raise ValueError("invalid private scalar")
    point = decompress_point(bytes(public))
    if point is None:
        raise ValueError("invalid public key")
    x, _ = kernel.mul_point(d, point[0], point[1])
    return x.to_bytes(32, "big")
