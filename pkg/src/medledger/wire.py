"""Canonical byte encoding primitives.

Every on-ledger structure is serialized with these helpers so that encodings
are deterministic and injective: fixed-width integers are big-endian, every
variable-length field carries a 4-byte big-endian length prefix, and set-like
collections are sorted by the caller before encoding.
"""

from __future__ import annotations

import struct

from .errors import WireError

_U8 = struct.Struct(">B")
_U32 = struct.Struct(">I")
_U64 = struct.Struct(">Q")


def pack_u8(v: int) -> bytes:
    return _U8.pack(v)


def pack_u32(v: int) -> bytes:
    return _U32.pack(v)


def pack_u64(v: int) -> bytes:
    return _U64.pack(v)


def pack_bytes(b: bytes) -> bytes:
    """Length-prefixed variable field."""
    return _U32.pack(len(b)) + b


def pack_str(s: str) -> bytes:
    return pack_bytes(s.encode("utf-8"))


class Reader:
    """Strict sequential decoder; raises WireError on truncation or slack."""

    __slots__ = ("_buf", "_pos")

    def __init__(self, buf: bytes):
        self._buf = buf
        self._pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._buf):
            raise WireError(f"truncated field: need {n} bytes at offset {self._pos}")
        out = self._buf[self._pos:self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return _U8.unpack(self.take(1))[0]

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def u64(self) -> int:
        return _U64.unpack(self.take(8))[0]

    def bytes_field(self) -> bytes:
        return self.take(self.u32())

    def str_field(self) -> str:
        raw = self.bytes_field()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WireError(f"invalid utf-8 in string field: {exc}") from exc

    def remaining(self) -> int:
        return len(self._buf) - self._pos

    def expect_end(self) -> None:
        if self._pos != len(self._buf):
            raise WireError(f"{self.remaining()} trailing bytes after decode")
