"""Content-addressed off-chain store for encrypted records.

Every entry is stored under the SHA-256 of its own bytes, so any modification
is detectable by rehashing. Reads verify the address on every access and
raise a tamper alarm (distinct from a plain miss) when the check fails.

Entries can be replicated across simulated storage-node views; placement is a
deterministic rendezvous ordering of hash(key || node_id), and reads walk that
ordering so a tampered or missing holder falls back to the next replica.
"""

from __future__ import annotations

import os

from .crypto import Digest, hash_bytes
from .errors import TamperAlarm


class ContentStore:
    """digest -> ciphertext bytes, with optional per-node replica views."""

    def __init__(self, node_ids=(), replication: int = 1):
        self.nodes: list[str] = list(node_ids)
        self.replication = max(1, min(replication, len(self.nodes))) if self.nodes else 0
        self.views: dict[str, dict[bytes, bytes]] = {n: {} for n in self.nodes}
        self._entries: dict[bytes, bytes] = {}  # used when there are no nodes
        self.tamper_alarms = 0
        self.fallback_reads = 0
        self.bad_holders: list[tuple[str, str]] = []  # (node, digest hex)

    # -- placement ---------------------------------------------------------

    def placement(self, key: Digest) -> list[str]:
        """Rendezvous order of storage nodes for a key (deterministic)."""
        ranked = sorted(
            self.nodes,
            key=lambda n: hash_bytes(key.value + n.encode("utf-8")).value,
        )
        return ranked

    def holders(self, key: Digest) -> list[str]:
        return self.placement(key)[: self.replication]

    # -- core operations ---------------------------------------------------

    def put(self, content: bytes) -> Digest:
        """Store bytes under their own hash; idempotent."""
        key = hash_bytes(content)
        if not self.nodes:
            self._entries.setdefault(key.value, bytes(content))
            return key
        for node in self.holders(key):
            self.views[node].setdefault(key.value, bytes(content))
        return key

    def get(self, key: Digest) -> bytes | None:
        """Fetch and verify; None when absent, TamperAlarm when bytes lie."""
        if not self.nodes:
            return self._checked(key, self._entries.get(key.value), holder=None)
        alarm: TamperAlarm | None = None
        tried = 0
        for node in self.placement(key):
            blob = self.views[node].get(key.value)
            if blob is None:
                continue
            tried += 1
            try:
                value = self._checked(key, blob, holder=node)
            except TamperAlarm as exc:
                alarm = exc
                self.bad_holders.append((node, key.hex()))
                continue
            if alarm is not None or tried > 1:
                self.fallback_reads += 1
            return value
        if alarm is not None:
            raise alarm
        return None

    def _checked(self, key: Digest, blob: bytes | None, holder) -> bytes | None:
        if blob is None:
            return None
        if hash_bytes(blob) != key:
            self.tamper_alarms += 1
            raise TamperAlarm(key.hex(), holder)
        return blob

    def contains(self, key: Digest) -> bool:
        if not self.nodes:
            return key.value in self._entries
        return any(key.value in self.views[n] for n in self.nodes)

    def entry_count(self) -> int:
        if not self.nodes:
            return len(self._entries)
        return len({k for view in self.views.values() for k in view})

    def replicate(self, key: Digest, k: int) -> list[str]:
        """Copy an entry to the first k rendezvous nodes; returns the holders."""
        if k > len(self.nodes):
            raise ValueError(f"replication factor {k} exceeds {len(self.nodes)} nodes")
        source = None
        for node in self.nodes:
            blob = self.views[node].get(key.value)
            if blob is not None and hash_bytes(blob) == key:
                source = blob
                break
        if source is None:
            raise KeyError(f"no intact copy of {key.hex()} to replicate")
        targets = self.placement(key)[:k]
        for node in targets:
            self.views[node][key.value] = source
        return targets

    # -- fault injection hooks ----------------------------------------------

    def tamper(self, node: str, key: Digest, flip_index: int = 0) -> bool:
        """Flip one byte of a holder's copy; returns False if it holds none."""
        view = self.views.get(node)
        if view is None or key.value not in view:
            return False
        blob = bytearray(view[key.value])
        blob[flip_index % len(blob)] ^= 0x01
        view[key.value] = bytes(blob)
        return True

    def drop_entry(self, node: str, key: Digest) -> bool:
        view = self.views.get(node)
        if view is None:
            return False
        return view.pop(key.value, None) is not None

    # -- on-disk layout ------------------------------------------------------

    def save_dir(self, path) -> None:
        """One file per entry, named by lowercase hex digest."""
        os.makedirs(path, exist_ok=True)
        seen: dict[bytes, bytes] = {}
        if self.nodes:
            for view in self.views.values():
                seen.update(view)
        else:
            seen = self._entries
        for key, blob in seen.items():
            with open(os.path.join(path, key.hex()), "wb") as fh:
                fh.write(blob)

    def load_dir(self, path) -> int:
        if not os.path.isdir(path):
            return 0
        count = 0
        for name in os.listdir(path):
            try:
                key = Digest.from_hex(name)
            except ValueError:
                continue
            with open(os.path.join(path, name), "rb") as fh:
                blob = fh.read()
            if not self.nodes:
                self._entries[key.value] = blob
            else:
                for node in self.holders(key):
                    self.views[node][key.value] = blob
            count += 1
        return count
