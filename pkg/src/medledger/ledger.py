"""Chain state machine: transactions, blocks, policy and data-pointer state.

Three transaction kinds run over the chain: Register announces a public key,
Access grants or revokes a policy (the empty type set revokes everything),
Data writes a ciphertext pointer or reads one back. State is a deterministic
fold over the committed chain: replaying the block file reproduces the live
state byte for byte, which the audit and tamper-detection tests rely on.

Only digests of ciphertexts enter the state; ciphertext bytes ride inside
write transactions so every replica can populate the off-chain store, and
plaintext never appears anywhere.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from functools import lru_cache

from . import wire
from .crypto import (
    Ciphertext,
    Digest,
    PUBLIC_KEY_LEN,
    SIGNATURE_LEN,
    Signature,
    SigningKeyPair,
    ZERO_DIGEST,
    hash_bytes,
    sign as ecdsa_sign,
    verify_digest,
)
from .errors import ReplayError, WireError
from .identity import KeyDirectory, ROLE_PATIENT, ROLE_STAFF

KIND_REGISTER = 0
KIND_ACCESS = 1
KIND_DATA = 2

RW_WRITE = 0
RW_READ = 1

ROLE_CODES = {ROLE_PATIENT: 0, ROLE_STAFF: 1}
ROLE_NAMES = {0: ROLE_PATIENT, 1: ROLE_STAFF}

MAX_BLOCK_TXS = 64
GENESIS_PROPOSER = 0xFFFFFFFF

# outcome codes
OK = "ok"
REJECT_UNSIGNED = "unsigned"
REJECT_BAD_SIG = "bad_signature"
REJECT_BAD_SEQ = "bad_seq"
REJECT_UNREGISTERED = "unregistered_sender"
REJECT_KEY_MISMATCH = "register_key_mismatch"
REJECT_DUPLICATE = "duplicate_registration"
REJECT_NOT_GRANTOR = "sender_not_grantor"
REJECT_BAD_PATIENT = "grantor_not_patient"
REJECT_BAD_STAFF = "grantee_not_staff"
DENIED = "policy_denied"
NOT_FOUND = "not_found"
INTEGRITY_ALARM = "integrity_alarm"

EVENT_GRANT = "grant"
EVENT_REVOKE = "revoke"
EVENT_WRITE = "write"
EVENT_READ = "read"


@dataclass(frozen=True)
class Policy:
    """Type labels a patient permits one staff member to read; empty = none."""

    grantor: bytes
    grantee: bytes
    allowed_types: frozenset[str]


@dataclass(frozen=True)
class RegisterPayload:
    role: str
    public_key: bytes
    profile: str = ""


@dataclass(frozen=True)
class AccessPayload:
    patient_pk: bytes
    staff_pk: bytes
    allowed_types: frozenset[str]

    @property
    def policy(self) -> Policy:
        return Policy(self.patient_pk, self.staff_pk, self.allowed_types)


@dataclass(frozen=True)
class DataPayload:
    patient_pk: bytes
    data_type: str
    rw: int
    content: Ciphertext | Digest  # ciphertext when rw=0, digest when rw=1


@dataclass(frozen=True)
class Transaction:
    kind: int
    sender: bytes
    seq: int
    payload: RegisterPayload | AccessPayload | DataPayload
    signature: Signature | None = None

    def signing_bytes(self) -> bytes:
        return encode_transaction(self, include_signature=False)

    def txid(self) -> Digest:
        return hash_bytes(encode_transaction(self))


def _encode_payload(payload) -> bytes:
    if isinstance(payload, RegisterPayload):
        return b"".join([
            wire.pack_u8(ROLE_CODES[payload.role]),
            payload.public_key,
            wire.pack_str(payload.profile),
        ])
    if isinstance(payload, AccessPayload):
        parts = [payload.patient_pk, payload.staff_pk,
                 wire.pack_u32(len(payload.allowed_types))]
        parts.extend(wire.pack_str(t) for t in sorted(payload.allowed_types))
        return b"".join(parts)
    if isinstance(payload, DataPayload):
        if payload.rw == RW_WRITE:
            content = payload.content.to_wire()
        else:
            content = payload.content.value
        return b"".join([
            payload.patient_pk,
            wire.pack_str(payload.data_type),
            wire.pack_u8(payload.rw),
            wire.pack_bytes(content),
        ])
    raise TypeError(f"unknown payload {type(payload)!r}")


def _decode_payload(kind: int, r: wire.Reader):
    if kind == KIND_REGISTER:
        role_code = r.u8()
        if role_code not in ROLE_NAMES:
            raise WireError(f"unknown role code {role_code}")
        return RegisterPayload(ROLE_NAMES[role_code], r.take(PUBLIC_KEY_LEN), r.str_field())
    if kind == KIND_ACCESS:
        patient = r.take(PUBLIC_KEY_LEN)
        staff = r.take(PUBLIC_KEY_LEN)
        count = r.u32()
        types = [r.str_field() for _ in range(count)]
        if types != sorted(types) or len(set(types)) != count:
            raise WireError("policy types must be sorted and unique")
        return AccessPayload(patient, staff, frozenset(types))
    if kind == KIND_DATA:
        patient = r.take(PUBLIC_KEY_LEN)
        data_type = r.str_field()
        rw = r.u8()
        content = r.bytes_field()
        if rw == RW_WRITE:
            return DataPayload(patient, data_type, rw, Ciphertext.from_wire(content))
        if rw == RW_READ:
            if len(content) != 32:
                raise WireError("read target must be a 32-byte digest")
            return DataPayload(patient, data_type, rw, Digest(content))
        raise WireError(f"rw flag must be 0 or 1, got {rw}")
    raise WireError(f"unknown transaction kind {kind}")


def encode_transaction(tx: Transaction, include_signature: bool = True) -> bytes:
    parts = [
        wire.pack_u8(tx.kind),
        tx.sender,
        wire.pack_u64(tx.seq),
        wire.pack_bytes(_encode_payload(tx.payload)),
    ]
    if include_signature:
        if tx.signature is None:
            raise ValueError("transaction is unsigned")
        parts.append(tx.signature.to_bytes())
    return b"".join(parts)


def decode_transaction(raw: bytes) -> Transaction:
    r = wire.Reader(raw)
    kind = r.u8()
    sender = r.take(PUBLIC_KEY_LEN)
    seq = r.u64()
    payload = _decode_payload(kind, wire.Reader(r.bytes_field()))
    signature = Signature.from_bytes(r.take(SIGNATURE_LEN))
    r.expect_end()
    return Transaction(kind, sender, seq, payload, signature)


def sign_transaction(tx: Transaction, private: bytes) -> Transaction:
    return replace(tx, signature=ecdsa_sign(private, tx.signing_bytes()))


def build_signed_tx(kind: int, keys: SigningKeyPair, seq: int, payload) -> Transaction:
    return sign_transaction(Transaction(kind, keys.public, seq, payload), keys.private)


@lru_cache(maxsize=65536)
def _cached_verify(sender: bytes, msg_digest: bytes, r: int, s: int) -> bool:
    return verify_digest(sender, msg_digest, Signature(r, s))


def verify_transaction_signature(tx: Transaction) -> bool:
    if tx.signature is None:
        return False
    digest = hashlib.sha256(tx.signing_bytes()).digest()
    return _cached_verify(tx.sender, digest, tx.signature.r, tx.signature.s)


# ---------------------------------------------------------------------------
# blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    height: int
    prev_hash: Digest
    tx_root: Digest
    timestamp: int
    proposer: int
    txs: tuple[Transaction, ...]

    def header_bytes(self) -> bytes:
        return b"".join([
            wire.pack_u64(self.height),
            self.prev_hash.value,
            self.tx_root.value,
            wire.pack_u64(self.timestamp),
            wire.pack_u32(self.proposer),
        ])

    def block_hash(self) -> Digest:
        return hash_bytes(self.header_bytes())


def compute_tx_root(txs) -> Digest:
    return hash_bytes(b"".join(encode_transaction(tx) for tx in txs))


def encode_validator_roster(validators) -> bytes:
    parts = [wire.pack_u32(len(validators))]
    for replica_id, public_key in sorted(validators):
        parts.append(wire.pack_u32(replica_id))
        parts.append(public_key)
    return b"".join(parts)


def build_genesis(validators=(), timestamp: int = 0) -> Block:
    """Height-0 block anchoring the validator roster in its tx_root."""
    return Block(
        height=0,
        prev_hash=ZERO_DIGEST,
        tx_root=hash_bytes(encode_validator_roster(validators)),
        timestamp=timestamp,
        proposer=GENESIS_PROPOSER,
        txs=(),
    )


def encode_block(block: Block) -> bytes:
    parts = [block.header_bytes(), wire.pack_u32(len(block.txs))]
    parts.extend(wire.pack_bytes(encode_transaction(tx)) for tx in block.txs)
    return b"".join(parts)


def decode_block(raw: bytes) -> Block:
    r = wire.Reader(raw)
    height = r.u64()
    prev_hash = Digest(r.take(32))
    tx_root = Digest(r.take(32))
    timestamp = r.u64()
    proposer = r.u32()
    count = r.u32()
    txs = tuple(decode_transaction(r.bytes_field()) for _ in range(count))
    r.expect_end()
    return Block(height, prev_hash, tx_root, timestamp, proposer, txs)


def save_chain(path, blocks) -> None:
    """Length-prefixed canonical block encodings, genesis first."""
    with open(path, "wb") as fh:
        for block in blocks:
            fh.write(wire.pack_bytes(encode_block(block)))


def load_chain(path) -> list[Block]:
    with open(path, "rb") as fh:
        raw = fh.read()
    r = wire.Reader(raw)
    blocks = []
    while r.remaining():
        blocks.append(decode_block(r.bytes_field()))
    return blocks


# ---------------------------------------------------------------------------
# ledger state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolicyRecord:
    order: int
    height: int
    patient_pk: bytes
    staff_pk: bytes
    allowed_types: frozenset[str]


@dataclass(frozen=True)
class AuditEvent:
    order: int
    height: int
    kind: str
    actor: bytes
    patient: bytes
    data_type: str = ""
    types: frozenset[str] = frozenset()
    digest: Digest | None = None

    def canonical_bytes(self) -> bytes:
        parts = [
            wire.pack_u64(self.order),
            wire.pack_u64(self.height),
            wire.pack_str(self.kind),
            self.actor,
            self.patient,
            wire.pack_str(self.data_type),
            wire.pack_u32(len(self.types)),
        ]
        parts.extend(wire.pack_str(t) for t in sorted(self.types))
        parts.append(self.digest.value if self.digest else b"\x00")
        return b"".join(parts)


@dataclass(frozen=True)
class TxOutcome:
    accepted: bool
    code: str
    value: object = None  # Digest for writes, ciphertext wire bytes for reads


class LedgerState:
    """Deterministic fold over the committed chain."""

    def __init__(self):
        self.directory = KeyDirectory()
        self.policy_log: list[PolicyRecord] = []
        self.latest_policy: dict[tuple[bytes, bytes], PolicyRecord] = {}
        self.policies_by_patient_hash: dict[bytes, list[int]] = {}
        self.policies_by_staff_hash: dict[bytes, list[int]] = {}
        self.data_index: dict[tuple[bytes, str], list[Digest]] = {}
        self._data_sets: dict[tuple[bytes, str], set[bytes]] = {}
        self.seq_tracker: dict[bytes, int] = {}
        self.events: list[AuditEvent] = []
        self.height = 0

    def clone(self) -> "LedgerState":
        other = LedgerState.__new__(LedgerState)
        other.directory = KeyDirectory()
        other.directory.entries = dict(self.directory.entries)
        other.policy_log = list(self.policy_log)
        other.latest_policy = dict(self.latest_policy)
        other.policies_by_patient_hash = {k: list(v) for k, v in self.policies_by_patient_hash.items()}
        other.policies_by_staff_hash = {k: list(v) for k, v in self.policies_by_staff_hash.items()}
        other.data_index = {k: list(v) for k, v in self.data_index.items()}
        other._data_sets = {k: set(v) for k, v in self._data_sets.items()}
        other.seq_tracker = dict(self.seq_tracker)
        other.events = list(self.events)
        other.height = self.height
        return other

    def record_digests(self, patient_pk: bytes, data_type: str) -> list[Digest]:
        return list(self.data_index.get((patient_pk, data_type), ()))

    def state_digest(self) -> Digest:
        parts = [wire.pack_u32(len(self.directory.entries))]
        for key_hash in sorted(self.directory.entries):
            entry = self.directory.entries[key_hash]
            parts.append(key_hash)
            parts.append(wire.pack_u8(ROLE_CODES[entry.role]))
            parts.append(entry.public_key)
            parts.append(wire.pack_str(entry.profile))
        parts.append(wire.pack_u32(len(self.policy_log)))
        for rec in self.policy_log:
            parts.append(wire.pack_u64(rec.order))
            parts.append(wire.pack_u64(rec.height))
            parts.append(rec.patient_pk)
            parts.append(rec.staff_pk)
            parts.append(wire.pack_u32(len(rec.allowed_types)))
            parts.extend(wire.pack_str(t) for t in sorted(rec.allowed_types))
        parts.append(wire.pack_u32(len(self.data_index)))
        for key in sorted(self.data_index):
            patient_pk, data_type = key
            digests = self.data_index[key]
            parts.append(patient_pk)
            parts.append(wire.pack_str(data_type))
            parts.append(wire.pack_u32(len(digests)))
            parts.extend(d.value for d in digests)
        parts.append(wire.pack_u32(len(self.seq_tracker)))
        for sender in sorted(self.seq_tracker):
            parts.append(sender)
            parts.append(wire.pack_u64(self.seq_tracker[sender]))
        parts.append(wire.pack_u32(len(self.events)))
        parts.extend(ev.canonical_bytes() for ev in self.events)
        parts.append(wire.pack_u64(self.height))
        return hash_bytes(b"".join(parts))


def policy_check(state: LedgerState, requester_pk: bytes, data_type: str,
                 patient_pk: bytes) -> bool:
    """Patients always read their own data; staff need the type in the
    latest accepted policy from that patient."""
    if requester_pk == patient_pk:
        return state.directory.role_of(patient_pk) == ROLE_PATIENT
    record = state.latest_policy.get((patient_pk, requester_pk))
    return record is not None and data_type in record.allowed_types


def _apply_register(state: LedgerState, tx: Transaction) -> TxOutcome:
    payload: RegisterPayload = tx.payload
    if payload.public_key != tx.sender:
        return TxOutcome(False, REJECT_KEY_MISMATCH)
    if state.directory.is_registered(payload.public_key):
        return TxOutcome(False, REJECT_DUPLICATE)
    state.directory.register(payload.public_key, payload.role, payload.profile)
    return TxOutcome(True, OK)


def _apply_access(state: LedgerState, tx: Transaction, height: int) -> TxOutcome:
    payload: AccessPayload = tx.payload
    if tx.sender != payload.patient_pk:
        return TxOutcome(False, REJECT_NOT_GRANTOR)
    if state.directory.role_of(payload.patient_pk) != ROLE_PATIENT:
        return TxOutcome(False, REJECT_BAD_PATIENT)
    if state.directory.role_of(payload.staff_pk) != ROLE_STAFF:
        return TxOutcome(False, REJECT_BAD_STAFF)
    record = PolicyRecord(
        order=len(state.policy_log),
        height=height,
        patient_pk=payload.patient_pk,
        staff_pk=payload.staff_pk,
        allowed_types=payload.allowed_types,
    )
    state.policy_log.append(record)
    state.latest_policy[(payload.patient_pk, payload.staff_pk)] = record
    patient_hash = hash_bytes(payload.patient_pk).value
    staff_hash = hash_bytes(payload.staff_pk).value
    state.policies_by_patient_hash.setdefault(patient_hash, []).append(record.order)
    state.policies_by_staff_hash.setdefault(staff_hash, []).append(record.order)
    state.events.append(AuditEvent(
        order=len(state.events),
        height=height,
        kind=EVENT_GRANT if payload.allowed_types else EVENT_REVOKE,
        actor=tx.sender,
        patient=payload.patient_pk,
        types=payload.allowed_types,
    ))
    return TxOutcome(True, OK)


def _apply_data(state: LedgerState, tx: Transaction, height: int, store) -> TxOutcome:
    payload: DataPayload = tx.payload
    if not policy_check(state, tx.sender, payload.data_type, payload.patient_pk):
        return TxOutcome(False, DENIED)
    if payload.rw == RW_WRITE:
        # only the data owner writes; staff grants are read-only
        if tx.sender != payload.patient_pk:
            return TxOutcome(False, DENIED)
        content_wire = payload.content.to_wire()
        digest = hash_bytes(content_wire)
        key = (payload.patient_pk, payload.data_type)
        known = state._data_sets.setdefault(key, set())
        if digest.value not in known:
            known.add(digest.value)
            state.data_index.setdefault(key, []).append(digest)
        if store is not None:
            store.put(content_wire)
        state.events.append(AuditEvent(
            order=len(state.events),
            height=height,
            kind=EVENT_WRITE,
            actor=tx.sender,
            patient=payload.patient_pk,
            data_type=payload.data_type,
            digest=digest,
        ))
        return TxOutcome(True, OK, value=digest)
    # read
    digest: Digest = payload.content
    key = (payload.patient_pk, payload.data_type)
    if digest.value not in state._data_sets.get(key, ()):
        return TxOutcome(False, NOT_FOUND)
    value = None
    code = OK
    if store is not None:
        from .errors import TamperAlarm
        try:
            value = store.get(digest)
        except TamperAlarm:
            code = INTEGRITY_ALARM
        if value is None and code == OK:
            code = INTEGRITY_ALARM
    state.events.append(AuditEvent(
        order=len(state.events),
        height=height,
        kind=EVENT_READ,
        actor=tx.sender,
        patient=payload.patient_pk,
        data_type=payload.data_type,
        digest=digest,
    ))
    return TxOutcome(True, code, value=value)


def apply_transaction(state: LedgerState, tx: Transaction, store=None,
                      height: int = 0) -> TxOutcome:
    """Validate and apply one transaction in place.

    Rejected transactions leave the state untouched and do not consume the
    sender's sequence number; they never enter a block. An accepted read may
    still carry the integrity-alarm code when the store cannot produce the
    indexed bytes.
    """
    if tx.signature is None:
        return TxOutcome(False, REJECT_UNSIGNED)
    if not verify_transaction_signature(tx):
        return TxOutcome(False, REJECT_BAD_SIG)
    if tx.kind != KIND_REGISTER and not state.directory.is_registered(tx.sender):
        return TxOutcome(False, REJECT_UNREGISTERED)
    expected_seq = state.seq_tracker.get(tx.sender, 0) + 1
    if tx.seq != expected_seq:
        return TxOutcome(False, REJECT_BAD_SEQ)

    if tx.kind == KIND_REGISTER:
        outcome = _apply_register(state, tx)
    elif tx.kind == KIND_ACCESS:
        outcome = _apply_access(state, tx, height)
    elif tx.kind == KIND_DATA:
        outcome = _apply_data(state, tx, height, store)
    else:
        return TxOutcome(False, REJECT_BAD_SIG)
    if outcome.accepted:
        state.seq_tracker[tx.sender] = tx.seq
    return outcome


def apply_access_tx(state: LedgerState, tx: Transaction, height: int = 0) -> tuple[int, TxOutcome]:
    """Access-transaction entry point returning the protocol status bit."""
    outcome = apply_transaction(state, tx, height=height)
    return (1 if outcome.accepted else 0), outcome


def apply_data_tx(state: LedgerState, tx: Transaction, store, height: int = 0) -> TxOutcome:
    return apply_transaction(state, tx, store=store, height=height)


# ---------------------------------------------------------------------------
# block validation, replay, audit
# ---------------------------------------------------------------------------

def validate_block_verbose(tip: Block, candidate: Block, state: LedgerState,
                           store=None) -> tuple[LedgerState | None, str]:
    """Full check of a successor block; returns (post-state, "") on success."""
    if candidate.height != tip.height + 1:
        return None, f"height {candidate.height}, expected {tip.height + 1}"
    if candidate.prev_hash != tip.block_hash():
        return None, "prev_hash does not link to the chain tip"
    if candidate.proposer == GENESIS_PROPOSER:
        return None, "non-genesis block with genesis proposer"
    if not 1 <= len(candidate.txs) <= MAX_BLOCK_TXS:
        return None, f"block carries {len(candidate.txs)} txs"
    if candidate.tx_root != compute_tx_root(candidate.txs):
        return None, "tx_root mismatch"
    post = state.clone()
    post.height = candidate.height
    for index, tx in enumerate(candidate.txs):
        outcome = apply_transaction(post, tx, store=store, height=candidate.height)
        if not outcome.accepted:
            return None, f"tx {index} rejected: {outcome.code}"
    return post, ""


def validate_block(tip: Block, candidate: Block, state: LedgerState) -> bool:
    post, _ = validate_block_verbose(tip, candidate, state)
    return post is not None


def replay(blocks) -> LedgerState:
    """Rebuild state from a chain, validating every link; raises ReplayError."""
    if not blocks:
        raise ReplayError(0, "empty chain")
    genesis = blocks[0]
    if genesis.height != 0 or genesis.prev_hash != ZERO_DIGEST or genesis.txs:
        raise ReplayError(0, "malformed genesis block")
    state = LedgerState()
    tip = genesis
    for block in blocks[1:]:
        post, reason = validate_block_verbose(tip, block, state)
        if post is None:
            raise ReplayError(block.height, reason)
        state = post
        tip = block
    return state


def audit_trail(state: LedgerState, patient_pk: bytes) -> list[AuditEvent]:
    """Every accepted access/data event touching the patient, in chain order."""
    return [ev for ev in state.events if ev.patient == patient_pk]


class DirectChain:
    """Consensus-free sequencer: applies transactions immediately and seals
    blocks of up to MAX_BLOCK_TXS. Used by tests and tools where ordering is
    not under test; the consensus path produces identical state."""

    def __init__(self, validators=(), store=None):
        self.genesis = build_genesis(validators)
        self.blocks: list[Block] = [self.genesis]
        self.state = LedgerState()
        self.store = store
        self._open_txs: list[Transaction] = []
        self._clock = 0

    def submit(self, tx: Transaction) -> TxOutcome:
        height = len(self.blocks)
        outcome = apply_transaction(self.state, tx, store=self.store, height=height)
        if outcome.accepted:
            self._open_txs.append(tx)
            self.state.height = height
            if len(self._open_txs) >= MAX_BLOCK_TXS:
                self.seal()
        return outcome

    def seal(self) -> Block | None:
        if not self._open_txs:
            return None
        self._clock += 1
        block = Block(
            height=len(self.blocks),
            prev_hash=self.blocks[-1].block_hash(),
            tx_root=compute_tx_root(self._open_txs),
            timestamp=self._clock,
            proposer=0,
            txs=tuple(self._open_txs),
        )
        self.blocks.append(block)
        self._open_txs = []
        return block
