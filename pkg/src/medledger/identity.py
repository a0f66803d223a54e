"""Actor identities and the key-exchange flow for joining the network.

Patients and medical staff each generate a signing keypair and announce the
public key (their address) through a registration transaction; the resulting
on-ledger key directory is the only trust anchor. Record-encryption keys are
shared off-ledger inside sealed envelopes: an ephemeral ECDH exchange wraps
the 32-byte symmetric key so only the intended recipient can open it.

A patient holds one active record key at a time. Sharing hands the active key
to a staff member; revoking rotates the active key so anything written later
is opaque to previously authorized staff even outside the policy gate. Both
sides keep key history so older records stay decryptable after a rotation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from . import crypto
from .crypto import Ciphertext, SigningKeyPair, SymmetricKey, aead, ensure_rng
from .errors import IdentityError, WireError
from . import wire

ROLE_PATIENT = "patient"
ROLE_STAFF = "staff"

_ENVELOPE_CONTEXT = b"medledger/keywrap/v1"


@dataclass(frozen=True)
class DirectoryEntry:
    role: str
    public_key: bytes
    profile: str = ""


class KeyDirectory:
    """Append-only map hash(public key) -> registration record."""

    def __init__(self):
        self.entries: dict[bytes, DirectoryEntry] = {}

    def register(self, public_key: bytes, role: str, profile: str = "") -> None:
        if role not in (ROLE_PATIENT, ROLE_STAFF):
            raise IdentityError(f"unknown role {role!r}")
        key_hash = crypto.hash_bytes(public_key).value
        if key_hash in self.entries:
            raise IdentityError("public key already registered")
        self.entries[key_hash] = DirectoryEntry(role, public_key, profile)

    def lookup(self, public_key: bytes) -> DirectoryEntry | None:
        return self.entries.get(crypto.hash_bytes(public_key).value)

    def lookup_hash(self, key_hash: bytes) -> DirectoryEntry | None:
        return self.entries.get(key_hash)

    def is_registered(self, public_key: bytes) -> bool:
        return self.lookup(public_key) is not None

    def role_of(self, public_key: bytes) -> str | None:
        entry = self.lookup(public_key)
        return entry.role if entry else None


@dataclass(frozen=True)
class RegistrationRecord:
    """Payload queued as a ledger transaction to announce a public key."""

    actor_id: str
    role: str
    public_key: bytes
    profile: str = ""


@dataclass
class PatientIdentity:
    patient_id: str
    keys: SigningKeyPair
    record_key: SymmetricKey
    shared_keys: dict[bytes, SymmetricKey] = field(default_factory=dict)
    key_history: list[SymmetricKey] = field(default_factory=list)

    @property
    def public_key(self) -> bytes:
        return self.keys.public

    def rotate_record_key(self, rng=None) -> SymmetricKey:
        """Retire the active record key; returns the fresh one."""
        self.key_history.append(self.record_key)
        self.record_key = SymmetricKey.generate(ensure_rng(rng))
        return self.record_key

    def decryption_keys(self):
        """Active key first, then retired ones (newest first)."""
        return [self.record_key, *reversed(self.key_history)]


@dataclass
class StaffIdentity:
    staff_id: str
    keys: SigningKeyPair
    profile: str = ""
    received_keys: dict[bytes, SymmetricKey] = field(default_factory=dict)
    key_history: dict[bytes, list[SymmetricKey]] = field(default_factory=dict)

    @property
    def public_key(self) -> bytes:
        return self.keys.public

    def decryption_keys(self, patient_pk: bytes):
        current = self.received_keys.get(patient_pk)
        older = self.key_history.get(patient_pk, [])
        return ([current] if current else []) + list(reversed(older))


@dataclass(frozen=True)
class SecureEnvelope:
    """A symmetric key sealed for one recipient via ephemeral ECDH."""

    sender: bytes
    recipient: bytes
    ephemeral_public: bytes
    sealed_key: Ciphertext

    def to_wire(self) -> bytes:
        return b"".join([
            wire.pack_bytes(self.sender),
            wire.pack_bytes(self.recipient),
            wire.pack_bytes(self.ephemeral_public),
            wire.pack_bytes(self.sealed_key.to_wire()),
        ])

    @classmethod
    def from_wire(cls, raw: bytes) -> "SecureEnvelope":
        r = wire.Reader(raw)
        env = cls(
            sender=r.bytes_field(),
            recipient=r.bytes_field(),
            ephemeral_public=r.bytes_field(),
            sealed_key=Ciphertext.from_wire(r.bytes_field()),
        )
        r.expect_end()
        return env


def join_patient(patient_id: str, rng=None) -> tuple[PatientIdentity, RegistrationRecord]:
    """Generate patient keys and the registration record to announce them."""
    rng = ensure_rng(rng)
    keys = crypto.gen_sig_keypair(rng)
    identity = PatientIdentity(
        patient_id=patient_id,
        keys=keys,
        record_key=SymmetricKey.generate(rng),
    )
    record = RegistrationRecord(patient_id, ROLE_PATIENT, keys.public)
    return identity, record


def join_staff(staff_id: str, profile: str, rng=None) -> tuple[StaffIdentity, RegistrationRecord]:
    rng = ensure_rng(rng)
    keys = crypto.gen_sig_keypair(rng)
    identity = StaffIdentity(staff_id=staff_id, keys=keys, profile=profile)
    record = RegistrationRecord(staff_id, ROLE_STAFF, keys.public, profile)
    return identity, record


def _wrap_secret(shared_x: bytes, ephemeral_public: bytes, recipient: bytes) -> bytes:
    return hashlib.sha256(
        _ENVELOPE_CONTEXT + shared_x + ephemeral_public + recipient
    ).digest()


def share_sym_key(
    patient: PatientIdentity,
    staff_pk: bytes,
    directory: KeyDirectory,
    rng=None,
) -> SecureEnvelope:
    """Seal the patient's active record key for a registered staff member."""
    entry = directory.lookup(staff_pk)
    if entry is None:
        raise IdentityError("recipient key is not registered")
    if entry.role != ROLE_STAFF:
        raise IdentityError("recipient is not registered as staff")
    rng = ensure_rng(rng)
    ephemeral = crypto.gen_sig_keypair(rng)
    shared_x = crypto.ecdh_shared_secret(ephemeral.private, staff_pk)
    secret = _wrap_secret(shared_x, ephemeral.public, staff_pk)
    sealed = aead.seal(
        secret,
        nonce=b"\x00" * aead.NONCE_LEN,  # single message per ephemeral key
        plaintext=patient.record_key.secret,
        associated_data=patient.public_key + staff_pk,
    )
    patient.shared_keys[staff_pk] = patient.record_key
    return SecureEnvelope(
        sender=patient.public_key,
        recipient=staff_pk,
        ephemeral_public=ephemeral.public,
        sealed_key=sealed,
    )


def open_envelope(staff: StaffIdentity, env: SecureEnvelope, rng=None) -> SymmetricKey:
    """Unseal a shared key; updates the staff identity's received keys."""
    if env.recipient != staff.public_key:
        raise IdentityError("envelope is addressed to a different key")
    shared_x = crypto.ecdh_shared_secret(staff.keys.private, env.ephemeral_public)
    secret = _wrap_secret(shared_x, env.ephemeral_public, env.recipient)
    key_bytes = aead.open_sealed(
        secret, env.sealed_key, associated_data=env.sender + env.recipient
    )
    if len(key_bytes) != aead.KEY_LEN:
        raise IdentityError("envelope did not contain a valid symmetric key")
    key = SymmetricKey(key_bytes, rng=ensure_rng(rng))
    previous = staff.received_keys.get(env.sender)
    if previous is not None and previous != key:
        staff.key_history.setdefault(env.sender, []).append(previous)
    staff.received_keys[env.sender] = key
    return key
