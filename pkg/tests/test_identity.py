"""Joining, the key directory, and sealed key exchange."""

import random

import pytest

from medledger import crypto, identity
from medledger.errors import AuthenticationError, IdentityError


def test_join_patient_produces_valid_identity(rng):
    patient, record = identity.join_patient("alice", rng)
    assert record.role == identity.ROLE_PATIENT
    assert record.public_key == patient.keys.public
    assert crypto.decompress_point(patient.keys.public) is not None
    assert len(patient.record_key.secret) == 32


def test_join_staff_carries_profile(rng):
    staff, record = identity.join_staff("drbob", "cardiology", rng)
    assert record.role == identity.ROLE_STAFF
    assert record.profile == "cardiology"
    directory = identity.KeyDirectory()
    directory.register(record.public_key, record.role, record.profile)
    entry = directory.lookup(staff.keys.public)
    assert entry is not None and entry.profile == "cardiology"


def test_distinct_seeds_distinct_addresses():
    one, _ = identity.join_patient("a", random.Random(1))
    two, _ = identity.join_patient("b", random.Random(2))
    assert one.keys.public != two.keys.public


def test_directory_rejects_duplicates(rng):
    patient, record = identity.join_patient("alice", rng)
    directory = identity.KeyDirectory()
    directory.register(record.public_key, record.role)
    with pytest.raises(IdentityError):
        directory.register(record.public_key, identity.ROLE_PATIENT)
    with pytest.raises(IdentityError):  # same key cannot re-register as staff
        directory.register(record.public_key, identity.ROLE_STAFF)


def test_directory_lookup_by_hash(rng):
    staff, record = identity.join_staff("m", "gp", rng)
    directory = identity.KeyDirectory()
    directory.register(record.public_key, record.role, record.profile)
    key_hash = crypto.hash_bytes(staff.keys.public).value
    assert directory.lookup_hash(key_hash).public_key == staff.keys.public
    assert directory.role_of(staff.keys.public) == identity.ROLE_STAFF


def _registered_pair(rng):
    patient, p_rec = identity.join_patient("alice", rng)
    staff, s_rec = identity.join_staff("drbob", "cardiology", rng)
    directory = identity.KeyDirectory()
    directory.register(p_rec.public_key, p_rec.role)
    directory.register(s_rec.public_key, s_rec.role, s_rec.profile)
    return patient, staff, directory


def test_share_and_open_agree(rng):
    patient, staff, directory = _registered_pair(rng)
    envelope = identity.share_sym_key(patient, staff.keys.public, directory, rng)
    received = identity.open_envelope(staff, envelope, rng)
    assert received.secret == patient.record_key.secret
    assert patient.shared_keys[staff.keys.public].secret == received.secret
    assert staff.received_keys[patient.keys.public].secret == received.secret


def test_share_requires_registered_staff(rng):
    patient, staff, directory = _registered_pair(rng)
    stranger = crypto.gen_sig_keypair(rng)
    with pytest.raises(IdentityError):
        identity.share_sym_key(patient, stranger.public, directory, rng)
    with pytest.raises(IdentityError):  # patients are not valid recipients
        identity.share_sym_key(patient, patient.keys.public, directory, rng)


def test_envelope_wrong_recipient_fails(rng):
    patient, staff, directory = _registered_pair(rng)
    other, o_rec = identity.join_staff("eve", "外", rng)
    directory.register(o_rec.public_key, o_rec.role)
    envelope = identity.share_sym_key(patient, staff.keys.public, directory, rng)
    with pytest.raises(IdentityError):
        identity.open_envelope(other, envelope, rng)
    # forwarding the sealed bytes to the right id but wrong key also fails
    forged = identity.SecureEnvelope(
        sender=envelope.sender, recipient=other.keys.public,
        ephemeral_public=envelope.ephemeral_public, sealed_key=envelope.sealed_key)
    with pytest.raises((IdentityError, AuthenticationError)):
        identity.open_envelope(other, forged, rng)


def test_envelope_wire_round_trip(rng):
    patient, staff, directory = _registered_pair(rng)
    envelope = identity.share_sym_key(patient, staff.keys.public, directory, rng)
    again = identity.SecureEnvelope.from_wire(envelope.to_wire())
    assert again == envelope
    received = identity.open_envelope(staff, again, rng)
    assert received.secret == patient.record_key.secret


def test_rotation_supersedes_and_keeps_history(rng):
    patient, staff, directory = _registered_pair(rng)
    first = identity.open_envelope(
        staff, identity.share_sym_key(patient, staff.keys.public, directory, rng), rng)
    old_secret = patient.record_key.secret
    patient.rotate_record_key(rng)
    assert patient.record_key.secret != old_secret
    assert [k.secret for k in patient.decryption_keys()][-1] == old_secret
    second = identity.open_envelope(
        staff, identity.share_sym_key(patient, staff.keys.public, directory, rng), rng)
    assert second.secret == patient.record_key.secret
    history = [k.secret for k in staff.decryption_keys(patient.keys.public)]
    assert history == [second.secret, first.secret]


def test_envelope_never_exposes_key_bytes(rng):
    patient, staff, directory = _registered_pair(rng)
    envelope = identity.share_sym_key(patient, staff.keys.public, directory, rng)
    assert patient.record_key.secret not in envelope.to_wire()
