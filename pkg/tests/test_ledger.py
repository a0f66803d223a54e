"""Ledger state machine: grants, checks, data flow, blocks, replay, audit."""

import random

import pytest

from medledger import crypto, identity, ledger
from medledger.errors import ReplayError
from medledger.store import ContentStore

import protocol_oracle as oracle
from system_harness import SystemRun


class Fixture:
    """One patient, one staff member, registered on a fresh direct chain."""

    def __init__(self, seed=0xAB):
        self.rng = random.Random(seed)
        self.store = ContentStore()
        self.chain = ledger.DirectChain(store=self.store)
        self.patient, _ = identity.join_patient("alice", self.rng)
        self.staff, _ = identity.join_staff("drbob", "cardiology", self.rng)
        self.seqs = {b"p": 0, b"s": 0}
        assert self.register(self.patient.keys, identity.ROLE_PATIENT).accepted
        assert self.register(self.staff.keys, identity.ROLE_STAFF, "cardiology").accepted

    def _next_seq(self, keys):
        return self.chain.state.seq_tracker.get(keys.public, 0) + 1

    def register(self, keys, role, profile=""):
        tx = ledger.build_signed_tx(
            ledger.KIND_REGISTER, keys, self._next_seq(keys),
            ledger.RegisterPayload(role, keys.public, profile))
        return self.chain.submit(tx)

    def grant(self, types, sender_keys=None, patient_pk=None, staff_pk=None):
        sender = sender_keys or self.patient.keys
        payload = ledger.AccessPayload(
            patient_pk or self.patient.keys.public,
            staff_pk or self.staff.keys.public, frozenset(types))
        tx = ledger.build_signed_tx(ledger.KIND_ACCESS, sender,
                                    self._next_seq(sender), payload)
        return self.chain.submit(tx)

    def write(self, dtype, plaintext, sender_keys=None):
        sender = sender_keys or self.patient.keys
        ct = crypto.encrypt(self.patient.record_key, plaintext, dtype.encode())
        payload = ledger.DataPayload(self.patient.keys.public, dtype,
                                     ledger.RW_WRITE, ct)
        tx = ledger.build_signed_tx(ledger.KIND_DATA, sender,
                                    self._next_seq(sender), payload)
        return self.chain.submit(tx)

    def read(self, dtype, digest, sender_keys):
        payload = ledger.DataPayload(self.patient.keys.public, dtype,
                                     ledger.RW_READ, digest)
        tx = ledger.build_signed_tx(ledger.KIND_DATA, sender_keys,
                                    self._next_seq(sender_keys), payload)
        return self.chain.submit(tx)


@pytest.fixture
def fx():
    return Fixture()


def test_patient_grant_accepted(fx):
    outcome = fx.grant({"body temperature", "blood pressure"})
    assert outcome.accepted and outcome.code == ledger.OK
    record = fx.chain.state.latest_policy[
        (fx.patient.keys.public, fx.staff.keys.public)]
    assert record.allowed_types == {"body temperature", "blood pressure"}
    # indexed under both the patient and the staff key hashes
    patient_hash = crypto.hash_bytes(fx.patient.keys.public).value
    staff_hash = crypto.hash_bytes(fx.staff.keys.public).value
    assert fx.chain.state.policies_by_patient_hash[patient_hash]
    assert fx.chain.state.policies_by_staff_hash[staff_hash]


def test_staff_cannot_grant_to_itself(fx):
    outcome = fx.grant({"heart rate"}, sender_keys=fx.staff.keys)
    assert not outcome.accepted and outcome.code == ledger.REJECT_NOT_GRANTOR


def test_policy_check_semantics(fx):
    fx.grant({"body temperature", "blood pressure"})
    state = fx.chain.state
    patient_pk = fx.patient.keys.public
    staff_pk = fx.staff.keys.public
    assert ledger.policy_check(state, patient_pk, "heart rate", patient_pk)
    assert ledger.policy_check(state, staff_pk, "blood pressure", patient_pk)
    assert not ledger.policy_check(state, staff_pk, "heart rate", patient_pk)
    stranger = crypto.gen_sig_keypair(fx.rng)
    assert not ledger.policy_check(state, stranger.public, "heart rate", patient_pk)


def test_empty_set_revokes_everything(fx):
    fx.grant({"body temperature", "blood pressure"})
    outcome = fx.grant(set())
    assert outcome.accepted
    state = fx.chain.state
    for dtype in ("body temperature", "blood pressure", "heart rate"):
        assert not ledger.policy_check(
            state, fx.staff.keys.public, dtype, fx.patient.keys.public)


def test_write_then_read_round_trip(fx):
    fx.grant({"blood pressure"})
    write = fx.write("blood pressure", b"bp=121/79 unit-test-reading-0001")
    assert write.accepted and isinstance(write.value, crypto.Digest)
    assert fx.store.get(write.value) is not None
    read = fx.read("blood pressure", write.value, fx.staff.keys)
    assert read.accepted and read.code == ledger.OK
    ct = crypto.Ciphertext.from_wire(read.value)
    assert crypto.decrypt(fx.patient.record_key, ct, b"blood pressure") == \
        b"bp=121/79 unit-test-reading-0001"


def test_unauthorized_read_returns_empty(fx):
    fx.grant({"blood pressure"})
    write = fx.write("heart rate", b"hr=77bpm unit-test-reading-0002")
    read = fx.read("heart rate", write.value, fx.staff.keys)
    assert not read.accepted and read.code == ledger.DENIED


def test_staff_cannot_write(fx):
    fx.grant({"blood pressure"})
    outcome = fx.write("blood pressure", b"forged", sender_keys=fx.staff.keys)
    assert not outcome.accepted and outcome.code == ledger.DENIED


def test_read_unknown_digest_not_found(fx):
    fx.grant({"blood pressure"})
    missing = crypto.hash_bytes(b"never written")
    read = fx.read("blood pressure", missing, fx.staff.keys)
    assert not read.accepted and read.code == ledger.NOT_FOUND


def test_indexed_but_missing_bytes_raise_alarm(fx):
    fx.grant({"blood pressure"})
    write = fx.write("blood pressure", b"bp=119/75 unit-test-reading-0003")
    fx.store.drop_entry(None, write.value)  # no nodes: drop from flat map
    fx.store._entries.pop(write.value.value, None)
    read = fx.read("blood pressure", write.value, fx.staff.keys)
    assert read.accepted and read.code == ledger.INTEGRITY_ALARM


def test_replay_protection_rejects_stale_seq(fx):
    payload = ledger.AccessPayload(fx.patient.keys.public, fx.staff.keys.public,
                                   frozenset({"heart rate"}))
    tx = ledger.build_signed_tx(ledger.KIND_ACCESS, fx.patient.keys, 2, payload)
    assert fx.chain.submit(tx).accepted
    assert not fx.chain.submit(tx).accepted  # same seq replayed
    skipped = ledger.build_signed_tx(ledger.KIND_ACCESS, fx.patient.keys, 9, payload)
    assert fx.chain.submit(skipped).code == ledger.REJECT_BAD_SEQ


def test_tampered_signature_rejected(fx):
    payload = ledger.AccessPayload(fx.patient.keys.public, fx.staff.keys.public,
                                   frozenset({"heart rate"}))
    tx = ledger.build_signed_tx(ledger.KIND_ACCESS, fx.patient.keys, 2, payload)
    bad = ledger.Transaction(tx.kind, tx.sender, tx.seq, tx.payload,
                             ledger.Signature(tx.signature.r ^ 1, tx.signature.s))
    assert fx.chain.submit(bad).code == ledger.REJECT_BAD_SIG


def test_unregistered_sender_rejected(fx):
    stranger = crypto.gen_sig_keypair(fx.rng)
    payload = ledger.AccessPayload(fx.patient.keys.public, fx.staff.keys.public,
                                   frozenset({"x"}))
    tx = ledger.build_signed_tx(ledger.KIND_ACCESS, stranger, 1, payload)
    assert fx.chain.submit(tx).code == ledger.REJECT_UNREGISTERED


def test_audit_trail_order_and_scope(fx):
    fx.grant({"blood pressure"})
    write = fx.write("blood pressure", b"bp=117/74 unit-test-reading-0004")
    fx.read("blood pressure", write.value, fx.staff.keys)
    fx.grant(set())
    events = ledger.audit_trail(fx.chain.state, fx.patient.keys.public)
    assert [e.kind for e in events] == ["grant", "write", "read", "revoke"]
    other, _ = identity.join_patient("carol", fx.rng)
    assert fx.register(other.keys, identity.ROLE_PATIENT).accepted
    assert ledger.audit_trail(fx.chain.state, other.keys.public) == []


def test_replay_reproduces_live_state(fx):
    fx.grant({"blood pressure", "heart rate"})
    write = fx.write("heart rate", b"hr=63bpm unit-test-reading-0005")
    fx.read("heart rate", write.value, fx.staff.keys)
    fx.chain.seal()
    rebuilt = ledger.replay(fx.chain.blocks)
    assert rebuilt.state_digest() == fx.chain.state.state_digest()
    trail_live = ledger.audit_trail(fx.chain.state, fx.patient.keys.public)
    trail_replayed = ledger.audit_trail(rebuilt, fx.patient.keys.public)
    assert trail_live == trail_replayed


def test_replay_of_empty_chain_is_genesis():
    genesis = ledger.build_genesis()
    state = ledger.replay([genesis])
    assert state.state_digest() == ledger.LedgerState().state_digest()
    with pytest.raises(ReplayError):
        ledger.replay([])


def test_validate_block_rules(fx):
    fx.grant({"blood pressure"})
    sealed = fx.chain.seal()
    tip_before = fx.chain.blocks[-2]
    state = ledger.replay(fx.chain.blocks[:-1])
    assert ledger.validate_block(tip_before, sealed, state)
    # corrupt one tx signature
    tx0 = sealed.txs[0]
    bad_tx = ledger.Transaction(tx0.kind, tx0.sender, tx0.seq, tx0.payload,
                                ledger.Signature(tx0.signature.r ^ 1, tx0.signature.s))
    from dataclasses import replace
    bad_block = replace(sealed, txs=(bad_tx,) + sealed.txs[1:],
                        tx_root=ledger.compute_tx_root((bad_tx,) + sealed.txs[1:]))
    assert not ledger.validate_block(tip_before, bad_block, state)
    # prev_hash pointing two blocks back
    skip = replace(sealed, prev_hash=fx.chain.blocks[0].block_hash())
    assert not ledger.validate_block(tip_before, skip, state)
    # wrong height
    assert not ledger.validate_block(tip_before, replace(sealed, height=9), state)
    # tx_root mismatch
    assert not ledger.validate_block(
        tip_before, replace(sealed, tx_root=crypto.hash_bytes(b")")), state)


def test_chain_persistence_round_trip(fx, tmp_path):
    fx.grant({"blood pressure"})
    fx.write("blood pressure", b"bp=122/81 unit-test-reading-0006")
    fx.chain.seal()
    path = tmp_path / "chain.dat"
    ledger.save_chain(path, fx.chain.blocks)
    loaded = ledger.load_chain(path)
    assert [b.block_hash() for b in loaded] == [b.block_hash() for b in fx.chain.blocks]
    assert ledger.replay(loaded).state_digest() == fx.chain.state.state_digest()


def test_block_cap_respected(fx):
    for i in range(70):
        assert fx.grant({f"type {i}"}).accepted
    fx.chain.seal()
    assert all(len(b.txs) <= ledger.MAX_BLOCK_TXS for b in fx.chain.blocks)
    assert ledger.replay(fx.chain.blocks).state_digest() == \
        fx.chain.state.state_digest()


def test_latest_policy_matches_bruteforce_oracle():
    for seed in range(12):
        actions, patients, staff, dtypes = oracle.generate_actions(seed, max_actions=80)
        run = SystemRun(seed)
        actual = run.run(actions)
        expected = oracle.evaluate(actions)
        assert actual == expected, f"seed {seed}"
        assert run.policy_matrix(patients, staff, dtypes) == \
            oracle.final_policy_matrix(actions, patients, staff, dtypes)
        assert run.replay_matches()
