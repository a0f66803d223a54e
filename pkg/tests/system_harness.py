"""Drives the real ledger pipeline with an oracle action log.

Each action becomes a fully signed transaction applied through the standard
validation path (signature, sequence, semantic guards); outcomes are
normalized to the oracle's vocabulary so the two logs compare element-wise.
"""

from __future__ import annotations

import random

from medledger import crypto, identity, ledger
from medledger.store import ContentStore


class SystemRun:
    def __init__(self, seed: int, validators=((0, None),)):
        self.rng = random.Random(seed ^ 0x5CA1AB1E)
        self.keys: dict[str, crypto.SigningKeyPair] = {}
        self.seq: dict[str, int] = {}
        self.store = ContentStore()
        self.chain = ledger.DirectChain(validators=(), store=self.store)

    def keypair(self, actor: str) -> crypto.SigningKeyPair:
        if actor not in self.keys:
            self.keys[actor] = crypto.gen_sig_keypair(self.rng)
            self.seq[actor] = 0
        return self.keys[actor]

    def _submit(self, actor: str, kind: int, payload) -> ledger.TxOutcome:
        keys = self.keypair(actor)
        seq = self.seq[actor] + 1
        tx = ledger.build_signed_tx(kind, keys, seq, payload)
        outcome = self.chain.submit(tx)
        if outcome.accepted:
            self.seq[actor] = seq
        return outcome

    def run(self, actions):
        outcomes = []
        for action in actions:
            kind = action[0]
            if kind == "register":
                _, actor, role = action
                payload = ledger.RegisterPayload(
                    identity.ROLE_PATIENT if role == "patient" else identity.ROLE_STAFF,
                    self.keypair(actor).public)
                outcome = self._submit(actor, ledger.KIND_REGISTER, payload)
                outcomes.append(self._normalize(outcome, value=None))
            elif kind == "grant":
                _, sender, patient, staff, types = action
                payload = ledger.AccessPayload(
                    self.keypair(patient).public, self.keypair(staff).public,
                    frozenset(types))
                outcome = self._submit(sender, ledger.KIND_ACCESS, payload)
                outcomes.append(self._normalize(outcome, value=None))
            elif kind == "write":
                _, sender, patient, dtype, content = action
                payload = ledger.DataPayload(
                    self.keypair(patient).public, dtype, ledger.RW_WRITE,
                    crypto.Ciphertext.from_wire(content))
                outcome = self._submit(sender, ledger.KIND_DATA, payload)
                value = outcome.value.value if outcome.accepted else None
                outcomes.append(self._normalize(outcome, value=value))
            elif kind == "read":
                _, sender, patient, dtype, digest = action
                payload = ledger.DataPayload(
                    self.keypair(patient).public, dtype, ledger.RW_READ,
                    crypto.Digest(digest))
                outcome = self._submit(sender, ledger.KIND_DATA, payload)
                value = outcome.value if outcome.accepted else None
                outcomes.append(self._normalize(outcome, value=value))
            else:
                raise ValueError(f"unknown action {kind!r}")
        return outcomes

    @staticmethod
    def _normalize(outcome: ledger.TxOutcome, value):
        if outcome.accepted and outcome.code == ledger.OK:
            return ("ok", value)
        if outcome.code == ledger.NOT_FOUND:
            return ("not_found", None)
        return ("denied", None)

    def policy_matrix(self, patients, staff, dtypes):
        state = self.chain.state
        matrix = {}
        for requester in list(patients) + list(staff):
            for patient in patients:
                for dtype in dtypes:
                    matrix[(requester, patient, dtype)] = ledger.policy_check(
                        state, self.keypair(requester).public, dtype,
                        self.keypair(patient).public)
        return matrix

    def replay_matches(self) -> bool:
        self.chain.seal()
        rebuilt = ledger.replay(self.chain.blocks)
        return rebuilt.state_digest() == self.chain.state.state_digest()
