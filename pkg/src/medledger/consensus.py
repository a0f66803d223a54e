"""PBFT ordering of transactions into blocks.

n = 3f+1 replicas run the three-phase normal case (pre-prepare, prepare,
commit) with a timeout-driven view change. The primary of view v is replica
v mod n. A replica broadcasts Prepare once it accepts a valid PrePrepare
(the primary counts its own), emits Commit after 2f+1 matching Prepares, and
commits the block after 2f+1 matching Commits. View changes carry prepared
certificates so a block prepared anywhere survives the primary's failure.

Replicas are deterministic event-driven state machines: handlers consume one
message and return a list of actions (sends, replies, timer requests,
committed blocks) for the surrounding network layer to carry out. The fixed
validator roster comes from the genesis configuration; messages signed by
keys outside it are dropped and counted, which is what makes block forging by
non-members ineffective regardless of how many nodes an attacker adds.

One proposal slot is outstanding at a time (no pipelining) and phase logs are
kept whole (no checkpoint garbage collection); runs are desk-scale.
"""

from __future__ import annotations

import hashlib
from collections import OrderedDict
from dataclasses import dataclass, field, replace

from . import wire
from .crypto import Digest, Signature, SigningKeyPair, ZERO_DIGEST, hash_bytes, sign as ecdsa_sign
from .ledger import (
    Block,
    LedgerState,
    MAX_BLOCK_TXS,
    Transaction,
    apply_transaction,
    compute_tx_root,
    encode_transaction,
    validate_block_verbose,
    verify_transaction_signature,
)
from .ledger import _cached_verify  # signature cache shared with the ledger

PREPREPARE = "preprepare"
PREPARE = "prepare"
COMMIT = "commit"
VIEWCHANGE = "viewchange"
NEWVIEW = "newview"

_KIND_CODES = {PREPREPARE: 0, PREPARE: 1, COMMIT: 2, VIEWCHANGE: 3, NEWVIEW: 4}

DEFAULT_VIEW_TIMEOUT = 50


@dataclass(frozen=True)
class PreparedCert:
    """Proof that a block reached the prepare quorum in some view."""

    view: int
    height: int
    block: Block
    prepares: tuple["ConsensusMessage", ...]


@dataclass(frozen=True)
class ConsensusMessage:
    kind: str
    view: int
    height: int
    block_digest: Digest
    sender: int
    signature: Signature | None = None
    block: Block | None = None                       # PrePrepare
    cert: PreparedCert | None = None                 # ViewChange
    view_changes: tuple["ConsensusMessage", ...] = ()  # NewView
    new_preprepare: "ConsensusMessage | None" = None   # NewView

    def signing_bytes(self) -> bytes:
        return b"".join([
            wire.pack_u8(_KIND_CODES[self.kind]),
            wire.pack_u64(self.view),
            wire.pack_u64(self.height),
            self.block_digest.value,
            wire.pack_u32(self.sender),
        ])


def _cert_digest(cert: PreparedCert | None) -> Digest:
    if cert is None:
        return ZERO_DIGEST
    parts = [
        wire.pack_u64(cert.view),
        wire.pack_u64(cert.height),
        cert.block.block_hash().value,
    ]
    for msg in sorted(cert.prepares, key=lambda m: m.sender):
        parts.append(msg.signing_bytes())
        parts.append(msg.signature.to_bytes())
    return hash_bytes(b"".join(parts))


def _newview_digest(view_changes, new_preprepare) -> Digest:
    parts = []
    for msg in sorted(view_changes, key=lambda m: m.sender):
        parts.append(msg.signing_bytes())
        parts.append(msg.signature.to_bytes())
    if new_preprepare is not None:
        parts.append(new_preprepare.signing_bytes())
        parts.append(new_preprepare.signature.to_bytes())
    return hash_bytes(b"".join(parts))


def _signed(msg: ConsensusMessage, keys: SigningKeyPair) -> ConsensusMessage:
    return replace(msg, signature=ecdsa_sign(keys.private, msg.signing_bytes()))


@dataclass(frozen=True)
class TxReceipt:
    """Per-transaction execution result sent back to the submitting node."""

    txid: Digest
    accepted: bool
    code: str
    height: int | None = None
    value: bytes | None = None

    def match_key(self):
        return (self.txid.value, self.accepted, self.code, self.height, self.value)


# actions returned by replica handlers
@dataclass(frozen=True)
class Send:
    dst: int  # replica id
    msg: ConsensusMessage


@dataclass(frozen=True)
class Broadcast:
    msg: ConsensusMessage


@dataclass(frozen=True)
class Reply:
    client: str
    receipt: TxReceipt


@dataclass(frozen=True)
class TimerRequest:
    delay: int
    token: int


@dataclass(frozen=True)
class Committed:
    block: Block


class Replica:
    """One PBFT replica; deterministic given its message sequence."""

    def __init__(self, replica_id: int, keys: SigningKeyPair,
                 validators: dict[int, bytes], genesis: Block, store=None,
                 view_timeout: int = DEFAULT_VIEW_TIMEOUT,
                 batch_size: int = MAX_BLOCK_TXS):
        self.id = replica_id
        self.keys = keys
        self.validators = dict(validators)
        self.n = len(validators)
        self.f = (self.n - 1) // 3
        self.quorum = 2 * self.f + 1
        self.view_timeout = view_timeout
        self.batch_size = min(batch_size, MAX_BLOCK_TXS)
        self.store = store

        self.chain: list[Block] = [genesis]
        self.state = LedgerState()
        self.view = 0
        self.in_view_change = False
        self.target_view = 0

        self.pool: OrderedDict[bytes, Transaction] = OrderedDict()
        self.pool_state: LedgerState = self.state.clone()
        self.client_of: dict[bytes, str] = {}
        self.executed_receipts: dict[bytes, TxReceipt] = {}

        self.preprepares: dict[tuple[int, int], ConsensusMessage] = {}
        self.known_blocks: dict[tuple[int, bytes], Block] = {}
        self.prepares: dict[tuple[int, int, bytes], dict[int, ConsensusMessage]] = {}
        self.commits: dict[tuple[int, int, bytes], dict[int, ConsensusMessage]] = {}
        self.sent_prepare: set[tuple[int, int]] = set()
        self.sent_commit: set[tuple[int, int, bytes]] = set()
        self.prepared_certs: dict[int, PreparedCert] = {}
        self.view_change_log: dict[int, dict[int, ConsensusMessage]] = {}
        self.sent_viewchange_for: set[int] = set()
        self.current_slot: tuple[int, int] | None = None  # (view, height)

        self._timer_token = 0
        self._armed_token: int | None = None
        self.clock = 0  # advanced by the network adapter before each delivery

        # metrics
        self.dropped_messages = 0
        self.equivocations_seen = 0
        self.view_changes_entered = 0
        self.rejected_chain_blocks = 0
        self.safety_violations = 0
        self.execution_anomalies = 0
        self.committed_digests: dict[int, Digest] = {}

    # -- helpers -------------------------------------------------------------

    def primary_of(self, view: int) -> int:
        return view % self.n

    def is_primary(self) -> bool:
        return self.primary_of(self.view) == self.id

    def next_height(self) -> int:
        return len(self.chain)

    def _verify_msg(self, msg: ConsensusMessage) -> bool:
        public = self.validators.get(msg.sender)
        if public is None or msg.signature is None:
            return False
        digest = hashlib.sha256(msg.signing_bytes()).digest()
        return _cached_verify(public, digest, msg.signature.r, msg.signature.s)

    def _arm_timer(self) -> list:
        self._timer_token += 1
        self._armed_token = self._timer_token
        return [TimerRequest(self.view_timeout, self._timer_token)]

    def _maybe_arm_timer(self) -> list:
        """Arm only when there is pending work and no timer outstanding."""
        if self._armed_token is not None:
            return []
        if self.pool or self.current_slot is not None or self.in_view_change:
            return self._arm_timer()
        return []

    def _progress(self) -> None:
        """Invalidate any outstanding timer after forward progress."""
        self._armed_token = None

    # -- client transactions ---------------------------------------------------

    def on_client_tx(self, tx: Transaction, client: str) -> list:
        txid = tx.txid()
        if txid.value in self.executed_receipts:
            return [Reply(client, self.executed_receipts[txid.value])]
        if txid.value in self.pool:
            self.client_of.setdefault(txid.value, client)
            return []
        if not verify_transaction_signature(tx):
            return [Reply(client, TxReceipt(txid, False, "bad_signature"))]
        probe = apply_transaction(self.pool_state, tx, height=self.next_height())
        if not probe.accepted:
            return [Reply(client, TxReceipt(txid, False, probe.code))]
        self.pool[txid.value] = tx
        self.client_of[txid.value] = client
        actions = self._maybe_arm_timer()
        actions.extend(self.maybe_propose())
        return actions

    def _rebuild_pool_state(self) -> None:
        self.pool_state = self.state.clone()
        stale = []
        for txid, tx in self.pool.items():
            outcome = apply_transaction(self.pool_state, tx, height=self.next_height())
            if not outcome.accepted:
                stale.append(txid)
        for txid in stale:
            self.pool.pop(txid, None)

    # -- proposal ----------------------------------------------------------------

    def maybe_propose(self) -> list:
        if not self.is_primary() or self.in_view_change or self.current_slot is not None:
            return []
        if not self.pool:
            return []
        block = self._build_block(self.clock)
        if block is None:
            return []
        return self._emit_preprepare(block)

    def _build_block(self, timestamp: int) -> Block | None:
        height = self.next_height()
        tentative = self.state.clone()
        chosen: list[Transaction] = []
        for txid, tx in list(self.pool.items()):
            if len(chosen) == self.batch_size:
                break
            outcome = apply_transaction(tentative, tx, height=height)
            if outcome.accepted:
                chosen.append(tx)
        if not chosen:
            return None
        return Block(
            height=height,
            prev_hash=self.chain[-1].block_hash(),
            tx_root=compute_tx_root(chosen),
            timestamp=timestamp,
            proposer=self.id,
            txs=tuple(chosen),
        )

    def _emit_preprepare(self, block: Block) -> list:
        digest = block.block_hash()
        msg = _signed(ConsensusMessage(
            PREPREPARE, self.view, block.height, digest, self.id, block=block,
        ), self.keys)
        self.preprepares[(self.view, block.height)] = msg
        self.known_blocks[(block.height, digest.value)] = block
        self.current_slot = (self.view, block.height)
        actions = [Broadcast(msg)]
        actions.extend(self._send_prepare(self.view, block.height, digest))
        actions.extend(self._arm_timer())
        return actions

    def _send_prepare(self, view: int, height: int, digest: Digest) -> list:
        if (view, height) in self.sent_prepare:
            return []
        self.sent_prepare.add((view, height))
        msg = _signed(ConsensusMessage(PREPARE, view, height, digest, self.id), self.keys)
        self._record_vote(self.prepares, msg)
        actions = [Broadcast(msg)]
        actions.extend(self._evaluate_slot(view, height, digest))
        return actions

    # -- message handling -------------------------------------------------------

    def on_message(self, msg: ConsensusMessage, now: int = 0) -> list:
        if not isinstance(msg, ConsensusMessage):
            self.dropped_messages += 1
            return []
        if not self._verify_msg(msg):
            self.dropped_messages += 1
            return []
        if msg.kind == PREPREPARE:
            return self._on_preprepare(msg, now)
        if msg.kind == PREPARE:
            return self._on_vote(self.prepares, msg)
        if msg.kind == COMMIT:
            return self._on_vote(self.commits, msg)
        if msg.kind == VIEWCHANGE:
            return self._on_viewchange(msg, now)
        if msg.kind == NEWVIEW:
            return self._on_newview(msg, now)
        self.dropped_messages += 1
        return []

    def _on_preprepare(self, msg: ConsensusMessage, now: int) -> list:
        if msg.view != self.view or self.in_view_change:
            self.dropped_messages += 1
            return []
        if msg.sender != self.primary_of(msg.view):
            self.dropped_messages += 1
            return []
        if msg.block is None or msg.block.block_hash() != msg.block_digest:
            self.dropped_messages += 1
            return []
        if msg.height != self.next_height():
            self.dropped_messages += 1
            return []
        existing = self.preprepares.get((msg.view, msg.height))
        if existing is not None:
            if existing.block_digest != msg.block_digest:
                self.equivocations_seen += 1
                self.dropped_messages += 1
            return []
        post, _reason = validate_block_verbose(self.chain[-1], msg.block, self.state)
        if post is None:
            self.dropped_messages += 1
            return []
        self.preprepares[(msg.view, msg.height)] = msg
        self.known_blocks[(msg.height, msg.block_digest.value)] = msg.block
        self.current_slot = (msg.view, msg.height)
        actions = self._send_prepare(msg.view, msg.height, msg.block_digest)
        actions.extend(self._maybe_arm_timer())
        actions.extend(self._evaluate_slot(msg.view, msg.height, msg.block_digest))
        return actions

    def _record_vote(self, log, msg: ConsensusMessage) -> bool:
        key = (msg.view, msg.height, msg.block_digest.value)
        for (view, height, digest), votes in log.items():
            if (view, height) == (msg.view, msg.height) and digest != msg.block_digest.value \
                    and msg.sender in votes:
                self.equivocations_seen += 1
        votes = log.setdefault(key, {})
        if msg.sender in votes:
            return False
        votes[msg.sender] = msg
        return True

    def _on_vote(self, log, msg: ConsensusMessage) -> list:
        # votes for other views are kept: old-view quorums may still complete,
        # future-view votes become relevant once a NewView moves us there
        if not self._record_vote(log, msg):
            return []
        return self._evaluate_slot(msg.view, msg.height, msg.block_digest)

    def _evaluate_slot(self, view: int, height: int, digest: Digest) -> list:
        actions: list = []
        key = (view, height, digest.value)
        preprep = self.preprepares.get((view, height))
        block_known = self.known_blocks.get((height, digest.value))
        prepared_here = (
            preprep is not None
            and preprep.block_digest == digest
            and block_known is not None
            and len(self.prepares.get(key, ())) >= self.quorum
        )
        if prepared_here and key not in self.sent_commit:
            self.sent_commit.add(key)
            cert = PreparedCert(
                view, height, block_known,
                tuple(sorted(self.prepares[key].values(), key=lambda m: m.sender)[: self.quorum]),
            )
            best = self.prepared_certs.get(height)
            if best is None or cert.view > best.view:
                self.prepared_certs[height] = cert
            commit = _signed(ConsensusMessage(COMMIT, view, height, digest, self.id), self.keys)
            self._record_vote(self.commits, commit)
            actions.append(Broadcast(commit))
        if (
            height == self.next_height()
            and block_known is not None
            and len(self.commits.get(key, ())) >= self.quorum
        ):
            actions.extend(self._execute_block(block_known))
        return actions

    def _execute_block(self, block: Block) -> list:
        digest = block.block_hash()
        previous = self.committed_digests.get(block.height)
        if previous is not None and previous != digest:
            self.safety_violations += 1
            return []
        actions: list = []
        live = self.state
        for tx in block.txs:
            outcome = apply_transaction(live, tx, store=self.store, height=block.height)
            if not outcome.accepted:
                self.execution_anomalies += 1
            txid = tx.txid()
            receipt = TxReceipt(
                txid=txid,
                accepted=outcome.accepted,
                code=outcome.code,
                height=block.height,
                value=outcome.value.value if isinstance(outcome.value, Digest)
                else outcome.value,
            )
            self.executed_receipts[txid.value] = receipt
            client = self.client_of.get(txid.value)
            if client is not None:
                actions.append(Reply(client, receipt))
            self.pool.pop(txid.value, None)
        live.height = block.height
        self.chain.append(block)
        self.committed_digests[block.height] = digest
        self.current_slot = None
        self._progress()
        self._rebuild_pool_state()
        actions.append(Committed(block))
        actions.extend(self.maybe_propose())
        actions.extend(self._maybe_arm_timer())
        return actions

    # -- view changes -----------------------------------------------------------

    def on_timer(self, token: int, now: int = 0) -> list:
        if token != self._armed_token:
            return []
        self._armed_token = None
        if not self.pool and self.current_slot is None and not self.in_view_change:
            return []
        target = max(self.view + 1, self.target_view + 1 if self.in_view_change else 0)
        return self._start_viewchange(target)

    def _start_viewchange(self, target: int) -> list:
        if target in self.sent_viewchange_for:
            return self._arm_timer()
        self.sent_viewchange_for.add(target)
        self.in_view_change = True
        self.target_view = target
        height = self.next_height()
        cert = self.prepared_certs.get(height)
        msg = _signed(ConsensusMessage(
            VIEWCHANGE, target, height, _cert_digest(cert), self.id, cert=cert,
        ), self.keys)
        self.view_change_log.setdefault(target, {})[self.id] = msg
        actions = [Broadcast(msg)]
        actions.extend(self._arm_timer())
        actions.extend(self._check_viewchange_quorum(target))
        return actions

    def _valid_cert(self, cert: PreparedCert | None) -> bool:
        if cert is None:
            return True
        if cert.block is None or len(cert.prepares) < self.quorum:
            return False
        digest = cert.block.block_hash()
        seen: set[int] = set()
        for pmsg in cert.prepares:
            if pmsg.kind != PREPARE or pmsg.view != cert.view:
                return False
            if pmsg.height != cert.height or pmsg.block_digest != digest:
                return False
            if pmsg.sender in seen or not self._verify_msg(pmsg):
                return False
            seen.add(pmsg.sender)
        return True

    def _on_viewchange(self, msg: ConsensusMessage, now: int) -> list:
        if msg.view <= self.view:
            self.dropped_messages += 1
            return []
        if msg.block_digest != _cert_digest(msg.cert) or not self._valid_cert(msg.cert):
            self.dropped_messages += 1
            return []
        self.view_change_log.setdefault(msg.view, {})[msg.sender] = msg
        actions: list = []
        # join a view change that f+1 peers already demanded
        if (
            len(self.view_change_log[msg.view]) > self.f
            and msg.view not in self.sent_viewchange_for
            and msg.view > self.view
        ):
            actions.extend(self._start_viewchange(msg.view))
        actions.extend(self._check_viewchange_quorum(msg.view))
        return actions

    def _check_viewchange_quorum(self, target: int) -> list:
        log = self.view_change_log.get(target, {})
        if len(log) < self.quorum or target <= self.view:
            return []
        if self.primary_of(target) != self.id:
            # adopt the view and wait for the new primary's NewView
            self._adopt_view(target)
            return self._arm_timer()
        # we are the new primary: re-propose the best prepared block, if any
        vcs = tuple(sorted(log.values(), key=lambda m: m.sender)[: self.quorum])
        height = self.next_height()
        best: PreparedCert | None = None
        for vc in vcs:
            if vc.cert is not None and vc.cert.height == height:
                if best is None or vc.cert.view > best.view:
                    best = vc.cert
        self._adopt_view(target)
        new_pp = None
        if best is not None:
            # re-propose the prepared block verbatim so its digest (and any
            # commit votes already out there) stay valid
            block = best.block
            new_pp = _signed(ConsensusMessage(
                PREPREPARE, target, height, block.block_hash(), self.id, block=block,
            ), self.keys)
        else:
            fresh = self._build_block(self.clock)
            if fresh is not None:
                new_pp = _signed(ConsensusMessage(
                    PREPREPARE, target, fresh.height, fresh.block_hash(), self.id, block=fresh,
                ), self.keys)
        nv = _signed(ConsensusMessage(
            NEWVIEW, target, height, _newview_digest(vcs, new_pp), self.id,
            view_changes=vcs, new_preprepare=new_pp,
        ), self.keys)
        actions = [Broadcast(nv)]
        if new_pp is not None:
            actions.extend(self._accept_own_preprepare(new_pp))
        actions.extend(self._maybe_arm_timer())
        return actions

    def _accept_own_preprepare(self, pp: ConsensusMessage) -> list:
        self.preprepares[(pp.view, pp.height)] = pp
        self.known_blocks[(pp.height, pp.block_digest.value)] = pp.block
        self.current_slot = (pp.view, pp.height)
        actions = [Broadcast(pp)]
        actions.extend(self._send_prepare(pp.view, pp.height, pp.block_digest))
        actions.extend(self._arm_timer())
        return actions

    def _adopt_view(self, view: int) -> None:
        if view > self.view:
            self.view_changes_entered += 1
        self.view = view
        self.in_view_change = False
        self.target_view = view
        self.current_slot = None
        self._progress()

    def _on_newview(self, msg: ConsensusMessage, now: int) -> list:
        if msg.view < self.view or msg.sender != self.primary_of(msg.view):
            self.dropped_messages += 1
            return []
        if msg.block_digest != _newview_digest(msg.view_changes, msg.new_preprepare):
            self.dropped_messages += 1
            return []
        senders: set[int] = set()
        for vc in msg.view_changes:
            if vc.kind != VIEWCHANGE or vc.view != msg.view:
                self.dropped_messages += 1
                return []
            if not self._verify_msg(vc) or vc.block_digest != _cert_digest(vc.cert):
                self.dropped_messages += 1
                return []
            if not self._valid_cert(vc.cert):
                self.dropped_messages += 1
                return []
            senders.add(vc.sender)
        if len(senders) < self.quorum:
            self.dropped_messages += 1
            return []
        # the re-proposal must match the highest prepared certificate
        height = self.next_height()
        best: PreparedCert | None = None
        for vc in msg.view_changes:
            if vc.cert is not None and vc.cert.height == height:
                if best is None or vc.cert.view > best.view:
                    best = vc.cert
        if best is not None:
            if (msg.new_preprepare is None
                    or msg.new_preprepare.block_digest != best.block.block_hash()):
                self.dropped_messages += 1
                return []
        if msg.view >= self.view:
            self._adopt_view(msg.view)
        actions: list = []
        if msg.new_preprepare is not None:
            actions.extend(self._on_preprepare(msg.new_preprepare, now))
        actions.extend(self._maybe_arm_timer())
        return actions

    # -- post-commit block sync (also the modification-attack surface) ----------

    def commit_certificate(self, block: Block) -> tuple[ConsensusMessage, ...]:
        """2f+1 commit votes proving the block committed, for sync gossip."""
        digest = block.block_hash().value
        votes: dict[int, ConsensusMessage] = {}
        for (view, height, dig), senders in self.commits.items():
            if height == block.height and dig == digest:
                votes.update(senders)
        chosen = sorted(votes.values(), key=lambda m: m.sender)[: self.quorum]
        return tuple(chosen)

    def _valid_commit_cert(self, block: Block, commits) -> bool:
        digest = block.block_hash()
        seen: set[int] = set()
        for msg in commits:
            if msg.kind != COMMIT or msg.height != block.height:
                continue
            if msg.block_digest != digest or msg.sender in seen:
                continue
            if not self._verify_msg(msg):
                continue
            seen.add(msg.sender)
        return len(seen) >= self.quorum

    def on_sync_block(self, block: Block, commits) -> list:
        """Adopt a committed block gossiped by a peer, or reject it.

        Adoption needs a valid 2f+1 commit certificate plus full block
        validation, so an altered block (its digest no longer matches the
        certificate) or a fabricated one is rejected and counted.
        """
        if block.tx_root != compute_tx_root(block.txs):
            # altered transactions under an unchanged header
            self.rejected_chain_blocks += 1
            return []
        if block.height < len(self.chain):
            if self.chain[block.height].block_hash() != block.block_hash():
                self.rejected_chain_blocks += 1
            return []
        if block.height > len(self.chain):
            self.rejected_chain_blocks += 1  # cannot link ahead of the tip
            return []
        if not self._valid_commit_cert(block, commits):
            self.rejected_chain_blocks += 1
            return []
        post, _reason = validate_block_verbose(self.chain[-1], block, self.state)
        if post is None:
            self.rejected_chain_blocks += 1
            return []
        return self._execute_block(block)


class ByzantineReplica(Replica):
    """Replica wrapper with scripted misbehavior.

    behaviors: "mute" drops every outgoing message; "equivocate" makes a
    primary propose two conflicting blocks, voting for each toward а disjoint
    half of the roster. Message delay is injected at the network layer.
    """

    def __init__(self, *args, behavior: str = "mute", **kwargs):
        super().__init__(*args, **kwargs)
        self.behavior = behavior

    def _equivocate_actions(self, block: Block) -> list:
        # a different conflicting variant for every backup: no branch can
        # assemble a quorum, so honest replicas time out into a view change
        others = [r for r in sorted(self.validators) if r != self.id]
        actions: list = []
        for offset, dst in enumerate(others):
            variant = replace(block, timestamp=block.timestamp + offset)
            digest = variant.block_hash()
            pp = _signed(ConsensusMessage(
                PREPREPARE, self.view, variant.height, digest, self.id, block=variant,
            ), self.keys)
            prep = _signed(ConsensusMessage(
                PREPARE, self.view, variant.height, digest, self.id), self.keys)
            com = _signed(ConsensusMessage(
                COMMIT, self.view, variant.height, digest, self.id), self.keys)
            actions.append(Send(dst, pp))
            actions.append(Send(dst, prep))
            actions.append(Send(dst, com))
        self.current_slot = (self.view, block.height)
        return actions

    def maybe_propose(self) -> list:
        if self.behavior == "mute":
            return []
        if self.behavior == "equivocate" and self.is_primary() and self.current_slot is None \
                and not self.in_view_change and self.pool:
            block = self._build_block(self.clock)
            if block is None:
                return []
            return self._equivocate_actions(block)
        return super().maybe_propose()

    def _filter(self, actions: list) -> list:
        if self.behavior == "mute":
            return [a for a in actions if isinstance(a, (TimerRequest, Committed))]
        return actions

    def on_client_tx(self, tx: Transaction, client: str) -> list:
        return self._filter(super().on_client_tx(tx, client))

    def on_message(self, msg: ConsensusMessage, now: int = 0) -> list:
        return self._filter(super().on_message(msg, now))

    def on_timer(self, token: int, now: int = 0) -> list:
        return self._filter(super().on_timer(token, now))

    def on_sync_block(self, block: Block, commits) -> list:
        return self._filter(super().on_sync_block(block, commits))
