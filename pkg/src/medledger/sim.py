"""Deterministic discrete-event network connecting all actor kinds.

Patients and staff run gateways that sign transactions and broadcast them to
the ledger replicas; replicas run the consensus state machines; storage nodes
exist as fault-injection targets for the shared content store. Time is a
logical tick counter. Every run is a pure function of (seed, config,
scenario): the event queue breaks ties by insertion sequence, delays and
drops come from one seeded RNG, and trace hashes are therefore stable.

Per-node transaction rate limiting sits at the submission boundary: a node
over its per-window budget has the surplus rejected before the network sees
it, which is the DoS defense the attack scenarios measure.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from collections import Counter
from dataclasses import dataclass, field

from . import consensus, crypto, identity, ledger
from .consensus import (
    Broadcast,
    ByzantineReplica,
    Committed,
    ConsensusMessage,
    Replica,
    Reply,
    Send,
    TimerRequest,
    TxReceipt,
)
from .ledger import Block, Transaction
from .store import ContentStore

ROLE_REPLICA = "replica"
ROLE_STORAGE = "storage"
ROLE_PATIENT = "patient"
ROLE_STAFF = "staff"

DEFAULT_RATE_LIMIT = 10
DEFAULT_WINDOW = 100
DEFAULT_RESEND_AFTER = 120


@dataclass
class SimConfig:
    seed: int = 0
    replicas: int = 4
    storage_nodes: int = 3
    storage_replication: int = 2
    delay_min: int = 1
    delay_max: int = 5
    drop_rate: float = 0.0
    rate_limit: int = DEFAULT_RATE_LIMIT
    window: int = DEFAULT_WINDOW
    view_timeout: int = consensus.DEFAULT_VIEW_TIMEOUT
    byzantine: dict[str, str] = field(default_factory=dict)  # node id -> behavior
    byzantine_extra_delay: int = 20
    resend_after: int = DEFAULT_RESEND_AFTER


@dataclass(frozen=True)
class TraceRecord:
    tick: int
    src: str
    dst: str
    kind: str
    info: str

    def line(self) -> str:
        return f"{self.tick}\t{self.src}\t{self.dst}\t{self.kind}\t{self.info}"


def _short(data: bytes) -> str:
    return data.hex()[:16]


def _msg_info(kind: str, payload) -> str:
    if kind == "consensus":
        m: ConsensusMessage = payload
        return f"{m.kind}:v{m.view}:h{m.height}:{_short(m.block_digest.value)}"
    if kind == "submit_tx":
        return _short(payload.txid().value)
    if kind == "receipt":
        r: TxReceipt = payload
        return f"{_short(r.txid.value)}:{r.code}"
    if kind == "sync":
        block, _certs = payload
        return f"h{block.height}:{_short(block.block_hash().value)}"
    return "-"


class Node:
    node_id: str
    role: str

    def __init__(self, node_id: str, role: str):
        self.node_id = node_id
        self.role = role

    def handle(self, sim: "Simulator", src: str, kind: str, payload) -> None:
        raise NotImplementedError

    def on_timer(self, sim: "Simulator", token) -> None:
        pass


class StorageNode(Node):
    """Holds one view inside the shared ContentStore; passive fault target."""

    def __init__(self, node_id: str):
        super().__init__(node_id, ROLE_STORAGE)

    def handle(self, sim, src, kind, payload):
        pass


class ReplicaNode(Node):
    def __init__(self, node_id: str, replica: Replica):
        super().__init__(node_id, ROLE_REPLICA)
        self.replica = replica
        self._synced_heights: set[int] = set()

    def handle(self, sim, src, kind, payload):
        self.replica.clock = sim.now
        if kind == "submit_tx":
            actions = self.replica.on_client_tx(payload, src)
        elif kind == "consensus":
            actions = self.replica.on_message(payload, sim.now)
        elif kind == "sync":
            block, certs = payload
            actions = self.replica.on_sync_block(block, certs)
        else:
            return
        self._dispatch(sim, actions)

    def on_timer(self, sim, token):
        self.replica.clock = sim.now
        self._dispatch(sim, self.replica.on_timer(token, sim.now))

    def _dispatch(self, sim: "Simulator", actions) -> None:
        for action in actions:
            if isinstance(action, Broadcast):
                for dst in sim.replica_ids:
                    if dst != self.node_id:
                        sim.send(self.node_id, dst, "consensus", action.msg)
            elif isinstance(action, Send):
                sim.send(self.node_id, sim.replica_node_id(action.dst), "consensus", action.msg)
            elif isinstance(action, Reply):
                sim.send(self.node_id, action.client, "receipt", action.receipt)
            elif isinstance(action, TimerRequest):
                sim.schedule_timer(self.node_id, action.delay, action.token)
            elif isinstance(action, Committed):
                sim.on_block_committed(self.node_id, action.block)
                height = action.block.height
                if (height not in self._synced_heights
                        and sim.config.byzantine.get(self.node_id) != "mute"):
                    self._synced_heights.add(height)
                    certs = self.replica.commit_certificate(action.block)
                    if len(certs) >= self.replica.quorum:
                        for dst in sim.replica_ids:
                            if dst != self.node_id:
                                sim.send(self.node_id, dst, "sync", (action.block, certs))


@dataclass
class PendingTx:
    tx: Transaction
    submit_tick: int
    seq_used: int = 0
    receipts: dict[str, TxReceipt] = field(default_factory=dict)
    resolved: TxReceipt | None = None
    resolve_tick: int | None = None


class GatewayNode(Node):
    """Signs and submits an actor's transactions; accepts a result once f+1
    replicas report the same receipt. Unresolved transactions are resent."""

    def __init__(self, node_id: str, role: str, actor, sim_f: int):
        super().__init__(node_id, role)
        self.actor = actor  # PatientIdentity or StaffIdentity
        self.f = sim_f
        self.seq = 0
        self.pending: dict[bytes, PendingTx] = {}
        self.results: dict[bytes, TxReceipt] = {}

    @property
    def public_key(self) -> bytes:
        return self.actor.keys.public

    def next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def submit(self, sim: "Simulator", tx: Transaction) -> bytes:
        txid = tx.txid().value
        # deterministic signing makes a retried request byte-identical to a
        # previously rejected one; a fresh submit supersedes its resolution
        self.results.pop(txid, None)
        self.pending[txid] = PendingTx(tx, sim.now, seq_used=tx.seq)
        accepted = sim.submit_tx(self.node_id, tx)
        if not accepted:
            self.pending[txid].resolved = TxReceipt(tx.txid(), False, "rate_limited")
            self.pending[txid].resolve_tick = sim.now
            self.results[txid] = self.pending[txid].resolved
            self.seq = min(self.seq, tx.seq - 1)
        else:
            sim.schedule_timer(self.node_id, sim.config.resend_after, ("resend", txid))
        return txid

    def handle(self, sim, src, kind, payload):
        if kind != "receipt":
            return
        receipt: TxReceipt = payload
        txid = receipt.txid.value
        entry = self.pending.get(txid)
        if entry is None or entry.resolved is not None:
            return
        entry.receipts[src] = receipt
        counts = Counter(r.match_key() for r in entry.receipts.values())
        for key, count in counts.most_common():
            sample = next(r for r in entry.receipts.values() if r.match_key() == key)
            # f+1 matching commit receipts prove execution; a rejection claim
            # needs 2f+1 so replicas that are merely behind cannot outvote an
            # in-flight commit (resends settle the stragglers)
            needed = self.f + 1 if sample.height is not None else 2 * self.f + 1
            if count >= needed:
                entry.resolved = sample
                entry.resolve_tick = sim.now
                self.results[txid] = sample
                if not sample.accepted:
                    # a rejected transaction never consumed its sequence number
                    self.seq = min(self.seq, entry.seq_used - 1)
                return

    def on_timer(self, sim, token):
        if not isinstance(token, tuple) or token[0] != "resend":
            return
        txid = token[1]
        entry = self.pending.get(txid)
        if entry is None or entry.resolved is not None:
            return
        if sim.submit_tx(self.node_id, entry.tx):
            sim.schedule_timer(self.node_id, sim.config.resend_after, ("resend", txid))


class FloodNode(GatewayNode):
    """Registered node scripted to submit transactions far over the limit."""

    def __init__(self, node_id: str, actor, sim_f: int, staff_pk_provider):
        super().__init__(node_id, ROLE_PATIENT, actor, sim_f)
        self.staff_pk_provider = staff_pk_provider
        self.multiplier = 0
        self.submitted = 0
        self.limited = 0

    def start_flood(self, sim: "Simulator", multiplier: int) -> None:
        self.multiplier = multiplier
        sim.schedule_timer(self.node_id, 1, ("flood",))

    def on_timer(self, sim, token):
        if isinstance(token, tuple) and token[0] == "flood" and self.multiplier:
            burst = sim.config.rate_limit * self.multiplier
            staff_pk = self.staff_pk_provider()
            for i in range(burst):
                payload = ledger.AccessPayload(
                    self.public_key, staff_pk,
                    frozenset({f"flood type {self.submitted % 7}"}),
                )
                tx = ledger.build_signed_tx(
                    ledger.KIND_ACCESS, self.actor.keys, self.seq + 1, payload)
                self.submitted += 1
                if sim.submit_tx(self.node_id, tx):
                    self.seq += 1
                else:
                    self.limited += 1
            sim.schedule_timer(self.node_id, sim.config.window, ("flood",))
            return
        super().on_timer(sim, token)


class Simulator:
    def __init__(self, config: SimConfig):
        self.config = config
        self.rng = random.Random(config.seed)
        self.now = 0
        self._queue: list = []
        self._seq = 0
        self.nodes: dict[str, Node] = {}
        self.trace: list[TraceRecord] = []
        self.send_log: list[tuple] = []
        self.counters: Counter = Counter()
        self.crashed: set[str] = set()
        self.partitions: list[set[frozenset]] = []
        self._partition_groups: list[list[set[str]]] = []
        self.rate_counts: dict[tuple[str, int], int] = {}
        self.committed_log: dict[str, dict[int, bytes]] = {}
        self.commit_ticks: dict[tuple[str, int], int] = {}

        # build the replica set with a fixed validator roster
        key_rng = random.Random((config.seed << 16) ^ 0x5EED)
        self.replica_keys = [crypto.gen_sig_keypair(key_rng) for _ in range(config.replicas)]
        validators = {i: kp.public for i, kp in enumerate(self.replica_keys)}
        self.genesis = ledger.build_genesis(sorted(validators.items()))
        storage_ids = [f"s{i}" for i in range(config.storage_nodes)]
        self.store = ContentStore(storage_ids, replication=config.storage_replication)
        self.replica_ids: list[str] = []
        for i in range(config.replicas):
            node_id = f"r{i}"
            behavior = config.byzantine.get(node_id)
            cls_kwargs = dict(
                replica_id=i, keys=self.replica_keys[i], validators=validators,
                genesis=self.genesis, store=self.store,
                view_timeout=config.view_timeout,
            )
            if behavior in ("mute", "equivocate"):
                replica = ByzantineReplica(behavior=behavior, **cls_kwargs)
            else:
                replica = Replica(**cls_kwargs)
            self.add_node(ReplicaNode(node_id, replica))
            self.replica_ids.append(node_id)
        for sid in storage_ids:
            self.add_node(StorageNode(sid))

    # -- roster ----------------------------------------------------------------

    def add_node(self, node: Node) -> None:
        if node.node_id in self.nodes:
            raise ValueError(f"duplicate node id {node.node_id}")
        self.nodes[node.node_id] = node

    def replica_node_id(self, replica_id: int) -> str:
        return f"r{replica_id}"

    def replica(self, replica_id: int) -> Replica:
        return self.nodes[self.replica_node_id(replica_id)].replica

    def honest_replicas(self) -> list[Replica]:
        out = []
        for node_id in self.replica_ids:
            if self.config.byzantine.get(node_id):
                continue
            if node_id in self.crashed:
                continue
            out.append(self.nodes[node_id].replica)
        return out

    # -- event queue -------------------------------------------------------------

    def _push(self, tick: int, kind: str, payload) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (tick, self._seq, kind, payload))

    def schedule_timer(self, node_id: str, delay: int, token) -> None:
        self._push(self.now + max(1, delay), "timer", (node_id, token))

    def at(self, tick: int, fn) -> None:
        """Run a scenario callback at an absolute tick."""
        self._push(max(tick, self.now + 1), "call", fn)

    def _partitioned(self, src: str, dst: str) -> bool:
        for groups in self._partition_groups:
            src_group = next((i for i, g in enumerate(groups) if src in g), None)
            dst_group = next((i for i, g in enumerate(groups) if dst in g), None)
            if src_group is not None and dst_group is not None and src_group != dst_group:
                return True
        return False

    def send(self, src: str, dst: str, kind: str, payload) -> bool:
        """Schedule a message; returns False when it was rejected or lost."""
        if src not in self.nodes or dst not in self.nodes:
            self.counters["rejected_roster"] += 1
            self.trace.append(TraceRecord(self.now, src, dst, "rejected_roster",
                                          _msg_info(kind, payload) if src in self.nodes else "-"))
            return False
        if src in self.crashed or dst in self.crashed:
            self.counters["dropped_crashed"] += 1
            return False
        if self._partitioned(src, dst):
            self.counters["dropped_partitioned"] += 1
            return False
        self.send_log.append((self.now, src, dst, kind))
        if self.config.drop_rate > 0 and self.rng.random() < self.config.drop_rate:
            self.counters["dropped_random"] += 1
            return False
        delay = self.rng.randint(self.config.delay_min, self.config.delay_max)
        if self.config.byzantine.get(src) == "delay":
            delay += self.config.byzantine_extra_delay
        self._push(self.now + max(1, delay), "deliver", (src, dst, kind, payload))
        return True

    def submit_tx(self, src: str, tx: Transaction) -> bool:
        """Rate-limited transaction submission, fanned out to every replica."""
        if src not in self.nodes:
            self.counters["rejected_roster"] += 1
            return False
        window_index = self.now // self.config.window
        key = (src, window_index)
        used = self.rate_counts.get(key, 0)
        if used >= self.config.rate_limit:
            self.counters["rate_limited"] += 1
            self.trace.append(TraceRecord(self.now, src, "-", "rate_limited",
                                          _short(tx.txid().value)))
            return False
        self.rate_counts[key] = used + 1
        for dst in self.replica_ids:
            self.send(src, dst, "submit_tx", tx)
        return True

    # -- faults -------------------------------------------------------------------

    def crash(self, node_id: str) -> None:
        if node_id not in self.nodes:
            raise ValueError(f"unknown node {node_id}")
        self.crashed.add(node_id)
        self.counters["crashes"] += 1

    def partition(self, groups: list[set[str]]) -> None:
        self._partition_groups.append([set(g) for g in groups])
        self.counters["partitions"] += 1

    def heal_partitions(self) -> None:
        self._partition_groups.clear()

    def tamper_store(self, node_id: str, key: crypto.Digest | None = None) -> bool:
        """Flip a byte in one storage node's copy of an entry."""
        view = self.store.views.get(node_id)
        if view is None:
            raise ValueError(f"unknown storage node {node_id}")
        if key is None:
            if not view:
                return False
            key = crypto.Digest(sorted(view)[0])
        ok = self.store.tamper(node_id, key, flip_index=self.rng.randrange(0, 1 << 16))
        if ok:
            self.counters["store_tampered"] += 1
            self.trace.append(TraceRecord(self.now, node_id, "-", "store_tamper",
                                          _short(key.value)))
        return ok

    # -- bookkeeping ----------------------------------------------------------------

    def on_block_committed(self, node_id: str, block: Block) -> None:
        log = self.committed_log.setdefault(node_id, {})
        log[block.height] = block.block_hash().value
        self.commit_ticks[(node_id, block.height)] = self.now
        self.counters["blocks_committed"] += 1
        self.trace.append(TraceRecord(self.now, node_id, "-", "committed",
                                      f"h{block.height}:{_short(block.block_hash().value)}"))

    def safety_holds(self) -> bool:
        """No two non-crashed honest replicas committed different block hashes
        at the same height (byzantine nodes excluded)."""
        heights: dict[int, bytes] = {}
        for node_id, log in self.committed_log.items():
            if self.config.byzantine.get(node_id) or node_id in self.crashed:
                continue
            for height, digest in log.items():
                if height in heights and heights[height] != digest:
                    return False
                heights.setdefault(height, digest)
        return True

    def view_changes(self) -> int:
        return max((r.view_changes_entered for r in self.honest_replicas()), default=0)

    # -- main loop --------------------------------------------------------------------

    def run_until(self, condition=None, max_tick: int = 10_000):
        while self._queue:
            tick, _seq, kind, payload = self._queue[0]
            if tick > max_tick:
                break
            heapq.heappop(self._queue)
            self.now = tick
            if kind == "deliver":
                src, dst, mkind, mpayload = payload
                if dst in self.crashed:
                    self.counters["dropped_crashed"] += 1
                    continue
                self.counters["delivered"] += 1
                self.trace.append(TraceRecord(tick, src, dst, mkind, _msg_info(mkind, mpayload)))
                self.nodes[dst].handle(self, src, mkind, mpayload)
            elif kind == "timer":
                node_id, token = payload
                if node_id in self.crashed:
                    continue
                self.nodes[node_id].on_timer(self, token)
            elif kind == "call":
                payload(self)
            if condition is not None and condition(self):
                return True
        if condition is not None:
            return condition(self)
        return True

    def trace_hash(self) -> str:
        joined = "\n".join(rec.line() for rec in self.trace)
        return hashlib.sha256(joined.encode("utf-8")).hexdigest()
