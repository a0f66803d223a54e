"""Scenario files: scripted protocol flows and attack drills.

A scenario is a plain-text file, one statement per line, tokenized with shell
quoting ('#' starts a comment). Statements:

    name <scenario name>
    config <key> <value...>       seed, replicas, storage_nodes, rate_limit,
                                  window, delay <min> <max>, drop_rate,
                                  view_timeout, storage_replication,
                                  byzantine <node> <mute|equivocate|delay>
    actor patient <id>
    actor staff <id> [profile]
    step <verb> <args...> [tag=<tag>]
    expect <predicate> [args...]

Step verbs: register, grant, revoke, put, get, share_key, flood, crash,
partition, heal, tamper_store, tamper_block, outsider, wait. Steps run
sequentially: each transactional step runs the network until its transaction
resolves (or a budget expires) before the next starts, so runs are
reproducible tick for tick under a fixed seed.

`expect latency_ratio_max X` reruns the scenario with every fault step
stripped to obtain the no-attack baseline for honest commit latency.
"""

from __future__ import annotations

import hashlib
import random
import shlex
from dataclasses import dataclass, field

from . import consensus, crypto, identity, ledger
from .errors import ScenarioError
from .ledger import replay
from .sim import FloodNode, GatewayNode, SimConfig, Simulator
from .store import ContentStore

STEP_BUDGET_FACTOR = 40  # ticks per view_timeout a step may take to resolve

FAULT_VERBS = {"flood", "crash", "partition", "tamper_store", "tamper_block", "outsider"}


@dataclass
class Step:
    verb: str
    args: list[str]
    tag: str | None = None


@dataclass
class ActorSpec:
    role: str
    actor_id: str
    profile: str = ""


@dataclass
class Scenario:
    name: str
    config: SimConfig
    actors: list[ActorSpec]
    steps: list[Step]
    expects: list[list[str]]


def parse_scenario(text: str) -> Scenario:
    name = "unnamed"
    config = SimConfig()
    actors: list[ActorSpec] = []
    steps: list[Step] = []
    expects: list[list[str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        try:
            tokens = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ScenarioError(f"line {lineno}: {exc}") from exc
        if not tokens:
            continue
        head, *rest = tokens
        try:
            if head == "name":
                name = rest[0]
            elif head == "config":
                _apply_config(config, rest)
            elif head == "actor":
                role = rest[0]
                if role not in ("patient", "staff"):
                    raise ScenarioError(f"line {lineno}: unknown actor role {role!r}")
                profile = rest[2] if len(rest) > 2 else ""
                actors.append(ActorSpec(role, rest[1], profile))
            elif head == "step":
                tag = None
                args = []
                for tok in rest[1:]:
                    if tok.startswith("tag="):
                        tag = tok[4:]
                    else:
                        args.append(tok)
                steps.append(Step(rest[0], args, tag))
            elif head == "expect":
                expects.append(rest)
            else:
                raise ScenarioError(f"line {lineno}: unknown statement {head!r}")
        except (IndexError, ValueError) as exc:
            raise ScenarioError(f"line {lineno}: malformed statement: {raw!r}") from exc
    return Scenario(name, config, actors, steps, expects)


def _apply_config(config: SimConfig, rest: list[str]) -> None:
    key = rest[0]
    if key == "delay":
        config.delay_min, config.delay_max = int(rest[1]), int(rest[2])
    elif key == "byzantine":
        config.byzantine[rest[1]] = rest[2]
    elif key == "drop_rate":
        config.drop_rate = float(rest[1])
    elif key in ("seed", "replicas", "storage_nodes", "storage_replication",
                 "rate_limit", "window", "view_timeout", "resend_after",
                 "byzantine_extra_delay"):
        setattr(config, key, int(rest[1]))
    else:
        raise ScenarioError(f"unknown config key {key!r}")


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


@dataclass
class StepResult:
    tag: str
    verb: str
    txid: bytes | None = None
    receipt: object = None
    digest: crypto.Digest | None = None
    plaintext: bytes | None = None
    submit_tick: int = 0
    resolve_tick: int | None = None

    @property
    def latency(self) -> int | None:
        if self.resolve_tick is None:
            return None
        return self.resolve_tick - self.submit_tick


@dataclass
class ExpectOutcome:
    expression: str
    ok: bool
    detail: str


@dataclass
class ScenarioReport:
    name: str
    seed: int
    expects: list[ExpectOutcome] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    results: dict[str, StepResult] = field(default_factory=dict)
    trace_hash: str = ""

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.expects)

    def render_text(self) -> str:
        lines = [f"scenario {self.name} (seed {self.seed})"]
        for e in self.expects:
            status = "PASS" if e.ok else "FAIL"
            lines.append(f"  [{status}] expect {e.expression}  {e.detail}")
        lines.append("  metrics:")
        for k in sorted(self.metrics):
            lines.append(f"    {k} = {self.metrics[k]}")
        lines.append(f"  trace_hash = {self.trace_hash}")
        lines.append(f"  result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def render_lines(self) -> str:
        out = []
        for e in self.expects:
            out.append(f"expect\t{self.name}\t{'pass' if e.ok else 'fail'}\t{e.expression}\t{e.detail}")
        for k in sorted(self.metrics):
            out.append(f"metric\t{self.name}\t{k}\t{self.metrics[k]}")
        out.append(f"trace\t{self.name}\t{self.trace_hash}")
        return "\n".join(out)


class ScenarioRunner:
    """Executes one scenario deterministically and evaluates its expects."""

    def __init__(self, scenario: Scenario, seed: int | None = None,
                 strip_faults: bool = False):
        self.scenario = scenario
        self.config = SimConfig(**vars(scenario.config))
        self.config.byzantine = dict(scenario.config.byzantine)
        if seed is not None:
            self.config.seed = seed
        if strip_faults:
            self.config.byzantine = {}
        self.strip_faults = strip_faults
        self.sim = Simulator(self.config)
        self.f = (self.config.replicas - 1) // 3
        self.actors: dict[str, object] = {}
        self.gateways: dict[str, GatewayNode] = {}
        self.results: dict[str, StepResult] = {}
        self.last_write: dict[tuple[bytes, str], crypto.Digest] = {}
        self.grants: dict[tuple[str, str], frozenset] = {}
        self._auto_tag = 0
        self._outsider_keys = None
        self._build_actors()

    # -- construction -------------------------------------------------------

    def _actor_rng(self, actor_id: str) -> random.Random:
        # derive per-actor seeds with a real hash: builtin hash() is
        # process-randomized and would break run-to-run reproducibility
        material = f"{self.config.seed}/actor/{actor_id}".encode("utf-8")
        return random.Random(int.from_bytes(hashlib.sha256(material).digest()[:8], "big"))

    def _build_actors(self) -> None:
        for spec in self.scenario.actors:
            rng = self._actor_rng(spec.actor_id)
            if spec.role == "patient":
                actor, _record = identity.join_patient(spec.actor_id, rng)
            else:
                actor, _record = identity.join_staff(spec.actor_id, spec.profile, rng)
            gateway = GatewayNode(spec.actor_id, spec.role, actor, self.f)
            self.actors[spec.actor_id] = actor
            self.gateways[spec.actor_id] = gateway
            self.sim.add_node(gateway)

    def _reference_state(self) -> ledger.LedgerState:
        return self.sim.honest_replicas()[0].state

    # -- step execution ------------------------------------------------------

    def run(self) -> ScenarioReport:
        for step in self.scenario.steps:
            if self.strip_faults and step.verb in FAULT_VERBS:
                continue
            self._run_step(step)
        # drain whatever is still in flight
        self.sim.run_until(None, max_tick=self.sim.now + self.config.view_timeout * 8)
        return self._evaluate()

    def _tag_of(self, step: Step) -> str:
        if step.tag:
            return step.tag
        self._auto_tag += 1
        return f"_{step.verb}{self._auto_tag}"

    def _run_step(self, step: Step) -> None:
        handler = getattr(self, f"_step_{step.verb}", None)
        if handler is None:
            raise ScenarioError(f"unknown step verb {step.verb!r}")
        handler(step)

    def _submit_and_wait(self, step: Step, gateway: GatewayNode, tx: ledger.Transaction) -> StepResult:
        tag = self._tag_of(step)
        result = StepResult(tag=tag, verb=step.verb, submit_tick=self.sim.now)
        txid = gateway.submit(self.sim, tx)
        result.txid = txid
        budget = self.sim.now + self.config.view_timeout * STEP_BUDGET_FACTOR
        self.sim.run_until(lambda s: txid in gateway.results, max_tick=budget)
        receipt = gateway.results.get(txid)
        result.receipt = receipt
        entry = gateway.pending.get(txid)
        if entry is not None:
            result.resolve_tick = entry.resolve_tick
        self.results[tag] = result
        return result

    def _gateway(self, actor_id: str) -> GatewayNode:
        try:
            return self.gateways[actor_id]
        except KeyError:
            raise ScenarioError(f"unknown actor {actor_id!r}") from None

    def _step_register(self, step: Step) -> None:
        gateway = self._gateway(step.args[0])
        actor = gateway.actor
        role = identity.ROLE_PATIENT if gateway.role == "patient" else identity.ROLE_STAFF
        profile = getattr(actor, "profile", "")
        payload = ledger.RegisterPayload(role, actor.keys.public, profile)
        tx = ledger.build_signed_tx(ledger.KIND_REGISTER, actor.keys, gateway.next_seq(), payload)
        self._submit_and_wait(step, gateway, tx)

    def _step_grant(self, step: Step) -> None:
        patient_id, staff_id, *types = step.args
        gateway = self._gateway(patient_id)
        patient = gateway.actor
        staff_gateway = self._gateway(staff_id)
        payload = ledger.AccessPayload(
            patient.keys.public, staff_gateway.actor.keys.public, frozenset(types))
        tx = ledger.build_signed_tx(ledger.KIND_ACCESS, patient.keys, gateway.next_seq(), payload)
        result = self._submit_and_wait(step, gateway, tx)
        if result.receipt is not None and result.receipt.accepted and types:
            self.grants[(patient_id, staff_id)] = frozenset(types)
            self._share_key(patient_id, staff_id)

    def _step_revoke(self, step: Step) -> None:
        patient_id, staff_id = step.args[:2]
        gateway = self._gateway(patient_id)
        patient = gateway.actor
        staff_pk = self._gateway(staff_id).actor.keys.public
        payload = ledger.AccessPayload(patient.keys.public, staff_pk, frozenset())
        tx = ledger.build_signed_tx(ledger.KIND_ACCESS, patient.keys, gateway.next_seq(), payload)
        result = self._submit_and_wait(step, gateway, tx)
        if result.receipt is not None and result.receipt.accepted:
            self.grants.pop((patient_id, staff_id), None)
            # rotate the record key and re-seal it for everyone still granted
            patient.rotate_record_key(self._actor_rng(patient_id + "/rotate"))
            for (p, s) in list(self.grants):
                if p == patient_id:
                    self._share_key(p, s)

    def _share_key(self, patient_id: str, staff_id: str) -> None:
        patient = self.actors[patient_id]
        staff = self.actors[staff_id]
        directory = self._reference_state().directory
        envelope = identity.share_sym_key(
            patient, staff.keys.public, directory,
            self._actor_rng(patient_id + "/env/" + staff_id))
        identity.open_envelope(staff, envelope,
                               self._actor_rng(staff_id + "/open/" + patient_id))

    def _step_share_key(self, step: Step) -> None:
        self._share_key(step.args[0], step.args[1])

    def _step_put(self, step: Step) -> None:
        patient_id, data_type, literal = step.args[:3]
        gateway = self._gateway(patient_id)
        patient = gateway.actor
        ciphertext = crypto.encrypt(patient.record_key, literal.encode("utf-8"),
                                    data_type.encode("utf-8"))
        payload = ledger.DataPayload(patient.keys.public, data_type, ledger.RW_WRITE, ciphertext)
        tx = ledger.build_signed_tx(ledger.KIND_DATA, patient.keys, gateway.next_seq(), payload)
        result = self._submit_and_wait(step, gateway, tx)
        if result.receipt is not None and result.receipt.accepted and result.receipt.value:
            result.digest = crypto.Digest(result.receipt.value)
            self.last_write[(patient.keys.public, data_type)] = result.digest

    def _resolve_read_target(self, selector: str, patient_pk: bytes, data_type: str) -> crypto.Digest:
        if selector == "last":
            digest = self.last_write.get((patient_pk, data_type))
            if digest is None:
                raise ScenarioError(f"no prior write for {data_type!r}")
            return digest
        if selector == "missing":
            return crypto.hash_bytes(b"never written " + data_type.encode())
        if selector.startswith("tag:"):
            ref = self.results.get(selector[4:])
            if ref is None or ref.digest is None:
                raise ScenarioError(f"tag {selector[4:]!r} has no digest")
            return ref.digest
        return crypto.Digest.from_hex(selector)

    def _step_get(self, step: Step) -> None:
        actor_id, patient_id, data_type, selector = step.args[:4]
        gateway = self._gateway(actor_id)
        actor = gateway.actor
        patient_pk = self._gateway(patient_id).actor.keys.public
        digest = self._resolve_read_target(selector, patient_pk, data_type)
        payload = ledger.DataPayload(patient_pk, data_type, ledger.RW_READ, digest)
        tx = ledger.build_signed_tx(ledger.KIND_DATA, actor.keys, gateway.next_seq(), payload)
        result = self._submit_and_wait(step, gateway, tx)
        receipt = result.receipt
        if receipt is not None and receipt.accepted and receipt.code == ledger.OK and receipt.value:
            ciphertext = crypto.Ciphertext.from_wire(receipt.value)
            ad = data_type.encode("utf-8")
            if isinstance(actor, identity.PatientIdentity):
                keys = actor.decryption_keys()
            else:
                keys = actor.decryption_keys(patient_pk)
            for key in keys:
                try:
                    result.plaintext = crypto.decrypt(key, ciphertext, ad)
                    break
                except Exception:
                    continue

    def _step_flood(self, step: Step) -> None:
        actor_id, multiplier = step.args[0], int(step.args[1])
        gateway = self.gateways[actor_id]
        staff_specs = [a for a in self.scenario.actors if a.role == "staff"]
        if not staff_specs:
            raise ScenarioError("flood needs at least one registered staff actor")
        staff_pk = self.actors[staff_specs[0].actor_id].keys.public
        flooder = FloodNode(actor_id + "!flood", gateway.actor, self.f, lambda: staff_pk)
        # the flooder reuses the actor's identity but its own node id; swap the
        # gateway so the identity's sequence numbers stay consistent
        flooder.seq = gateway.seq
        self.sim.add_node(flooder)
        self.gateways[actor_id] = flooder
        flooder.start_flood(self.sim, multiplier)
        self.sim.run_until(None, max_tick=self.sim.now + 2)

    def _step_crash(self, step: Step) -> None:
        self.sim.crash(step.args[0])
        self.sim.run_until(None, max_tick=self.sim.now + 2)

    def _step_partition(self, step: Step) -> None:
        groups = [set(group.split(",")) for group in step.args]
        self.sim.partition(groups)

    def _step_heal(self, step: Step) -> None:
        self.sim.heal_partitions()

    def _step_tamper_store(self, step: Step) -> None:
        node = step.args[0]
        key = None
        if len(step.args) > 1 and step.args[1].startswith("tag:"):
            ref = self.results.get(step.args[1][4:])
            if ref is not None:
                key = ref.digest
        if node.startswith("holder:"):
            # target the N-th holder in the entry's rendezvous placement
            if key is None:
                raise ScenarioError("holder: targeting needs a tag:<put-tag> argument")
            index = int(node.split(":", 1)[1])
            holders = self.sim.store.holders(key)
            if index >= len(holders):
                raise ScenarioError(f"entry has only {len(holders)} holders")
            node = holders[index]
        self.sim.tamper_store(node, key)

    def _step_tamper_block(self, step: Step) -> None:
        """A compromised replica gossips an altered committed block."""
        node_id, height = step.args[0], int(step.args[1])
        replica = self.sim.nodes[node_id].replica
        if height >= len(replica.chain):
            raise ScenarioError(f"{node_id} has no block at height {height}")
        block = replica.chain[height]
        from dataclasses import replace as dc_replace
        if block.txs:
            tx0 = block.txs[0]
            forged_tx = dc_replace(tx0, seq=tx0.seq + 1)
            forged = dc_replace(block, txs=(forged_tx,) + block.txs[1:])
        else:
            forged = dc_replace(block, timestamp=block.timestamp + 1)
        certs = replica.commit_certificate(block)
        for dst in self.sim.replica_ids:
            if dst != node_id:
                self.sim.send(node_id, dst, "sync", (forged, certs))
        self.sim.run_until(None, max_tick=self.sim.now + self.config.view_timeout)

    def _step_outsider(self, step: Step) -> None:
        """A node outside the validator set forges consensus traffic."""
        count = int(step.args[0]) if step.args else 10
        rng = self._actor_rng("outsider")
        if self._outsider_keys is None:
            self._outsider_keys = crypto.gen_sig_keypair(rng)
        from .sim import Node as SimNode

        if "outsider" not in self.sim.nodes:
            class _Outsider(SimNode):
                def handle(self, sim, src, kind, payload):
                    pass
            self.sim.add_node(_Outsider("outsider", "replica"))
        state = self._reference_state()
        fake_tx = ledger.build_signed_tx(
            ledger.KIND_REGISTER, self._outsider_keys, 1,
            ledger.RegisterPayload(identity.ROLE_PATIENT, self._outsider_keys.public))
        tip = self.sim.honest_replicas()[0].chain[-1]
        fake_block = ledger.Block(
            height=tip.height + 1, prev_hash=tip.block_hash(),
            tx_root=ledger.compute_tx_root([fake_tx]), timestamp=self.sim.now,
            proposer=99, txs=(fake_tx,),
        )
        for i in range(count):
            msg = consensus.ConsensusMessage(
                consensus.PREPREPARE, 0, fake_block.height, fake_block.block_hash(),
                sender=99, block=fake_block)
            signed = consensus.ConsensusMessage(
                msg.kind, msg.view, msg.height, msg.block_digest, msg.sender,
                signature=crypto.sign(self._outsider_keys.private, msg.signing_bytes()),
                block=fake_block)
            dst = self.sim.replica_ids[i % len(self.sim.replica_ids)]
            self.sim.send("outsider", dst, "consensus", signed)
        self.sim.run_until(None, max_tick=self.sim.now + self.config.view_timeout)

    def _step_wait(self, step: Step) -> None:
        self.sim.run_until(None, max_tick=self.sim.now + int(step.args[0]))

    # -- evaluation -----------------------------------------------------------

    def _honest_latencies(self) -> list[int]:
        out = []
        for result in self.results.values():
            if result.receipt is not None and result.receipt.accepted \
                    and result.latency is not None:
                out.append(result.latency)
        return out

    def _metrics(self) -> dict:
        sim = self.sim
        honest = sim.honest_replicas()
        latencies = self._honest_latencies()
        metrics = {
            "ticks": sim.now,
            "blocks_committed_max_height": max((len(r.chain) - 1 for r in honest), default=0),
            "view_changes": sim.view_changes(),
            "rate_limited": sim.counters.get("rate_limited", 0),
            "delivered": sim.counters.get("delivered", 0),
            "dropped_random": sim.counters.get("dropped_random", 0),
            "tamper_alarms": sim.store.tamper_alarms,
            "fallback_reads": sim.store.fallback_reads,
            "bad_holders": len(sim.store.bad_holders),
            "rejected_blocks": sum(r.rejected_chain_blocks for r in honest),
            "dropped_consensus_msgs": sum(r.dropped_messages for r in honest),
            "equivocations_seen": sum(r.equivocations_seen for r in honest),
            "safety_violations": sum(r.safety_violations for r in honest),
            "execution_anomalies": sum(r.execution_anomalies for r in honest),
            "mean_commit_latency": (sum(latencies) / len(latencies)) if latencies else None,
            "resolved_txs": sum(1 for r in self.results.values() if r.receipt is not None),
        }
        return metrics

    def _evaluate(self) -> ScenarioReport:
        report = ScenarioReport(
            name=self.scenario.name, seed=self.config.seed,
            results=self.results, metrics=self._metrics(),
            trace_hash=self.sim.trace_hash(),
        )
        baseline_mean = None
        if any(e and e[0] == "latency_ratio_max" for e in self.scenario.expects) \
                and not self.strip_faults:
            baseline = ScenarioRunner(self.scenario, strip_faults=True)
            baseline_report = baseline.run()
            baseline_mean = baseline_report.metrics.get("mean_commit_latency")
            report.metrics["baseline_commit_latency"] = baseline_mean
        for expect in self.scenario.expects:
            report.expects.append(self._check(expect, baseline_mean))
        return report

    def _check(self, expect: list[str], baseline_mean) -> ExpectOutcome:
        expression = " ".join(expect)
        name, *args = expect
        sim = self.sim
        metrics = self._metrics()
        try:
            if name == "resolved":
                tag, wanted = args
                result = self.results[tag]
                receipt = result.receipt
                got = "unresolved" if receipt is None else receipt.code
                mapping = {
                    "ok": receipt is not None and receipt.accepted and receipt.code == ledger.OK,
                    "denied": receipt is not None and not receipt.accepted
                    and receipt.code == ledger.DENIED,
                    "not_found": receipt is not None and not receipt.accepted
                    and receipt.code == ledger.NOT_FOUND,
                    "alarm": receipt is not None and receipt.accepted
                    and receipt.code == ledger.INTEGRITY_ALARM,
                    "rate_limited": receipt is not None and receipt.code == "rate_limited",
                }
                if wanted not in mapping:
                    return ExpectOutcome(expression, False, f"unknown outcome {wanted!r}")
                return ExpectOutcome(expression, mapping[wanted], f"got {got}")
            if name == "value":
                tag, literal = args
                plaintext = self.results[tag].plaintext
                ok = plaintext == literal.encode("utf-8")
                return ExpectOutcome(expression, ok, f"got {plaintext!r}")
            if name == "safety":
                ok = sim.safety_holds() and metrics["safety_violations"] == 0
                return ExpectOutcome(expression, ok, "no conflicting commits")
            if name == "committed_min":
                got = metrics["blocks_committed_max_height"]
                return ExpectOutcome(expression, got >= int(args[0]), f"height {got}")
            if name == "all_committed_equal":
                honest = sim.honest_replicas()
                heights = {len(r.chain) for r in honest}
                tips = {r.chain[-1].block_hash().value for r in honest}
                ok = len(heights) == 1 and len(tips) == 1
                return ExpectOutcome(expression, ok, f"heights {sorted(heights)}")
            if name == "view_changes_min":
                got = metrics["view_changes"]
                return ExpectOutcome(expression, got >= int(args[0]), f"{got} view changes")
            if name == "view_changes_max":
                got = metrics["view_changes"]
                return ExpectOutcome(expression, got <= int(args[0]), f"{got} view changes")
            if name == "rate_limit_respected":
                limit = self.config.rate_limit
                worst = max(sim.rate_counts.values(), default=0)
                return ExpectOutcome(expression, worst <= limit,
                                     f"max accepted/window {worst} vs limit {limit}")
            if name == "rate_limited_min":
                got = metrics["rate_limited"]
                return ExpectOutcome(expression, got >= int(args[0]), f"{got} rejected")
            if name == "latency_ratio_max":
                mean = metrics["mean_commit_latency"]
                if mean is None or not baseline_mean:
                    return ExpectOutcome(expression, False, "missing latency data")
                ratio = mean / baseline_mean
                return ExpectOutcome(expression, ratio <= float(args[0]),
                                     f"ratio {ratio:.2f} (attack {mean:.0f} vs baseline {baseline_mean:.0f})")
            if name == "tamper_alarms_min":
                got = metrics["tamper_alarms"]
                return ExpectOutcome(expression, got >= int(args[0]), f"{got} alarms")
            if name == "fallback_reads_min":
                got = metrics["fallback_reads"]
                return ExpectOutcome(expression, got >= int(args[0]), f"{got} fallbacks")
            if name == "bad_holder_reported":
                holders = {node for node, _ in sim.store.bad_holders}
                ok = args[0] in holders
                return ExpectOutcome(expression, ok, f"reported {sorted(holders)}")
            if name == "rejected_blocks_min":
                got = metrics["rejected_blocks"]
                return ExpectOutcome(expression, got >= int(args[0]), f"{got} rejected")
            if name == "dropped_consensus_min":
                got = metrics["dropped_consensus_msgs"]
                return ExpectOutcome(expression, got >= int(args[0]), f"{got} dropped")
            if name == "replay_matches":
                for replica in sim.honest_replicas():
                    rebuilt = replay(replica.chain)
                    if rebuilt.state_digest() != replica.state.state_digest():
                        return ExpectOutcome(expression, False,
                                             f"replica {replica.id} digest mismatch")
                return ExpectOutcome(expression, True, "all honest replicas replay clean")
            if name == "chain_not_extended_by_forgery":
                honest = sim.honest_replicas()
                ok = all(all(b.proposer != 99 for b in r.chain) for r in honest)
                return ExpectOutcome(expression, ok, "no forged proposer committed")
            return ExpectOutcome(expression, False, f"unknown predicate {name!r}")
        except Exception as exc:  # a failed expectation must not kill the report
            return ExpectOutcome(expression, False, f"error: {exc}")


def run_scenario_file(path, seed: int | None = None) -> ScenarioReport:
    return ScenarioRunner(load_scenario(path), seed=seed).run()
