"""Command-line front end.

Every mutating command spins up a local 4-replica network, replays the
persisted chain into it, submits the transaction through a gateway, waits for
the commit quorum, and persists the extended chain plus the content store.
The workspace directory (--home) holds key material, the chain file, the
store directory and sealed key envelopes:

    home/
      genesis.json        seed that derives the fixed validator roster
      keys/<id>.json      actor identity (signing key, record keys)
      envelopes/<staff>__<patient>.json
      chain.dat           length-prefixed canonical blocks
      store/<hex digest>  ciphertext entries, one file per digest

Exit codes: 0 success, 2 policy denial, 3 integrity alarm, 4 consensus
timeout, 5 malformed input.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import crypto, identity, ledger, scenario
from .crypto import SigningKeyPair, SymmetricKey
from .errors import MedLedgerError
from .sim import GatewayNode, SimConfig, Simulator

EXIT_OK = 0
EXIT_DENIED = 2
EXIT_ALARM = 3
EXIT_TIMEOUT = 4
EXIT_MALFORMED = 5

LOCAL_REPLICAS = 4
CLI_TICK_BUDGET = 5000


def _home_paths(home: str) -> dict:
    return {
        "genesis": os.path.join(home, "genesis.json"),
        "keys": os.path.join(home, "keys"),
        "envelopes": os.path.join(home, "envelopes"),
        "chain": os.path.join(home, "chain.dat"),
        "store": os.path.join(home, "store"),
    }


def _load_or_create_genesis(paths, seed) -> int:
    if os.path.exists(paths["genesis"]):
        with open(paths["genesis"]) as fh:
            return json.load(fh)["seed"]
    genesis_seed = seed if seed is not None else int.from_bytes(os.urandom(4), "big")
    os.makedirs(os.path.dirname(paths["genesis"]), exist_ok=True)
    with open(paths["genesis"], "w") as fh:
        json.dump({"seed": genesis_seed}, fh)
    return genesis_seed


class LocalNet:
    """One-process deployment backing the CLI: 4 replicas + shared store."""

    def __init__(self, home: str, seed=None):
        self.paths = _home_paths(home)
        os.makedirs(self.paths["keys"], exist_ok=True)
        os.makedirs(self.paths["envelopes"], exist_ok=True)
        genesis_seed = _load_or_create_genesis(self.paths, seed)
        self.sim = Simulator(SimConfig(seed=genesis_seed, replicas=LOCAL_REPLICAS,
                                       delay_min=1, delay_max=3))
        self.sim.store.load_dir(self.paths["store"])
        self.blocks = None
        if os.path.exists(self.paths["chain"]):
            self.blocks = ledger.load_chain(self.paths["chain"])
            if self.blocks[0].block_hash() != self.sim.genesis.block_hash():
                raise MedLedgerError(
                    "chain.dat was created under a different genesis seed")
            state = ledger.replay(self.blocks)
            self._prime_replicas(self.blocks, state)

    def _prime_replicas(self, blocks, state) -> None:
        for node_id in self.sim.replica_ids:
            replica = self.sim.nodes[node_id].replica
            replica.chain = list(blocks)
            replica.state = state.clone()
            replica.pool_state = state.clone()
            replica.committed_digests = {b.height: b.block_hash() for b in blocks[1:]}
        # store entries ride inside write transactions: repopulate for safety
        for block in blocks[1:]:
            for tx in block.txs:
                if tx.kind == ledger.KIND_DATA and tx.payload.rw == ledger.RW_WRITE:
                    self.sim.store.put(tx.payload.content.to_wire())

    @property
    def state(self) -> ledger.LedgerState:
        return self.sim.honest_replicas()[0].state

    def submit_and_wait(self, actor, node_id: str):
        """Returns (receipt | None); None means consensus timeout."""
        gateway = self.sim.nodes[node_id]
        txid = list(gateway.pending)[-1]
        self.sim.run_until(lambda s: txid in gateway.results,
                           max_tick=self.sim.now + CLI_TICK_BUDGET)
        return gateway.results.get(bytes(txid))

    def gateway_for(self, actor_id: str, role: str, actor) -> GatewayNode:
        gateway = GatewayNode(actor_id, role, actor, sim_f=1)
        pk = actor.keys.public
        gateway.seq = self.state.seq_tracker.get(pk, 0)
        self.sim.add_node(gateway)
        return gateway

    def persist(self) -> None:
        chain = self.sim.honest_replicas()[0].chain
        ledger.save_chain(self.paths["chain"], chain)
        self.sim.store.save_dir(self.paths["store"])


def _keyfile(paths, actor_id: str) -> str:
    return os.path.join(paths["keys"], f"{actor_id}.json")


def _save_identity(paths, actor_id: str, record: dict) -> None:
    path = _keyfile(paths, actor_id)
    with open(path, "w") as fh:
        json.dump(record, fh, indent=1)
    os.chmod(path, 0o600)


def _load_identity(paths, actor_id: str):
    path = _keyfile(paths, actor_id)
    if not os.path.exists(path):
        raise MedLedgerError(f"no local keys for {actor_id!r}; run register first")
    with open(path) as fh:
        rec = json.load(fh)
    keys = SigningKeyPair(public=bytes.fromhex(rec["public"]),
                          private=bytes.fromhex(rec["private"]))
    if rec["role"] == "patient":
        record_keys = [SymmetricKey(bytes.fromhex(h)) for h in rec["record_keys"]]
        actor = identity.PatientIdentity(
            patient_id=actor_id, keys=keys, record_key=record_keys[0],
            key_history=list(reversed(record_keys[1:])))
    else:
        actor = identity.StaffIdentity(staff_id=actor_id, keys=keys,
                                       profile=rec.get("profile", ""))
        for patient_hex, key_hexes in rec.get("received_keys", {}).items():
            patient_pk = bytes.fromhex(patient_hex)
            key_objs = [SymmetricKey(bytes.fromhex(h)) for h in key_hexes]
            actor.received_keys[patient_pk] = key_objs[0]
            actor.key_history[patient_pk] = list(reversed(key_objs[1:]))
    return rec, actor


def _store_identity(paths, actor_id: str, rec: dict, actor) -> None:
    if rec["role"] == "patient":
        rec["record_keys"] = [actor.record_key.secret.hex()] + \
            [k.secret.hex() for k in reversed(actor.key_history)]
    else:
        rec["received_keys"] = {
            pk.hex(): [actor.received_keys[pk].secret.hex()] +
                      [k.secret.hex() for k in reversed(actor.key_history.get(pk, []))]
            for pk in actor.received_keys
        }
    _save_identity(paths, actor_id, rec)


def _receipt_exit(receipt) -> int:
    if receipt is None:
        return EXIT_TIMEOUT
    if receipt.accepted and receipt.code == ledger.OK:
        return EXIT_OK
    if receipt.accepted and receipt.code == ledger.INTEGRITY_ALARM:
        return EXIT_ALARM
    if receipt.code in (ledger.DENIED, ledger.NOT_FOUND,
                        ledger.REJECT_NOT_GRANTOR, ledger.REJECT_BAD_STAFF,
                        ledger.REJECT_BAD_PATIENT):
        return EXIT_DENIED
    return EXIT_MALFORMED


@click.group()
@click.option("--home", default="ledger_home", show_default=True,
              help="workspace directory")
@click.option("--seed", type=int, default=None,
              help="seed for key generation and the local network")
@click.pass_context
def main(ctx, home, seed):
    """Patient-controlled healthcare data ledger."""
    ctx.ensure_object(dict)
    ctx.obj["home"] = home
    ctx.obj["seed"] = seed


@main.command()
@click.option("--role", type=click.Choice(["patient", "staff"]), required=True)
@click.option("--id", "actor_id", required=True)
@click.option("--profile", default="")
@click.option("--force", is_flag=True, help="overwrite existing local keys")
@click.pass_context
def register(ctx, role, actor_id, profile, force):
    """Generate keys and announce the public key on the ledger."""
    import random

    home, seed = ctx.obj["home"], ctx.obj["seed"]
    try:
        net = LocalNet(home, seed)
        if os.path.exists(_keyfile(net.paths, actor_id)) and not force:
            raise MedLedgerError(f"{actor_id!r} already has local keys (use --force)")
        rng = random.Random(seed) if seed is not None else None
        if role == "patient":
            actor, _rec = identity.join_patient(actor_id, rng)
            rec = {"id": actor_id, "role": role,
                   "public": actor.keys.public.hex(),
                   "private": actor.keys.private.hex(),
                   "record_keys": [actor.record_key.secret.hex()]}
        else:
            actor, _rec = identity.join_staff(actor_id, profile, rng)
            rec = {"id": actor_id, "role": role, "profile": profile,
                   "public": actor.keys.public.hex(),
                   "private": actor.keys.private.hex(),
                   "received_keys": {}}
        gateway = net.gateway_for(actor_id, role, actor)
        payload = ledger.RegisterPayload(
            identity.ROLE_PATIENT if role == "patient" else identity.ROLE_STAFF,
            actor.keys.public, profile)
        tx = ledger.build_signed_tx(ledger.KIND_REGISTER, actor.keys,
                                    gateway.next_seq(), payload)
        gateway.submit(net.sim, tx)
        receipt = net.submit_and_wait(actor, actor_id)
        code = _receipt_exit(receipt)
        if code == EXIT_OK:
            _save_identity(net.paths, actor_id, rec)
            net.persist()
            address = crypto.hash_bytes(actor.keys.public).hex()
            click.echo(f"registered {actor_id} role={role} address={address} "
                       f"height={receipt.height}")
        else:
            click.echo(f"registration failed: {receipt.code if receipt else 'timeout'}",
                       err=True)
        sys.exit(code)
    except MedLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)


def _policy_tx(ctx, patient_id, staff_id, types):
    home, seed = ctx.obj["home"], ctx.obj["seed"]
    net = LocalNet(home, seed)
    patient_rec, patient = _load_identity(net.paths, patient_id)
    staff_rec, staff = _load_identity(net.paths, staff_id)
    gateway = net.gateway_for(patient_id, "patient", patient)
    payload = ledger.AccessPayload(patient.keys.public, staff.keys.public,
                                   frozenset(types))
    tx = ledger.build_signed_tx(ledger.KIND_ACCESS, patient.keys,
                                gateway.next_seq(), payload)
    gateway.submit(net.sim, tx)
    receipt = net.submit_and_wait(patient, patient_id)
    return net, patient_rec, patient, staff, receipt


def _write_envelope(net, patient, staff_pk, staff_id, patient_id) -> None:
    envelope = identity.share_sym_key(patient, staff_pk, net.state.directory)
    path = os.path.join(net.paths["envelopes"], f"{staff_id}__{patient_id}.json")
    with open(path, "w") as fh:
        json.dump({"envelope": envelope.to_wire().hex()}, fh)
    os.chmod(path, 0o600)


@main.command()
@click.argument("patient_id")
@click.argument("staff_id")
@click.argument("types", nargs=-1, required=True)
@click.pass_context
def grant(ctx, patient_id, staff_id, types):
    """Grant STAFF_ID access to the given record types (status s=1 on success)."""
    try:
        net, patient_rec, patient, staff, receipt = _policy_tx(
            ctx, patient_id, staff_id, types)
        code = _receipt_exit(receipt)
        if code == EXIT_OK:
            _write_envelope(net, patient, staff.keys.public, staff_id, patient_id)
            _store_identity(net.paths, patient_id, patient_rec, patient)
            net.persist()
            click.echo(f"s=1 granted {sorted(types)} height={receipt.height}")
        else:
            click.echo(f"s=0 ({receipt.code if receipt else 'timeout'})", err=True)
        sys.exit(code)
    except MedLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)


@main.command()
@click.argument("patient_id")
@click.argument("staff_id")
@click.pass_context
def revoke(ctx, patient_id, staff_id):
    """Revoke all of STAFF_ID's permissions (empty-set policy) and rotate keys."""
    try:
        net, patient_rec, patient, staff, receipt = _policy_tx(
            ctx, patient_id, staff_id, ())
        code = _receipt_exit(receipt)
        if code == EXIT_OK:
            patient.rotate_record_key()
            # re-seal the fresh key for everyone still granted
            state = net.state
            for (grantor, grantee), record in state.latest_policy.items():
                if grantor != patient.keys.public or not record.allowed_types:
                    continue
                entry = state.directory.lookup(grantee)
                if entry is None:
                    continue
                for name in os.listdir(net.paths["keys"]):
                    other_id = name[:-5]
                    _orec, other = _load_identity(net.paths, other_id)
                    if other.keys.public == grantee:
                        _write_envelope(net, patient, grantee, other_id, patient_id)
            _store_identity(net.paths, patient_id, patient_rec, patient)
            net.persist()
            click.echo(f"s=1 revoked height={receipt.height}")
        else:
            click.echo(f"s=0 ({receipt.code if receipt else 'timeout'})", err=True)
        sys.exit(code)
    except MedLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)


@main.command()
@click.argument("patient_id")
@click.argument("data_type")
@click.argument("source")
@click.option("--literal", is_flag=True, help="treat SOURCE as the data itself")
@click.pass_context
def put(ctx, patient_id, data_type, source, literal):
    """Encrypt a record and write its pointer on the ledger; prints the digest."""
    try:
        if literal:
            plaintext = source.encode("utf-8")
        else:
            with open(source, "rb") as fh:
                plaintext = fh.read()
        net = LocalNet(ctx.obj["home"], ctx.obj["seed"])
        rec, patient = _load_identity(net.paths, patient_id)
        if rec["role"] != "patient":
            raise MedLedgerError("only patients write records")
        gateway = net.gateway_for(patient_id, "patient", patient)
        ciphertext = crypto.encrypt(patient.record_key, plaintext,
                                    data_type.encode("utf-8"))
        payload = ledger.DataPayload(patient.keys.public, data_type,
                                     ledger.RW_WRITE, ciphertext)
        tx = ledger.build_signed_tx(ledger.KIND_DATA, patient.keys,
                                    gateway.next_seq(), payload)
        gateway.submit(net.sim, tx)
        receipt = net.submit_and_wait(patient, patient_id)
        code = _receipt_exit(receipt)
        if code == EXIT_OK:
            net.persist()
            click.echo(receipt.value.hex() if isinstance(receipt.value, bytes)
                       else receipt.value)
        else:
            click.echo(f"put failed: {receipt.code if receipt else 'timeout'}", err=True)
        sys.exit(code)
    except (OSError, MedLedgerError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)


@main.command()
@click.argument("actor_id")
@click.argument("patient_id")
@click.argument("data_type")
@click.argument("digest")
@click.option("--out", type=click.Path(), default=None,
              help="write plaintext here instead of stdout")
@click.pass_context
def get(ctx, actor_id, patient_id, data_type, digest, out):
    """Read a record by digest ('last' = newest) and decrypt it locally."""
    try:
        net = LocalNet(ctx.obj["home"], ctx.obj["seed"])
        rec, actor = _load_identity(net.paths, actor_id)
        _prec, patient = _load_identity(net.paths, patient_id)
        patient_pk = patient.keys.public
        if digest == "last":
            digests = net.state.record_digests(patient_pk, data_type)
            if not digests:
                raise MedLedgerError(f"no records of type {data_type!r}")
            target = digests[-1]
        else:
            target = crypto.Digest.from_hex(digest)
        if rec["role"] == "staff":
            _open_pending_envelopes(net, actor_id, actor)
        gateway = net.gateway_for(actor_id, rec["role"], actor)
        payload = ledger.DataPayload(patient_pk, data_type, ledger.RW_READ, target)
        tx = ledger.build_signed_tx(ledger.KIND_DATA, actor.keys,
                                    gateway.next_seq(), payload)
        gateway.submit(net.sim, tx)
        receipt = net.submit_and_wait(actor, actor_id)
        code = _receipt_exit(receipt)
        if code != EXIT_OK:
            click.echo(f"get failed: {receipt.code if receipt else 'timeout'}", err=True)
            sys.exit(code)
        ciphertext = crypto.Ciphertext.from_wire(receipt.value)
        keys = (actor.decryption_keys() if rec["role"] == "patient"
                else actor.decryption_keys(patient_pk))
        plaintext = None
        for key in keys:
            try:
                plaintext = crypto.decrypt(key, ciphertext, data_type.encode("utf-8"))
                break
            except MedLedgerError:
                continue
        if plaintext is None:
            raise MedLedgerError("no local key decrypts this record "
                                 "(was access shared before the record was written?)")
        if rec["role"] == "staff":
            _store_identity(net.paths, actor_id, rec, actor)
        net.persist()
        if out:
            with open(out, "wb") as fh:
                fh.write(plaintext)
            click.echo(f"wrote {len(plaintext)} bytes to {out}")
        else:
            sys.stdout.buffer.write(plaintext + b"\n")
        sys.exit(EXIT_OK)
    except MedLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)


def _open_pending_envelopes(net, staff_id: str, staff) -> None:
    prefix = f"{staff_id}__"
    env_dir = net.paths["envelopes"]
    for name in sorted(os.listdir(env_dir)):
        if not name.startswith(prefix):
            continue
        with open(os.path.join(env_dir, name)) as fh:
            data = json.load(fh)
        envelope = identity.SecureEnvelope.from_wire(bytes.fromhex(data["envelope"]))
        try:
            identity.open_envelope(staff, envelope)
        except MedLedgerError:
            continue


@main.command()
@click.argument("patient_id")
@click.option("--format", "fmt", type=click.Choice(["text", "lines"]), default="text",
              show_default=True)
@click.pass_context
def audit(ctx, patient_id, fmt):
    """Chronological trail of every accepted event touching the patient."""
    try:
        net = LocalNet(ctx.obj["home"], ctx.obj["seed"])
        _rec, patient = _load_identity(net.paths, patient_id)
        events = ledger.audit_trail(net.state, patient.keys.public)
        for ev in events:
            actor_addr = crypto.hash_bytes(ev.actor).hex()[:16]
            if fmt == "lines":
                click.echo(f"{ev.order}\t{ev.height}\t{ev.kind}\t{actor_addr}\t"
                           f"{ev.data_type}\t{ev.digest.hex() if ev.digest else '-'}\t"
                           f"{','.join(sorted(ev.types))}")
            else:
                extra = f" types={sorted(ev.types)}" if ev.types else ""
                extra += f" type={ev.data_type}" if ev.data_type else ""
                extra += f" digest={ev.digest.hex()[:16]}" if ev.digest else ""
                click.echo(f"[{ev.order}] h{ev.height} {ev.kind} by {actor_addr}{extra}")
        if not events:
            click.echo("(no events)")
        sys.exit(EXIT_OK)
    except MedLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)


@main.command("run-scenario")
@click.argument("path", type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="override the scenario seed")
@click.option("--out", type=click.Path(), default=None, help="write the message trace here")
@click.option("--format", "fmt", type=click.Choice(["text", "lines"]), default="text",
              show_default=True)
def run_scenario(path, seed, out, fmt):
    """Execute a scenario file and evaluate its expectations."""
    try:
        runner = scenario.ScenarioRunner(scenario.load_scenario(path), seed=seed)
        report = runner.run()
    except MedLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)
    if out:
        with open(out, "w") as fh:
            for record in runner.sim.trace:
                fh.write(record.line() + "\n")
    click.echo(report.render_text() if fmt == "text" else report.render_lines())
    sys.exit(EXIT_OK if report.passed else 1)


ATTACK_MATRIX = [
    ("denial of service", "dos", "per-node rate limiting"),
    ("distributed denial of service", "ddos", "per-node rate limiting"),
    ("ledger modification", "modification", "hash-chained blocks, quorum certificates"),
    ("fork by byzantine primary", "byzantine_primary", "PBFT quorum + view change"),
    ("storage tampering", "storage_tamper", "content addressing, replica fallback"),
    ("block forging by outsiders", "appending", "closed validator set, signatures"),
    ("majority takeover attempt", "byzantine_primary", "quorum intersection at n=3f+1"),
]


@main.command("attack-suite")
@click.option("--format", "fmt", type=click.Choice(["text", "lines"]), default="text",
              show_default=True)
def attack_suite(fmt):
    """Run the bundled attack drills and print a resilience matrix."""
    from importlib import resources

    reports = {}
    failures = 0
    for _attack, scn_name, _defense in ATTACK_MATRIX:
        if scn_name in reports:
            continue
        with resources.as_file(
            resources.files("medledger").joinpath(f"scenarios/{scn_name}.scn")
        ) as path:
            report = scenario.run_scenario_file(path)
        reports[scn_name] = report
    rows = []
    for attack, scn_name, defense in ATTACK_MATRIX:
        report = reports[scn_name]
        ok = report.passed
        failures += 0 if ok else 1
        rows.append((attack, scn_name, defense, "PASS" if ok else "FAIL"))
    if fmt == "lines":
        for row in rows:
            click.echo("\t".join(row))
    else:
        width = max(len(r[0]) for r in rows)
        click.echo(f"{'attack':<{width}}  {'scenario':<18} {'result':<6} defense")
        for attack, scn_name, defense, result in rows:
            click.echo(f"{attack:<{width}}  {scn_name:<18} {result:<6} {defense}")
        for scn_name, report in reports.items():
            metrics = report.metrics
            click.echo(f"\n{scn_name}: view_changes={metrics['view_changes']} "
                       f"rate_limited={metrics['rate_limited']} "
                       f"tamper_alarms={metrics['tamper_alarms']} "
                       f"rejected_blocks={metrics['rejected_blocks']} "
                       f"mean_latency={metrics['mean_commit_latency']}")
    sys.exit(EXIT_OK if failures == 0 else 1)


if __name__ == "__main__":
    main()
