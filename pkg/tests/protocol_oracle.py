"""Brute-force reference for grant/revoke/read/write outcomes.

The oracle replays a raw action log with plain dicts and lists, re-deriving
every authorization decision from scratch: the latest policy for a
(patient, staff) pair is found by scanning the full policy log backward, and
record lookups hash the raw content bytes directly with hashlib. It shares no
code with the ledger state machine, so agreement between the two is evidence,
not tautology.

Actions (tuples):
    ("register", actor, "patient"|"staff")
    ("grant", sender, patient, staff, types_tuple)   # empty tuple = revoke
    ("write", sender, patient, dtype, content_bytes)
    ("read", sender, patient, dtype, digest_bytes)

Outcomes: ("ok", value) / ("denied", None) / ("not_found", None) with value a
digest for writes and the content bytes for reads.
"""

from __future__ import annotations

import hashlib
import random

AEAD_OVERHEAD = 28  # nonce + tag: generated contents must parse as ciphertext


def evaluate(actions):
    roles: dict[str, str] = {}
    policy_log: list[tuple[str, str, frozenset]] = []
    writes: dict[tuple[str, str], list[bytes]] = {}
    contents: dict[bytes, bytes] = {}
    outcomes = []

    def latest_policy(patient, staff):
        for entry_patient, entry_staff, types in reversed(policy_log):
            if entry_patient == patient and entry_staff == staff:
                return types
        return None

    def allowed(sender, patient, dtype):
        if sender == patient:
            return roles.get(patient) == "patient"
        types = latest_policy(patient, sender)
        return types is not None and dtype in types

    for action in actions:
        kind = action[0]
        if kind == "register":
            _, actor, role = action
            if actor in roles:
                outcomes.append(("denied", None))
            else:
                roles[actor] = role
                outcomes.append(("ok", None))
        elif kind == "grant":
            _, sender, patient, staff, types = action
            if sender == patient and roles.get(patient) == "patient" \
                    and roles.get(staff) == "staff":
                policy_log.append((patient, staff, frozenset(types)))
                outcomes.append(("ok", None))
            else:
                outcomes.append(("denied", None))
        elif kind == "write":
            _, sender, patient, dtype, content = action
            if sender == patient and roles.get(patient) == "patient":
                digest = hashlib.sha256(content).digest()
                bucket = writes.setdefault((patient, dtype), [])
                if digest not in bucket:
                    bucket.append(digest)
                contents[digest] = content
                outcomes.append(("ok", digest))
            else:
                outcomes.append(("denied", None))
        elif kind == "read":
            _, sender, patient, dtype, digest = action
            if not allowed(sender, patient, dtype):
                outcomes.append(("denied", None))
            elif digest in writes.get((patient, dtype), ()):
                outcomes.append(("ok", contents[digest]))
            else:
                outcomes.append(("not_found", None))
        else:
            raise ValueError(f"unknown action {kind!r}")
    return outcomes


def final_policy_matrix(actions, patients, staff, dtypes):
    """(requester, patient, dtype) -> bool, after the whole log."""
    roles: dict[str, str] = {}
    policy_log: list[tuple[str, str, frozenset]] = []
    for action in actions:
        if action[0] == "register" and action[1] not in roles:
            roles[action[1]] = action[2]
        elif action[0] == "grant":
            _, sender, patient, grantee, types = action
            if sender == patient and roles.get(patient) == "patient" \
                    and roles.get(grantee) == "staff":
                policy_log.append((patient, grantee, frozenset(types)))
    matrix = {}
    everyone = list(patients) + list(staff)
    for requester in everyone:
        for patient in patients:
            for dtype in dtypes:
                if requester == patient:
                    result = roles.get(patient) == "patient"
                else:
                    types = None
                    for p, s, t in reversed(policy_log):
                        if p == patient and s == requester:
                            types = t
                            break
                    result = types is not None and dtype in types
                matrix[(requester, patient, dtype)] = result
    return matrix


def revoked_window_reads(actions):
    """Indices of reads that happen while the reader's access stands revoked
    (an empty-set grant with no later re-grant): these must all be denied."""
    roles: dict[str, str] = {}
    policy_log: list[tuple[str, str, frozenset]] = []
    indices = []
    for index, action in enumerate(actions):
        if action[0] == "register" and action[1] not in roles:
            roles[action[1]] = action[2]
        elif action[0] == "grant":
            _, sender, patient, staff, types = action
            if sender == patient and roles.get(patient) == "patient" \
                    and roles.get(staff) == "staff":
                policy_log.append((patient, staff, frozenset(types)))
        elif action[0] == "read":
            _, sender, patient, dtype, _digest = action
            if sender == patient:
                continue
            latest = None
            for p, s, t in reversed(policy_log):
                if p == patient and s == sender:
                    latest = t
                    break
            if latest is not None and len(latest) == 0:
                indices.append(index)
    return indices


# ---------------------------------------------------------------------------
# random action-log generator
# ---------------------------------------------------------------------------

DTYPE_POOL = [
    "body temperature", "blood pressure", "heart rate",
    "blood glucose", "oxygen saturation", "step count",
]


def generate_actions(seed: int, max_actions: int = 200):
    """Adversarial mix: self-grants by staff, unregistered actors, reads of
    missing digests, writes by staff, plus plenty of legitimate traffic."""
    rng = random.Random(seed)
    n_patients = rng.randint(1, 5)
    n_staff = rng.randint(1, 5)
    patients = [f"p{i}" for i in range(n_patients)]
    staff = [f"m{i}" for i in range(n_staff)]
    dtypes = DTYPE_POOL[: rng.randint(1, 6)]
    count = rng.randint(10, max_actions)
    actions = []
    written: list[tuple[str, str, bytes]] = []  # (patient, dtype, digest)

    def random_digest():
        return bytes(rng.randbytes(32))

    for _ in range(count):
        roll = rng.random()
        if roll < 0.12:
            actor = rng.choice(patients + staff)
            role = "patient" if actor in patients else "staff"
            if rng.random() < 0.1:
                role = "staff" if role == "patient" else "patient"  # wrong role replay
            actions.append(("register", actor, role))
        elif roll < 0.38:
            patient = rng.choice(patients)
            grantee = rng.choice(staff)
            sender = patient if rng.random() > 0.12 else rng.choice(staff + patients)
            k = rng.randint(0, len(dtypes))
            types = tuple(sorted(rng.sample(dtypes, k)))
            actions.append(("grant", sender, patient, grantee, types))
        elif roll < 0.62:
            patient = rng.choice(patients)
            sender = patient if rng.random() > 0.1 else rng.choice(staff)
            dtype = rng.choice(dtypes)
            content = bytes(rng.randbytes(rng.randint(AEAD_OVERHEAD, 96)))
            actions.append(("write", sender, patient, dtype, content))
            digest = hashlib.sha256(content).digest()
            written.append((patient, dtype, digest))
        else:
            patient = rng.choice(patients)
            sender = rng.choice(staff + [patient])
            dtype = rng.choice(dtypes)
            if written and rng.random() > 0.25:
                w_patient, w_dtype, digest = rng.choice(written)
                if rng.random() > 0.3:
                    patient, dtype = w_patient, w_dtype  # targeted hit
            else:
                digest = random_digest()
            actions.append(("read", sender, patient, dtype, digest))
    return actions, patients, staff, dtypes
