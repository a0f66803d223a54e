"""Content-addressed store: round trips, tamper alarms, replication."""

import pytest

from medledger.crypto import Digest, hash_bytes
from medledger.errors import TamperAlarm
from medledger.store import ContentStore


def test_put_get_round_trip():
    store = ContentStore()
    key = store.put(b"ciphertext bytes")
    assert key == hash_bytes(b"ciphertext bytes")
    assert store.get(key) == b"ciphertext bytes"


def test_put_is_idempotent():
    store = ContentStore()
    key1 = store.put(b"same content")
    count = store.entry_count()
    key2 = store.put(b"same content")
    assert key1 == key2
    assert store.entry_count() == count


def test_distinct_content_distinct_keys(rng):
    store = ContentStore()
    keys = {store.put(rng.randbytes(40)).value for _ in range(200)}
    assert len(keys) == 200


def test_missing_key_returns_none():
    store = ContentStore()
    assert store.get(hash_bytes(b"never stored")) is None


def test_tamper_raises_alarm_not_bytes():
    store = ContentStore()
    key = store.put(b"some record ciphertext")
    store._entries[key.value] = b"some record cipherText"  # flip one bit
    with pytest.raises(TamperAlarm):
        store.get(key)
    assert store.tamper_alarms == 1


def test_replicated_layout_and_fallback(rng):
    store = ContentStore([f"s{i}" for i in range(5)], replication=3)
    key = store.put(b"replicated ciphertext")
    holders = store.holders(key)
    assert len(holders) == 3
    assert all(key.value in store.views[h] for h in holders)
    # tamper one holder: read falls back and reports the bad holder
    assert store.tamper(holders[0], key)
    value = store.get(key)
    assert value == b"replicated ciphertext"
    assert store.fallback_reads >= 1
    assert (holders[0], key.hex()) in store.bad_holders
    # tamper every holder: alarm surfaces to the caller
    for holder in holders[1:]:
        store.tamper(holder, key)
    with pytest.raises(TamperAlarm):
        store.get(key)


def test_single_holder_lost_surfaces_missing():
    store = ContentStore(["s0", "s1"], replication=1)
    key = store.put(b"lonely entry")
    holder = store.holders(key)[0]
    assert store.drop_entry(holder, key)
    assert store.get(key) is None


def test_replicate_to_k_nodes():
    store = ContentStore([f"s{i}" for i in range(5)], replication=1)
    key = store.put(b"grow me")
    holders = store.replicate(key, 3)
    assert len(holders) == 3
    assert all(key.value in store.views[h] for h in holders)
    with pytest.raises(ValueError):
        store.replicate(key, 6)


def test_placement_is_deterministic():
    store_a = ContentStore(["s0", "s1", "s2", "s3"], replication=2)
    store_b = ContentStore(["s0", "s1", "s2", "s3"], replication=2)
    key = hash_bytes(b"placement probe")
    assert store_a.placement(key) == store_b.placement(key)


def test_disk_layout_round_trip(tmp_path):
    store = ContentStore(["s0", "s1"], replication=2)
    keys = [store.put(f"entry {i}".encode()) for i in range(5)]
    directory = tmp_path / "store"
    store.save_dir(directory)
    for key in keys:
        assert (directory / key.hex()).exists()
        assert (directory / key.hex()).read_bytes() == store.get(key)
    fresh = ContentStore(["s0", "s1"], replication=2)
    assert fresh.load_dir(directory) == 5
    for key in keys:
        assert fresh.get(key) == store.get(key)


def test_content_address_invariant_over_random_entries(rng):
    store = ContentStore(["s0", "s1", "s2"], replication=2)
    for _ in range(100):
        store.put(rng.randbytes(rng.randrange(1, 120)))
    for view in store.views.values():
        for key, blob in view.items():
            assert hash_bytes(blob).value == key
