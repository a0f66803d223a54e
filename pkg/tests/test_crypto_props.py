"""Property tests for the crypto suite: round trips and perturbations."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medledger.crypto import (
    Ciphertext,
    SymmetricKey,
    decrypt,
    ecdsa,
    encrypt,
    gen_sig_keypair,
    sign,
    verify,
)
from medledger.errors import AuthenticationError


@given(plaintext=st.binary(max_size=400), ad=st.binary(max_size=40))
@settings(max_examples=60, deadline=None)
def test_aead_round_trip(plaintext, ad):
    key = SymmetricKey.generate(random.Random(1))
    ct = encrypt(key, plaintext, ad)
    assert decrypt(key, ct, ad) == plaintext


def test_aead_wrong_key_fails(rng):
    key = SymmetricKey.generate(rng)
    other = SymmetricKey.generate(rng)
    ct = encrypt(key, b"reading", b"label")
    with pytest.raises(AuthenticationError):
        decrypt(other, ct, b"label")


def test_aead_wrong_ad_fails(rng):
    key = SymmetricKey.generate(rng)
    ct = encrypt(key, b"reading", b"body temperature")
    with pytest.raises(AuthenticationError):
        decrypt(key, ct, b"heart rate")


def test_aead_bit_flips_fail(rng):
    key = SymmetricKey.generate(rng)
    ct = encrypt(key, b"some sensitive reading bytes", b"t")
    wire = bytearray(ct.to_wire())
    for _ in range(40):
        index = rng.randrange(len(wire))
        bit = 1 << rng.randrange(8)
        wire[index] ^= bit
        with pytest.raises(AuthenticationError):
            decrypt(key, Ciphertext.from_wire(bytes(wire)), b"t")
        wire[index] ^= bit


def test_nonces_unique_per_key(rng):
    key = SymmetricKey.generate(rng)
    nonces = {encrypt(key, b"x", b"").nonce for _ in range(200)}
    assert len(nonces) == 200


def test_sym_key_properties(rng):
    key = SymmetricKey.generate(rng)
    assert len(key.secret) == 32
    assert key == SymmetricKey(key.secret)
    assert "redacted" in repr(key)
    fixed_a = SymmetricKey.generate(random.Random(7))
    fixed_b = SymmetricKey.generate(random.Random(7))
    assert fixed_a == fixed_b
    assert SymmetricKey.generate(random.Random(8)) != fixed_a


def test_keypair_generation(rng):
    kp1 = gen_sig_keypair(random.Random(5))
    kp2 = gen_sig_keypair(random.Random(5))
    assert kp1 == kp2
    assert gen_sig_keypair(random.Random(6)).public != kp1.public
    assert ecdsa.decompress_point(kp1.public) is not None
    assert "redacted" in repr(kp1)


def test_sign_verify_round_trip(rng):
    for _ in range(25):
        kp = gen_sig_keypair(rng)
        message = rng.randbytes(rng.randrange(0, 200))
        sig = sign(kp.private, message)
        assert sign(kp.private, message) == sig  # deterministic nonces
        assert verify(kp.public, message, sig)


def test_verify_rejects_perturbations(rng):
    kp = gen_sig_keypair(rng)
    other = gen_sig_keypair(rng)
    message = b"pulse series 0001"
    sig = sign(kp.private, message)
    assert not verify(kp.public, message + b"\x00", sig)
    assert not verify(kp.public, b"pulse series 0002", sig)
    assert not verify(other.public, message, sig)
    assert not verify(kp.public, message, ecdsa.Signature(sig.r ^ 1, sig.s))
    assert not verify(kp.public, message, ecdsa.Signature(sig.r, sig.s ^ 1))


def test_verify_rejects_malformed_encodings(rng):
    kp = gen_sig_keypair(rng)
    sig = sign(kp.private, b"m")
    # malformed public points: wrong length, wrong prefix, x off-curve
    assert not verify(b"\x04" + kp.public[1:], b"m", sig)
    assert not verify(kp.public[:-1], b"m", sig)
    assert not verify(b"\x02" + b"\xff" * 32, b"m", sig)
    # out-of-range scalars never verify
    from medledger.crypto.params import HALF_N, N

    assert not verify(kp.public, b"m", ecdsa.Signature(0, sig.s))
    assert not verify(kp.public, b"m", ecdsa.Signature(N, sig.s))
    assert not verify(kp.public, b"m", ecdsa.Signature(sig.r, 0))
    # high-s (non-canonical) encodings are rejected outright
    assert not verify(kp.public, b"m", ecdsa.Signature(sig.r, N - sig.s))
    assert sig.s <= HALF_N


def test_signature_encoding_round_trip(rng):
    kp = gen_sig_keypair(rng)
    sig = sign(kp.private, b"record")
    assert ecdsa.Signature.from_bytes(sig.to_bytes()) == sig
    assert len(sig.to_bytes()) == 64
    with pytest.raises(ValueError):
        ecdsa.Signature.from_bytes(b"\x00" * 63)


def test_ciphertext_wire_round_trip(rng):
    key = SymmetricKey.generate(rng)
    ct = encrypt(key, b"bytes", b"")
    assert Ciphertext.from_wire(ct.to_wire()) == ct


def test_ecdh_agreement(rng):
    a = gen_sig_keypair(rng)
    b = gen_sig_keypair(rng)
    assert ecdsa.ecdh_shared_secret(a.private, b.public) == \
        ecdsa.ecdh_shared_secret(b.private, a.public)


@given(data=st.binary(max_size=256))
@settings(max_examples=40, deadline=None)
def test_signing_any_message(data):
    kp = gen_sig_keypair(random.Random(3))
    sig = sign(kp.private, data)
    assert verify(kp.public, data, sig)
    assert not verify(kp.public, data + b"!", sig)
