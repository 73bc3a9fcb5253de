import hashlib
import random
import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from oblisig import search
from oblisig.errors import OblisigError
from oblisig.primitives import (
    ED25519,
    HMAC_STUB,
    PRODUCTION,
    WEAK_TEST,
    CommitKey,
    HashParams,
    com_keygen,
    commit,
    commit_random,
    decode_key_file,
    ds_keygen,
    ds_setup,
    ds_sign,
    ds_verify,
    encode_key_file,
    sig_len,
    weak_hash,
)


@pytest.fixture(scope="module")
def ck():
    return com_keygen(HashParams())


def test_commit_key_construction():
    ck = com_keygen(HashParams(PRODUCTION, 256))
    assert ck.domain_tag == b"\x02" and ck.hash_params.bits == 256
    weak = com_keygen(weak_hash(16))
    assert weak.domain_tag == b"\x02" and weak.hash_params == HashParams(WEAK_TEST, 16)
    assert weak.randomness_len == 2


@pytest.mark.parametrize("hp", [HashParams(), weak_hash(16), weak_hash(32)])
def test_commit_key_round_trip(hp):
    ck = com_keygen(hp)
    assert CommitKey.from_bytes(ck.to_bytes()) == ck
    assert HashParams.from_bytes(hp.to_bytes()) == hp


def test_bad_hash_params():
    with pytest.raises(OblisigError):
        HashParams(PRODUCTION, 128)
    with pytest.raises(OblisigError):
        HashParams("md5", 128)


def test_commit_matches_hand_computed_digest(ck):
    m, r = b"hello", bytes(range(32))
    expected = hashlib.sha256(b"\x02" + struct.pack(">Q", 5) + m + r).digest()
    assert commit(ck, m, r) == expected


def test_commit_deterministic(ck):
    r = bytes(32)
    assert commit(ck, b"m", r) == commit(ck, b"m", r)


def test_commit_rejects_bad_randomness(ck):
    with pytest.raises(OblisigError) as exc:
        commit(ck, b"m", b"short")
    assert exc.value.code == "bad-randomness-length"


def test_commit_distinct_messages_distinct_digests(ck):
    rng = random.Random(1)
    for _ in range(1000):
        m, m2 = rng.randbytes(16), rng.randbytes(16)
        if m == m2:
            continue
        r = rng.randbytes(32)
        assert commit(ck, m, r) != commit(ck, m2, r)


def test_weak_commit_collision_found_and_binding_broken():
    ck = com_keygen(weak_hash(16))
    (m, r), (m2, r2) = search.commit_collision(ck, random.Random(7))
    assert (m, r) != (m2, r2) and m != m2
    assert commit(ck, m, r) == commit(ck, m2, r2)


def test_commit_hiding_sanity(ck):
    # byte histogram of commitments to two fixed messages under fresh randomness
    rng = random.Random(2024)
    for m in (b"m0", b"m1"):
        counts = [0] * 256
        for _ in range(10_000):
            c, _ = commit_random(ck, m, rng)
            counts[c[0]] += 1
        assert chisquare(counts).pvalue > 0.01


@pytest.mark.parametrize("scheme_id", [ED25519, HMAC_STUB])
def test_ds_correctness_and_determinism(scheme_id):
    pair = ds_keygen(ds_setup(scheme_id), random.Random(3))
    sigma = ds_sign(pair.sk, b"message")
    assert len(sigma) == sig_len(scheme_id)
    assert sigma == ds_sign(pair.sk, b"message")
    assert ds_verify(pair.vk, b"message", sigma)


def test_ds_keygen_seeded_is_reproducible():
    pp = ds_setup(ED25519)
    assert ds_keygen(pp, random.Random(5)).vk == ds_keygen(pp, random.Random(5)).vk
    assert ds_keygen(pp).vk != ds_keygen(pp).vk


@pytest.mark.parametrize("scheme_id", [ED25519, HMAC_STUB])
def test_ds_every_bit_flip_rejected(scheme_id):
    pair = ds_keygen(ds_setup(scheme_id), random.Random(4))
    sigma = ds_sign(pair.sk, b"flip me")
    for pos in range(8 * len(sigma)):
        flipped = bytearray(sigma)
        flipped[pos // 8] ^= 1 << (pos % 8)
        assert not ds_verify(pair.vk, b"flip me", bytes(flipped))


def test_ds_wrong_messages_rejected():
    pair = ds_keygen(ds_setup(ED25519), random.Random(6))
    sigma = ds_sign(pair.sk, b"original")
    rng = random.Random(6)
    for _ in range(1000):
        m = rng.randbytes(rng.randrange(1, 40))
        if m != b"original":
            assert not ds_verify(pair.vk, m, sigma)


def test_ds_width_mismatch_is_an_error():
    pair = ds_keygen(ds_setup(ED25519), random.Random(8))
    with pytest.raises(OblisigError) as exc:
        ds_verify(pair.vk, b"m", bytes(63))
    assert exc.value.code == "bad-signature-encoding"
    assert ds_verify(pair.vk, b"m", bytes(64)) is False


@pytest.mark.parametrize("scheme_id", [ED25519, HMAC_STUB])
def test_key_file_round_trip(scheme_id):
    pair = ds_keygen(ds_setup(scheme_id), random.Random(9))
    vk, sk = decode_key_file(encode_key_file(pair.vk, pair.sk))
    assert vk == pair.vk and sk == pair.sk
    vk, sk = decode_key_file(encode_key_file(pair.vk))
    assert vk == pair.vk and sk is None


def test_public_key_file_holds_no_secret():
    pair = ds_keygen(ds_setup(ED25519), random.Random(10))
    assert pair.sk.key not in encode_key_file(pair.vk)
    assert "redacted" in repr(pair.sk)


@given(st.binary(max_size=120))
def test_key_file_decoder_never_crashes(data):
    try:
        decode_key_file(data)
    except OblisigError:
        pass


@given(st.binary(max_size=64), st.binary(min_size=2, max_size=2))
def test_weak_commit_fits_width(m, r):
    assert len(commit(com_keygen(weak_hash(16)), m, r)) == 2
