import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oblisig import merkle
from oblisig.errors import OblisigError
from oblisig.primitives import HMAC_STUB, commit, ds_sign
from oblisig.scheme import (
    OURS,
    ZLH,
    OsPublicParams,
    OursSignature,
    ZlhSignature,
    decode_message_list,
    decode_rho,
    decode_signature,
    encode_message_list,
    encode_rho,
    os_keygen,
    os_s2,
    os_setup,
    os_u1,
    os_uder,
    os_verify,
    root_commit_message,
    run_protocol,
)


def msgs(n):
    return [b"msg-%d" % i for i in range(n)]


@pytest.fixture(scope="module", params=[OURS, ZLH])
def keyed(request):
    pp = os_setup(request.param)
    vk, sk = os_keygen(pp, random.Random(1))
    return pp, vk, sk


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8, 16])
def test_correctness_every_index(keyed, n):
    pp, vk, sk = keyed
    rng = random.Random(n)
    for j in range(n):
        _, _, m, sig = run_protocol(pp, vk, sk, msgs(n), j, rng)
        assert m == msgs(n)[j]
        assert os_verify(pp, vk, m, sig)


def test_setup_differs_only_in_variant():
    a, b = os_setup(OURS).to_bytes(), os_setup(ZLH).to_bytes()
    assert a[1:] == b[1:] and a[0] != b[0]


@pytest.mark.parametrize("variant,bits,scheme", [(OURS, 256, 1), (ZLH, 256, 1), (OURS, 16, 2), (ZLH, 32, 2)])
def test_public_params_round_trip(variant, bits, scheme):
    pp = os_setup(variant, bits, scheme)
    assert OsPublicParams.from_bytes(pp.to_bytes()) == pp


def test_duplicates_rejected(keyed):
    pp, vk, sk = keyed
    with pytest.raises(OblisigError) as exc:
        os_u1(pp, vk, [b"a", b"b", b"a"], 0)
    assert exc.value.code == "duplicate-message"
    with pytest.raises(OblisigError) as exc:
        os_s2(pp, vk, sk, [b"a", b"a"], bytes(pp.digest_len))
    assert exc.value.code == "duplicate-message"


@pytest.mark.parametrize("j", [-1, 3, "0"])
def test_bad_index(keyed, j):
    pp, vk, _ = keyed
    with pytest.raises(OblisigError) as exc:
        os_u1(pp, vk, msgs(3), j)
    assert exc.value.code == "bad-index"


def test_reserved_prefix_rejected(keyed):
    pp, vk, _ = keyed
    with pytest.raises(OblisigError) as exc:
        os_u1(pp, vk, [b"ok", b"\xff\x00\x00\x00\x01"], 0)
    assert exc.value.code == "reserved-prefix"


def test_state_commits_to_chosen_message(keyed):
    pp, vk, _ = keyed
    mu, st_ = os_u1(pp, vk, msgs(5), 3, random.Random(2))
    assert mu == st_.c == commit(pp.ck, msgs(5)[3], st_.r)


def test_first_message_shape_independent_of_index(keyed):
    pp, vk, _ = keyed
    lengths = {len(os_u1(pp, vk, msgs(7), j)[0]) for j in range(7)}
    assert lengths == {pp.digest_len}


def test_second_message_size(keyed):
    pp, vk, sk = keyed
    for n in (2, 8, 33):
        mu, _ = os_u1(pp, vk, msgs(n), 0)
        rho = encode_rho(os_s2(pp, vk, sk, msgs(n), mu))
        assert len(rho) == (64 if pp.variant == OURS else 64 * n)


def test_wrong_key_means_signer_cheated(keyed):
    pp, vk, _ = keyed
    _, other_sk = os_keygen(pp, random.Random(99))
    mu, st_ = os_u1(pp, vk, msgs(4), 2)
    with pytest.raises(OblisigError) as exc:
        os_uder(pp, vk, st_, os_s2(pp, vk, other_sk, msgs(4), mu))
    assert exc.value.code == "signer-cheated"


def test_zlh_any_corrupted_signature_detected():
    pp = os_setup(ZLH)
    vk, sk = os_keygen(pp, random.Random(3))
    mu, st_ = os_u1(pp, vk, msgs(6), 1)
    rho = os_s2(pp, vk, sk, msgs(6), mu)
    for t in range(6):
        bad = list(rho)
        bad[t] = bytes([bad[t][0] ^ 1]) + bad[t][1:]
        with pytest.raises(OblisigError) as exc:
            os_uder(pp, vk, st_, tuple(bad))
        assert exc.value.code == "signer-cheated"


def test_verify_rejects_other_messages(keyed):
    pp, vk, sk = keyed
    _, _, m, sig = run_protocol(pp, vk, sk, msgs(8), 4, random.Random(4))
    rng = random.Random(4)
    for _ in range(1000):
        other = rng.randbytes(rng.randrange(1, 16))
        if other != m:
            assert not os_verify(pp, vk, other, sig)
    for other in msgs(8):
        if other != m:
            assert not os_verify(pp, vk, other, sig)


def test_verify_rejects_every_other_index():
    pp = os_setup(OURS)
    vk, sk = os_keygen(pp, random.Random(5))
    for n in (2, 4, 8, 16):
        for j in range(n):
            _, _, m, sig = run_protocol(pp, vk, sk, msgs(n), j, random.Random(j))
            for j2 in range(2 ** merkle.depth_for(n)):
                tampered = OursSignature(sig.root, sig.c, sig.sigma, sig.path, j2, sig.r)
                assert os_verify(pp, vk, m, tampered) == (j2 == j)


def test_verify_never_raises_on_junk(keyed):
    pp, vk, _ = keyed
    assert not os_verify(pp, vk, b"m", None)
    assert not os_verify(pp, vk, b"m", ZlhSignature(b"", b"", b""))
    assert not os_verify(pp, vk, None, ZlhSignature(b"", b"", b""))
    assert not os_verify(pp, vk, b"m", OursSignature(b"x", b"y", b"z", ("p",), 0, b"r"))


def test_filler_leaves_never_verify():
    # a signer honestly signs a root that includes filler leaves; none of them is a valid message
    pp = os_setup(OURS)
    vk, sk = os_keygen(pp, random.Random(6))
    messages = msgs(5)
    mu, st_ = os_u1(pp, vk, messages, 0)
    rho = os_s2(pp, vk, sk, messages, mu)
    padded = merkle.pad_list(messages)
    _, tree = merkle.merkle_tree(padded, pp.hash_params)
    for i in range(5, 8):
        filler = padded[i]
        r = bytes(32)
        c = commit(pp.ck, filler, r)
        sigma = ds_sign(sk, root_commit_message(tree.root, c))
        sig = OursSignature(tree.root, c, sigma, merkle.merkle_path(tree, i), i, r)
        assert not os_verify(pp, vk, filler, sig)


def test_signature_round_trip(keyed):
    pp, vk, sk = keyed
    for n in (2, 5, 16):
        _, rho, m, sig = run_protocol(pp, vk, sk, msgs(n), n - 1)
        assert decode_signature(pp, sig.to_bytes()) == sig
        assert encode_rho(decode_rho(pp, encode_rho(rho), n)) == encode_rho(rho)


def test_signature_decoder_rejects_truncation(keyed):
    pp, vk, sk = keyed
    _, _, _, sig = run_protocol(pp, vk, sk, msgs(4), 0)
    data = sig.to_bytes()
    for cut in range(len(data)):
        with pytest.raises(OblisigError):
            decode_signature(pp, data[:cut])


def test_hmac_stub_scheme_works():
    pp = os_setup(OURS, 256, HMAC_STUB)
    vk, sk = os_keygen(pp, random.Random(7))
    _, rho, m, sig = run_protocol(pp, vk, sk, msgs(3), 2)
    assert len(rho) == 32 and os_verify(pp, vk, m, sig)


@given(st.lists(st.binary(max_size=20), max_size=10))
def test_message_list_round_trip(messages):
    data = encode_message_list(messages)
    assert decode_message_list(data + b"extra") == (messages, len(data))


@given(st.binary(max_size=64))
def test_message_list_decoder_total(data):
    try:
        decode_message_list(data, max_n=8, max_len=16)
    except OblisigError as exc:
        assert exc.code in ("malformed", "limits")


def test_message_list_limits():
    data = encode_message_list(msgs(5))
    with pytest.raises(OblisigError) as exc:
        decode_message_list(data, max_n=4)
    assert exc.value.code == "limits"
    with pytest.raises(OblisigError) as exc:
        decode_message_list(encode_message_list([b"x" * 20, b"y"]), max_len=10)
    assert exc.value.code == "limits"


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.binary(min_size=1, max_size=16).filter(lambda m: m[0] != 0xFF), min_size=2, max_size=12, unique=True),
    st.data(),
)
def test_correctness_property(messages, data):
    pp = os_setup(OURS, 256, HMAC_STUB)
    vk, sk = os_keygen(pp, random.Random(8))
    j = data.draw(st.integers(0, len(messages) - 1))
    _, _, m, sig = run_protocol(pp, vk, sk, messages, j)
    assert m == messages[j] and os_verify(pp, vk, m, sig)
