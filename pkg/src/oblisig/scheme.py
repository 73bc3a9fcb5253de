"""1-out-of-n oblivious signatures: the Merkle-root variant and the n-signature baseline.

The user commits to the chosen message ``M[j]`` and sends the commitment
together with the whole list. In the ``ours`` variant the signer signs
``(root(M), c)`` once; in the ``zlh`` variant it signs ``(m_i, c)`` for
every list entry. The final signature opens the commitment, plus a Merkle
path for the ``ours`` variant.
"""

import struct
from dataclasses import dataclass, field

from . import merkle
from .errors import OblisigError
from .primitives import (
    ED25519,
    PRODUCTION,
    WEAK_TEST,
    CommitKey,
    HashParams,
    com_keygen,
    commit,
    commit_random,
    ds_keygen,
    ds_setup,
    ds_sign,
    ds_verify,
    sig_len,
)

OURS = "ours"
ZLH = "zlh"
VARIANT_BYTES = {OURS: 0x01, ZLH: 0x02}

TAG_ROOT_COMMIT = b"\x52"
TAG_MSG_COMMIT = b"\x5a"


@dataclass(frozen=True)
class OsPublicParams:
    variant: str
    hash_params: HashParams
    ck: CommitKey
    scheme_id: int = ED25519

    @property
    def digest_len(self):
        return self.hash_params.nbytes

    @property
    def sig_len(self):
        return sig_len(self.scheme_id)

    def to_bytes(self):
        return bytes([VARIANT_BYTES[self.variant]]) + self.hash_params.to_bytes() + bytes([self.scheme_id])

    @classmethod
    def from_bytes(cls, data):
        if len(data) != 5:
            raise OblisigError("malformed", "public params must be 5 bytes")
        variant = variant_from_byte(data[0])
        hp = HashParams.from_bytes(data[1:4])
        ds_setup(data[4])
        return cls(variant, hp, com_keygen(hp), data[4])


def variant_from_byte(b):
    for name, value in VARIANT_BYTES.items():
        if value == b:
            return name
    raise OblisigError("malformed", f"unknown variant byte {b}")


def os_setup(variant=OURS, bits=256, scheme_id=ED25519):
    if variant not in VARIANT_BYTES:
        raise OblisigError("bad-variant", variant)
    hp = HashParams(PRODUCTION if bits == 256 else WEAK_TEST, bits)
    ds_setup(scheme_id)
    return OsPublicParams(variant, hp, com_keygen(hp), scheme_id)


def os_keygen(pp, rng=None):
    pair = ds_keygen(ds_setup(pp.scheme_id), rng)
    return pair.vk, pair.sk


# -- message lists ----------------------------------------------------------


def check_message_list(messages):
    """Validate a candidate list; raises on duplicates, reserved prefixes or n < 2."""
    messages = list(messages)
    if len(messages) < 2:
        raise OblisigError("bad-list", "need at least two messages")
    if any(not isinstance(m, (bytes, bytearray)) for m in messages):
        raise OblisigError("malformed", "messages must be bytes")
    if len(set(messages)) != len(messages):
        raise OblisigError("duplicate-message")
    if any(m[:1] == merkle.PAD_PREFIX for m in messages):
        raise OblisigError("reserved-prefix", "messages may not start with 0xFF")
    return [bytes(m) for m in messages]


def encode_message_list(messages):
    out = [struct.pack(">I", len(messages))]
    for m in messages:
        out.append(struct.pack(">I", len(m)))
        out.append(m)
    return b"".join(out)


def decode_message_list(data, max_n=None, max_len=None):
    """Parse a message list; returns ``(messages, bytes_consumed)``.

    ``max_n``/``max_len`` are checked before any allocation proportional to them.
    """
    if len(data) < 4:
        raise OblisigError("malformed", "truncated list header")
    (n,) = struct.unpack(">I", data[:4])
    if max_n is not None and n > max_n:
        raise OblisigError("limits", f"list has {n} > {max_n} messages")
    pos = 4
    messages = []
    for _ in range(n):
        if len(data) < pos + 4:
            raise OblisigError("malformed", "truncated message header")
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        if max_len is not None and length > max_len:
            raise OblisigError("limits", f"message of {length} bytes exceeds {max_len}")
        pos += 4
        if len(data) < pos + length:
            raise OblisigError("malformed", "truncated message body")
        messages.append(data[pos : pos + length])
        pos += length
    return messages, pos


# -- signatures -------------------------------------------------------------


@dataclass(frozen=True)
class UserState:
    messages: tuple
    c: bytes
    r: bytes = field(repr=False)
    j: int = field(repr=False)


@dataclass(frozen=True)
class OursSignature:
    root: bytes
    c: bytes
    sigma: bytes
    path: tuple
    j: int
    r: bytes

    @property
    def triple(self):
        return (self.root, self.c, self.sigma)

    def to_bytes(self):
        return self.root + self.c + self.sigma + merkle.encode_path(self.path) + merkle.encode_index(self.j) + self.r


@dataclass(frozen=True)
class ZlhSignature:
    c: bytes
    r: bytes
    sigma: bytes

    def to_bytes(self):
        return self.c + self.r + self.sigma


def decode_signature(pp, data):
    d, w = pp.digest_len, pp.sig_len
    if pp.variant == ZLH:
        if len(data) != 2 * d + w:
            raise OblisigError("malformed", "bad signature length")
        return ZlhSignature(data[:d], data[d : 2 * d], data[2 * d :])
    if len(data) < 2 * d + w + 1:
        raise OblisigError("malformed", "truncated signature")
    root, c, sigma = data[:d], data[d : 2 * d], data[2 * d : 2 * d + w]
    path, used = merkle.decode_path(data[2 * d + w :], d)
    rest = data[2 * d + w + used :]
    if len(rest) != 4 + d:
        raise OblisigError("malformed", "bad signature tail")
    (j,) = struct.unpack(">I", rest[:4])
    return OursSignature(root, c, sigma, path, j, rest[4:])


def root_commit_message(root, c):
    return TAG_ROOT_COMMIT + root + c


def message_commit_message(m, c):
    return TAG_MSG_COMMIT + struct.pack(">I", len(m)) + m + c


def encode_rho(rho):
    return rho if isinstance(rho, bytes) else b"".join(rho)


def decode_rho(pp, data, n):
    w = pp.sig_len
    if pp.variant == OURS:
        if len(data) != w:
            raise OblisigError("malformed", "second message must be one signature")
        return data
    if len(data) != n * w:
        raise OblisigError("malformed", f"second message must be {n} signatures")
    return tuple(data[t * w : (t + 1) * w] for t in range(n))


# -- the protocol -----------------------------------------------------------


def _tree(pp, messages):
    return merkle.merkle_tree(merkle.pad_list(messages), pp.hash_params)


def os_u1(pp, vk, messages, j, rng=None):
    """User's first move: returns ``(mu, state)`` where ``mu`` is the commitment to ``messages[j]``."""
    messages = check_message_list(messages)
    if not isinstance(j, int) or not 0 <= j < len(messages):
        raise OblisigError("bad-index", f"{j} not in [0, {len(messages)})")
    c, r = commit_random(pp.ck, messages[j], rng)
    return c, UserState(tuple(messages), c, r, j)


def os_s2(pp, vk, sk, messages, mu):
    """Signer's move. Stateless: depends only on the key, the list and ``mu``."""
    messages = check_message_list(messages)
    if len(mu) != pp.digest_len:
        raise OblisigError("malformed", "first message has the wrong length")
    if pp.variant == ZLH:
        return tuple(ds_sign(sk, message_commit_message(m, mu)) for m in messages)
    root, _ = _tree(pp, messages)
    return ds_sign(sk, root_commit_message(root, mu))


def os_uder(pp, vk, st, rho):
    """User's derivation step; raises ``signer-cheated`` if ``rho`` does not verify."""
    messages, c = list(st.messages), st.c
    if pp.variant == ZLH:
        if isinstance(rho, bytes) or len(rho) != len(messages):
            raise OblisigError("signer-cheated", "wrong number of signatures")
        for m, sigma in zip(messages, rho):
            if not _ds_ok(vk, message_commit_message(m, c), sigma):
                raise OblisigError("signer-cheated")
        return messages[st.j], ZlhSignature(c, st.r, rho[st.j])
    root, tree = _tree(pp, messages)
    path = merkle.merkle_path(tree, st.j)
    if not isinstance(rho, bytes) or not _ds_ok(vk, root_commit_message(root, c), rho):
        raise OblisigError("signer-cheated")
    return messages[st.j], OursSignature(root, c, rho, path, st.j, st.r)


def _ds_ok(vk, m, sigma):
    try:
        return ds_verify(vk, m, sigma)
    except OblisigError:
        return False


def os_verify(pp, vk, m, sig):
    """Return True iff ``sig`` is a valid signature on ``m``. Never raises."""
    try:
        return _verify(pp, vk, m, sig)
    except (OblisigError, TypeError, ValueError, AttributeError):
        return False


def _verify(pp, vk, m, sig):
    d = pp.digest_len
    # filler leaves are signed along with real ones; never accept them as messages
    if m[:1] == merkle.PAD_PREFIX:
        return False
    if len(sig.c) != d or len(sig.r) != d:
        return False
    if pp.variant == ZLH:
        if not isinstance(sig, ZlhSignature):
            return False
        return commit(pp.ck, m, sig.r) == sig.c and _ds_ok(vk, message_commit_message(m, sig.c), sig.sigma)
    if not isinstance(sig, OursSignature) or len(sig.root) != d:
        return False
    if any(len(h) != d for h in sig.path):
        return False
    if merkle.root_reconstruct(sig.path, m, sig.j, pp.hash_params) != sig.root:
        return False
    if commit(pp.ck, m, sig.r) != sig.c:
        return False
    return _ds_ok(vk, root_commit_message(sig.root, sig.c), sig.sigma)


def run_protocol(pp, vk, sk, messages, j, rng=None):
    """One honest two-move run; returns ``(mu, rho, m_j, signature)``."""
    mu, st = os_u1(pp, vk, messages, j, rng)
    rho = os_s2(pp, vk, sk, messages, mu)
    m, sig = os_uder(pp, vk, st, rho)
    return mu, rho, m, sig
