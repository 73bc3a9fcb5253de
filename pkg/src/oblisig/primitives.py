"""Hash family, hash-based commitment and digital-signature building blocks.

Every object here is immutable. Randomness is always passed in explicitly as
an optional ``random.Random``; ``None`` means "use the OS CSPRNG".
"""

import hashlib
import hmac
import secrets
import struct
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .errors import OblisigError

PRODUCTION = "production"
WEAK_TEST = "weak_test"

_FAMILY_IDS = {PRODUCTION: 0x00, WEAK_TEST: 0x01}
_ALLOWED_BITS = {PRODUCTION: (256,), WEAK_TEST: (16, 32)}

TAG_LEAF = b"\x00"
TAG_NODE = b"\x01"
TAG_COMMIT = b"\x02"

ED25519 = 0x01
HMAC_STUB = 0x02


def randbytes(rng, n):
    if rng is None:
        return secrets.token_bytes(n)
    return rng.randbytes(n)


# -- hash family ------------------------------------------------------------


@dataclass(frozen=True)
class HashParams:
    family: str = PRODUCTION
    bits: int = 256

    def __post_init__(self):
        if self.family not in _ALLOWED_BITS:
            raise OblisigError("bad-hash-params", f"unknown family {self.family!r}")
        if self.bits not in _ALLOWED_BITS[self.family]:
            raise OblisigError("bad-hash-params", f"{self.family} does not allow {self.bits} bits")

    @property
    def nbytes(self):
        return self.bits // 8

    def digest(self, data):
        # weak_test truncates SHA-256 so collisions are brute-forceable
        return hashlib.sha256(data).digest()[: self.nbytes]

    def to_bytes(self):
        return struct.pack(">BH", _FAMILY_IDS[self.family], self.bits)

    @classmethod
    def from_bytes(cls, data):
        if len(data) != 3:
            raise OblisigError("malformed", "hash params must be 3 bytes")
        fid, bits = struct.unpack(">BH", data)
        for name, value in _FAMILY_IDS.items():
            if value == fid:
                return cls(name, bits)
        raise OblisigError("bad-hash-params", f"unknown family id {fid}")


def weak_hash(bits=16):
    return HashParams(WEAK_TEST, bits)


# -- commitment -------------------------------------------------------------


@dataclass(frozen=True)
class CommitKey:
    hash_params: HashParams
    domain_tag: bytes = TAG_COMMIT

    @property
    def randomness_len(self):
        return self.hash_params.nbytes

    def to_bytes(self):
        return self.domain_tag + self.hash_params.to_bytes()

    @classmethod
    def from_bytes(cls, data):
        if len(data) != 4 or data[:1] != TAG_COMMIT:
            raise OblisigError("malformed", "bad commitment key encoding")
        return cls(HashParams.from_bytes(data[1:]))


def com_keygen(hash_params):
    return CommitKey(hash_params)


def commit(ck, m, r):
    """Commit to ``m`` under randomness ``r``.

    The commitment is ``H(0x02 || len(m) as u64 || m || r)``; binding reduces
    to collision resistance of the hash and hiding comes from ``r``.
    """
    if len(r) != ck.randomness_len:
        raise OblisigError("bad-randomness-length", f"expected {ck.randomness_len} bytes, got {len(r)}")
    return ck.hash_params.digest(ck.domain_tag + struct.pack(">Q", len(m)) + m + r)


def commit_random(ck, m, rng=None):
    r = randbytes(rng, ck.randomness_len)
    return commit(ck, m, r), r


# -- digital signatures -----------------------------------------------------


@dataclass(frozen=True)
class DsPublicParams:
    scheme_id: int = ED25519


@dataclass(frozen=True)
class VerifyKey:
    scheme_id: int
    key: bytes


@dataclass(frozen=True)
class SigningKey:
    scheme_id: int
    key: bytes = None

    def __repr__(self):
        return f"SigningKey(scheme_id={self.scheme_id}, key=<redacted>)"


@dataclass(frozen=True)
class DsKeyPair:
    vk: VerifyKey
    sk: SigningKey


class _Ed25519:
    scheme_id = ED25519
    name = "ed25519"
    vk_len = 32
    sk_len = 32
    sig_len = 64

    def keygen(self, rng):
        seed = randbytes(rng, 32)
        pub = Ed25519PrivateKey.from_private_bytes(seed).public_key()
        vk = pub.public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)
        return vk, seed

    def sign(self, sk, m):
        return Ed25519PrivateKey.from_private_bytes(sk).sign(m)

    def verify(self, vk, m, sig):
        try:
            Ed25519PublicKey.from_public_bytes(vk).verify(sig, m)
        except (InvalidSignature, ValueError):
            return False
        return True


class _HmacStub:
    """Keyed-hash stand-in for fast harness runs. NOT a public-key scheme:
    the verification key equals the signing key."""

    scheme_id = HMAC_STUB
    name = "hmac-stub"
    vk_len = 32
    sk_len = 32
    sig_len = 32

    def keygen(self, rng):
        key = randbytes(rng, 32)
        return key, key

    def sign(self, sk, m):
        return hmac.new(sk, m, hashlib.sha256).digest()

    def verify(self, vk, m, sig):
        return hmac.compare_digest(self.sign(vk, m), sig)


SCHEMES = {s.scheme_id: s for s in (_Ed25519(), _HmacStub())}
SCHEME_NAMES = {s.name: s.scheme_id for s in SCHEMES.values()}


def ds_scheme(scheme_id):
    try:
        return SCHEMES[scheme_id]
    except KeyError:
        raise OblisigError("unknown-scheme", str(scheme_id)) from None


def ds_setup(scheme_id=ED25519):
    ds_scheme(scheme_id)
    return DsPublicParams(scheme_id)


def ds_keygen(pp, rng=None):
    vk, sk = ds_scheme(pp.scheme_id).keygen(rng)
    return DsKeyPair(VerifyKey(pp.scheme_id, vk), SigningKey(pp.scheme_id, sk))


def ds_sign(sk, m):
    if sk.key is None:
        raise OblisigError("missing-signing-key")
    return ds_scheme(sk.scheme_id).sign(sk.key, m)


def ds_verify(vk, m, sig):
    """Return True iff ``sig`` is a valid signature on ``m``.

    A signature of the wrong width is an encoding error, not a failed check.
    """
    scheme = ds_scheme(vk.scheme_id)
    if len(sig) != scheme.sig_len:
        raise OblisigError("bad-signature-encoding", f"expected {scheme.sig_len} bytes, got {len(sig)}")
    return scheme.verify(vk.key, m, sig)


def sig_len(scheme_id):
    return ds_scheme(scheme_id).sig_len


# -- key files --------------------------------------------------------------

KEY_MAGIC = b"OSK1"


def encode_key_file(vk, sk=None):
    sk_bytes = b"" if sk is None or sk.key is None else sk.key
    return (
        KEY_MAGIC
        + bytes([vk.scheme_id])
        + struct.pack(">H", len(vk.key))
        + vk.key
        + struct.pack(">H", len(sk_bytes))
        + sk_bytes
    )


def decode_key_file(data):
    """Parse a key file; returns ``(vk, sk)`` with ``sk`` None for public-only files."""
    if data[:4] != KEY_MAGIC or len(data) < 9:
        raise OblisigError("malformed", "not a key file")
    scheme_id = data[4]
    scheme = ds_scheme(scheme_id)
    (vk_len,) = struct.unpack(">H", data[5:7])
    vk = data[7 : 7 + vk_len]
    pos = 7 + vk_len
    if len(vk) != scheme.vk_len or len(data) < pos + 2:
        raise OblisigError("malformed", "truncated verification key")
    (sk_len,) = struct.unpack(">H", data[pos : pos + 2])
    sk = data[pos + 2 : pos + 2 + sk_len]
    if len(sk) != sk_len or pos + 2 + sk_len != len(data):
        raise OblisigError("malformed", "bad signing key length")
    if sk_len not in (0, scheme.sk_len):
        raise OblisigError("malformed", "bad signing key length")
    return VerifyKey(scheme_id, vk), (SigningKey(scheme_id, sk) if sk_len else None)
