"""Complete binary Merkle trees, membership paths and collision extraction.

Leaves hash as ``H(0x00 || m)`` and internal nodes as ``H(0x01 || left || right)``.
A path is a tuple of sibling digests ordered root-adjacent first, so
``path[l - 1]`` is the sibling met at depth ``l``.
"""

import struct
from dataclasses import dataclass

from .errors import OblisigError
from .primitives import TAG_LEAF, TAG_NODE, HashParams

PAD_PREFIX = b"\xff"

_DEFAULT_HASH = HashParams()


def depth_for(n):
    """Smallest k with 2**k >= n."""
    return max(0, (n - 1).bit_length())


def i2b(i, k):
    if not 0 <= i < 2**k:
        raise OblisigError("index-out-of-range", f"{i} not in [0, 2^{k})")
    return tuple((i >> (k - 1 - pos)) & 1 for pos in range(k))


def pad_list(messages, target=None):
    """Extend ``messages`` to ``target`` leaves (default: next power of two).

    Filler leaf number ``i`` (1-based) is ``0xFF || i`` with ``i`` as a
    4-byte big-endian counter, so fillers never collide with real messages
    or with each other.
    """
    messages = list(messages)
    n = len(messages)
    if target is None:
        target = 2 ** depth_for(n)
    k = depth_for(target)
    if target != 2**k or not target // 2 < n <= target:
        raise OblisigError("bad-pad-target", f"cannot pad {n} messages to {target}")
    for m in messages:
        if m[:1] == PAD_PREFIX:
            raise OblisigError("reserved-prefix", "real messages may not start with 0xFF")
    return messages + [PAD_PREFIX + struct.pack(">I", i) for i in range(1, target - n + 1)]


def leaf_hash(m, hash_params=_DEFAULT_HASH):
    return hash_params.digest(TAG_LEAF + m)


def node_hash(left, right, hash_params=_DEFAULT_HASH):
    return hash_params.digest(TAG_NODE + left + right)


@dataclass(frozen=True)
class MerkleTree:
    """Full description of a tree: ``levels[0] == [root]``, ``levels[depth]`` are leaf digests."""

    hash_params: HashParams
    messages: tuple
    levels: tuple

    @property
    def depth(self):
        return len(self.levels) - 1

    @property
    def root(self):
        return self.levels[0][0]

    def node(self, bits):
        """Digest of the node addressed by the bit-string ``bits``."""
        index = 0
        for b in bits:
            index = 2 * index + b
        return self.levels[len(bits)][index]

    def node_count(self):
        return sum(len(level) for level in self.levels)


def merkle_tree(messages, hash_params=_DEFAULT_HASH):
    """Build the tree over ``2**k`` messages; returns ``(root, tree)``."""
    messages = tuple(messages)
    n = len(messages)
    if n < 2 or n & (n - 1):
        raise OblisigError("unpadded-list", f"need a power-of-two list with k >= 1, got {n}")
    level = [leaf_hash(m, hash_params) for m in messages]
    levels = [level]
    while len(level) > 1:
        level = [node_hash(level[i], level[i + 1], hash_params) for i in range(0, len(level), 2)]
        levels.append(level)
    tree = MerkleTree(hash_params, messages, tuple(tuple(lv) for lv in reversed(levels)))
    return tree.root, tree


def merkle_path(tree, i):
    bits = i2b(i, tree.depth)
    return tuple(tree.node(bits[:level] + (1 - bits[level],)) for level in range(tree.depth))


def _fold_chain(path, m, i, hash_params):
    """Hash inputs and outputs met while folding ``m`` up ``path``, leaf first.

    Returns None when ``i`` does not fit in ``len(path)`` bits.
    """
    k = len(path)
    if not 0 <= i < 2**k:
        return None
    bits = i2b(i, k)
    x = TAG_LEAF + m
    h = hash_params.digest(x)
    chain = [(x, h)]
    for level in range(k - 1, -1, -1):
        sibling = path[level]
        x = TAG_NODE + (h + sibling if bits[level] == 0 else sibling + h)
        h = hash_params.digest(x)
        chain.append((x, h))
    return chain


def root_reconstruct(path, m, i, hash_params=_DEFAULT_HASH):
    """Candidate root for leaf ``m`` at index ``i``; None if ``i`` is out of range."""
    chain = _fold_chain(tuple(path), m, i, hash_params)
    return None if chain is None else chain[-1][1]


@dataclass(frozen=True)
class HashCollision:
    hash_params: HashParams
    x: bytes
    x_prime: bytes

    def __post_init__(self):
        if self.x == self.x_prime or self.hash_params.digest(self.x) != self.hash_params.digest(self.x_prime):
            raise OblisigError("not-a-collision", "inputs are equal or hash differently")


def _lowest_collision(chain_a, chain_b, hash_params):
    # chains end at the same root; align them at the top and scan upwards
    # from the deepest aligned level
    pairs = list(zip(reversed(chain_a), reversed(chain_b)))
    for (xa, ha), (xb, hb) in reversed(pairs):
        if ha == hb and xa != xb:
            return HashCollision(hash_params, xa, xb)
    return None


def ext1(tree, m_forged, path, i):
    """Turn a membership proof for a message that is not leaf ``i`` into a hash collision."""
    if not 0 <= i < 2**tree.depth or m_forged == tree.messages[i]:
        raise OblisigError("not-a-forgery", "claimed message is the honest leaf or index is out of range")
    return extract_against_tree(tree, m_forged, path, i)


def extract_against_tree(tree, m, path, i):
    """Compare any proof reaching ``tree.root`` with the honest branch it claims.

    Unlike :func:`ext1` the forged path may be shorter or longer than the
    tree depth; it is compared against the honest branch through the node its
    index addresses, aligned at the root.
    """
    hp = tree.hash_params
    forged = _fold_chain(tuple(path), m, i, hp)
    if forged is None or forged[-1][1] != tree.root:
        raise OblisigError("not-a-forgery", "path does not reconstruct the tree root")
    k, length = tree.depth, len(path)
    honest_i = i >> (length - k) if length >= k else i << (k - length)
    honest = _fold_chain(merkle_path(tree, honest_i), tree.messages[honest_i], honest_i, hp)
    found = _lowest_collision(forged, honest, hp)
    if found is None:
        raise OblisigError("not-a-forgery", "proof matches the honest branch")
    return found


def ext2(m, j, path, path_prime, hash_params=_DEFAULT_HASH):
    """Turn two distinct paths proving the same ``(m, j)`` under one root into a hash collision."""
    path, path_prime = tuple(path), tuple(path_prime)
    if path == path_prime:
        raise OblisigError("not-a-collision-pair", "paths are identical")
    a = _fold_chain(path, m, j, hash_params)
    b = _fold_chain(path_prime, m, j, hash_params)
    if a is None or b is None or a[-1][1] != b[-1][1]:
        raise OblisigError("not-a-collision-pair", "paths reconstruct different roots")
    found = _lowest_collision(a, b, hash_params)
    if found is None:
        raise OblisigError("not-a-collision-pair", "no differing preimages found")
    return found


def encode_path(path):
    return bytes([len(path)]) + b"".join(path)


def decode_path(data, digest_len):
    """Parse ``k || k digests``; returns ``(path, bytes_consumed)``."""
    if not data:
        raise OblisigError("malformed", "empty path encoding")
    k = data[0]
    end = 1 + k * digest_len
    if len(data) < end:
        raise OblisigError("malformed", "truncated path")
    return tuple(data[1 + t * digest_len : 1 + (t + 1) * digest_len] for t in range(k)), end


def encode_index(i):
    return struct.pack(">I", i)
