"""Scripted adversaries for the games in :mod:`oblisig.games`.

``play`` is a generator: it yields actions and gets the oracle reply back.
White-box adversaries receive the signing key (or commitment randomness in
the ambiguity game). They exercise game branches that a real attacker cannot
reach at production parameters and test plumbing only. ``weak_hash_only``
adversaries rely on brute-forced collisions and need the 16- or 32-bit hash.
"""

from . import merkle, search
from .games import Abort, DsSign, Fin, Output, Sign
from .primitives import commit, ds_sign
from .scheme import (
    OursSignature,
    ZlhSignature,
    os_s2,
    os_u1,
    os_uder,
)


class Adversary:
    name = "adversary"
    white_box = False
    weak_hash_only = False

    def play(self, pp, vk, rng, leak):
        raise NotImplementedError


def honest_session(pp, vk, messages, j, rng):
    """Run one signing interaction as an honest user; returns ``(m, sig)`` or None on bottom."""
    mu, st = os_u1(pp, vk, messages, j, rng)
    rho = yield Sign(tuple(messages), mu)
    if rho is None:
        return None
    return os_uder(pp, vk, st, rho)


def forge_with_key(pp, vk, sk, m_star, rng):
    """Produce a valid signature on ``m_star`` by playing both roles with a leaked key."""
    messages = [m_star, m_star + b"/decoy"]
    mu, st = os_u1(pp, vk, messages, 0, rng)
    return os_uder(pp, vk, st, os_s2(pp, vk, sk, messages, mu))[1]


def _list(tag, n):
    return [b"%s-%d" % (tag, i) for i in range(n)]


class HonestUser(Adversary):
    """Completes ``runs`` sessions honestly, then outputs its first signature again."""

    name = "honest-user"

    def __init__(self, runs=2, n=4):
        self.runs, self.n = runs, n

    def play(self, pp, vk, rng, leak):
        obtained = []
        for t in range(self.runs):
            messages = _list(b"honest%d" % t, self.n)
            got = yield from honest_session(pp, vk, messages, t % self.n, rng)
            if got is None:
                return
            yield Fin(*got)
            obtained.append(got)
        yield Output(*obtained[0])


class TrivialReuse(Adversary):
    """Two sessions on the same two-element list; reports the first signature twice."""

    name = "trivial-reuse"

    def play(self, pp, vk, rng, leak):
        messages = [b"m0", b"m1"]
        first = yield from honest_session(pp, vk, messages, 0, rng)
        yield Fin(*first)
        second = yield from honest_session(pp, vk, messages, 1, rng)
        yield Fin(*first)
        yield Output(*second)


class InterleavingAdversary(Adversary):
    """Opens two sessions on disjoint lists and closes the first with the second's signature."""

    name = "interleaving"

    def play(self, pp, vk, rng, leak):
        m1, m2 = _list(b"first", 2), _list(b"second", 2)
        mu1, st1 = os_u1(pp, vk, m1, 0, rng)
        mu2, st2 = os_u1(pp, vk, m2, 0, rng)
        rho1 = yield Sign(tuple(m1), mu1)
        rho2 = yield Sign(tuple(m2), mu2)
        if rho2 is None:
            # sequential oracle refused; finish the first session honestly and give up
            yield Fin(*os_uder(pp, vk, st1, rho1))
            yield Abort()
            return
        yield Fin(*os_uder(pp, vk, st2, rho2))
        yield Fin(*os_uder(pp, vk, st1, rho1))
        yield Abort()


class OffListFinisher(Adversary):
    """White-box: closes its only session with a valid signature on a message outside the list."""

    name = "off-list-finisher"
    white_box = True

    def play(self, pp, vk, rng, leak):
        messages = _list(b"listed", 4)
        mu, _ = os_u1(pp, vk, messages, 1, rng)
        rho = yield Sign(tuple(messages), mu)
        if rho is None:
            return
        m_star = b"never-listed"
        yield Fin(m_star, forge_with_key(pp, vk, leak, m_star, rng))
        yield Abort()


class FinalDsForger(Adversary):
    """White-box: completes one session, then outputs a fresh signature made with the key."""

    name = "final-ds-forger"
    white_box = True

    def play(self, pp, vk, rng, leak):
        got = yield from honest_session(pp, vk, _list(b"warmup", 2), 0, rng)
        yield Fin(*got)
        m_star = b"fresh-forgery"
        yield Output(m_star, forge_with_key(pp, vk, leak, m_star, rng))


class GarbageOutput(Adversary):
    name = "garbage-output"

    def play(self, pp, vk, rng, leak):
        d, w = pp.digest_len, pp.sig_len
        if pp.variant == "zlh":
            sig = ZlhSignature(rng.randbytes(d), rng.randbytes(d), rng.randbytes(w))
        else:
            sig = OursSignature(rng.randbytes(d), rng.randbytes(d), rng.randbytes(w), (rng.randbytes(d),), 0, rng.randbytes(d))
        yield Output(b"anything", sig)


class CommitCollider(Adversary):
    """Weak hash: one session yields signatures on two listed messages via a commitment collision."""

    name = "commit-collider"
    weak_hash_only = True

    def play(self, pp, vk, rng, leak):
        (a, ra), (b, rb) = search.commit_collision(pp.ck, rng)
        messages = [a, b]
        c = commit(pp.ck, a, ra)
        rho = yield Sign(tuple(messages), c)
        root, tree = merkle.merkle_tree(merkle.pad_list(messages), pp.hash_params)
        yield Fin(a, OursSignature(root, c, rho, merkle.merkle_path(tree, 0), 0, ra))
        yield Output(b, OursSignature(root, c, rho, merkle.merkle_path(tree, 1), 1, rb))


class LeafCollider(Adversary):
    """Weak hash: lists ``a`` but commits to ``b`` with ``H(0x00||a) == H(0x00||b)``."""

    name = "leaf-collider"
    weak_hash_only = True

    def play(self, pp, vk, rng, leak):
        a, b = search.leaf_collision(pp.hash_params, rng)
        messages = [b"pad-0", a, b"pad-2", b"pad-3"]
        r = rng.randbytes(pp.ck.randomness_len)
        c = commit(pp.ck, b, r)
        rho = yield Sign(tuple(messages), c)
        root, tree = merkle.merkle_tree(messages, pp.hash_params)
        yield Fin(b, OursSignature(root, c, rho, merkle.merkle_path(tree, 1), 1, r))
        yield Abort()


class NodeCollider(Adversary):
    """Weak hash: forges a path whose first internal node collides with an honest one."""

    name = "node-collider"
    weak_hash_only = True

    def play(self, pp, vk, rng, leak):
        hp = pp.hash_params
        a0, a1, b, g = search.node_collision(hp, rng)
        messages = [a0, a1, b"right-0", b"right-1"]
        r = rng.randbytes(pp.ck.randomness_len)
        c = commit(pp.ck, b, r)
        rho = yield Sign(tuple(messages), c)
        root, tree = merkle.merkle_tree(messages, hp)
        path = (tree.node((1,)), g)
        yield Fin(b, OursSignature(root, c, rho, path, 0, r))
        yield Abort()


class PathMalleator(Adversary):
    """Weak hash: re-submits its own signature with a different but valid sibling digest."""

    name = "path-malleator"
    weak_hash_only = True

    def play(self, pp, vk, rng, leak):
        hp = pp.hash_params
        a = b"target"
        b, g = search.sibling_collision(hp, merkle.leaf_hash(a, hp), rng)
        got = yield from honest_session(pp, vk, [a, b], 0, rng)
        m, sig = got
        yield Fin(m, sig)
        yield Output(m, OursSignature(sig.root, sig.c, sig.sigma, (g,), sig.j, sig.r))


def unforgeability_suite():
    return [
        HonestUser(),
        TrivialReuse(),
        InterleavingAdversary(),
        OffListFinisher(),
        FinalDsForger(),
        GarbageOutput(),
        CommitCollider(),
        LeafCollider(),
        NodeCollider(),
        PathMalleator(),
    ]


# -- plain signature game ------------------------------------------------------


class DsReplay(Adversary):
    name = "ds-replay"

    def play(self, scheme_id, vk, rng, leak):
        sigma = yield DsSign(b"queried")
        yield Output(b"queried", sigma)


class DsLeakedKey(Adversary):
    name = "ds-leaked-key"
    white_box = True

    def play(self, scheme_id, vk, rng, leak):
        yield DsSign(b"queried")
        yield Output(b"fresh", ds_sign(leak, b"fresh"))


class DsGarbage(Adversary):
    name = "ds-garbage"

    def play(self, scheme_id, vk, rng, leak):
        from .primitives import sig_len

        yield Output(b"fresh", rng.randbytes(sig_len(scheme_id)))


# -- ambiguity game ------------------------------------------------------------


class GuessingAdversary:
    name = "guessing"
    white_box = False

    def __init__(self):
        self._rng = None

    def choose(self, pp, vk, sk, rng):
        self._rng = rng
        return _list(b"amb", 4), 0, 3

    def guess(self, mu, leak):
        return self._rng.getrandbits(1)


class HashGrindingAdversary:
    """Tries a bounded number of commitment openings for both candidates, else reads a digest bit."""

    name = "hash-grinding"
    white_box = False

    def __init__(self, budget=16):
        self.budget = budget

    def choose(self, pp, vk, sk, rng):
        self._pp, self._rng = pp, rng
        self._candidates = (b"amb-yes", b"amb-no")
        return [self._candidates[0], b"amb-filler", self._candidates[1]], 0, 2

    def guess(self, mu, leak):
        ck = self._pp.ck
        for _ in range(self.budget):
            r = self._rng.randbytes(ck.randomness_len)
            for bit, m in enumerate(self._candidates):
                if commit(ck, m, r) == mu:
                    return bit
        return mu[-1] & 1


class RLeakDistinguisher:
    """White-box: handed the commitment randomness, it simply re-opens the commitment."""

    name = "r-leak"
    white_box = True

    def choose(self, pp, vk, sk, rng):
        self._pp = pp
        self._messages = _list(b"amb", 4)
        return self._messages, 1, 2

    def guess(self, mu, leak):
        return 0 if commit(self._pp.ck, self._messages[1], leak) == mu else 1
