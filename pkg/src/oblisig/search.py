"""Birthday searches that manufacture real collisions under the weak test hash."""

from .primitives import TAG_LEAF, TAG_NODE, commit


def cross_collision(sample_a, sample_b, rng, ok=lambda a, b: True, limit=1 << 20):
    """Draw alternately from two samplers until their digests meet.

    Each sampler maps ``rng`` to ``(digest, item)``. Returns ``(item_a, item_b)``
    for the first meeting accepted by ``ok``; None if ``limit`` draws pass.
    """
    seen_a, seen_b = {}, {}
    for _ in range(limit):
        da, a = sample_a(rng)
        if da in seen_b and ok(a, seen_b[da]):
            return a, seen_b[da]
        seen_a.setdefault(da, a)
        db, b = sample_b(rng)
        if db in seen_a and ok(seen_a[db], b):
            return seen_a[db], b
        seen_b.setdefault(db, b)
    return None


def _message(rng, prefix):
    return prefix + rng.randbytes(6).hex().encode()


def commit_collision(ck, rng):
    """Two openings ``(m, r) != (m2, r2)`` with distinct messages and equal commitments."""

    def sample(rng):
        m = _message(rng, b"c-")
        r = rng.randbytes(ck.randomness_len)
        return commit(ck, m, r), (m, r)

    return cross_collision(sample, sample, rng, ok=lambda a, b: a[0] != b[0])


def leaf_collision(hp, rng):
    """Two distinct messages whose leaf digests are equal."""

    def sample(rng):
        m = _message(rng, b"l-")
        return hp.digest(TAG_LEAF + m), m

    return cross_collision(sample, sample, rng, ok=lambda a, b: a != b)


def node_collision(hp, rng):
    """An honest two-leaf subtree ``(a0, a1)`` and a forged ``(b, g)`` hashing to the same node.

    ``b`` is a message and ``g`` an arbitrary digest-sized sibling.
    """

    def honest(rng):
        a0, a1 = _message(rng, b"a-"), _message(rng, b"a-")
        x = TAG_NODE + hp.digest(TAG_LEAF + a0) + hp.digest(TAG_LEAF + a1)
        return hp.digest(x), (a0, a1)

    def forged(rng):
        b, g = _message(rng, b"b-"), rng.randbytes(hp.nbytes)
        return hp.digest(TAG_NODE + hp.digest(TAG_LEAF + b) + g), (b, g)

    found = cross_collision(honest, forged, rng, ok=lambda a, b: a[0] != a[1] and b[0] not in a)
    return None if found is None else (*found[0], *found[1])


def sibling_collision(hp, left, rng):
    """A message ``b`` and a fake sibling ``g != H(0x00||b)`` giving the same parent over ``left``."""

    def honest(rng):
        b = _message(rng, b"s-")
        return hp.digest(TAG_NODE + left + hp.digest(TAG_LEAF + b)), b

    def fake(rng):
        g = rng.randbytes(hp.nbytes)
        return hp.digest(TAG_NODE + left + g), g

    return cross_collision(honest, fake, rng, ok=lambda b, g: g != hp.digest(TAG_LEAF + b))
