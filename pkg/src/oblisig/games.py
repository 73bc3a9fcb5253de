"""Executable security games and the reductions that classify base-game wins.

Adversaries are generator objects (see :mod:`oblisig.adversaries`): they
``yield`` an action and receive the oracle's reply from the ``yield``
expression. Oracles reply with ``None`` for bottom. An oracle that ends the
whole experiment raises :class:`GameOver`.
"""

import random
from dataclasses import asdict, dataclass, field

from scipy.stats import binomtest

from . import merkle
from .errors import OblisigError
from .primitives import commit, ds_keygen, ds_setup, ds_sign, ds_verify
from .scheme import (
    OURS,
    OursSignature,
    check_message_list,
    encode_rho,
    os_keygen,
    os_s2,
    os_u1,
    os_verify,
    root_commit_message,
)

ACCEPT = "accept"
MAX_STEPS = 10_000


# -- actions ----------------------------------------------------------------


@dataclass(frozen=True)
class Sign:
    messages: tuple
    mu: bytes


@dataclass(frozen=True)
class Fin:
    m: bytes
    sig: object


@dataclass(frozen=True)
class Output:
    m: bytes
    sig: object


@dataclass(frozen=True)
class DsSign:
    m: bytes


@dataclass(frozen=True)
class Abort:
    pass


class GameOver(Exception):
    def __init__(self, bit, reason):
        super().__init__(reason)
        self.bit = bit
        self.reason = reason


class InvariantViolation(AssertionError):
    pass


class ReductionGap(OblisigError):
    def __init__(self, detail):
        super().__init__("reduction-gap", detail)


# -- results ----------------------------------------------------------------


@dataclass
class GameFlags:
    final: bool = False
    ds_reuse: bool = False
    ds_forge: bool = False
    com_coll: bool = False

    def as_tuple(self):
        return (self.final, self.ds_reuse, self.ds_forge, self.com_coll)


# (final, ds_reuse, ds_forge, com_coll) at every "return 1" of the base game
WINNING_FLAG_COMBINATIONS = {
    (True, False, True, False),
    (True, True, False, True),
    (True, True, False, False),
    (False, False, False, False),
    (False, False, True, False),
    (False, True, False, True),
    (False, True, False, False),
}


@dataclass(frozen=True)
class DsForgery:
    message: bytes
    sigma: bytes


@dataclass(frozen=True)
class ComCollision:
    opening: tuple
    opening_prime: tuple


@dataclass(frozen=True)
class ReductionOutcome:
    kind: str  # "ds-forgery" | "com-collision" | "hash-collision" | "none"
    value: object = None


NO_OUTCOME = ReductionOutcome("none")


@dataclass
class GameResult:
    game: str
    adversary: str
    bit: int
    seed: int
    reason: str = ""
    flags: GameFlags = None
    outcome: ReductionOutcome = NO_OUTCOME
    transcript: list = field(default_factory=list, repr=False)
    vk: object = field(default=None, repr=False)
    issued: frozenset = field(default=frozenset(), repr=False)  # (message, sigma) pairs from the DS oracle

    def record(self):
        return {
            "adversary": self.adversary,
            "game": self.game,
            "bit": self.bit,
            "reason": self.reason,
            "flags": asdict(self.flags) if self.flags else None,
            "outcome": self.outcome.kind,
            "seed": self.seed,
        }


def _summary(value):
    """Compact deterministic transcript entry for an oracle reply or action payload."""
    if value is None:
        return "bottom"
    if isinstance(value, (bytes, tuple)) and not isinstance(value, str):
        try:
            return encode_rho(value).hex()
        except TypeError:
            return repr(value)
    if hasattr(value, "to_bytes"):
        return value.to_bytes().hex()
    return str(value)


def _drive(adversary, pp, vk, rng, sk, dispatch, transcript):
    """Run the adversary against ``dispatch`` until it outputs, aborts or the game ends.

    Returns the final ``Output`` action, or None on abort/exhaustion.
    """
    leak = sk if getattr(adversary, "white_box", False) else None
    gen = adversary.play(pp, vk, rng, leak)
    try:
        action = next(gen)
        for _ in range(MAX_STEPS):
            if isinstance(action, Output):
                transcript.append(("output", action.m.hex(), _summary(action.sig)))
                return action
            if isinstance(action, Abort):
                transcript.append(("abort",))
                return None
            try:
                reply = dispatch(action)
            except GameOver as over:
                transcript.append((type(action).__name__.lower(), "game-over", over.bit, over.reason))
                raise
            transcript.append((type(action).__name__.lower(), _summary(reply)))
            action = gen.send(reply)
    except StopIteration:
        transcript.append(("stop",))
    finally:
        gen.close()
    return None


def _verify_sig(pp, vk, m, sig):
    return isinstance(m, (bytes, bytearray)) and os_verify(pp, vk, bytes(m), sig)


# -- DS sEUF-CMA ------------------------------------------------------------


def run_ds_seufcma(adversary, scheme_id, seed=0):
    """Strong unforgeability game for the plain signature scheme."""
    rng = random.Random(seed)
    pair = ds_keygen(ds_setup(scheme_id), rng)
    ledger = set()
    transcript = []

    def dispatch(action):
        if not isinstance(action, DsSign):
            return None
        sigma = ds_sign(pair.sk, action.m)
        ledger.add((action.m, sigma))
        return sigma

    out = _drive(adversary, scheme_id, pair.vk, rng, pair.sk, dispatch, transcript)
    bit, reason = 0, "no-output"
    if out is not None:
        try:
            valid = ds_verify(pair.vk, out.m, out.sig)
        except (OblisigError, TypeError):
            valid = False
        if not valid:
            reason = "invalid"
        elif (out.m, out.sig) in ledger:
            reason = "in-ledger"
        else:
            bit, reason = 1, "forgery"
    return GameResult("ds-seufcma", adversary.name, bit, seed, reason, transcript=transcript)


# -- ambiguity --------------------------------------------------------------


@dataclass(frozen=True)
class AmbiguityEstimate:
    adversary: str
    trials: int
    wins: int
    advantage: float
    ci_low: float
    ci_high: float


def run_ambiguity(adversary, pp, trials=10_000, seed=0):
    """Estimate the ambiguity advantage ``|Pr[win] - 1/2|`` over ``trials`` fresh experiments.

    The adversary sees the signing key. White-box adversaries additionally
    receive the commitment randomness, which makes them perfect distinguishers.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    wins = 0
    for _ in range(trials):
        vk, sk = os_keygen(pp, rng)
        try:
            messages, i0, i1 = adversary.choose(pp, vk, sk, rng)
            if not all(isinstance(i, int) and 0 <= i < len(messages) for i in (i0, i1)):
                continue  # invalid choice counts as a loss
            b = rng.getrandbits(1)
            mu, st = os_u1(pp, vk, messages, (i0, i1)[b], rng)
        except OblisigError:
            continue
        leak = st.r if getattr(adversary, "white_box", False) else None
        if adversary.guess(mu, leak) == b:
            wins += 1
    ci = binomtest(wins, trials).proportion_ci(method="wilson")
    return AmbiguityEstimate(adversary.name, trials, wins, abs(wins / trials - 0.5), float(ci.low), float(ci.high))


# -- sequential strong unforgeability ---------------------------------------


class _SeqState:
    def __init__(self):
        self.l_sign = []
        self.l_list = {}
        self.q_sign = 0
        self.q_fin = 0

    def check(self):
        if not self.q_fin <= self.q_sign <= self.q_fin + 1:
            raise InvariantViolation(f"q_fin={self.q_fin} q_sign={self.q_sign}")

    def in_ledger(self, m, sig):
        return (m, sig) in self.l_sign


def run_seq_seufcma(adversary, pp, seed=0, concurrent=False):
    """Strong unforgeability under sequential signing interactions.

    With ``concurrent=True`` the signing oracle drops its sequentiality check
    and each finalisation closes the oldest open session. That naive
    extension is what the interleaving attack breaks.
    """
    rng = random.Random(seed)
    vk, sk = os_keygen(pp, rng)
    st = _SeqState()
    open_sessions = []
    transcript = []

    def sign_oracle(action):
        if not concurrent and st.q_sign != st.q_fin:
            return None
        try:
            rho = os_s2(pp, vk, sk, action.messages, action.mu)
        except OblisigError:
            return None
        st.q_sign += 1
        st.l_list[st.q_sign] = tuple(action.messages)
        open_sessions.append(st.q_sign)
        return rho

    def fin_oracle(action):
        if concurrent:
            if not open_sessions:
                return None
            session = open_sessions[0]
        else:
            if st.q_sign != st.q_fin + 1:
                return None
            session = st.q_sign
        m, sig = action.m, action.sig
        if not _verify_sig(pp, vk, m, sig):
            raise GameOver(0, "invalid-fin")
        if st.in_ledger(m, sig):
            raise GameOver(0, "resubmission")
        if m in st.l_list[session]:
            st.l_sign.append((m, sig))
            st.q_fin += 1
            open_sessions.remove(session)
            return ACCEPT
        raise GameOver(1, "fin-off-list")

    def dispatch(action):
        if isinstance(action, Sign):
            reply = sign_oracle(action)
        elif isinstance(action, Fin):
            reply = fin_oracle(action)
        else:
            reply = None
        if not concurrent:
            st.check()
        return reply

    name = "seq-seufcma-concurrent" if concurrent else "seq-seufcma"
    try:
        out = _drive(adversary, pp, vk, rng, sk, dispatch, transcript)
    except GameOver as over:
        return GameResult(name, adversary.name, over.bit, seed, over.reason, transcript=transcript)
    if out is None:
        return GameResult(name, adversary.name, 0, seed, "no-output", transcript=transcript)
    if st.q_sign != st.q_fin:
        reason = "unfinished-session"
    elif not _verify_sig(pp, vk, out.m, out.sig):
        reason = "invalid"
    elif st.in_ledger(out.m, out.sig):
        reason = "in-ledger"
    else:
        return GameResult(name, adversary.name, 1, seed, "forgery", transcript=transcript)
    return GameResult(name, adversary.name, 0, seed, reason, transcript=transcript)


# -- the earlier model with self-reported messages ---------------------------


def run_old_model_game(adversary, pp, seed=0):
    """Unforgeability with a message-only ledger built from self-reported outputs.

    Each finalisation just records the reported message; there is no
    validity, resubmission or membership check.
    """
    rng = random.Random(seed)
    vk, sk = os_keygen(pp, rng)
    reported = set()
    counts = {"sign": 0, "fin": 0}
    transcript = []

    def dispatch(action):
        if isinstance(action, Sign):
            try:
                rho = os_s2(pp, vk, sk, action.messages, action.mu)
            except OblisigError:
                return None
            counts["sign"] += 1
            return rho
        if isinstance(action, Fin):
            if counts["fin"] >= counts["sign"]:
                return None
            reported.add(action.m)
            counts["fin"] += 1
            return ACCEPT
        return None

    out = _drive(adversary, pp, vk, rng, sk, dispatch, transcript)
    if out is None:
        return GameResult("old-model", adversary.name, 0, seed, "no-output", transcript=transcript)
    if counts["sign"] != counts["fin"]:
        reason = "unfinished-session"
    elif not _verify_sig(pp, vk, out.m, out.sig):
        reason = "invalid"
    elif out.m in reported:
        reason = "in-ledger"
    else:
        return GameResult("old-model", adversary.name, 1, seed, "forgery", transcript=transcript)
    return GameResult("old-model", adversary.name, 0, seed, reason, transcript=transcript)


# -- base game with forgery classification ------------------------------------


class _BaseState(_SeqState):
    def __init__(self):
        super().__init__()
        self.table = []  # (i, M, root, c, sigma)
        self.ds_ledger = set()
        self.flags = GameFlags()

    def reuse_pair(self):
        """First pair of distinct ledger entries sharing ``(root, c, sigma)``."""
        seen = {}
        for entry in self.l_sign:
            key = entry[1].triple
            if key in seen:
                return seen[key], entry
            seen[key] = entry
        return None


def _end(bit, reason):
    raise GameOver(bit, reason)


def run_base_game(adversary, pp, seed=0):
    """Run the flag-classified base game and extract the matching reduction outcome.

    Returns a :class:`GameResult` whose ``flags`` and ``outcome`` are set.
    Raises :class:`ReductionGap` if a win cannot be turned into a DS
    forgery, a commitment collision or a hash collision.
    """
    if pp.variant != OURS:
        raise OblisigError("bad-variant", "the base game is defined for the Merkle variant")
    rng = random.Random(seed)
    vk, sk = os_keygen(pp, rng)
    st = _BaseState()
    transcript = []

    def sign_oracle(action):
        if st.q_sign != st.q_fin:
            return None
        try:
            messages = check_message_list(action.messages)
            root, _ = merkle.merkle_tree(merkle.pad_list(messages), pp.hash_params)
            rho = os_s2(pp, vk, sk, messages, action.mu)
        except OblisigError:
            return None
        st.q_sign += 1
        st.l_list[st.q_sign] = tuple(messages)
        st.table.append((st.q_sign, tuple(messages), root, action.mu, rho))
        st.ds_ledger.add((root_commit_message(root, action.mu), rho))
        return rho

    def classify_reuse():
        pair = st.reuse_pair()
        if pair is None:
            st.flags.ds_forge = True
            _end(1, "ds-forge")
        st.flags.ds_reuse = True
        (m1, s1), (m2, s2) = pair
        if (m1, s1.r) != (m2, s2.r):
            st.flags.com_coll = True
            _end(1, "com-coll")
        _end(1, "ds-reuse")

    def fin_oracle(action):
        if st.q_sign != st.q_fin + 1:
            return None
        m, sig = action.m, action.sig
        if not _verify_sig(pp, vk, m, sig):
            _end(0, "invalid-fin")
        if st.in_ledger(m, sig):
            _end(0, "resubmission")
        st.l_sign.append((m, sig))
        st.q_fin += 1
        if m in st.l_list[st.q_sign]:
            return ACCEPT
        if (st.q_sign, sig.root, sig.c, sig.sigma) in {(i, r, c, s) for i, _, r, c, s in st.table}:
            _end(1, "fin-off-list")
        classify_reuse()

    def dispatch(action):
        if isinstance(action, Sign):
            reply = sign_oracle(action)
        elif isinstance(action, Fin):
            reply = fin_oracle(action)
        else:
            reply = None
        st.check()
        return reply

    try:
        out = _drive(adversary, pp, vk, rng, sk, dispatch, transcript)
        if out is None:
            raise GameOver(0, "no-output")
        if st.q_sign != st.q_fin:
            raise GameOver(0, "unfinished-session")
        if not _verify_sig(pp, vk, out.m, out.sig):
            raise GameOver(0, "invalid")
        if st.in_ledger(out.m, out.sig):
            raise GameOver(0, "in-ledger")
        st.flags.final = True
        st.l_sign.append((out.m, out.sig))
        st.q_fin += 1
        classify_reuse()
    except GameOver as over:
        result = GameResult(
            "base", adversary.name, over.bit, seed, over.reason, st.flags,
            transcript=transcript, vk=vk, issued=frozenset(st.ds_ledger),
        )
    if result.bit == 1:
        if st.flags.as_tuple() not in WINNING_FLAG_COMBINATIONS:
            raise InvariantViolation(f"unexpected flag combination {st.flags}")
        result.outcome = _extract(pp, vk, st)
    return result


def _find_ds_forgery(pp, vk, st):
    for _, sig in st.l_sign:
        msg = root_commit_message(sig.root, sig.c)
        if (msg, sig.sigma) not in st.ds_ledger and ds_verify(vk, msg, sig.sigma):
            return ReductionOutcome("ds-forgery", DsForgery(msg, sig.sigma))
    return None


def _tree_for(pp, st, triple, index=None):
    for i, messages, root, c, sigma in st.table:
        if (root, c, sigma) == triple and (index is None or i == index):
            _, tree = merkle.merkle_tree(merkle.pad_list(messages), pp.hash_params)
            return tree
    return None


def _extract(pp, vk, st):
    flags = st.flags
    if flags.ds_forge:
        found = _find_ds_forgery(pp, vk, st)
        if found is None:
            raise ReductionGap("ds_forge set but every ledger triple was issued by the oracle")
        return found
    if flags.com_coll:
        (m1, s1), (m2, s2) = st.reuse_pair()
        if commit(pp.ck, m1, s1.r) != commit(pp.ck, m2, s2.r):
            raise ReductionGap("commitment openings disagree")
        return ReductionOutcome("com-collision", ComCollision((m1, s1.r), (m2, s2.r)))
    if not flags.ds_reuse:
        m, sig = st.l_sign[-1]
        tree = _tree_for(pp, st, sig.triple, st.q_sign)
        try:
            return ReductionOutcome("hash-collision", merkle.ext1(tree, m, sig.path, sig.j))
        except OblisigError as exc:
            raise ReductionGap(f"ext1 failed on an off-list finalisation: {exc}") from None
    (m1, s1), (m2, s2) = st.reuse_pair()
    if s1.j == s2.j and len(s1.path) == len(s2.path):
        try:
            return ReductionOutcome("hash-collision", merkle.ext2(m1, s1.j, s1.path, s2.path, pp.hash_params))
        except OblisigError:
            pass
    tree = _tree_for(pp, st, s1.triple)
    if tree is None:
        # the shared triple was never produced by the signing oracle
        found = _find_ds_forgery(pp, vk, st)
        if found is not None:
            return found
        raise ReductionGap("reused triple is neither oracle-issued nor forged")
    for m, sig in ((m1, s1), (m2, s2)):
        try:
            return ReductionOutcome("hash-collision", merkle.extract_against_tree(tree, m, sig.path, sig.j))
        except OblisigError:
            continue
    raise ReductionGap("no extractor applies to the reused triple")


def outcome_is_valid(pp, vk, outcome, issued=()):
    """Independent recomputation check of an extracted outcome.

    ``issued`` is the set of ``(message, sigma)`` pairs the signing oracle produced.
    """
    value = outcome.value
    if outcome.kind == "ds-forgery":
        return ds_verify(vk, value.message, value.sigma) and (value.message, value.sigma) not in set(issued)
    if outcome.kind == "com-collision":
        (m, r), (m2, r2) = value.opening, value.opening_prime
        return (m, r) != (m2, r2) and commit(pp.ck, m, r) == commit(pp.ck, m2, r2)
    if outcome.kind == "hash-collision":
        hp = value.hash_params
        return value.x != value.x_prime and hp.digest(value.x) == hp.digest(value.x_prime)
    return False


# -- interleaving attack ------------------------------------------------------


@dataclass(frozen=True)
class ConcurrentAttackReport:
    sequential_bit: int
    sequential_reason: str
    sequential_blocked: bool
    concurrent_bit: int
    concurrent_reason: str

    @property
    def attack_blocked(self):
        return self.sequential_blocked and self.sequential_bit == 0

    @property
    def attack_wins(self):
        return self.concurrent_bit == 1


def concurrent_attack_demo(pp, seed=0, adversary=None):
    """Run the two-session interleaving adversary against both oracle flavours."""
    from .adversaries import InterleavingAdversary

    adversary = adversary or InterleavingAdversary()
    seq = run_seq_seufcma(adversary, pp, seed)
    blocked = any(entry[:2] == ("sign", "bottom") for entry in seq.transcript)
    conc = run_seq_seufcma(adversary, pp, seed, concurrent=True)
    return ConcurrentAttackReport(seq.bit, seq.reason, blocked, conc.bit, conc.reason)
