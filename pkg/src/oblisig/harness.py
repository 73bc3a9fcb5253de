"""Runs every adversary through every applicable game and checks cross-game invariants."""

from . import adversaries as adv
from .games import (
    ReductionGap,
    concurrent_attack_demo,
    outcome_is_valid,
    run_ambiguity,
    run_base_game,
    run_ds_seufcma,
    run_old_model_game,
    run_seq_seufcma,
)
from .primitives import ED25519
from .scheme import OURS, os_setup

AMBIGUITY_BOUND = 0.02
DISTINGUISHER_FLOOR = 0.48


def run_suite(seed=0, weak_hash=False, ambiguity_trials=10_000, scheme_id=ED25519):
    """Returns ``(records, failures)``: one record per adversary and game, plus failed invariants."""
    bits = 16 if weak_hash else 256
    pp = os_setup(OURS, bits, scheme_id)
    records, failures = [], []

    for a in (adv.DsReplay(), adv.DsLeakedKey(), adv.DsGarbage()):
        result = run_ds_seufcma(a, scheme_id, seed)
        records.append(result.record())
        expected = 1 if a.white_box else 0
        if result.bit != expected:
            failures.append(f"{a.name}: ds-seufcma gave {result.bit}, expected {expected}")

    for a in adv.unforgeability_suite():
        if a.weak_hash_only and not weak_hash:
            continue
        seq = run_seq_seufcma(a, pp, seed)
        old = run_old_model_game(a, pp, seed)
        records += [seq.record(), old.record()]
        try:
            base = run_base_game(a, pp, seed)
        except ReductionGap as exc:
            failures.append(f"{a.name}: {exc}")
            continue
        records.append(base.record())
        if base.bit != seq.bit:
            failures.append(f"{a.name}: base game gave {base.bit}, seq game gave {seq.bit}")
        if base.bit == 1:
            if not outcome_is_valid(pp, base.vk, base.outcome, base.issued):
                failures.append(f"{a.name}: win without a valid reduction outcome")
        if not a.white_box and not weak_hash and seq.bit == 1:
            failures.append(f"{a.name}: won at production parameters")

    reuse_seq = [r for r in records if r["adversary"] == "trivial-reuse"]
    by_game = {r["game"]: r for r in reuse_seq}
    if by_game["old-model"]["bit"] != 1 or by_game["seq-seufcma"]["bit"] != 0:
        failures.append("trivial-reuse: old model must accept and seq game must reject")
    elif by_game["seq-seufcma"]["reason"] != "resubmission":
        failures.append("trivial-reuse: seq game rejected it for the wrong reason")

    report = concurrent_attack_demo(pp, seed)
    records.append(
        {
            "adversary": "interleaving",
            "game": "concurrent-demo",
            "bit": report.concurrent_bit,
            "reason": f"sequential={report.sequential_reason} concurrent={report.concurrent_reason}",
            "flags": None,
            "outcome": "none",
            "seed": seed,
        }
    )
    if not (report.attack_blocked and report.attack_wins):
        failures.append("interleaving: expected blocked under sequential and winning under concurrent oracle")

    if ambiguity_trials:
        amb_pp = os_setup(OURS, 256, scheme_id)
        for a in (adv.GuessingAdversary(), adv.HashGrindingAdversary(), adv.RLeakDistinguisher()):
            est = run_ambiguity(a, amb_pp, ambiguity_trials, seed)
            records.append(
                {
                    "adversary": a.name,
                    "game": "ambiguity",
                    "bit": None,
                    "advantage": round(est.advantage, 6),
                    "trials": est.trials,
                    "flags": None,
                    "outcome": "none",
                    "seed": seed,
                }
            )
            if a.white_box and est.advantage < DISTINGUISHER_FLOOR:
                failures.append(f"{a.name}: white-box distinguisher advantage {est.advantage:.4f} too small")
            if not a.white_box and est.advantage > AMBIGUITY_BOUND:
                failures.append(f"{a.name}: ambiguity advantage {est.advantage:.4f} over bound")
    return records, failures
