"""Communication-cost measurement for both variants.

Each cell runs one honest protocol and records serialized byte counts next
to the textbook bit-count formulas. The textbook counts the index ``j`` in
``ceil(log2 n)`` bits and has no path-length field; our encoding spends 4
bytes on ``j`` and 1 byte on the path length, and that difference is
reported as ``overhead_bits``.
"""

import csv
import io
import math
import random
from dataclasses import asdict, dataclass, fields

from .primitives import ED25519
from .scheme import OURS, ZLH, os_keygen, os_setup, run_protocol

COLUMNS = ("variant", "n", "vk_B", "mu_B", "rho_B", "sig_B", "paper_rho_bits", "paper_sig_bits")


@dataclass(frozen=True)
class SizeRow:
    variant: str
    n: int
    vk_B: int
    mu_B: int
    rho_B: int
    sig_B: int
    paper_vk_bits: int
    paper_mu_bits: int
    paper_rho_bits: int
    paper_sig_bits: int
    overhead_bits: int


def log2_ceil(n):
    return math.ceil(math.log2(n))


def textbook_bits(variant, n, lam, vk_bits, sig_bits, c_bits, r_bits):
    """Textbook sizes in bits: ``(vk, mu, rho, sigma)``."""
    if variant == ZLH:
        return vk_bits, c_bits, n * sig_bits, sig_bits + c_bits + r_bits
    k = log2_ceil(n)
    return vk_bits, c_bits, sig_bits, sig_bits + c_bits + r_bits + (k + 1) * lam + k


def predicted_wire_bytes(variant, n, digest_len, sig_len):
    """Our encoding in closed form: ``(rho, sigma)`` byte counts."""
    if variant == ZLH:
        return n * sig_len, 2 * digest_len + sig_len
    k = log2_ceil(n)
    # root, c, r and k path digests, plus 1-byte k and 4-byte j
    return sig_len, sig_len + (3 + k) * digest_len + 5


def encoding_overhead_bits(variant, n):
    if variant == ZLH:
        return 0
    return 8 + 32 - log2_ceil(n)


def measure(n_list, variants=(OURS, ZLH), bits=256, scheme_id=ED25519, seed=0):
    rows = []
    for variant in variants:
        pp = os_setup(variant, bits, scheme_id)
        rng = random.Random(seed)
        vk, sk = os_keygen(pp, rng)
        for n in n_list:
            if n < 2:
                raise ValueError("n must be >= 2")
            messages = [b"bench-%d" % i for i in range(n)]
            mu, rho, m, sig = run_protocol(pp, vk, sk, messages, n - 1, rng)
            rho_bytes = rho if isinstance(rho, bytes) else b"".join(rho)
            lam = pp.hash_params.bits
            textbook = textbook_bits(variant, n, lam, 8 * len(vk.key), 8 * pp.sig_len, lam, lam)
            rows.append(
                SizeRow(
                    variant,
                    n,
                    len(vk.key),
                    len(mu),
                    len(rho_bytes),
                    len(sig.to_bytes()),
                    *textbook,
                    overhead_bits=8 * len(sig.to_bytes()) - textbook[3],
                )
            )
    return rows


def check_asymptotics(report):
    """Check the growth laws across doublings of n; returns ``(ok, problems)``."""
    problems = []
    for variant in sorted({row.variant for row in report}):
        rows = {row.n: row for row in report if row.variant == variant}
        doubling = sorted(n for n in rows if n & (n - 1) == 0)
        pairs = [(n, 2 * n) for n in doubling if 2 * n in rows]
        if len(pairs) < 3:
            problems.append(f"{variant}: need at least 4 doubling values of n")
            continue
        first = rows[doubling[0]]
        for n, row in rows.items():
            if (row.vk_B, row.mu_B) != (first.vk_B, first.mu_B):
                problems.append(f"{variant}, n={n}: vk or mu size depends on n")
        for n, n2 in pairs:
            a, b = rows[n], rows[n2]
            w = first.rho_B if variant == OURS else first.rho_B // doubling[0]
            if variant == OURS:
                if b.rho_B != a.rho_B:
                    problems.append(f"{variant}, n={n2}: rho not constant")
                if b.sig_B - a.sig_B != first.mu_B:
                    problems.append(f"{variant}, n={n2}: sigma grew by {b.sig_B - a.sig_B} bytes, not one digest")
            else:
                if b.rho_B - a.rho_B != n * w:
                    problems.append(f"{variant}, n={n2}: rho grew by {b.rho_B - a.rho_B}, expected {n * w}")
                if (b.rho_B + b.sig_B) - (a.rho_B + a.sig_B) != n * w:
                    problems.append(f"{variant}, n={n2}: rho+sigma not linear in n")
    return not problems, problems


def format_table(report):
    header = list(COLUMNS) + ["overhead_bits"]
    body = [[str(getattr(row, col)) for col in header] for row in report]
    widths = [max(len(h), *(len(r[i]) for r in body)) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in body]
    return "\n".join(lines)


def to_csv(report):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=[f.name for f in fields(SizeRow)], lineterminator="\n")
    writer.writeheader()
    for row in report:
        writer.writerow(asdict(row))
    return buf.getvalue()


def plot_sizes(report, path):
    """Write a two-panel figure: second-message size and second message plus signature."""
    from matplotlib.figure import Figure

    fig = Figure(figsize=(8, 3.4), constrained_layout=True)
    ax_rho, ax_total = fig.subplots(1, 2)
    styles = {OURS: ("o-", "Merkle root"), ZLH: ("s--", "n signatures")}
    for variant in sorted({row.variant for row in report}):
        rows = sorted((r for r in report if r.variant == variant), key=lambda r: r.n)
        ns = [r.n for r in rows]
        marker, label = styles.get(variant, ("x-", variant))
        ax_rho.plot(ns, [r.rho_B for r in rows], marker, label=label)
        ax_total.plot(ns, [r.rho_B + r.sig_B for r in rows], marker, label=label)
    for ax, title in ((ax_rho, "second message"), (ax_total, "second message + signature")):
        ax.set_xscale("log", base=2)
        ax.set_yscale("log")
        ax.set_xlabel("list size n")
        ax.set_ylabel("bytes")
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
    ax_rho.legend()
    fig.savefig(path, dpi=120)
    return path
