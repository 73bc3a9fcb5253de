"""Command-line entry point: ``oblisig <command> ...``.

Exit codes: 0 success, 1 verification or protocol failure, 2 usage error.
"""

import argparse
import json
import logging
import os
import sys

from . import bench, transport
from .errors import OblisigError
from .harness import run_suite
from .primitives import ED25519, SCHEME_NAMES, decode_key_file, ds_keygen, ds_setup, encode_key_file
from .scheme import OURS, ZLH, OsPublicParams, decode_signature, os_verify

SIG_MAGIC = b"OSG1"
PP_LEN = 5


class UsageError(Exception):
    pass


def encode_sig_file(pp, sig):
    return SIG_MAGIC + pp.to_bytes() + sig.to_bytes()


def decode_sig_file(data):
    """Returns ``(pp, sig)``; raises OblisigError if the file is malformed."""
    if data[:4] != SIG_MAGIC or len(data) < 4 + PP_LEN:
        raise OblisigError("malformed", "not a signature file")
    pp = OsPublicParams.from_bytes(data[4 : 4 + PP_LEN])
    return pp, decode_signature(pp, data[4 + PP_LEN :])


def read_messages(path):
    try:
        text = _read(path).decode("utf-8")
    except UnicodeDecodeError:
        raise UsageError(f"{path} is not UTF-8") from None
    return [line.encode("utf-8") for line in text.splitlines()]


def _read(path, mode="rb"):
    try:
        with open(path, mode) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _scheme(value):
    if value in SCHEME_NAMES:
        return SCHEME_NAMES[value]
    try:
        scheme_id = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown scheme {value!r}") from None
    if scheme_id not in SCHEME_NAMES.values():
        raise argparse.ArgumentTypeError(f"unknown scheme id {scheme_id}")
    return scheme_id


def _n_list(value):
    try:
        ns = [int(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of integers") from None
    if not ns or min(ns) < 2:
        raise argparse.ArgumentTypeError("every n must be >= 2")
    return ns


def _address(value):
    host, sep, port = value.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError("address must look like HOST:PORT")
    return host or "127.0.0.1", int(port)


# -- commands -----------------------------------------------------------------


def cmd_keygen(args):
    pair = ds_keygen(ds_setup(args.scheme))
    vk, sk = pair.vk, pair.sk
    with open(args.out, "wb") as fh:
        fh.write(encode_key_file(vk, sk))
    os.chmod(args.out, 0o600)
    with open(args.out + ".pub", "wb") as fh:
        fh.write(encode_key_file(vk))
    print(f"wrote {args.out} and {args.out}.pub")
    return 0


def cmd_serve(args):
    try:
        config = transport.ServerConfig.load(args.config)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad config {args.config}: {exc}") from None
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    try:
        transport.serve(config)
    except KeyboardInterrupt:
        pass
    return 0


def _load_vk(path):
    try:
        vk, _ = decode_key_file(_read(path))
    except OblisigError as exc:
        raise UsageError(f"bad key file {path}: {exc}") from None
    return vk


def cmd_request(args):
    vk = _load_vk(args.vk)
    messages = read_messages(args.messages)
    pp, _ = transport.fetch_public_params(args.addr, args.timeout)
    if pp.scheme_id != vk.scheme_id:
        raise OblisigError("signer-cheated", "signer uses a different signature scheme")
    m, sig = transport.request_signature(args.addr, pp, vk, messages, args.choose, timeout=args.timeout)
    with open(args.out, "wb") as fh:
        fh.write(encode_sig_file(pp, sig))
    print(f"signed message {args.choose} of {len(messages)}; wrote {args.out}")
    return 0


def cmd_verify(args):
    vk = _load_vk(args.vk)
    m = _read(args.message)
    if m.endswith(b"\n"):
        m = m[:-1]
    try:
        pp, sig = decode_sig_file(_read(args.sig))
    except OblisigError as exc:
        print(f"invalid: {exc}")
        return 1
    if pp.scheme_id != vk.scheme_id or not os_verify(pp, vk, m, sig):
        print("invalid")
        return 1
    print("valid")
    return 0


def cmd_games(args):
    records, failures = run_suite(args.seed, args.weak_hash, args.ambiguity_trials)
    for record in records:
        print(json.dumps(record, sort_keys=True))
    for failure in failures:
        print(f"invariant failed: {failure}", file=sys.stderr)
    return 1 if failures else 0


def cmd_bench(args):
    variants = (OURS, ZLH) if args.variant == "both" else (args.variant,)
    report = bench.measure(args.n_list, variants, args.bits, args.scheme, args.seed)
    if args.format == "text":
        print(bench.format_table(report))
    else:
        sys.stdout.write(bench.to_csv(report))
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "sizes.csv"), "w") as fh:
            fh.write(bench.to_csv(report))
        bench.plot_sizes(report, os.path.join(args.out_dir, "sizes.png"))
    _, problems = bench.check_asymptotics(report)
    for problem in problems:
        print(f"growth check: {problem}", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="oblisig", description="1-out-of-n oblivious signatures")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a signer key pair")
    p.add_argument("--out", required=True, help="secret key file; the public half goes to OUT.pub")
    p.add_argument("--scheme", type=_scheme, default=ED25519, help="ed25519 (default), hmac-stub or a numeric id")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("serve", help="run the signer daemon")
    p.add_argument("--config", required=True, help="JSON config file")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("request", help="obtain a signature on one message of a list")
    p.add_argument("--addr", type=_address, required=True, help="signer HOST:PORT")
    p.add_argument("--vk", required=True, help="signer public key file")
    p.add_argument("--messages", required=True, help="UTF-8 file, one message per line")
    p.add_argument("--choose", type=int, required=True, help="0-based index of the message to sign")
    p.add_argument("--out", required=True, help="where to write the signature file")
    p.add_argument("--timeout", type=float, default=10.0)
    p.set_defaults(func=cmd_request)

    p = sub.add_parser("verify", help="check a signature file")
    p.add_argument("--vk", required=True)
    p.add_argument("--message", required=True, help="file holding the message (one trailing newline is ignored)")
    p.add_argument("--sig", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("games", help="run the adversary suite and print one JSON record per run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weak-hash", action="store_true", help="use the 16-bit test hash so collision adversaries run")
    p.add_argument("--ambiguity-trials", type=int, default=10_000)
    p.set_defaults(func=cmd_games)

    p = sub.add_parser("bench", help="measure message and signature sizes")
    p.add_argument("--n-list", type=_n_list, default=[2 ** k for k in range(1, 11)])
    p.add_argument("--variant", choices=("ours", "zlh", "both"), default="both")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out-dir", help="also write sizes.csv and sizes.png here")
    p.add_argument("--bits", type=int, default=256)
    p.add_argument("--scheme", type=_scheme, default=ED25519)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"oblisig: {exc}", file=sys.stderr)
        return 2
    except OblisigError as exc:
        print(f"oblisig: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
