"""Shared fixtures-in-code: a loopback signer and a malformed-frame corpus."""

import contextlib
import logging
import random
import socket
import struct

from oblisig.errors import OblisigError
from oblisig.scheme import check_message_list, os_keygen, os_setup
from oblisig.transport import (
    HEADER,
    REJECT,
    SIGN_REQUEST,
    SignerServer,
    SignerService,
    decode_frame,
    decode_sign_request,
    encode_frame,
    encode_sign_request,
)


class ErrorCounter(logging.Handler):
    def __init__(self):
        super().__init__(logging.ERROR)
        self.count = 0

    def emit(self, record):
        self.count += 1


@contextlib.contextmanager
def running_signer(variant="ours", seed=0, max_n=64, max_message_bytes=256, timeout=2.0):
    pp = os_setup(variant)
    vk, sk = os_keygen(pp, random.Random(seed))
    service = SignerService(pp, vk, sk, max_n, max_message_bytes)
    server = SignerServer(("127.0.0.1", 0), service, timeout)
    counter = ErrorCounter()
    log = logging.getLogger("oblisig.transport")
    log.addHandler(counter)
    thread = server.start()
    try:
        yield server, pp, vk, counter, thread
    finally:
        log.removeHandler(counter)
        server.stop()


def send_raw(address, data, timeout=5.0):
    """Send raw bytes, half-close, and return everything the server sends back."""
    with socket.create_connection(address, timeout=timeout) as sock:
        try:
            sock.sendall(data)
            sock.shutdown(socket.SHUT_WR)
        except OSError:
            pass  # the daemon may reject on the header and close before we finish writing
        chunks = []
        while True:
            try:
                chunk = sock.recv(1 << 16)
            except ConnectionResetError:
                break
            if not chunk:
                break
            chunks.append(chunk)
    return b"".join(chunks)


def would_be_signed(service, data):
    """True if the first frame in ``data`` is a sign request the service would answer with a signature.

    The daemon reads exactly one length-delimited frame per connection, so
    bytes after that frame never reach it.
    """
    if len(data) < HEADER.size:
        return False
    length, _ = HEADER.unpack_from(data)
    try:
        frame_type, payload = decode_frame(data[: HEADER.size + length])
        if frame_type != SIGN_REQUEST or len(payload) > service.max_payload:
            return False
        variant, messages, _ = decode_sign_request(
            payload, service.pp.digest_len, service.max_n, service.max_message_bytes
        )
        check_message_list(messages)
    except OblisigError:
        return False
    return variant == service.pp.variant


def malformed_corpus(pp, count=None, seed=0):
    """Yield ``count`` frames (endless if None) built by mutating a valid sign request."""
    rng = random.Random(seed)
    d = pp.digest_len
    messages = [b"fuzz-%d" % i for i in range(4)]
    valid = encode_frame(SIGN_REQUEST, encode_sign_request(pp.variant, messages, rng.randbytes(d)))
    payload = valid[HEADER.size :]

    def flip(data):
        data = bytearray(data)
        for _ in range(rng.randint(1, 4)):
            pos = rng.randrange(len(data))
            data[pos] ^= 1 << rng.randrange(8)
        return bytes(data)

    strategies = [
        lambda: flip(valid),
        lambda: valid[: rng.randrange(len(valid))],
        lambda: valid + rng.randbytes(rng.randint(1, 8)),
        lambda: rng.randbytes(rng.randint(0, 64)),
        lambda: HEADER.pack(len(payload), rng.choice([0, 6, 7, 0x7F, 0xFF])) + payload,
        lambda: HEADER.pack(rng.choice([0xFFFFFFFF, 1 << 30, 10**7]), SIGN_REQUEST) + payload[:16],
        lambda: encode_frame(SIGN_REQUEST, payload[: rng.randrange(len(payload))]),
        lambda: encode_frame(SIGN_REQUEST, bytes([rng.choice([0, 3, 0xFF])]) + payload[1:]),
        lambda: encode_frame(SIGN_REQUEST, encode_sign_request(pp.variant, [b"dup", b"dup"], rng.randbytes(d))),
        lambda: encode_frame(SIGN_REQUEST, encode_sign_request(pp.variant, [b"\xffpad", b"x"], rng.randbytes(d))),
        lambda: encode_frame(SIGN_REQUEST, encode_sign_request(pp.variant, [b"only"], rng.randbytes(d))),
        lambda: encode_frame(SIGN_REQUEST, bytes([payload[0]]) + struct.pack(">I", 10**6) + payload[5:]),
        lambda: encode_frame(SIGN_REQUEST, payload + rng.randbytes(rng.randint(1, 4))),
        lambda: encode_frame(SIGN_REQUEST, encode_sign_request(pp.variant, [b"x" * 300, b"y"], rng.randbytes(d))),
        lambda: encode_frame(SIGN_REQUEST, encode_sign_request(pp.variant, [b"%d" % i for i in range(65)], rng.randbytes(d))),
        lambda: encode_frame(0x02, payload),
        lambda: encode_frame(0x04, rng.randbytes(rng.randint(1, 8))),
        lambda: encode_frame(REJECT, b"\x01"),
    ]
    produced = 0
    while count is None or produced < count:
        produced += 1
        yield rng.choice(strategies)()


def classify_reply(reply):
    """Return the frame type byte of a reply, or None for a closed connection."""
    if not reply:
        return None
    frame_type, _ = decode_frame(reply)
    return frame_type
