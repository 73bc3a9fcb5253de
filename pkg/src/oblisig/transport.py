"""Framed TCP transport for the two-move signing protocol.

Every frame is ``length (u32 BE) || type (1 byte) || payload`` where
``length`` counts payload bytes only. A connection carries exactly one
request frame and one response frame.
"""

import json
import logging
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass

from .errors import OblisigError
from .primitives import decode_key_file
from .scheme import (
    VARIANT_BYTES,
    OsPublicParams,
    decode_message_list,
    decode_rho,
    encode_message_list,
    encode_rho,
    os_s2,
    os_setup,
    os_u1,
    os_uder,
    os_verify,
    variant_from_byte,
)

log = logging.getLogger(__name__)

SIGN_REQUEST = 0x01
SIGN_RESPONSE = 0x02
REJECT = 0x03
PUBKEY_REQUEST = 0x04
PUBKEY_RESPONSE = 0x05
FRAME_TYPES = {SIGN_REQUEST, SIGN_RESPONSE, REJECT, PUBKEY_REQUEST, PUBKEY_RESPONSE}

REJECT_DUPLICATE = 0x01
REJECT_LIMITS = 0x02
REJECT_MALFORMED = 0x03
REJECT_REASONS = {REJECT_DUPLICATE: "duplicate-message", REJECT_LIMITS: "limits", REJECT_MALFORMED: "malformed"}

HEADER = struct.Struct(">IB")


class Rejected(OblisigError):
    def __init__(self, reason):
        self.reason = reason
        super().__init__("rejected", REJECT_REASONS.get(reason, f"reason {reason}"))


# -- frames ---------------------------------------------------------------------


def encode_frame(frame_type, payload=b""):
    return HEADER.pack(len(payload), frame_type) + payload


def decode_frame(data):
    """Parse one complete frame held in ``data``; returns ``(type, payload)``."""
    if len(data) < HEADER.size:
        raise OblisigError("malformed", "short frame header")
    length, frame_type = HEADER.unpack_from(data)
    if frame_type not in FRAME_TYPES:
        raise OblisigError("malformed", f"unknown frame type {frame_type}")
    if len(data) != HEADER.size + length:
        raise OblisigError("malformed", "frame length mismatch")
    return frame_type, data[HEADER.size :]


def _recv_exact(sock, n):
    chunks = []
    while n:
        chunk = sock.recv(min(n, 1 << 16))
        if not chunk:
            raise OblisigError("malformed", "connection closed mid-frame")
        chunks.append(chunk)
        n -= len(chunk)
    return b"".join(chunks)


def read_frame(sock, max_payload=None):
    length, frame_type = HEADER.unpack(_recv_exact(sock, HEADER.size))
    if frame_type not in FRAME_TYPES:
        raise OblisigError("malformed", f"unknown frame type {frame_type}")
    if max_payload is not None and length > max_payload:
        raise OblisigError("limits", f"payload of {length} bytes over limit")
    return frame_type, _recv_exact(sock, length)


def encode_sign_request(variant, messages, mu):
    return bytes([VARIANT_BYTES[variant]]) + encode_message_list(messages) + mu


def decode_sign_request(payload, digest_len, max_n=None, max_len=None):
    """Returns ``(variant, messages, mu)``; raises on any structural problem."""
    if not payload:
        raise OblisigError("malformed", "empty sign request")
    variant = variant_from_byte(payload[0])
    messages, used = decode_message_list(payload[1:], max_n, max_len)
    mu = payload[1 + used :]
    if len(mu) != digest_len:
        raise OblisigError("malformed", "first message has the wrong length")
    return variant, messages, mu


# -- signer -------------------------------------------------------------------


@dataclass
class ServerConfig:
    key_file: str
    host: str = "127.0.0.1"
    port: int = 7400
    variant: str = "ours"
    hash_bits: int = 256
    max_n: int = 1024
    max_message_bytes: int = 64 * 1024
    timeout: float = 10.0

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            raw = json.load(fh)
        if "listen" in raw:
            host, _, port = raw.pop("listen").rpartition(":")
            raw["host"], raw["port"] = host, int(port)
        return cls(**raw)


class SignerService:
    """Frame-level signer logic, independent of sockets."""

    def __init__(self, pp, vk, sk, max_n=1024, max_message_bytes=64 * 1024):
        if sk is None:
            raise OblisigError("missing-signing-key")
        self.pp, self.vk, self.sk = pp, vk, sk
        self.max_n, self.max_message_bytes = max_n, max_message_bytes

    @classmethod
    def from_config(cls, config):
        with open(config.key_file, "rb") as fh:
            vk, sk = decode_key_file(fh.read())
        pp = os_setup(config.variant, config.hash_bits, vk.scheme_id)
        return cls(pp, vk, sk, config.max_n, config.max_message_bytes)

    @property
    def max_payload(self):
        return 1 + 4 + self.max_n * (4 + self.max_message_bytes) + self.pp.digest_len

    def handle(self, frame_type, payload):
        """Answer one request frame; returns the response ``(type, payload)``."""
        if frame_type == PUBKEY_REQUEST:
            if payload:
                return REJECT, bytes([REJECT_MALFORMED])
            return PUBKEY_RESPONSE, self.pp.to_bytes() + self.vk.key
        if frame_type != SIGN_REQUEST:
            return REJECT, bytes([REJECT_MALFORMED])
        try:
            variant, messages, mu = decode_sign_request(
                payload, self.pp.digest_len, self.max_n, self.max_message_bytes
            )
            if variant != self.pp.variant:
                raise OblisigError("malformed", "variant mismatch")
            rho = os_s2(self.pp, self.vk, self.sk, messages, mu)
        except OblisigError as exc:
            return REJECT, bytes([_reason_for(exc.code)])
        return SIGN_RESPONSE, encode_rho(rho)


def _reason_for(code):
    if code == "duplicate-message":
        return REJECT_DUPLICATE
    if code == "limits":
        return REJECT_LIMITS
    return REJECT_MALFORMED


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        service = self.server.service
        sock = self.request
        sock.settimeout(self.server.timeout)
        try:
            try:
                frame_type, payload = read_frame(sock, service.max_payload)
                response = service.handle(frame_type, payload)
            except OblisigError as exc:
                response = (REJECT, bytes([_reason_for(exc.code)]))
            sock.sendall(encode_frame(*response))
        except (OSError, struct.error) as exc:
            log.debug("connection from %s dropped: %s", self.client_address, exc)
        except Exception:  # a bad connection must never take the daemon down
            log.exception("unexpected error serving %s", self.client_address)


class SignerServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, service, timeout=10.0):
        self.service = service
        self.timeout = timeout
        super().__init__(address, _Handler)

    @property
    def address(self):
        return self.server_address[:2]

    def start(self):
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread

    def stop(self):
        self.shutdown()
        self.server_close()


def serve(config):
    """Run the signer daemon until interrupted."""
    service = SignerService.from_config(config)
    try:
        server = SignerServer((config.host, config.port), service, config.timeout)
    except OSError as exc:
        raise OblisigError("bind-failed", str(exc)) from exc
    log.info("signer listening on %s:%d (%s)", *server.address, config.variant)
    with server:
        server.serve_forever()


# -- user client ------------------------------------------------------------------


def _round_trip(address, frame, timeout, capture=None):
    try:
        with socket.create_connection(address, timeout=timeout) as sock:
            sock.settimeout(timeout)
            sock.sendall(frame)
            frame_type, payload = read_frame(sock)
    except socket.timeout:
        raise OblisigError("timeout") from None
    except OSError as exc:
        raise OblisigError("connection-failed", str(exc)) from exc
    if capture is not None:
        capture.append(("send", frame))
        capture.append(("recv", encode_frame(frame_type, payload)))
    return frame_type, payload


def fetch_public_params(address, timeout=10.0):
    """Ask the signer for its public parameters and key; returns ``(pp, vk_bytes)``."""
    frame_type, payload = _round_trip(address, encode_frame(PUBKEY_REQUEST), timeout)
    if frame_type != PUBKEY_RESPONSE or len(payload) < 5:
        raise OblisigError("malformed", "unexpected reply to key request")
    return OsPublicParams.from_bytes(payload[:5]), payload[5:]


def request_signature(address, pp, vk, messages, j, rng=None, timeout=10.0, capture=None):
    """Obtain and verify a signature on ``messages[j]`` from the signer at ``address``.

    ``capture``, if given, receives the raw frames sent and received.
    """
    mu, st = os_u1(pp, vk, messages, j, rng)
    frame = encode_frame(SIGN_REQUEST, encode_sign_request(pp.variant, messages, mu))
    frame_type, payload = _round_trip(address, frame, timeout, capture)
    if frame_type == REJECT:
        raise Rejected(payload[0] if payload else REJECT_MALFORMED)
    if frame_type != SIGN_RESPONSE:
        raise OblisigError("malformed", "unexpected reply to sign request")
    try:
        rho = decode_rho(pp, payload, len(messages))
    except OblisigError:
        raise OblisigError("signer-cheated", "undecodable second message") from None
    m, sig = os_uder(pp, vk, st, rho)
    if not os_verify(pp, vk, m, sig):
        raise OblisigError("signer-cheated", "derived signature does not verify")
    return m, sig
