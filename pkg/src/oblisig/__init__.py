"""1-out-of-n oblivious signatures: a Merkle-root variant and an n-signature baseline."""

from .errors import OblisigError
from .scheme import OURS, ZLH, os_keygen, os_s2, os_setup, os_u1, os_uder, os_verify, run_protocol

__all__ = [
    "OURS",
    "ZLH",
    "OblisigError",
    "os_keygen",
    "os_s2",
    "os_setup",
    "os_u1",
    "os_uder",
    "os_verify",
    "run_protocol",
]
