"""Lexicographically time-ordered unique identifiers (ULID-style)."""

import os
import threading
import time

_ENCODING = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"  # Crockford base32

_lock = threading.Lock()
_last_ms = 0
_last_rand = 0


def _b32(value, length):
    chars = []
    for _ in range(length):
        chars.append(_ENCODING[value & 31])
        value >>= 5
    return "".join(reversed(chars))


def new_id(prefix=""):
    """48-bit millisecond timestamp + 80-bit randomness, monotonic in-process."""
    global _last_ms, _last_rand
    with _lock:
        ms = time.time_ns() // 1_000_000
        if ms <= _last_ms:
            # same tick (or clock went backwards): bump randomness to stay ordered
            ms = _last_ms
            rand = _last_rand + 1
        else:
            rand = int.from_bytes(os.urandom(10), "big")
        _last_ms, _last_rand = ms, rand
        body = _b32(ms, 10) + _b32(rand & ((1 << 80) - 1), 16)
    return f"{prefix}-{body}" if prefix else body
