"""Entropy sources.

All randomness consumed by the package flows through an explicit source
object, so every workflow can be replayed bit-for-bit from a seed. The
seeded source is an HMAC-SHA256 counter stream; the block counter can be
saved and restored to resume a stream across process boundaries.
"""

from __future__ import annotations

import hashlib
import hmac
import os

_BLOCK = 32


class EntropySource:
    """Minimal interface: read(n) returns n fresh bytes."""

    def read(self, n: int) -> bytes:
        raise NotImplementedError


class SystemEntropy(EntropySource):
    """Operating-system randomness."""

    def read(self, n: int) -> bytes:
        return os.urandom(n)


class SeededEntropy(EntropySource):
    """Deterministic stream derived from a seed.

    Accepts bytes, str or int seeds. `blocks_consumed` counts whole
    32-byte blocks drawn so far; passing it back to the constructor
    resumes the stream at the same point (reads must align the same way,
    which holds when the sequence of read() calls is replayed).
    """

    def __init__(self, seed: bytes | str | int, blocks_consumed: int = 0):
        if isinstance(seed, int):
            seed = seed.to_bytes(16, "big", signed=False) if seed >= 0 else str(seed).encode()
        elif isinstance(seed, str):
            seed = seed.encode("utf-8")
        self._key = hashlib.sha256(b"chainsse.seed:" + seed).digest()
        self._counter = blocks_consumed
        self._buffer = b""

    @property
    def blocks_consumed(self) -> int:
        return self._counter

    def read(self, n: int) -> bytes:
        out = bytearray(self._buffer)
        self._buffer = b""
        while len(out) < n:
            block = hmac.new(self._key, self._counter.to_bytes(8, "big"), hashlib.sha256).digest()
            self._counter += 1
            out.extend(block)
        self._buffer = bytes(out[n:])
        return bytes(out[:n])

    def fork(self, label: str) -> "SeededEntropy":
        """Independent stream for a named sub-purpose."""
        return SeededEntropy(self._key + label.encode("utf-8"))
