"""Cutting an oversized ciphertext into link-sized pieces.

Each stored piece shares its transaction payload with a p-byte back
link, so a piece may use at most ι − p bytes; the piece count is
⌈|C| / (ι − p)⌉. Concatenating the pieces in order restores C exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParameterError


@dataclass(frozen=True)
class ChunkPlan:
    chunks: tuple[bytes, ...]
    s: int


def _piece_size(iota: int, p_bytes: int) -> int:
    if p_bytes <= 0:
        raise ParameterError("id width must be positive")
    if iota <= p_bytes:
        raise ParameterError(f"iota={iota} must exceed id width {p_bytes}")
    return iota - p_bytes


def chunk_count(length: int, iota: int, p_bytes: int) -> int:
    if length < 0:
        raise ParameterError("length must be >= 0")
    size = _piece_size(iota, p_bytes)
    return -(-length // size)


def chunk_ciphertext(c: bytes, iota: int, p_bytes: int) -> ChunkPlan:
    size = _piece_size(iota, p_bytes)
    chunks = tuple(c[i : i + size] for i in range(0, len(c), size))
    plan = ChunkPlan(chunks, len(chunks))
    assert plan.s == chunk_count(len(c), iota, p_bytes)
    return plan


def reassemble(chunks: tuple[bytes, ...] | list[bytes]) -> bytes:
    return b"".join(chunks)
