"""Index entries and their two on-chain layouts.

An entry is (t_w, e_w, h_w): the search token, the posting list under
deterministic encryption with the list key, and a keyed digest over the
matching ciphertexts in posting order. The digest covers only the real
matches, not the pads; binding it to pad zeroes would change h_w
whenever Δ grows and break verification for untouched keywords.

Layout one is a flat array of all entries in keyword byte order,
published in a single transaction. Layout two chains one record per
keyword through the ledger: each record is token ‖ e ‖ digest ‖
previous-txid, encrypted under the chain key, walked backwards from a
broadcast head. Both layouts are length-regular: every serialized entry
of one index has the same byte length because posting lists share Δ and
the deterministic cipher adds a constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .. import crypto
from ..chain.tx import Reader, _u32
from ..crypto import KeyBundle
from ..errors import AuthenticationError, IntegrityError, ParameterError
from .postings import PostingList, serialize_postings
from .tokens import derive_trapdoor


@dataclass(frozen=True)
class IndexEntry:
    t_w: bytes
    e_w: bytes
    h_w: bytes


def entry_lengths(k_bytes: int, delta: int, p_bytes: int) -> tuple[int, int, int]:
    """(token, encrypted-list, digest) byte widths for given parameters."""
    return k_bytes, delta * p_bytes + 16, k_bytes


def digest_over(k_w: bytes, ciphertexts: list[bytes]) -> bytes:
    return crypto.keyed_hash(k_w, b"".join(ciphertexts))


def build_index_A(
    keys: KeyBundle,
    posting_lists: Mapping[str, PostingList],
    ciphertexts: Mapping[bytes, bytes],
    *,
    p_bytes: int,
) -> list[IndexEntry]:
    """One entry per keyword, sorted by keyword byte order.

    `ciphertexts` maps stored txid to document ciphertext; a posting
    entry without one is an integrity error, because the digest would
    not be reproducible.
    """
    entries = []
    for w in sorted(posting_lists, key=lambda w: w.encode()):
        pl = posting_lists[w]
        trap = derive_trapdoor(keys, w, "A", p_bytes=p_bytes)
        cts = []
        for txid in pl.matches:
            if txid not in ciphertexts:
                raise IntegrityError(f"no ciphertext for posting entry {txid.hex()}")
            cts.append(ciphertexts[txid])
        entries.append(
            IndexEntry(
                t_w=trap.t_w,
                e_w=crypto.det_encrypt(trap.l_w, serialize_postings(pl, p_bytes)),
                h_w=digest_over(trap.k_w, cts),
            )
        )
    return entries


# -- flat-array layout ----------------------------------------------------

def serialize_array(entries: list[IndexEntry]) -> bytes:
    """Header (count and field widths) followed by fixed-width entries."""
    if not entries:
        return _u32(0) + _u32(0) + _u32(0) + _u32(0)
    t_len = len(entries[0].t_w)
    e_len = len(entries[0].e_w)
    h_len = len(entries[0].h_w)
    out = [_u32(len(entries)), _u32(t_len), _u32(e_len), _u32(h_len)]
    for e in entries:
        if (len(e.t_w), len(e.e_w), len(e.h_w)) != (t_len, e_len, h_len):
            raise ParameterError("index entries must be length-regular")
        out.append(e.t_w + e.e_w + e.h_w)
    return b"".join(out)


def parse_array(data: bytes) -> list[IndexEntry]:
    r = Reader(data)
    count, t_len, e_len, h_len = r.u32(), r.u32(), r.u32(), r.u32()
    entries = [
        IndexEntry(r.take(t_len), r.take(e_len), r.take(h_len)) for _ in range(count)
    ]
    if not r.done():
        raise ParameterError("trailing bytes after index array")
    return entries


# -- chained-record layout -------------------------------------------------

def serialize_record(entry: IndexEntry, prev_link: bytes) -> bytes:
    return entry.t_w + entry.e_w + entry.h_w + prev_link


def parse_record(
    data: bytes, token_len: int, p_bytes: int
) -> tuple[IndexEntry, bytes]:
    """Split token ‖ e ‖ digest ‖ prev by the known field widths."""
    if len(data) < 2 * token_len + p_bytes:
        raise ParameterError("record shorter than its fixed fields")
    t_w = data[:token_len]
    prev = data[-p_bytes:]
    h_w = data[-p_bytes - token_len : -p_bytes]
    e_w = data[token_len : -p_bytes - token_len]
    return IndexEntry(t_w, e_w, h_w), prev


def encrypt_record(k11: bytes, entry: IndexEntry, prev_link: bytes) -> bytes:
    return crypto.det_encrypt(k11, serialize_record(entry, prev_link))


def decrypt_record(
    k11: bytes, r: bytes, token_len: int, p_bytes: int
) -> tuple[IndexEntry, bytes]:
    try:
        plain = crypto.det_decrypt(k11, r)
    except AuthenticationError as exc:
        raise IntegrityError("index record does not decrypt under the chain key") from exc
    return parse_record(plain, token_len, p_bytes)
