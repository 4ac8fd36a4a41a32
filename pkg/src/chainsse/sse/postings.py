"""Posting lists: which transactions hold each keyword's documents.

Every list is padded with all-zero ids to the corpus-wide maximum length
Δ, so list length reveals nothing about any single keyword. Entries are
fixed-width transaction ids, making the serialized form Δ·p bytes for
every keyword.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from ..errors import ParameterError
from .corpus import Document


@dataclass(frozen=True)
class PostingList:
    keyword: str
    entries: tuple[bytes, ...]  # padded to Δ
    match_count: int  # entries[:match_count] are real

    @property
    def matches(self) -> tuple[bytes, ...]:
        return self.entries[: self.match_count]


def build_posting_lists(
    docs: list[Document],
    doc_txids: Mapping[int, bytes],
    *,
    p_bytes: int,
    dictionary: Iterable[str] | None = None,
) -> dict[str, PostingList]:
    """Map every dictionary keyword to its Δ-padded posting list.

    Entry order is ascending doc id, so owner and searcher derive the
    same ciphertext concatenation for the digest. The dictionary defaults
    to the union of document keywords; passing a superset gives the extra
    keywords all-pad lists.
    """
    for doc in docs:
        if doc.doc_id not in doc_txids:
            raise ParameterError(f"no stored transaction for document {doc.doc_id}")
    words = set(dictionary) if dictionary is not None else set()
    for doc in docs:
        words.update(doc.keywords)

    raw: dict[str, list[bytes]] = {w: [] for w in words}
    for doc in sorted(docs, key=lambda d: d.doc_id):
        for w in doc.keywords:
            raw[w].append(doc_txids[doc.doc_id])

    delta = max((len(v) for v in raw.values()), default=0)
    pad = bytes(p_bytes)
    return {
        w: PostingList(w, tuple(v) + (pad,) * (delta - len(v)), len(v))
        for w, v in raw.items()
    }


def serialize_postings(pl: PostingList, p_bytes: int) -> bytes:
    for entry in pl.entries:
        if len(entry) != p_bytes:
            raise ParameterError(
                f"posting entry width {len(entry)} != id width {p_bytes}"
            )
    return b"".join(pl.entries)


def parse_postings(data: bytes, p_bytes: int) -> list[bytes]:
    """Real entries of a serialized list, zero pads dropped."""
    if p_bytes <= 0 or len(data) % p_bytes:
        raise ParameterError("serialized posting list has wrong length")
    pad = bytes(p_bytes)
    out = []
    for i in range(0, len(data), p_bytes):
        entry = data[i : i + p_bytes]
        if entry != pad:
            out.append(entry)
    return out
