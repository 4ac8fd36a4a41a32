"""Token-based search: locate, fetch, verify, decrypt.

Both schemes end the same way: decrypt the posting list with the list
key, fetch each ciphertext (walking chunk back-links where needed),
and check the keyed digest over the concatenation against the index
entry. They differ only in how the entry is found: equality scan over
the flat array, or a backward walk over the encrypted record chain
counting hops. Entry lookup is factored out so the payment gate can
re-run it during script validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .. import crypto
from ..chain import embed
from ..chain.ledger import Ledger
from ..chain.tx import TAG_CHUNK, TAG_SPLIT_TOKEN
from ..crypto import KeyBundle
from ..errors import (
    AuthenticationError,
    CorruptChainError,
    IntegrityError,
    MacMismatchError,
    ParameterError,
)
from .index import IndexEntry, decrypt_record, parse_array, parse_record
from .postings import parse_postings
from .tokens import Trapdoor


@dataclass(frozen=True)
class SearchResult:
    ciphertexts: tuple[bytes, ...]
    h_w: bytes
    hops: int | None = None  # index records read; chain walks only


def resolve_ciphertext(ledger: Ledger, txid: bytes) -> bytes:
    """Fetch one stored document ciphertext, reassembling chunk chains."""
    p_bytes = ledger.config.p_bytes
    tx = ledger.get_tx(txid)
    if not tx.outputs or tx.outputs[0].payload_tag != TAG_CHUNK:
        return b"".join(tx.payloads())
    pieces: list[bytes] = []
    seen: set[bytes] = set()
    link = txid
    while link != ledger.config.zero_id:
        if link in seen:
            raise CorruptChainError(f"chunk chain loops at {link.hex()}")
        seen.add(link)
        tx = ledger.get_tx(link)
        if not tx.outputs or tx.outputs[0].payload_tag != TAG_CHUNK:
            raise CorruptChainError(f"chunk link {link.hex()} is not a chunk")
        payload = b"".join(tx.payloads())
        if len(payload) < p_bytes:
            raise CorruptChainError(f"chunk {link.hex()} shorter than a link")
        pieces.append(payload[:-p_bytes])
        link = payload[-p_bytes:]
    pieces.reverse()
    return b"".join(pieces)


def find_entry_A(ledger: Ledger, trapdoor: Trapdoor, inx_txid: bytes) -> IndexEntry | None:
    """Equality scan of the flat array for the trapdoor's token."""
    entries = parse_array(ledger.read_payload(inx_txid))
    for entry in entries:
        if entry.t_w == trapdoor.t_w:
            return entry
    return None


def walk_index_B(
    ledger: Ledger, k11: bytes, token_len: int, head_txid: bytes
) -> Iterator[tuple[IndexEntry, bytes]]:
    """Yield (entry, record txid) from the head back to the terminator.

    Handles both record layouts: an encrypted record in one transaction,
    or the three-transaction split whose reassembled payload is already
    the plain token ‖ e ‖ digest ‖ prev layout.
    """
    p_bytes = ledger.config.p_bytes
    link = head_txid
    seen: set[bytes] = set()
    while link != ledger.config.zero_id:
        if link in seen:
            raise CorruptChainError(f"index chain loops at {link.hex()}")
        seen.add(link)
        tx = ledger.get_tx(link)
        split = bool(tx.outputs) and tx.outputs[0].payload_tag == TAG_SPLIT_TOKEN
        if split:
            data = embed.read_embedded(ledger, link)
            entry, prev = parse_record(data, token_len, p_bytes)
        else:
            entry, prev = decrypt_record(
                k11, b"".join(tx.payloads()), token_len, p_bytes
            )
        yield entry, link
        link = prev


def find_entry_B(
    ledger: Ledger, trapdoor: Trapdoor, head_txid: bytes
) -> tuple[IndexEntry, int] | None:
    """Walk the chain comparing tokens; returns (entry, hop count)."""
    if trapdoor.k11 is None:
        raise ParameterError("trapdoor lacks the chain key")
    hops = 0
    for entry, _txid in walk_index_B(ledger, trapdoor.k11, trapdoor.token_len, head_txid):
        hops += 1
        if entry.t_w == trapdoor.t_w:
            return entry, hops
    return None


def _complete(
    ledger: Ledger, trapdoor: Trapdoor, entry: IndexEntry, hops: int | None
) -> SearchResult:
    try:
        listing = crypto.det_decrypt(trapdoor.l_w, entry.e_w)
    except AuthenticationError as exc:
        raise IntegrityError("posting list does not decrypt under the list key") from exc
    txids = parse_postings(listing, ledger.config.p_bytes)
    cts = tuple(resolve_ciphertext(ledger, txid) for txid in txids)
    digest = crypto.keyed_hash(trapdoor.k_w, b"".join(cts))
    if digest != entry.h_w:
        raise MacMismatchError(
            "stored documents do not match the index digest; data was altered"
        )
    return SearchResult(cts, entry.h_w, hops)


def phi_search_A(ledger: Ledger, trapdoor: Trapdoor, inx_txid: bytes) -> SearchResult | None:
    """Array lookup; None when the token is absent (unknown keyword)."""
    entry = find_entry_A(ledger, trapdoor, inx_txid)
    if entry is None:
        return None
    return _complete(ledger, trapdoor, entry, None)


def phi_search_B(ledger: Ledger, trapdoor: Trapdoor, head_txid: bytes) -> SearchResult | None:
    """Chain walk; None when the terminator is reached without a match."""
    found = find_entry_B(ledger, trapdoor, head_txid)
    if found is None:
        return None
    entry, hops = found
    return _complete(ledger, trapdoor, entry, hops)


def phi_search(ledger: Ledger, trapdoor: Trapdoor, locator: bytes) -> SearchResult | None:
    if trapdoor.scheme == "A":
        return phi_search_A(ledger, trapdoor, locator)
    return phi_search_B(ledger, trapdoor, locator)


def decrypt_results(keys: KeyBundle, ciphertexts: tuple[bytes, ...]) -> list[bytes]:
    out = []
    for i, c in enumerate(ciphertexts):
        try:
            out.append(crypto.sym_decrypt(keys.k1, c))
        except AuthenticationError as exc:
            raise IntegrityError(f"ciphertext {i} failed authenticated decryption") from exc
    return out
