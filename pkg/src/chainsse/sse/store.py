"""Writing documents and indexes to the ledger, and the ingest pipeline.

Document ciphertexts at most ι bytes go into one transaction as-is;
larger ones are cut into pieces stored in back-linked transactions, the
posting list keeping only the final link. Index publication differs by
scheme: the flat array must fit a single output (a corpus too big for
the configured ι is a configuration error, reported before anything is
submitted), while chained records fall back from one encrypted output to
the three-transaction split, and past that to one transaction with the
encrypted record spread over several outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .. import crypto
from ..chain import embed
from ..chain.tx import TAG_CHUNK, TAG_OPAQUE
from ..chain.wallet import Wallet
from ..crypto import KeyBundle
from ..entropy import EntropySource
from ..errors import ConfigError, ParameterError, StoreTimeoutError, TxRejected
from .corpus import Document
from .index import IndexEntry, build_index_A, encrypt_record, serialize_array, serialize_record
from .chunks import chunk_ciphertext
from .postings import PostingList, build_posting_lists
from .tokens import chain_key

INDEX_MODES = ("auto", "record", "split3", "spread")


def encrypt_document(keys: KeyBundle, plaintext: bytes, entropy: EntropySource) -> bytes:
    return crypto.sym_encrypt(keys.k1, plaintext, entropy)


def store_ciphertext_A(wallet: Wallet, c: bytes) -> bytes:
    """One transaction per document; big payloads span several outputs."""
    iota = wallet.ledger.config.iota
    payloads = [(piece, TAG_OPAQUE) for piece in embed.pieces(c, iota)]
    return wallet.submit(wallet.embed_tx(payloads))


def store_ciphertext_B(wallet: Wallet, c: bytes) -> bytes:
    """Store a ciphertext, cutting and back-linking when it exceeds ι.

    Returns the txid holding the last piece; reading walks the links
    backwards and reassembles. A small ciphertext is stored alone, with
    no link field, marked by its payload tag.
    """
    cfg = wallet.ledger.config
    if len(c) <= cfg.iota:
        return wallet.submit(wallet.embed_tx([(c, TAG_OPAQUE)]))
    prev = cfg.zero_id
    for piece in chunk_ciphertext(c, cfg.iota, cfg.p_bytes).chunks:
        prev = wallet.submit(wallet.embed_tx([(piece + prev, TAG_CHUNK)]))
    return prev


def publish_index_A(wallet: Wallet, entries: list[IndexEntry]) -> bytes:
    """The whole array in one output of one transaction."""
    data = serialize_array(entries)
    iota = wallet.ledger.config.iota
    if len(data) > iota:
        raise ConfigError(
            f"index array needs {len(data)} bytes but iota is {iota}; "
            f"raise iota or switch scheme"
        )
    return wallet.submit(wallet.embed_tx([(data, TAG_OPAQUE)]))


def build_index_B(
    wallet: Wallet,
    k11: bytes,
    entries: list[IndexEntry],
    *,
    mode: str = "auto",
) -> bytes:
    """Publish entries as a backward-linked chain; returns the head txid.

    Entries must already be in dictionary order; the head is the LAST
    entry's transaction, so a search for the most recent keyword costs
    one hop. `mode` pins a record layout, or `auto` picks per record:
    one encrypted output if it fits, else the three-transaction split,
    else one transaction with the encrypted record across outputs.
    """
    if mode not in INDEX_MODES:
        raise ParameterError(f"unknown index mode {mode!r}")
    if not entries:
        raise ParameterError("cannot publish an empty index chain")
    cfg = wallet.ledger.config
    prev = cfg.zero_id
    for entry in entries:
        prev = _publish_record(wallet, k11, entry, prev, mode)
    return prev


def _publish_record(
    wallet: Wallet, k11: bytes, entry: IndexEntry, prev: bytes, mode: str
) -> bytes:
    cfg = wallet.ledger.config
    record = encrypt_record(k11, entry, prev)
    if mode == "record" or (mode == "auto" and len(record) <= cfg.iota):
        return wallet.submit(wallet.embed_tx([(record, TAG_OPAQUE)]))

    if mode in ("auto", "split3"):
        try:
            plan = embed.embed_payload(
                serialize_record(entry, prev),
                embed.MODE_SPLIT3,
                iota=cfg.iota,
                token_len=len(entry.t_w),
                id_len=cfg.p_bytes,
            )
        except (TxRejected, ParameterError):
            if mode == "split3":
                raise
        else:
            return embed.emit(plan, wallet)[-1]

    payloads = [(piece, TAG_OPAQUE) for piece in embed.pieces(record, cfg.iota)]
    return wallet.submit(wallet.embed_tx(payloads))


@dataclass(frozen=True)
class IngestResult:
    scheme: str
    locator: bytes  # index txid (A) or chain head (B)
    doc_txids: dict[int, bytes]
    ciphertexts: dict[bytes, bytes]  # stored txid -> document ciphertext
    entries: list[IndexEntry]
    posting_lists: dict[str, PostingList]
    delta: int


def ingest(
    wallet: Wallet,
    keys: KeyBundle,
    docs: list[Document],
    scheme: str,
    entropy: EntropySource,
    *,
    dictionary: list[str] | None = None,
    index_mode: str = "auto",
    mine: bool = True,
) -> IngestResult:
    """Encrypt, store and index a corpus; one mined block at the end."""
    if scheme not in ("A", "B"):
        raise ParameterError(f"scheme must be A or B, got {scheme!r}")
    cfg = wallet.ledger.config
    doc_txids: dict[int, bytes] = {}
    ciphertexts: dict[bytes, bytes] = {}
    for doc in sorted(docs, key=lambda d: d.doc_id):
        c = encrypt_document(keys, doc.plaintext, entropy)
        if scheme == "A":
            txid = store_ciphertext_A(wallet, c)
        else:
            txid = store_ciphertext_B(wallet, c)
        doc_txids[doc.doc_id] = txid
        ciphertexts[txid] = c

    posting_lists = build_posting_lists(
        docs, doc_txids, p_bytes=cfg.p_bytes, dictionary=dictionary
    )
    entries = build_index_A(keys, posting_lists, ciphertexts, p_bytes=cfg.p_bytes)
    if scheme == "A":
        locator = publish_index_A(wallet, entries)
    else:
        locator = build_index_B(
            wallet, chain_key(keys, cfg.p_bytes), entries, mode=index_mode
        )

    if mine:
        wallet.ledger.mine_block()
        missing = [
            t
            for t in list(doc_txids.values()) + [locator]
            if not wallet.ledger.confirmed(t)
        ]
        if missing:
            raise StoreTimeoutError(
                f"{len(missing)} transactions not mined; first {missing[0].hex()}"
            )
    delta = max((pl.match_count for pl in posting_lists.values()), default=0)
    return IngestResult(scheme, locator, doc_txids, ciphertexts, entries, posting_lists, delta)


# -- index-head announcement ----------------------------------------------

def write_broadcast(path: str | Path, scheme: str, locator: bytes) -> None:
    Path(path).write_text(
        json.dumps({"scheme": scheme, "txid": locator.hex()}, sort_keys=True) + "\n"
    )


def read_broadcast(path: str | Path) -> tuple[str, bytes]:
    try:
        raw = json.loads(Path(path).read_text())
        return raw["scheme"], bytes.fromhex(raw["txid"])
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"unreadable broadcast file {path}: {exc}") from exc
