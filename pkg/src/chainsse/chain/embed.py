"""Placing payloads into transactions and getting them back out.

Two plans exist. `single` puts one payload, already within the per-output
budget, into one transaction. `split3` takes a keyword record laid out as
token ‖ body ‖ digest ‖ prev-link and spreads its members over three
transactions that back-link by txid: the first carries digest ‖ prev-link,
the second carries body ‖ txid(first), the third carries token ‖
txid(second). Reading starts from the third and walks the links, so the
record reassembles even though no single transaction could hold it.

For payloads larger than the budget that must still live in ONE
transaction (a fat index record), `pieces` cuts them across several
outputs of that transaction; output order preserves byte order.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import CorruptChainError, NotFoundError, ParameterError, TxRejected
from .ledger import REASON_PAYLOAD, Ledger
from .tx import TAG_OPAQUE, TAG_SPLIT_BODY, TAG_SPLIT_HASH, TAG_SPLIT_TOKEN

MODE_SINGLE = "single"
MODE_SPLIT3 = "split3"


@dataclass(frozen=True)
class Fragment:
    """One transaction's payload, before any link txid is appended."""

    base: bytes
    tag: int
    linked: bool  # emit() appends the previous fragment's txid


@dataclass(frozen=True)
class EmbedPlan:
    mode: str
    fragments: tuple[Fragment, ...]


def embed_payload(
    payload: bytes,
    mode: str,
    *,
    iota: int,
    token_len: int = 0,
    id_len: int = 0,
) -> EmbedPlan:
    """Plan how `payload` becomes transaction payloads.

    split3 needs the field widths to cut the record at member borders:
    `token_len` for the token and digest, `id_len` for the link.
    """
    if mode == MODE_SINGLE:
        if len(payload) > iota:
            raise TxRejected(
                REASON_PAYLOAD, f"{len(payload)} bytes exceed single-output budget {iota}"
            )
        return EmbedPlan(mode, (Fragment(payload, TAG_OPAQUE, False),))

    if mode == MODE_SPLIT3:
        if token_len <= 0 or id_len <= 0:
            raise ParameterError("split3 needs token_len and id_len")
        if len(payload) < 2 * token_len + id_len:
            raise ParameterError("payload shorter than a token‖body‖digest‖link record")
        token = payload[:token_len]
        link = payload[-id_len:]
        digest = payload[-id_len - token_len : -id_len]
        body = payload[token_len : -id_len - token_len]
        frags = (
            Fragment(digest + link, TAG_SPLIT_HASH, False),
            Fragment(body, TAG_SPLIT_BODY, True),
            Fragment(token, TAG_SPLIT_TOKEN, True),
        )
        for frag in frags:
            need = len(frag.base) + (id_len if frag.linked else 0)
            if need > iota:
                raise TxRejected(
                    REASON_PAYLOAD,
                    f"split fragment needs {need} bytes, budget {iota}",
                )
        return EmbedPlan(mode, frags)

    raise ParameterError(f"unknown embed mode {mode!r}")


def emit(plan: EmbedPlan, wallet) -> list[bytes]:
    """Submit one transaction per fragment; returns txids in plan order.

    The caller mines afterwards; links are txids, which are known before
    inclusion, so the whole chain can ride in one block.
    """
    txids: list[bytes] = []
    for frag in plan.fragments:
        payload = frag.base + (txids[-1] if frag.linked else b"")
        tx = wallet.embed_tx([(payload, frag.tag)])
        txids.append(wallet.submit(tx))
    return txids


def pieces(payload: bytes, iota: int) -> list[bytes]:
    """Cut a payload into budget-sized pieces for one multi-output tx."""
    if iota <= 0:
        raise ParameterError("iota must be positive")
    if not payload:
        return [b""]
    return [payload[i : i + iota] for i in range(0, len(payload), iota)]


def read_embedded(ledger: Ledger, txid: bytes) -> bytes:
    """Inverse of emit: plain payloads verbatim, split records reassembled."""
    tx = ledger.get_tx(txid)
    tag = tx.outputs[0].payload_tag if tx.outputs else TAG_OPAQUE
    data = b"".join(tx.payloads())
    if tag != TAG_SPLIT_TOKEN:
        return data

    id_len = ledger.config.p_bytes
    expect = {TAG_SPLIT_TOKEN: TAG_SPLIT_BODY, TAG_SPLIT_BODY: TAG_SPLIT_HASH}
    parts: list[bytes] = []
    while tag in expect:
        if len(data) < id_len:
            raise CorruptChainError(f"split fragment in {txid.hex()} shorter than a link")
        parts.append(data[:-id_len])
        link = data[-id_len:]
        try:
            nxt = ledger.get_tx(link)
        except NotFoundError as exc:
            raise CorruptChainError(f"split link {link.hex()} is not on the chain") from exc
        next_tag = nxt.outputs[0].payload_tag if nxt.outputs else TAG_OPAQUE
        if next_tag != expect[tag]:
            raise CorruptChainError(
                f"split link {link.hex()} carries tag {next_tag}, expected {expect[tag]}"
            )
        txid, tag, data = link, next_tag, b"".join(nxt.payloads())
    parts.append(data)
    # parts = [token, body, digest+prev]; original order is token‖body‖digest‖prev
    return b"".join(parts)
