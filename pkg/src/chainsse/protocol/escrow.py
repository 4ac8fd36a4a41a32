"""The four moves of a paid search: ask, abort, fulfil, refund.

Chronology is the whole game here. The refund transaction is signed by
both parties BEFORE the ask is broadcast (searcher first), so the
asker is never exposed to an unresponsive counterparty: once the ask
is on chain, the deposit can only move to the searcher through the
payload gate before the deadline, or back to the asker through the
pre-signed refund after it. If the ask itself never reaches the chain
by deadline − max_delay, the asker re-spends the funding outputs and
the stranded ask becomes a double spend.

Nothing here mines. Submitting and mining stay separate so tests and
scenarios can schedule races exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import crypto
from ..chain import embed
from ..chain.ledger import Ledger
from ..chain.tx import OutPoint, Script, TAG_OPAQUE, Transaction, TxInput, TxOutput
from ..chain.wallet import Wallet
from ..crypto import KeyBundle
from ..errors import (
    CannotAbortError,
    ConfigError,
    NotFoundError,
    ProtocolError,
)
from ..sse.search import decrypt_results, phi_search
from ..sse.tokens import derive_trapdoor
from .offers import (
    AskOffer,
    FuseRefund,
    ReturnClaim,
    parse_ask_payload,
    parse_return_payload,
    serialize_ask_payload,
    serialize_return_payload,
)
from .verifiers import GATE_ID


@dataclass
class Searcher:
    """The searching party's wallet plus its cooperation policy."""

    wallet: Wallet
    presign: bool = True

    @property
    def vk(self) -> bytes:
        return self.wallet.vk


def make_ask(
    owner_wallet: Wallet,
    keys: KeyBundle,
    w: str,
    d_t: int,
    deadline: int,
    locator: bytes,
    searcher: Searcher,
    *,
    submit: bool = True,
) -> tuple[AskOffer, FuseRefund]:
    """Build, cross-sign and (normally) broadcast one search offer.

    The deadline must leave more than max_delay clock ticks of room, or
    the abort window would already be open. A searcher that refuses to
    pre-sign the refund aborts the whole offer before any broadcast.
    """
    ledger = owner_wallet.ledger
    cfg = ledger.config
    if deadline <= ledger.clock + cfg.max_delay:
        raise ConfigError(
            f"deadline {deadline} leaves no room: clock {ledger.clock} "
            f"plus max_delay {cfg.max_delay}"
        )
    trapdoor = derive_trapdoor(keys, w, cfg.scheme, p_bytes=cfg.p_bytes)
    payload = serialize_ask_payload(trapdoor, locator)
    outputs = [
        TxOutput(d_t, Script.gate(searcher.vk, owner_wallet.vk, GATE_ID, b""))
    ]
    outputs.extend(
        TxOutput(0, Script.data(), piece, TAG_OPAQUE)
        for piece in embed.pieces(payload, cfg.iota)
    )
    ask_tx = owner_wallet.build(outputs, spend=d_t)
    ask_txid = ask_tx.txid(cfg.p_bytes)

    fuse_tx = Transaction(
        inputs=(TxInput(OutPoint(ask_txid, 0)),),
        outputs=(TxOutput(d_t - cfg.fee, Script.p2pk(owner_wallet.vk)),),
        locktime=deadline,
    )
    if not searcher.presign:
        raise ProtocolError(
            "searcher refused to pre-sign the refund; offer aborted before broadcast"
        )
    sig_q = searcher.wallet.party.sign(fuse_tx.body)
    sig_u = owner_wallet.party.sign(fuse_tx.body)
    fuse_tx = Transaction(
        (fuse_tx.inputs[0].with_signatures(sig_q, sig_u),),
        fuse_tx.outputs,
        fuse_tx.locktime,
    )

    offer = AskOffer(
        ask_tx=ask_tx,
        ask_txid=ask_txid,
        gate_index=0,
        trapdoor=trapdoor,
        locator=locator,
        d_t=d_t,
        deadline=deadline,
        owner_vk=owner_wallet.vk,
        searcher_vk=searcher.vk,
        funding=tuple(tin.prev for tin in ask_tx.inputs),
    )
    fuse = FuseRefund(fuse_tx, fuse_tx.txid(cfg.p_bytes), deadline)
    if submit:
        ledger.submit(ask_tx)
        offer.submitted = True
    return offer, fuse


def _ask_mined(ledger: Ledger, offer: AskOffer) -> bool:
    try:
        ledger.get_tx(offer.ask_txid)
        return True
    except NotFoundError:
        return False


def abort_before_inclusion(owner_wallet: Wallet, offer: AskOffer) -> Transaction:
    """Recover the funding outputs of an ask stuck short of the chain."""
    ledger = owner_wallet.ledger
    cfg = ledger.config
    if _ask_mined(ledger, offer):
        raise CannotAbortError(
            "ask is already on the chain; recovery goes through the timeout refund"
        )
    if ledger.clock < offer.deadline - cfg.max_delay:
        raise ProtocolError(
            f"abort window opens at clock {offer.deadline - cfg.max_delay}, "
            f"now {ledger.clock}"
        )
    ledger.withdraw_tx(offer.ask_txid)
    total = 0
    for outpoint in offer.funding:
        out = ledger.output_at(outpoint)
        if out is None:
            raise ProtocolError(f"funding output {outpoint.txid.hex()} already spent")
        total += out.value
    refund = Transaction(
        tuple(TxInput(op) for op in offer.funding),
        (TxOutput(total - cfg.fee, Script.p2pk(owner_wallet.vk)),),
    )
    refund = owner_wallet.sign_tx(refund)
    ledger.submit(refund)
    return refund


def build_return_tx(
    searcher: Searcher, offer: AskOffer, ciphertexts: tuple[bytes, ...], h_w: bytes
) -> Transaction:
    """Claim spending the deposit to the searcher; payload = results."""
    cfg = searcher.wallet.ledger.config
    outputs = [TxOutput(offer.d_t - cfg.fee, Script.p2pk(searcher.vk))]
    outputs.extend(
        TxOutput(0, Script.data(), piece, TAG_OPAQUE)
        for piece in embed.pieces(serialize_return_payload(ciphertexts, h_w), cfg.iota)
    )
    tx = Transaction((TxInput(offer.gate_outpoint),), tuple(outputs))
    return searcher.wallet.sign_tx(tx)


def fulfill(searcher: Searcher, offer: AskOffer) -> ReturnClaim:
    """Honest searcher: run the search, claim the deposit with the proof.

    The trapdoor is re-read from the mined ask transaction, not from the
    offer object, because the chain is what the searcher actually sees.
    """
    ledger = searcher.wallet.ledger
    if not _ask_mined(ledger, offer):
        raise ProtocolError("ask not on the chain yet; wait for a block")
    if ledger.clock >= offer.deadline:
        raise ProtocolError("deadline passed; the deposit belongs to the refund path")
    ask_tx = ledger.get_tx(offer.ask_txid)
    trapdoor, locator = parse_ask_payload(b"".join(ask_tx.payloads()))
    result = phi_search(ledger, trapdoor, locator)
    if result is None:
        cts: tuple[bytes, ...] = ()
        h_w = crypto.keyed_hash(trapdoor.k_w, b"")
        hops = None
    else:
        cts, h_w, hops = result.ciphertexts, result.h_w, result.hops
    tx = build_return_tx(searcher, offer, cts, h_w)
    txid = ledger.submit(tx)
    return ReturnClaim(tx, txid, cts, h_w, hops)


def refund_after_timeout(ledger: Ledger, offer: AskOffer, fuse: FuseRefund) -> bytes:
    """Broadcast the pre-signed refund; early or pointless raises.

    Returns the refund txid; the caller mines the block. The ledger
    itself would park an early refund until its locktime, so this first
    checks validity against the chain at the CURRENT clock: before the
    deadline that fails with the locktime reason, and after a mined
    return it fails as a double spend, which is the right outcome,
    payment already happened. A refund racing an unmined return is let
    through; the miner keeps whichever came first.
    """
    ledger.validate(fuse.fuse_tx, include_mempool=False)
    return ledger.submit(fuse.fuse_tx)


def collect_results(ledger: Ledger, keys: KeyBundle, offer: AskOffer) -> list[bytes]:
    """The asker's last step: read the mined claim and decrypt."""
    spender = ledger.spender_of(offer.gate_outpoint)
    if spender is None:
        raise ProtocolError("deposit not claimed yet; nothing to collect")
    claim_tx = ledger.get_tx(spender.txid)
    if len(claim_tx.inputs[spender.index].signatures) != 1:
        raise ProtocolError("offer ended in a refund; there are no results")
    cts, _h_w = parse_return_payload(b"".join(claim_tx.payloads()))
    return decrypt_results(keys, cts)
