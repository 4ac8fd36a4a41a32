"""Single-process ledger with a logical clock and deterministic mining.

Blocks exist to give the clock meaning: time advances by `tick` per mined
block and by nothing else, so locktimes are exact and every run of the
same submissions produces the same chain. Mining drains the mempool in
first-in-first-out order; a transaction whose only defect is an unreached
locktime stays queued, anything else invalid at inclusion time is
evicted. Validity of a transaction:

  every input exists and is unspent, no input is claimed twice, every
  input's script accepts, value is conserved up to the flat fee, every
  output payload fits the per-output budget, and the locktime is not in
  the future. The locktime check runs last so callers can tell "early
  but otherwise good" apart from "broken".

Conservation is a standing invariant: coins minted equal coins in
unspent outputs plus collected fees.
"""

from __future__ import annotations

import threading
from collections import ChainMap
from dataclasses import dataclass

from ..config import SimConfig
from ..errors import CorruptChainError, NotFoundError, ParameterError, TxRejected
from .script import SpendContext, evaluate
from .tx import (
    KIND_PAY_TO_PUBKEY,
    OutPoint,
    Reader,
    Script,
    Transaction,
    TxOutput,
    _blob,
    _u32,
    _u64,
)

REASON_LOCKTIME = "locktime_not_reached"
REASON_SCRIPT = "script_failed"
REASON_DOUBLE_SPEND = "double_spend"
REASON_INFLATION = "inflation"
REASON_PAYLOAD = "payload_too_large"

_MAGIC = b"CSSE"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Block:
    height: int
    time: int
    txs: tuple[Transaction, ...]


class Ledger:
    """Mutable chain state; all public methods take the writer lock."""

    def __init__(self, config: SimConfig, faucet_vk: bytes) -> None:
        self.config = config
        self.clock = 0
        self.blocks: list[Block] = []
        self.mempool: list[Transaction] = []
        self.held: set[bytes] = set()
        self.utxo: dict[OutPoint, TxOutput] = {}
        self.spent_by: dict[OutPoint, OutPoint] = {}
        self.txs: dict[bytes, Transaction] = {}
        self.minted = 0
        self.fees_collected = 0
        self.evicted = 0
        self.op_counts = {"tx_read": 0, "tx_write": 0}
        self._lock = threading.RLock()
        self._view_cache: dict[OutPoint, TxOutput] | None = None
        self._pool_cache: dict[OutPoint, TxOutput] | None = None
        self._pool_ids: set[bytes] = set()

        coinbase = Transaction(
            inputs=(),
            outputs=(TxOutput(config.faucet, Script.p2pk(faucet_vk)),),
        )
        self._apply(coinbase)
        self.blocks.append(Block(height=0, time=0, txs=(coinbase,)))

    # -- queries ---------------------------------------------------------

    def get_tx(self, txid: bytes) -> Transaction:
        """Look up a confirmed transaction; mempool entries do not count."""
        with self._lock:
            self.op_counts["tx_read"] += 1
            tx = self.txs.get(txid)
            if tx is None:
                raise NotFoundError(f"no transaction {txid.hex()}")
            return tx

    def read_payload(self, txid: bytes) -> bytes:
        """Concatenated output payloads of one transaction."""
        return b"".join(self.get_tx(txid).payloads())

    def spender_of(self, outpoint: OutPoint) -> OutPoint | None:
        """(txid, input index) of the tx that redeemed `outpoint`."""
        with self._lock:
            return self.spent_by.get(outpoint)

    def unspent(self, outpoint: OutPoint) -> bool:
        with self._lock:
            return outpoint in self.utxo

    def output_at(self, outpoint: OutPoint) -> TxOutput | None:
        with self._lock:
            return self.utxo.get(outpoint)

    def confirmed(self, txid: bytes) -> bool:
        with self._lock:
            return txid in self.txs

    def balance_of(self, vk: bytes) -> int:
        with self._lock:
            return sum(
                out.value
                for out in self.utxo.values()
                if out.script.kind == KIND_PAY_TO_PUBKEY and out.script.keys == (vk,)
            )

    def utxos_for(self, vk: bytes) -> list[tuple[OutPoint, TxOutput]]:
        """Single-key outputs of `vk` spendable in the next block.

        The view projects the mempool, so unmined change is spendable;
        first-in-first-out mining settles such chains within one block.
        """
        with self._lock:
            return [
                (op, out)
                for op, out in self._projected().items()
                if out.script.kind == KIND_PAY_TO_PUBKEY and out.script.keys == (vk,)
            ]

    def check_conservation(self) -> bool:
        with self._lock:
            held = sum(out.value for out in self.utxo.values())
            return held + self.fees_collected == self.minted

    # -- validation ------------------------------------------------------

    def validate(self, tx: Transaction, *, include_mempool: bool = True) -> None:
        """Strict check: raise TxRejected unless `tx` is valid RIGHT NOW.

        With include_mempool, pending transactions count as applied, so
        a conflict with an unmined spender is already a double spend;
        without it, only the chain is consulted. Locktimes are judged
        against the current clock either way.
        """
        with self._lock:
            view = self._projected() if include_mempool else self.utxo
            self._validate(tx, view, self.clock)

    def _projected(self) -> dict[OutPoint, TxOutput]:
        """Current utxo set with the whole mempool applied, cached."""
        if self._view_cache is None:
            view = dict(self.utxo)
            for pending in self.mempool:
                self._project(pending, view)
            self._view_cache = view
        return self._view_cache

    def _pool_outs(self) -> dict[OutPoint, TxOutput]:
        """Outputs created by mempool transactions, spent or not, cached."""
        if self._pool_cache is None:
            outs: dict[OutPoint, TxOutput] = {}
            for pending in self.mempool:
                txid = pending.txid(self.config.p_bytes)
                for i, out in enumerate(pending.outputs):
                    outs[OutPoint(txid, i)] = out
            self._pool_cache = outs
        return self._pool_cache

    def _project(self, tx: Transaction, view: dict[OutPoint, TxOutput]) -> None:
        for tin in tx.inputs:
            view.pop(tin.prev, None)
        txid = tx.txid(self.config.p_bytes)
        for i, out in enumerate(tx.outputs):
            view[OutPoint(txid, i)] = out

    def _validate(self, tx: Transaction, view, clock: int | None) -> None:
        # view: any OutPoint -> TxOutput mapping; clock=None skips the
        # locktime check, which is how admission defers it to the miner.
        cfg = self.config
        for i, out in enumerate(tx.outputs):
            if len(out.payload) > cfg.iota:
                raise TxRejected(
                    REASON_PAYLOAD,
                    f"output {i} carries {len(out.payload)} bytes, budget {cfg.iota}",
                )
        if not tx.inputs:
            raise TxRejected(REASON_INFLATION, "only genesis may mint")
        seen: set[OutPoint] = set()
        for tin in tx.inputs:
            if tin.prev in seen:
                raise TxRejected(REASON_DOUBLE_SPEND, "outpoint claimed twice in one tx")
            seen.add(tin.prev)
            if tin.prev not in view:
                raise TxRejected(
                    REASON_DOUBLE_SPEND,
                    f"input {tin.prev.txid.hex()}:{tin.prev.index} is spent or unknown",
                )
        in_sum = sum(view[tin.prev].value for tin in tx.inputs)
        out_sum = sum(out.value for out in tx.outputs)
        if out_sum + cfg.fee > in_sum:
            raise TxRejected(
                REASON_INFLATION,
                f"outputs {out_sum} + fee {cfg.fee} exceed inputs {in_sum}",
            )
        for i, tin in enumerate(tx.inputs):
            ctx = SpendContext(self, tx, i, tin.prev, view[tin.prev])
            ok, detail = evaluate(ctx)
            if not ok:
                raise TxRejected(REASON_SCRIPT, f"input {i}: {detail}")
        if clock is not None and tx.locktime > clock:
            raise TxRejected(
                REASON_LOCKTIME,
                f"locktime {tx.locktime} > clock {clock}",
            )

    # -- mutation --------------------------------------------------------

    def submit(self, tx: Transaction) -> bytes:
        """Queue for the next block; only incurable defects are refused.

        A future locktime parks the transaction until its time comes.
        A conflict with another PENDING transaction is admitted too:
        redemption is judged against the chain, and the miner settles
        such races in submission order. What does reject here: oversize
        payloads, a duplicate of an already-submitted transaction,
        inputs unknown to both chain and mempool or redeemed on chain,
        value creation, and failing scripts.
        """
        with self._lock:
            txid = tx.txid(self.config.p_bytes)
            if txid in self.txs or txid in self._pool_ids:
                raise TxRejected(
                    REASON_DOUBLE_SPEND, f"transaction {txid.hex()} already submitted"
                )
            view = ChainMap(self._pool_outs(), self.utxo)
            self._validate(tx, view, None)
            self.mempool.append(tx)
            self._pool_ids.add(txid)
            for i, out in enumerate(tx.outputs):
                self._pool_outs()[OutPoint(txid, i)] = out
            if self._view_cache is not None:
                self._project(tx, self._view_cache)
            return txid

    def mine_block(self) -> Block:
        """Advance the clock one tick and fold the mempool into a block.

        First-in-first-out over the pool: a transaction whose locktime
        is still in the future stays queued, anything else invalid at
        this point (race losers, children of withdrawn parents) is
        evicted for good.
        """
        with self._lock:
            self.clock += self.config.tick
            included: list[Transaction] = []
            kept: list[Transaction] = []
            for tx in self.mempool:
                if tx.txid(self.config.p_bytes) in self.held:
                    kept.append(tx)
                    continue
                try:
                    self._validate(tx, self.utxo, self.clock)
                except TxRejected as rej:
                    if rej.reason == REASON_LOCKTIME:
                        kept.append(tx)
                    else:
                        self.evicted += 1
                    continue
                self._apply(tx)
                included.append(tx)
            self.mempool = kept
            self._view_cache = None
            self._pool_cache = None
            self._pool_ids = {tx.txid(self.config.p_bytes) for tx in kept}
            block = Block(height=len(self.blocks), time=self.clock, txs=tuple(included))
            self.blocks.append(block)
            return block

    def mine_until(self, clock: int) -> None:
        while self.clock < clock:
            self.mine_block()

    # A held transaction sits in the mempool but is skipped by the miner;
    # this models a broadcast that has not reached the chain yet, which is
    # the situation the pre-deadline abort path exists for.

    def hold_tx(self, txid: bytes) -> None:
        with self._lock:
            self.held.add(txid)

    def release_tx(self, txid: bytes) -> None:
        with self._lock:
            self.held.discard(txid)

    def withdraw_tx(self, txid: bytes) -> bool:
        """Drop an unmined transaction from the mempool; True if removed."""
        with self._lock:
            for i, tx in enumerate(self.mempool):
                if tx.txid(self.config.p_bytes) == txid:
                    del self.mempool[i]
                    self.held.discard(txid)
                    self._pool_ids.discard(txid)
                    self._view_cache = None
                    self._pool_cache = None
                    return True
            return False

    def in_mempool(self, txid: bytes) -> bool:
        with self._lock:
            return txid in self._pool_ids

    def _apply(self, tx: Transaction) -> None:
        txid = tx.txid(self.config.p_bytes)
        if txid in self.txs:
            if self.txs[txid].body != tx.body:
                raise CorruptChainError(f"txid collision at {txid.hex()}")
            raise CorruptChainError(f"duplicate transaction {txid.hex()}")
        in_sum = 0
        for i, tin in enumerate(tx.inputs):
            in_sum += self.utxo.pop(tin.prev).value
            self.spent_by[tin.prev] = OutPoint(txid, i)
        out_sum = 0
        for i, out in enumerate(tx.outputs):
            self.utxo[OutPoint(txid, i)] = out
            out_sum += out.value
        if tx.inputs:
            self.fees_collected += in_sum - out_sum
        else:
            self.minted += out_sum
        self.txs[txid] = tx
        self.op_counts["tx_write"] += 1

    # -- persistence -----------------------------------------------------

    def dump(self) -> bytes:
        """Versioned snapshot; load() rebuilds identical state."""
        with self._lock:
            out = [
                _MAGIC,
                _u32(_FORMAT_VERSION),
                _blob(self.config.to_json().encode()),
                _u64(self.clock),
                _u64(self.evicted),
                _u32(len(self.blocks)),
            ]
            for block in self.blocks:
                out.append(_u64(block.height))
                out.append(_u64(block.time))
                out.append(_u32(len(block.txs)))
                out.extend(_blob(tx.encode()) for tx in block.txs)
            out.append(_u32(len(self.mempool)))
            out.extend(_blob(tx.encode()) for tx in self.mempool)
            out.append(_u32(len(self.held)))
            out.extend(_blob(txid) for txid in sorted(self.held))
            return b"".join(out)

    @classmethod
    def load(cls, data: bytes) -> "Ledger":
        r = Reader(data)
        if r.take(4) != _MAGIC:
            raise CorruptChainError("bad snapshot magic")
        version = r.u32()
        if version != _FORMAT_VERSION:
            raise CorruptChainError(f"unsupported snapshot version {version}")
        config = SimConfig.from_json(r.blob().decode())
        clock = r.u64()
        evicted = r.u64()

        ledger = cls.__new__(cls)
        ledger.config = config
        ledger.clock = clock
        ledger.blocks = []
        ledger.mempool = []
        ledger.held = set()
        ledger.utxo = {}
        ledger.spent_by = {}
        ledger.txs = {}
        ledger.minted = 0
        ledger.fees_collected = 0
        ledger.evicted = evicted
        ledger.op_counts = {"tx_read": 0, "tx_write": 0}
        ledger._lock = threading.RLock()
        ledger._view_cache = None
        ledger._pool_cache = None
        ledger._pool_ids = set()

        for _ in range(r.u32()):
            height = r.u64()
            time = r.u64()
            txs = tuple(Transaction.decode(Reader(r.blob())) for _ in range(r.u32()))
            try:
                for tx in txs:
                    ledger._apply(tx)
            except KeyError as exc:
                raise CorruptChainError("snapshot spends unknown output") from exc
            ledger.blocks.append(Block(height, time, txs))
        for _ in range(r.u32()):
            pending = Transaction.decode(Reader(r.blob()))
            ledger.mempool.append(pending)
            ledger._pool_ids.add(pending.txid(config.p_bytes))
        for _ in range(r.u32()):
            ledger.held.add(r.blob())
        if not r.done():
            raise CorruptChainError("trailing bytes in snapshot")
        ledger.op_counts = {"tx_read": 0, "tx_write": 0}
        return ledger
