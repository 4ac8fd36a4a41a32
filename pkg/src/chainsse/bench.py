"""Index-build and search cost sweeps over growing keyword sets.

The sweep follows the shape measurement the chain-walk scheme is about:
each extra (keyword, document) pair adds a constant number of ledger
writes and primitive calls to the build, so build op-count is linear in
pair count; a search walks from the head to its keyword, so its hop
count is the keyword's distance from the end of dictionary order.

Corpora are synthetic: one unique keyword per document, so pair count,
document count and keyword count coincide and Δ stays 1. Keywords are
zero-padded numerals, which makes dictionary order equal insertion
order. Records go through the three-transaction split at the default
80-byte budget, exactly the layout the scheme prescribes for tight
payload limits.

Op-counts are the portable metric (transactions written plus keyed
primitive invocations); wall-clock seconds ride along as context and
are excluded from any acceptance claim.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import crypto
from .chain.ledger import Ledger
from .chain.wallet import Party, Wallet
from .config import SimConfig
from .entropy import SeededEntropy
from .errors import ParameterError
from .sse.corpus import Document
from .sse.search import phi_search_B
from .sse.store import ingest
from .sse.tokens import derive_trapdoor

DEFAULT_PAIR_COUNTS = (100, 200, 400, 800)


@dataclass(frozen=True)
class BenchRow:
    pairs: int
    keyword_pos: int  # 1-based dictionary/insertion position
    index_ops: int
    index_seconds: float
    hops: int
    search_seconds: float


def _keyword(i: int) -> str:
    return f"kw{i:05d}"


def _positions(m: int, samples: int) -> list[int]:
    """`samples` distinct 1-based positions, endpoints always included."""
    if samples < 2 or m < 2:
        return list(range(1, m + 1))[:samples] or [1]
    step = (m - 1) / (samples - 1)
    return sorted({round(1 + i * step) for i in range(samples)})


def run_bench(
    pair_counts: tuple[int, ...] = DEFAULT_PAIR_COUNTS,
    *,
    samples: int = 8,
    seed: int | str | bytes = 0,
    config: SimConfig | None = None,
) -> list[BenchRow]:
    cfg = config or SimConfig(scheme="B")
    if cfg.scheme != "B":
        raise ParameterError("the sweep measures the chain-walk scheme; use scheme B")
    rows: list[BenchRow] = []
    entropy = SeededEntropy(seed)
    for pairs in pair_counts:
        docs = [
            Document(i, f"doc {i} body".encode(), frozenset({_keyword(i)}))
            for i in range(1, pairs + 1)
        ]
        bank = Party.generate("bank", entropy.fork(f"bank-{pairs}"))
        ledger = Ledger(cfg, bank.vk)
        wallet = Wallet(ledger, bank)
        keys = crypto.gen(cfg.k, entropy=entropy.fork(f"keys-{pairs}"))

        crypto.reset_counters()
        writes_before = ledger.op_counts["tx_write"]
        t0 = time.perf_counter()
        result = ingest(wallet, keys, docs, "B", entropy.fork(f"ingest-{pairs}"))
        index_seconds = time.perf_counter() - t0
        index_ops = (
            ledger.op_counts["tx_write"] - writes_before + sum(crypto.counters.values())
        )

        for pos in _positions(pairs, samples):
            trapdoor = derive_trapdoor(keys, _keyword(pos), "B", p_bytes=cfg.p_bytes)
            t0 = time.perf_counter()
            hit = phi_search_B(ledger, trapdoor, result.locator)
            search_seconds = time.perf_counter() - t0
            assert hit is not None
            rows.append(
                BenchRow(
                    pairs=pairs,
                    keyword_pos=pos,
                    index_ops=index_ops,
                    index_seconds=index_seconds,
                    hops=hit.hops,
                    search_seconds=search_seconds,
                )
            )
    return rows
