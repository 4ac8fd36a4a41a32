"""Line-oriented scenario scripts driving the parties end to end.

A script is a list of `PARTY ACTION ARGS` lines, for example:

    owner ingest corpus
    world mine
    uprime ask beta 50 t=12
    world mine
    q fulfill offer-1
    world mine
    uprime collect offer-1

Parties are `owner` (holds the master keys and the deposit money; the
asker U′ in the payment flow), `q` (the searcher), and `world` (mining
and network control). Running a script yields a transcript: one record
per step with the clock, the acting party, the touched txid, and the
balance movement of both parties. Transcripts and the ledger are fully
determined by (config, seed, script, corpus files), which is what the
replay tests lean on.

Offers are auto-named `offer-1`, `offer-2`, … in creation order. The
`world hold` action keeps a named offer's ask out of mined blocks,
modelling a broadcast stuck in transit; `world release` undoes it.
"""

from __future__ import annotations

import json
from pathlib import Path

from .. import crypto
from ..chain.ledger import Ledger
from ..chain.wallet import Party, Wallet
from ..config import SimConfig
from ..entropy import SeededEntropy
from ..errors import ChainSSEError, ScenarioError
from ..sse.corpus import load_corpus
from ..sse.store import IngestResult, ingest
from .escrow import (
    Searcher,
    abort_before_inclusion,
    collect_results,
    fulfill,
    make_ask,
    refund_after_timeout,
)
from .offers import AskOffer, FuseRefund


class ScenarioRunner:
    def __init__(
        self,
        config: SimConfig | None = None,
        seed: int | str | bytes = 0,
        base_dir: str | Path = ".",
    ) -> None:
        self.config = config or SimConfig()
        self.base_dir = Path(base_dir)
        entropy = SeededEntropy(seed)
        self.entropy = entropy
        self.keys = crypto.gen(self.config.k, entropy=entropy.fork("keys"))
        self.bank = Party.generate("bank", entropy.fork("bank"))
        self.ledger = Ledger(self.config, self.bank.vk)
        self.owner = Party.generate("owner", entropy.fork("owner"))
        self.q = Party.generate("q", entropy.fork("q"))
        self.bank_wallet = Wallet(self.ledger, self.bank)
        self.owner_wallet = Wallet(self.ledger, self.owner)
        self.q_wallet = Wallet(self.ledger, self.q)
        self.searcher = Searcher(self.q_wallet)
        self.bank_wallet.pay(self.owner.vk, self.config.faucet // 2)
        self.bank_wallet.pay(self.q.vk, self.config.faucet // 8)
        self.ledger.mine_block()

        self.offers: dict[str, tuple[AskOffer, FuseRefund]] = {}
        self.ingests: list[IngestResult] = []
        self.transcript: list[dict] = []
        self._ingest_no = 0

    # -- bookkeeping -----------------------------------------------------

    def _record(self, step: int, party: str, action: str, txid: bytes | None,
                detail: str, before: tuple[int, int]) -> None:
        self.transcript.append(
            {
                "step": step,
                "clock": self.ledger.clock,
                "party": party,
                "action": action,
                "txid": txid.hex() if txid else "",
                "detail": detail,
                "owner_delta": self.owner_wallet.balance() - before[0],
                "q_delta": self.q_wallet.balance() - before[1],
            }
        )

    def _offer(self, step: int, name: str) -> tuple[AskOffer, FuseRefund]:
        if name not in self.offers:
            raise ScenarioError(step, f"unknown offer {name!r}")
        return self.offers[name]

    def _locator(self, step: int) -> bytes:
        if not self.ingests:
            raise ScenarioError(step, "ask before any ingest; there is no index")
        return self.ingests[-1].locator

    # -- the interpreter -------------------------------------------------

    def run(self, script: list[str] | str) -> list[dict]:
        lines = script.splitlines() if isinstance(script, str) else list(script)
        for step, raw in enumerate(lines, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            party, action, args = parts[0], parts[1] if len(parts) > 1 else "", parts[2:]
            before = (self.owner_wallet.balance(), self.q_wallet.balance())
            try:
                txid, detail = self._dispatch(step, party, action, args)
            except ScenarioError:
                raise
            except ChainSSEError as exc:
                raise ScenarioError(step, f"{action}: {exc}") from exc
            self._record(step, party, action, txid, detail, before)
        return self.transcript

    def _dispatch(
        self, step: int, party: str, action: str, args: list[str]
    ) -> tuple[bytes | None, str]:
        key = (party, action)
        if key == ("world", "mine"):
            blocks = self._int(step, args[0]) if args else 1
            for _ in range(blocks):
                self.ledger.mine_block()
            return None, f"clock={self.ledger.clock}"

        if key == ("world", "hold") or key == ("world", "release"):
            offer, _ = self._offer(step, self._arg(step, args, 0))
            if action == "hold":
                self.ledger.hold_tx(offer.ask_txid)
            else:
                self.ledger.release_tx(offer.ask_txid)
            return offer.ask_txid, action

        if key == ("world", "balances"):
            return None, (
                f"owner={self.owner_wallet.balance()} q={self.q_wallet.balance()}"
            )

        if key == ("owner", "ingest"):
            docs = load_corpus(self.base_dir / self._arg(step, args, 0))
            result = ingest(
                self.owner_wallet,
                self.keys,
                docs,
                self.config.scheme,
                self.entropy.fork(f"ingest-{self._ingest_no}"),
            )
            self._ingest_no += 1
            self.ingests.append(result)
            return result.locator, f"docs={len(docs)} delta={result.delta}"

        if key == ("uprime", "ask"):
            w = self._arg(step, args, 0)
            d_t = self._int(step, self._arg(step, args, 1))
            t_arg = self._arg(step, args, 2)
            if not t_arg.startswith("t="):
                raise ScenarioError(step, f"expected t=<clock>, got {t_arg!r}")
            deadline = self._int(step, t_arg[2:])
            offer, fuse = make_ask(
                self.owner_wallet, self.keys, w, d_t, deadline,
                self._locator(step), self.searcher,
            )
            name = f"offer-{len(self.offers) + 1}"
            self.offers[name] = (offer, fuse)
            return offer.ask_txid, f"{name} w={w} d_t={d_t} t={deadline}"

        if key == ("q", "fulfill"):
            offer, _ = self._offer(step, self._arg(step, args, 0))
            claim = fulfill(self.searcher, offer)
            return claim.return_txid, f"results={len(claim.ciphertexts)}"

        if key == ("q", "policy"):
            mode = self._arg(step, args, 0)
            if mode not in ("honest", "refuse-presign"):
                raise ScenarioError(step, f"unknown policy {mode!r}")
            self.searcher.presign = mode == "honest"
            return None, mode

        if key == ("uprime", "abort"):
            offer, _ = self._offer(step, self._arg(step, args, 0))
            tx = abort_before_inclusion(self.owner_wallet, offer)
            return tx.txid(self.config.p_bytes), "abort"

        if key == ("uprime", "refund"):
            offer, fuse = self._offer(step, self._arg(step, args, 0))
            txid = refund_after_timeout(self.ledger, offer, fuse)
            return txid, "refund submitted"

        if key == ("uprime", "collect"):
            offer, _ = self._offer(step, self._arg(step, args, 0))
            plain = collect_results(self.ledger, self.keys, offer)
            return offer.ask_txid, f"documents={len(plain)}"

        raise ScenarioError(step, f"unknown action {party!r} {action!r}")

    @staticmethod
    def _arg(step: int, args: list[str], i: int) -> str:
        if i >= len(args):
            raise ScenarioError(step, f"missing argument {i + 1}")
        return args[i]

    @staticmethod
    def _int(step: int, text: str) -> int:
        try:
            return int(text)
        except ValueError as exc:
            raise ScenarioError(step, f"expected an integer, got {text!r}") from exc

    def write_transcript(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            for event in self.transcript:
                fh.write(json.dumps(event, sort_keys=True) + "\n")


def run_scenario(
    script: list[str] | str,
    *,
    config: SimConfig | None = None,
    seed: int | str | bytes = 0,
    base_dir: str | Path = ".",
) -> list[dict]:
    """One-shot convenience wrapper; returns the transcript."""
    return ScenarioRunner(config, seed, base_dir).run(script)
