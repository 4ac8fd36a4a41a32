"""On-disk workspace a CLI session operates in.

One directory holds everything: config, the owner's key file (mode
0600), the serialized ledger, the index-head broadcast file, saved
offers, and an append-only command transcript. All party keys and all
randomness derive from the workspace seed through labelled forks, and
per-command entropy is labelled by a persistent step counter, so
replaying the same commands in a fresh workspace reproduces the ledger
and transcripts byte for byte. A lock file serializes commands.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from filelock import FileLock

from . import crypto
from .chain.ledger import Ledger
from .chain.tx import Reader, Transaction
from .chain.wallet import Party, Wallet
from .config import SimConfig
from .crypto import KeyBundle
from .entropy import SeededEntropy
from .errors import ConfigError, NotFoundError
from .protocol.offers import AskOffer, FuseRefund, parse_ask_payload

CONFIG_FILE = "config.json"
STATE_FILE = "state.json"
KEYS_FILE = "keys.json"
LEDGER_FILE = "ledger.bin"
BROADCAST_FILE = "broadcast.json"
OFFERS_DIR = "offers"
TRANSCRIPT_DIR = "transcripts"
COMMANDS_LOG = "commands.jsonl"
LOCK_FILE = ".lock"


class Workspace:
    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        if not (self.root / CONFIG_FILE).is_file():
            raise ConfigError(f"{self.root} is not an initialized workspace; run init")
        self.config = SimConfig.load(self.root / CONFIG_FILE)
        self.state = json.loads((self.root / STATE_FILE).read_text())
        self._entropy = SeededEntropy(self.state["seed"])
        self.bank = Party.generate("bank", self._entropy.fork("bank"))
        self.owner = Party.generate("owner", self._entropy.fork("owner"))
        self.q = Party.generate("q", self._entropy.fork("q"))
        self.ledger = Ledger.load((self.root / LEDGER_FILE).read_bytes())
        self.owner_wallet = Wallet(self.ledger, self.owner)
        self.q_wallet = Wallet(self.ledger, self.q)
        self._step = -1

    # -- lifecycle -------------------------------------------------------

    @classmethod
    def create(cls, root: str | Path, config: SimConfig, seed: int | str) -> "Workspace":
        root = Path(root)
        if (root / CONFIG_FILE).exists():
            raise ConfigError(f"{root} already holds a workspace")
        root.mkdir(parents=True, exist_ok=True)
        (root / OFFERS_DIR).mkdir(exist_ok=True)
        (root / TRANSCRIPT_DIR).mkdir(exist_ok=True)
        config.save(root / CONFIG_FILE)
        (root / STATE_FILE).write_text(
            json.dumps({"seed": seed, "steps": 0, "docs": {}, "corpus_dir": "", "offers": 0},
                       sort_keys=True) + "\n"
        )
        entropy = SeededEntropy(seed)
        bank = Party.generate("bank", entropy.fork("bank"))
        owner = Party.generate("owner", entropy.fork("owner"))
        q = Party.generate("q", entropy.fork("q"))
        ledger = Ledger(config, bank.vk)
        bank_wallet = Wallet(ledger, bank)
        bank_wallet.pay(owner.vk, config.faucet // 2)
        bank_wallet.pay(q.vk, config.faucet // 8)
        ledger.mine_block()
        (root / LEDGER_FILE).write_bytes(ledger.dump())
        return cls(root)

    def lock(self) -> FileLock:
        return FileLock(self.root / LOCK_FILE)

    def save_ledger(self) -> None:
        (self.root / LEDGER_FILE).write_bytes(self.ledger.dump())

    def save_state(self) -> None:
        (self.root / STATE_FILE).write_text(json.dumps(self.state, sort_keys=True) + "\n")

    def begin_step(self) -> int:
        """Claim the next step number; every command claims exactly one.

        The counter is persisted before the command body runs, so the
        entropy label and the transcript line agree even if the command
        later fails.
        """
        self._step = self.state["steps"]
        self.state["steps"] += 1
        self.save_state()
        return self._step

    def step_entropy(self) -> SeededEntropy:
        return self._entropy.fork(f"step-{self._step}")

    def record(self, command: str, args: list[str], txid: str = "", detail: str = "") -> None:
        event = {
            "step": self._step,
            "clock": self.ledger.clock,
            "command": command,
            "args": args,
            "txid": txid,
            "detail": detail,
        }
        path = self.root / TRANSCRIPT_DIR / COMMANDS_LOG
        with open(path, "a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    # -- owner keys ------------------------------------------------------

    def write_keys(self) -> KeyBundle:
        keys = crypto.gen(self.config.k, entropy=self._entropy.fork("keys"))
        path = self.root / KEYS_FILE
        path.write_text(
            json.dumps({"k": self.config.k, "k1": keys.k1.hex(), "k2": keys.k2.hex()},
                       sort_keys=True) + "\n"
        )
        os.chmod(path, 0o600)
        return keys

    def read_keys(self) -> KeyBundle:
        path = self.root / KEYS_FILE
        if not path.is_file():
            raise ConfigError("no key file; run keygen first")
        raw = json.loads(path.read_text())
        return KeyBundle(bytes.fromhex(raw["k1"]), bytes.fromhex(raw["k2"]))

    # -- offers ----------------------------------------------------------

    def save_offer(self, offer: AskOffer, fuse: FuseRefund, keyword: str) -> str:
        self.state["offers"] += 1
        name = f"offer-{self.state['offers']}"
        (self.root / OFFERS_DIR / f"{name}.json").write_text(
            json.dumps(
                {
                    "ask": offer.ask_tx.encode().hex(),
                    "fuse": fuse.fuse_tx.encode().hex(),
                    "keyword": keyword,
                },
                sort_keys=True,
            )
            + "\n"
        )
        self.save_state()
        return name

    def load_offer(self, name: str) -> tuple[AskOffer, FuseRefund]:
        path = self.root / OFFERS_DIR / f"{name}.json"
        if not path.is_file():
            raise NotFoundError(f"no saved offer {name!r}")
        raw = json.loads(path.read_text())
        ask_tx = Transaction.decode(Reader(bytes.fromhex(raw["ask"])))
        fuse_tx = Transaction.decode(Reader(bytes.fromhex(raw["fuse"])))
        p = self.config.p_bytes
        trapdoor, locator = parse_ask_payload(b"".join(ask_tx.payloads()))
        gate = ask_tx.outputs[0]
        offer = AskOffer(
            ask_tx=ask_tx,
            ask_txid=ask_tx.txid(p),
            gate_index=0,
            trapdoor=trapdoor,
            locator=locator,
            d_t=gate.value,
            deadline=fuse_tx.locktime,
            owner_vk=gate.script.keys[1],
            searcher_vk=gate.script.keys[0],
            funding=tuple(tin.prev for tin in ask_tx.inputs),
            submitted=True,
        )
        return offer, FuseRefund(fuse_tx, fuse_tx.txid(p), fuse_tx.locktime)
