"""Parties, their signing keys, and transaction building.

A Party is a named Ed25519 keypair. A Wallet binds a party to a ledger
and builds correctly signed transactions from the party's spendable
outputs. Coin selection is oldest-first and deterministic; change always
returns to the party's own key, so with a zero fee every balance
assertion is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from .. import crypto
from ..entropy import EntropySource
from ..errors import InsufficientFundsError
from .ledger import Ledger
from .tx import OutPoint, Script, Transaction, TxInput, TxOutput


@dataclass
class Party:
    name: str
    sk: Ed25519PrivateKey = field(repr=False)
    vk: bytes

    @classmethod
    def generate(cls, name: str, entropy: EntropySource) -> "Party":
        sk = crypto.generate_signing_key(entropy)
        return cls(name, sk, crypto.verify_key_bytes(sk))

    def sign(self, message: bytes) -> bytes:
        return crypto.sign(self.sk, message)


class Wallet:
    def __init__(self, ledger: Ledger, party: Party) -> None:
        self.ledger = ledger
        self.party = party

    @property
    def vk(self) -> bytes:
        return self.party.vk

    def balance(self) -> int:
        return self.ledger.balance_of(self.party.vk)

    def select(self, amount: int) -> tuple[list[OutPoint], int]:
        """Oldest-first outpoints covering `amount`, plus their total."""
        picked: list[OutPoint] = []
        total = 0
        for outpoint, out in self.ledger.utxos_for(self.party.vk):
            picked.append(outpoint)
            total += out.value
            if total >= amount:
                return picked, total
        raise InsufficientFundsError(
            f"{self.party.name} holds {total}, needs {amount}"
        )

    def sign_tx(self, tx: Transaction) -> Transaction:
        """Attach this party's signature over the body to every input."""
        sig = self.party.sign(tx.body)
        return Transaction(
            tuple(tin.with_signatures(sig) for tin in tx.inputs),
            tx.outputs,
            tx.locktime,
        )

    def build(
        self,
        outputs: list[TxOutput],
        *,
        spend: int | None = None,
        locktime: int = 0,
    ) -> Transaction:
        """Signed tx paying `outputs`, funded from own coins with change."""
        fee = self.ledger.config.fee
        need = (spend if spend is not None else sum(o.value for o in outputs)) + fee
        picked, total = self.select(need)
        outs = list(outputs)
        change = total - need
        if change > 0:
            outs.append(TxOutput(change, Script.p2pk(self.party.vk)))
        tx = Transaction(
            tuple(TxInput(op) for op in picked), tuple(outs), locktime
        )
        return self.sign_tx(tx)

    def pay(self, to_vk: bytes, amount: int) -> bytes:
        """Submit a simple payment; returns its txid."""
        tx = self.build([TxOutput(amount, Script.p2pk(to_vk))])
        return self.submit(tx)

    def embed_tx(self, payloads: list[tuple[bytes, int]]) -> Transaction:
        """Signed tx whose only job is carrying data outputs."""
        outs = [
            TxOutput(0, Script.data(), payload, tag) for payload, tag in payloads
        ]
        return self.build(outs, spend=0)

    def submit(self, tx: Transaction) -> bytes:
        return self.ledger.submit(tx)
