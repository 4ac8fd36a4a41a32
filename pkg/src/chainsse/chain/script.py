"""Script evaluation and the payload-verifier registry.

Signatures always cover the spending transaction's body, binding them to
its inputs, outputs and locktime. The gate script has two spending paths
distinguished by signature count: two signatures take the cooperative
refund path, one signature must be accompanied by approval from a named
payload verifier, a pure function registered under a string id that gets
read access to the ledger. Verifiers must be total: on garbage input they
return False rather than raise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

from .. import crypto
from ..errors import ParameterError
from .tx import (
    KIND_DATA,
    KIND_MULTISIG_2OF2,
    KIND_PAY_TO_PUBKEY,
    KIND_PAYLOAD_GATE,
    OutPoint,
    Reader,
    Transaction,
    TxOutput,
)

if TYPE_CHECKING:
    from .ledger import Ledger


@dataclass
class SpendContext:
    """Everything a verifier may look at while judging one input."""

    ledger: "Ledger"
    tx: Transaction
    input_index: int
    outpoint: OutPoint
    spent_output: TxOutput

    def spending_payload(self) -> bytes:
        """All output payloads of the spending tx, concatenated in order."""
        return b"".join(self.tx.payloads())


VerifierFn = Callable[[SpendContext, bytes], bool]

_registry: dict[str, VerifierFn] = {}


def register_verifier(name: str, fn: VerifierFn) -> None:
    if not name:
        raise ParameterError("verifier name must be non-empty")
    _registry[name] = fn


def get_verifier(name: str) -> VerifierFn | None:
    return _registry.get(name)


def evaluate(ctx: SpendContext) -> tuple[bool, str]:
    """Check one input's unlock data against the output it spends."""
    script = ctx.spent_output.script
    sigs = ctx.tx.inputs[ctx.input_index].signatures
    body = ctx.tx.body

    if script.kind == KIND_DATA:
        return False, "data output is unspendable"

    if script.kind == KIND_PAY_TO_PUBKEY:
        if len(sigs) != 1:
            return False, f"expected 1 signature, got {len(sigs)}"
        if not crypto.verify(script.keys[0], body, sigs[0]):
            return False, "bad signature"
        return True, ""

    if script.kind == KIND_MULTISIG_2OF2:
        if len(sigs) != 2:
            return False, f"expected 2 signatures, got {len(sigs)}"
        for vk, sig in zip(script.keys, sigs):
            if not crypto.verify(vk, body, sig):
                return False, "bad signature"
        return True, ""

    if script.kind == KIND_PAYLOAD_GATE:
        if len(sigs) == 2:
            for vk, sig in zip(script.keys, sigs):
                if not crypto.verify(vk, body, sig):
                    return False, "bad signature"
            return True, ""
        if len(sigs) == 1:
            if not crypto.verify(script.keys[0], body, sigs[0]):
                return False, "bad claimant signature"
            fn = get_verifier(script.verifier_id)
            if fn is None:
                return False, f"unknown verifier {script.verifier_id!r}"
            if not fn(ctx, script.args):
                return False, f"verifier {script.verifier_id!r} refused"
            return True, ""
        return False, f"expected 1 or 2 signatures, got {len(sigs)}"

    return False, f"unknown script kind {script.kind}"


def _mac_digest_verifier(ctx: SpendContext, args: bytes) -> bool:
    """Approve iff the spending payload MACs to the committed digest.

    args = len-prefixed key followed by len-prefixed digest.
    """
    try:
        r = Reader(args)
        key = r.blob()
        digest = r.blob()
        if not r.done():
            return False
        return crypto.keyed_hash(key, ctx.spending_payload()) == digest
    except (ParameterError, ValueError):
        return False


register_verifier("mac-digest", _mac_digest_verifier)
