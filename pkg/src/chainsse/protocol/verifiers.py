"""The return gate: script-level check that a claim carries the goods.

The deposit output can be claimed with one signature only if this
verifier approves the spending transaction's payload. It reconstructs
the query from the ask transaction being spent (trapdoor plus index
locator live in its data outputs), re-reads the index entry, and
accepts only when the claimed digest equals the stored one AND the MAC
over the returned ciphertext concatenation reproduces it. A keyword
absent from the index is payable exactly with the empty result and the
MAC over the empty string; searching is work even when nothing matches.

Everything here must be total over adversarial bytes: any parse or
lookup failure is a refusal, never an exception escaping into ledger
validation.
"""

from __future__ import annotations

from .. import crypto
from ..chain.script import SpendContext, register_verifier
from ..errors import ChainSSEError
from ..sse.search import find_entry_A, find_entry_B
from .offers import parse_ask_payload, parse_return_payload

GATE_ID = "sse-return"


def _sse_return(ctx: SpendContext, args: bytes) -> bool:
    try:
        ask_tx = ctx.ledger.get_tx(ctx.outpoint.txid)
        trapdoor, locator = parse_ask_payload(b"".join(ask_tx.payloads()))
        cts, h_claim = parse_return_payload(ctx.spending_payload())

        if trapdoor.scheme == "A":
            entry = find_entry_A(ctx.ledger, trapdoor, locator)
        else:
            found = find_entry_B(ctx.ledger, trapdoor, locator)
            entry = found[0] if found else None

        expected = entry.h_w if entry else crypto.keyed_hash(trapdoor.k_w, b"")
        if entry is None and cts:
            return False
        if h_claim != expected:
            return False
        return crypto.keyed_hash(trapdoor.k_w, b"".join(cts)) == expected
    except (ChainSSEError, ValueError):
        return False


register_verifier(GATE_ID, _sse_return)
