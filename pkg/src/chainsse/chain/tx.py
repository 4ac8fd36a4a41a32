"""Transaction data model with a canonical byte encoding.

A transaction is (inputs, outputs, locktime). Its id is a truncated hash
of the *body*, which covers everything except the input unlock data, so
signatures can commit to the transaction that carries them. All integers
are big-endian and all variable-length fields are length-prefixed; the
encoding is injective, which the id computation and the signing scheme
both rely on.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, NamedTuple

from ..errors import ParameterError

# Payload roles. OPAQUE payloads have no chain-level structure. The three
# SPLIT tags mark the members of a keyword record spread across linked
# transactions; CHUNK marks one fragment of an oversized document.
TAG_OPAQUE = 0
TAG_SPLIT_HASH = 1
TAG_SPLIT_BODY = 2
TAG_SPLIT_TOKEN = 3
TAG_CHUNK = 4

_TAGS = (TAG_OPAQUE, TAG_SPLIT_HASH, TAG_SPLIT_BODY, TAG_SPLIT_TOKEN, TAG_CHUNK)

KIND_DATA = 0
KIND_PAY_TO_PUBKEY = 1
KIND_MULTISIG_2OF2 = 2
KIND_PAYLOAD_GATE = 3


def _u8(v: int) -> bytes:
    return v.to_bytes(1, "big")


def _u32(v: int) -> bytes:
    return v.to_bytes(4, "big")


def _u64(v: int) -> bytes:
    return v.to_bytes(8, "big")


def _blob(b: bytes) -> bytes:
    return _u32(len(b)) + b


class Reader:
    """Cursor over a byte string; raises ParameterError on truncation."""

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ParameterError("truncated encoding")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "big")

    def u64(self) -> int:
        return int.from_bytes(self.take(8), "big")

    def blob(self) -> bytes:
        return self.take(self.u32())

    def done(self) -> bool:
        return self.pos == len(self.data)


@dataclass(frozen=True)
class Script:
    """Spending condition attached to an output.

    data        unspendable carrier for payload-only outputs
    p2pk        one signature by `keys[0]`
    multisig    signatures by both keys, in order
    gate        either sigs by both keys (refund path), or a signature by
                `keys[0]` plus approval from the named payload verifier
    """

    kind: int
    keys: tuple[bytes, ...] = ()
    verifier_id: str = ""
    args: bytes = b""

    @staticmethod
    def data() -> "Script":
        return Script(KIND_DATA)

    @staticmethod
    def p2pk(vk: bytes) -> "Script":
        return Script(KIND_PAY_TO_PUBKEY, (vk,))

    @staticmethod
    def multisig(vk_a: bytes, vk_b: bytes) -> "Script":
        return Script(KIND_MULTISIG_2OF2, (vk_a, vk_b))

    @staticmethod
    def gate(claimant_vk: bytes, refund_vk: bytes, verifier_id: str, args: bytes) -> "Script":
        return Script(KIND_PAYLOAD_GATE, (claimant_vk, refund_vk), verifier_id, args)

    def encode(self) -> bytes:
        out = [_u8(self.kind), _u8(len(self.keys))]
        out.extend(_blob(k) for k in self.keys)
        out.append(_blob(self.verifier_id.encode()))
        out.append(_blob(self.args))
        return b"".join(out)

    @staticmethod
    def decode(r: Reader) -> "Script":
        kind = r.u8()
        keys = tuple(r.blob() for _ in range(r.u8()))
        verifier_id = r.blob().decode()
        args = r.blob()
        return Script(kind, keys, verifier_id, args)


class OutPoint(NamedTuple):
    txid: bytes
    index: int


@dataclass(frozen=True)
class TxInput:
    """Reference to an unspent output plus the data that unlocks it."""

    prev: OutPoint
    signatures: tuple[bytes, ...] = ()

    def with_signatures(self, *sigs: bytes) -> "TxInput":
        return TxInput(self.prev, tuple(sigs))


@dataclass(frozen=True)
class TxOutput:
    value: int
    script: Script
    payload: bytes = b""
    payload_tag: int = TAG_OPAQUE

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ParameterError("output value must be >= 0")
        if self.script.kind == KIND_DATA and self.value != 0:
            raise ParameterError("data outputs cannot carry value")
        if self.payload_tag not in _TAGS:
            raise ParameterError(f"unknown payload tag {self.payload_tag}")


@dataclass(frozen=True)
class Transaction:
    inputs: tuple[TxInput, ...]
    outputs: tuple[TxOutput, ...]
    locktime: int = 0

    @cached_property
    def body(self) -> bytes:
        """Canonical encoding without unlock data; the signing message."""
        out = [_u32(len(self.inputs))]
        for tin in self.inputs:
            out.append(_blob(tin.prev.txid))
            out.append(_u32(tin.prev.index))
        out.append(_u32(len(self.outputs)))
        for tout in self.outputs:
            out.append(_u64(tout.value))
            out.append(tout.script.encode())
            out.append(_blob(tout.payload))
            out.append(_u8(tout.payload_tag))
        out.append(_u64(self.locktime))
        return b"".join(out)

    def txid(self, id_len: int) -> bytes:
        return hashlib.sha256(self.body).digest()[:id_len]

    def encode(self) -> bytes:
        unlocks = []
        for tin in self.inputs:
            unlocks.append(_u8(len(tin.signatures)))
            unlocks.extend(_blob(s) for s in tin.signatures)
        return _blob(self.body) + b"".join(unlocks)

    @staticmethod
    def decode(r: Reader) -> "Transaction":
        body = Reader(r.blob())
        prevs = []
        for _ in range(body.u32()):
            txid = body.blob()
            prevs.append(OutPoint(txid, body.u32()))
        outputs = []
        for _ in range(body.u32()):
            value = body.u64()
            script = Script.decode(body)
            payload = body.blob()
            outputs.append(TxOutput(value, script, payload, body.u8()))
        locktime = body.u64()
        if not body.done():
            raise ParameterError("trailing bytes in transaction body")
        inputs = []
        for prev in prevs:
            sigs = tuple(r.blob() for _ in range(r.u8()))
            inputs.append(TxInput(prev, sigs))
        return Transaction(tuple(inputs), tuple(outputs), locktime)

    def payloads(self) -> Iterator[bytes]:
        for tout in self.outputs:
            if tout.payload:
                yield tout.payload
