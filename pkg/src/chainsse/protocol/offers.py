"""Offer records and the byte formats that ride in ask and return txs.

The ask transaction's data outputs carry the trapdoor tuple plus the
index locator, so a searcher (and the return gate) can reconstruct the
query from the chain alone. The return transaction's data outputs carry
the matched ciphertexts plus the claimed digest. Both formats are
length-prefixed and versionless by design: their framing byte doubles as
the scheme tag.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..chain.tx import Reader, Transaction, _blob, _u32
from ..errors import ParameterError
from ..sse.tokens import Trapdoor

_SCHEME_BYTE = {"A": 0x41, "B": 0x42}
_BYTE_SCHEME = {v: k for k, v in _SCHEME_BYTE.items()}


def serialize_ask_payload(trapdoor: Trapdoor, locator: bytes) -> bytes:
    out = [
        bytes([_SCHEME_BYTE[trapdoor.scheme]]),
        _blob(trapdoor.t_w),
        _blob(trapdoor.l_w),
        _blob(trapdoor.k_w),
        _blob(trapdoor.k11 or b""),
        _blob(locator),
    ]
    return b"".join(out)


def parse_ask_payload(data: bytes) -> tuple[Trapdoor, bytes]:
    r = Reader(data)
    scheme = _BYTE_SCHEME.get(r.u8())
    if scheme is None:
        raise ParameterError("unknown scheme tag in ask payload")
    t_w, l_w, k_w, k11, locator = (r.blob() for _ in range(5))
    if not r.done():
        raise ParameterError("trailing bytes in ask payload")
    if scheme == "B" and not k11:
        raise ParameterError("chain-walk ask payload lacks the chain key")
    return Trapdoor(scheme, t_w, l_w, k_w, k11 or None), locator


def serialize_return_payload(ciphertexts: tuple[bytes, ...], h_w: bytes) -> bytes:
    out = [_u32(len(ciphertexts))]
    out.extend(_blob(c) for c in ciphertexts)
    out.append(_blob(h_w))
    return b"".join(out)


def parse_return_payload(data: bytes) -> tuple[tuple[bytes, ...], bytes]:
    r = Reader(data)
    cts = tuple(r.blob() for _ in range(r.u32()))
    h_w = r.blob()
    if not r.done():
        raise ParameterError("trailing bytes in return payload")
    return cts, h_w


@dataclass
class AskOffer:
    """Everything both parties hold about one open search offer."""

    ask_tx: Transaction
    ask_txid: bytes
    gate_index: int  # which ask output holds the deposit
    trapdoor: Trapdoor
    locator: bytes
    d_t: int
    deadline: int
    owner_vk: bytes
    searcher_vk: bytes
    funding: tuple  # the T_q outpoints the ask spends; abort re-spends them
    submitted: bool = False

    @property
    def gate_outpoint(self):
        from ..chain.tx import OutPoint

        return OutPoint(self.ask_txid, self.gate_index)


@dataclass
class FuseRefund:
    """Pre-signed 2-of-2 refund, valid only once the deadline has passed."""

    fuse_tx: Transaction
    fuse_txid: bytes
    deadline: int


@dataclass
class ReturnClaim:
    return_tx: Transaction
    return_txid: bytes
    ciphertexts: tuple[bytes, ...]
    h_w: bytes
    hops: int | None = None
