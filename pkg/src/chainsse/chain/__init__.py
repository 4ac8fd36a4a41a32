"""Deterministic single-process ledger: transactions, scripts, blocks."""

from .tx import (
    OutPoint,
    Script,
    Transaction,
    TxInput,
    TxOutput,
    TAG_OPAQUE,
    TAG_SPLIT_HASH,
    TAG_SPLIT_BODY,
    TAG_SPLIT_TOKEN,
    TAG_CHUNK,
)
from .ledger import Block, Ledger

__all__ = [
    "Block",
    "Ledger",
    "OutPoint",
    "Script",
    "TAG_CHUNK",
    "TAG_OPAQUE",
    "TAG_SPLIT_BODY",
    "TAG_SPLIT_HASH",
    "TAG_SPLIT_TOKEN",
    "Transaction",
    "TxInput",
    "TxOutput",
]
