"""Keyword search over encrypted documents stored on a simulated ledger.

Two schemes share one transaction substrate: scheme A publishes a single
sorted index array per corpus, scheme B threads per-keyword records through
a hash chain of transactions and supports constant-size per-pair updates.
A payment protocol built on the same ledger pays the search service only
for results that verify against the owner's keyed digests.
"""

__version__ = "1.0.0"

from .config import SimConfig
from .crypto import KeyBundle, gen
from .entropy import SeededEntropy, SystemEntropy

__all__ = [
    "KeyBundle",
    "SeededEntropy",
    "SimConfig",
    "SystemEntropy",
    "gen",
    "__version__",
]
