"""Shared fixtures: a funded ledger world and random corpora.

The corpus generator keeps keywords and plaintext in lockstep: a
document's keyword set is exactly its whitespace tokens, so the
plaintext-scan oracle below is an independent ground truth for every
search test. Query words and noise words come from disjoint alphabets.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import pytest

import chainsse.protocol  # noqa: F401  registers the gate script verifiers
from chainsse import crypto
from chainsse.chain.ledger import Ledger
from chainsse.chain.wallet import Party, Wallet
from chainsse.config import SimConfig
from chainsse.entropy import SeededEntropy
from chainsse.sse.corpus import Document

QUERY_WORDS = [f"kw{i:02d}" for i in range(20)]
NOISE_WORDS = [f"zz{i:03d}" for i in range(30)]


def make_corpus(
    rng: random.Random,
    max_docs: int = 50,
    max_keywords: int = 20,
    chunky: bool = True,
) -> list[Document]:
    """Random corpus whose keyword sets equal the plaintext tokens."""
    vocab = QUERY_WORDS[: rng.randint(1, max_keywords)]
    docs = []
    for doc_id in range(1, rng.randint(1, max_docs) + 1):
        toks = rng.sample(vocab, rng.randint(0, min(4, len(vocab))))
        toks += rng.sample(NOISE_WORDS, rng.randint(1, 3))
        rng.shuffle(toks)
        if chunky and rng.random() < 0.25:
            # long tail of noise pushes the ciphertext past one payload
            toks += rng.choices(NOISE_WORDS, k=25)
        pt = " ".join(toks).encode()
        docs.append(Document(doc_id, pt, frozenset(pt.decode().split())))
    return docs


def oracle_matches(docs: list[Document], w: str) -> set[int]:
    """Ground truth by plaintext scan, independent of the index."""
    return {d.doc_id for d in docs if w in d.plaintext.decode().split()}


@dataclass
class World:
    config: SimConfig
    entropy: SeededEntropy
    ledger: Ledger
    bank: Wallet
    owner: Wallet
    q: Wallet
    keys: crypto.KeyBundle


def make_world(seed: int | str = 0, config: SimConfig | None = None) -> World:
    cfg = config or SimConfig()
    ent = SeededEntropy(seed)
    bank = Party.generate("bank", ent.fork("bank"))
    owner = Party.generate("owner", ent.fork("owner"))
    q = Party.generate("q", ent.fork("q"))
    ledger = Ledger(cfg, bank.vk)
    bank_wallet = Wallet(ledger, bank)
    bank_wallet.pay(owner.vk, cfg.faucet // 2)
    bank_wallet.pay(q.vk, cfg.faucet // 8)
    ledger.mine_block()
    keys = crypto.gen(cfg.k, entropy=ent.fork("keys"))
    return World(cfg, ent, ledger, bank_wallet, Wallet(ledger, owner),
                 Wallet(ledger, q), keys)


@pytest.fixture
def world() -> World:
    return make_world()
