"""Encrypted-index construction and token-based search over the ledger."""

from .corpus import Document, load_corpus, write_corpus
from .tokens import Trapdoor, chain_key, derive_trapdoor
from .postings import PostingList, build_posting_lists
from .chunks import ChunkPlan, chunk_ciphertext, chunk_count, reassemble
from .index import IndexEntry, build_index_A
from .search import SearchResult, decrypt_results, phi_search_A, phi_search_B

__all__ = [
    "ChunkPlan",
    "Document",
    "IndexEntry",
    "PostingList",
    "SearchResult",
    "Trapdoor",
    "build_index_A",
    "build_posting_lists",
    "chain_key",
    "chunk_ciphertext",
    "chunk_count",
    "decrypt_results",
    "derive_trapdoor",
    "load_corpus",
    "phi_search_A",
    "phi_search_B",
    "reassemble",
    "write_corpus",
]
