"""Document corpora on disk.

A corpus directory holds one file per document plus an optional manifest
`keywords.tsv` with lines `doc_id<TAB>comma,separated,keywords`. With a
manifest, document ids come from its first column and each id names the
file with that stem. Without one, files are taken in sorted name order,
ids start at 1, and keywords are the whitespace-split words of the text.
Linguistic processing beyond that split is deliberately out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError

MANIFEST_NAME = "keywords.tsv"


@dataclass(frozen=True)
class Document:
    doc_id: int
    plaintext: bytes
    keywords: frozenset[str]


def _tokenize(plaintext: bytes) -> frozenset[str]:
    return frozenset(plaintext.decode("utf-8", "replace").split())


def load_corpus(directory: str | Path) -> list[Document]:
    root = Path(directory)
    if not root.is_dir():
        raise ConfigError(f"corpus directory {root} does not exist")
    manifest = root / MANIFEST_NAME
    docs: list[Document] = []

    if manifest.is_file():
        for lineno, line in enumerate(manifest.read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                id_field, kw_field = line.split("\t", 1)
                doc_id = int(id_field)
            except ValueError as exc:
                raise ConfigError(f"{manifest}:{lineno}: expected 'id<TAB>keywords'") from exc
            matches = sorted(root.glob(f"{doc_id}.*")) + (
                [root / str(doc_id)] if (root / str(doc_id)).is_file() else []
            )
            if not matches:
                raise ConfigError(f"{manifest}:{lineno}: no file for document {doc_id}")
            keywords = frozenset(k.strip() for k in kw_field.split(",") if k.strip())
            docs.append(Document(doc_id, matches[0].read_bytes(), keywords))
    else:
        files = sorted(p for p in root.iterdir() if p.is_file())
        for i, path in enumerate(files, 1):
            text = path.read_bytes()
            docs.append(Document(i, text, _tokenize(text)))

    docs.sort(key=lambda d: d.doc_id)
    seen = [d.doc_id for d in docs]
    if len(set(seen)) != len(seen):
        raise ConfigError(f"duplicate document ids in {root}")
    return docs


def write_corpus(directory: str | Path, docs: list[Document]) -> None:
    """Inverse of load_corpus, used by the benchmark and tests."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    lines = []
    for doc in docs:
        (root / f"{doc.doc_id}.txt").write_bytes(doc.plaintext)
        lines.append(f"{doc.doc_id}\t{','.join(sorted(doc.keywords))}")
    (root / MANIFEST_NAME).write_text("\n".join(lines) + "\n")


def dictionary_of(docs: list[Document]) -> list[str]:
    """All keywords in byte order; the index is laid out in this order."""
    words = set()
    for doc in docs:
        words.update(doc.keywords)
    return sorted(words, key=lambda w: w.encode())
