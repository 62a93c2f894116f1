"""Word-vector store, term similarity, and sentence embeddings.

Sentence embeddings are idf-weighted means of word vectors behind a small
encoder interface, so a heavier sentence encoder can be swapped in without
touching the selection logic that consumes them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class WordVectorStore:
    dim: int
    table: dict[str, np.ndarray]

    @property
    def vocab_size(self) -> int:
        return len(self.table)

    def get(self, term: str) -> np.ndarray | None:
        """Vector for a term, case-insensitive; promoted n-grams fall back
        to the mean of their parts' vectors.  None when nothing is stored."""
        term = term.lower()
        vec = self.table.get(term)
        if vec is not None:
            return vec
        if "_" in term:
            parts = [self.table[p] for p in term.split("_") if p in self.table]
            if parts:
                return np.mean(parts, axis=0)
        return None


@dataclass(frozen=True)
class SentenceEmbedding:
    vector: np.ndarray
    source_sentence_index: int = -1
    oov: bool = False


def load_vectors(path: str, limit: int | None = None) -> WordVectorStore:
    """Read word2vec text format: header "count dim", then "word v1 .. v_dim".

    Raises DataError on a missing header or on any line whose value count
    does not match the header dimension (the message names the line).
    """
    table: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: missing word2vec header 'count dim'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise DataError(f"{path}: missing word2vec header 'count dim'") from None
        cap = count if limit is None else min(count, limit)
        for line_no, line in enumerate(fh, start=2):
            if len(table) >= cap:
                break
            parts = line.rstrip("\n").split(" ")
            if not parts or parts == [""]:
                continue
            if len(parts) != dim + 1:
                raise DataError(
                    f"{path}: line {line_no}: expected {dim} values, got {len(parts) - 1}"
                )
            word = parts[0].lower()
            if word in table:
                continue
            table[word] = np.asarray(parts[1:], dtype=np.float64)
    return WordVectorStore(dim=dim, table=table)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def term_similarity(store: WordVectorStore, a: str, b: str) -> float | None:
    """Cosine similarity of two terms; None when either has no vector."""
    va = store.get(a)
    vb = store.get(b)
    if va is None or vb is None:
        return None
    return cosine(va, vb)


def embed_sentence(store: WordVectorStore, tokens: list[str],
                   idf: dict[str, float] | None = None,
                   index: int = -1) -> SentenceEmbedding:
    """Weighted mean of available token vectors.

    Weights come from idf when given (missing idf entries weigh 1); a plain
    mean otherwise.  When no token has a vector the embedding is the zero
    vector with oov set.
    """
    acc = np.zeros(store.dim, dtype=np.float64)
    total = 0.0
    for tok in tokens:
        vec = store.get(tok)
        if vec is None:
            continue
        w = 1.0 if idf is None else float(idf.get(tok.lower(), 1.0))
        if w <= 0.0:
            continue
        acc += w * vec
        total += w
    if total == 0.0:
        return SentenceEmbedding(acc, index, oov=True)
    return SentenceEmbedding(acc / total, index, oov=False)


def similarity_matrix(embeddings: list[SentenceEmbedding]) -> np.ndarray:
    """Pairwise cosine matrix; diagonal 1 except 0 for zero vectors."""
    n = len(embeddings)
    mat = np.zeros((n, n), dtype=np.float64)
    vecs = [e.vector for e in embeddings]
    norms = [float(np.linalg.norm(v)) for v in vecs]
    for i in range(n):
        if norms[i] > 0.0:
            mat[i, i] = 1.0
        for j in range(i + 1, n):
            if norms[i] == 0.0 or norms[j] == 0.0:
                continue
            sim = float(np.dot(vecs[i], vecs[j]) / (norms[i] * norms[j]))
            mat[i, j] = sim
            mat[j, i] = sim
    return mat


class SentenceEncoder(Protocol):
    def encode(self, tokens: list[str], index: int = -1) -> SentenceEmbedding: ...


@dataclass(frozen=True)
class WordAveragingEncoder:
    """Default sentence encoder: idf-weighted word-vector averaging."""

    store: WordVectorStore
    idf: dict[str, float] | None = None

    def encode(self, tokens: list[str], index: int = -1) -> SentenceEmbedding:
        return embed_sentence(self.store, tokens, self.idf, index)
