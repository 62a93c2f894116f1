"""Topic models (LDA, LSI, HDP), coherence scoring, and model selection.

All samplers are written from scratch: LDA is collapsed Gibbs, HDP a
truncated direct-assignment Gibbs sampler, and LSI an orthogonal power
iteration with deflation over the TF-IDF matrix.  Training is deterministic
given (corpus, hyper-parameters, seed): every random draw comes from a
numpy Generator seeded up front.
"""

from __future__ import annotations

import json
import math
import warnings
import zlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CallSumError, DataError, EmptyDocumentError
from .textprep import Corpus, Document


class ModelKind(Enum):
    LDA = "lda"
    LSI = "lsi"
    HDP = "hdp"


# tie-break order for equal coherence and equal K
_KIND_ORDER = {ModelKind.LDA: 0, ModelKind.LSI: 1, ModelKind.HDP: 2}


class CoherenceMeasure(Enum):
    UMASS = "u_mass"
    CV = "c_v"


@dataclass(frozen=True)
class CoherenceScore:
    measure: CoherenceMeasure
    value: float
    top_n: int


@dataclass
class TopicModel:
    """A trained topic model plus what is needed to use it downstream.

    topic_term rows are probability distributions for LDA/HDP and unit-norm
    right-singular-vector directions for LSI.  terms maps column ids back to
    vocabulary strings; alpha/beta (LDA, HDP) and idf/singular_values (LSI)
    support fold-in and projection at inference time.
    """

    kind: ModelKind
    num_topics: int
    topic_term: np.ndarray
    trained_on: str
    seed: int
    terms: tuple[str, ...]
    alpha: np.ndarray | None = None
    beta: float | None = None
    idf: np.ndarray | None = None
    singular_values: np.ndarray | None = None
    rank_truncated: bool = False
    _term_ids: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._term_ids = {t: i for i, t in enumerate(self.terms)}

    def descriptor(self) -> str:
        return f"{self.kind.value}(K={self.num_topics})"

    def top_term_ids(self, topic: int, top_n: int) -> list[int]:
        """Column ids of a topic's highest-weighted terms.

        LSI rows are signed, so ranking is by magnitude there.  Stable sort
        breaks weight ties by smaller id.
        """
        row = self.topic_term[topic]
        key = np.abs(row) if self.kind is ModelKind.LSI else row
        order = np.argsort(-key, kind="stable")
        return [int(i) for i in order[:top_n]]


def _token_arrays(corpus: Corpus) -> tuple[np.ndarray, np.ndarray]:
    tokens: list[int] = []
    doc_of: list[int] = []
    for d, bow in enumerate(corpus.bows):
        for tid, count in bow:
            tokens.extend([tid] * count)
            doc_of.extend([d] * count)
    return (np.asarray(tokens, dtype=np.int32),
            np.asarray(doc_of, dtype=np.int32))


def _init_counts(tokens, doc_of, z, n_docs, n_topics, n_terms):
    n_dk = np.zeros((n_docs, n_topics), dtype=np.int32)
    n_kw = np.zeros((n_topics, n_terms), dtype=np.int32)
    n_k = np.zeros(n_topics, dtype=np.int32)
    np.add.at(n_dk, (doc_of, z), 1)
    np.add.at(n_kw, (z, tokens), 1)
    np.add.at(n_k, z, 1)
    return n_dk, n_kw, n_k


def train_lda(corpus: Corpus, K: int, alpha: float | None = None,
              beta: float = 0.01, iters: int = 500, seed: int = 42) -> TopicModel:
    """Collapsed Gibbs LDA; extraction row t = (n_tw + beta)/(n_t + V*beta)."""
    if K < 2:
        raise ValueError("K must be >= 2")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if K > corpus.num_docs:
        warnings.warn(
            f"K={K} exceeds the document count {corpus.num_docs}; proceeding",
            RuntimeWarning, stacklevel=2,
        )
    from . import _kernels

    if alpha is None:
        alpha = 50.0 / K
    tokens, doc_of = _token_arrays(corpus)
    rng = np.random.default_rng(seed)
    z = np.minimum((rng.random(tokens.shape[0]) * K).astype(np.int32), K - 1)
    n_dk, n_kw, n_k = _init_counts(tokens, doc_of, z, corpus.num_docs, K,
                                   corpus.num_terms)
    alpha_vec = np.full(K, alpha, dtype=np.float64)
    for _ in range(iters):
        u = rng.random(tokens.shape[0])
        _kernels.gibbs_sweep(tokens, doc_of, z, n_dk, n_kw, n_k,
                             alpha_vec, beta, u)
    phi = (n_kw + beta) / (n_k[:, None] + corpus.num_terms * beta)
    return TopicModel(
        kind=ModelKind.LDA, num_topics=K, topic_term=phi,
        trained_on=corpus.fingerprint(), seed=seed, terms=corpus.id_to_term,
        alpha=alpha_vec, beta=beta,
    )


def train_hdp(corpus: Corpus, max_topics: int = 50, gamma: float = 1.0,
              alpha0: float = 1.0, iters: int = 500, seed: int = 42,
              beta: float = 0.01) -> TopicModel:
    """Truncated direct-assignment Gibbs HDP.

    Global topic weights tau are re-estimated between sweeps from topic
    occupancy (tau_k proportional to n_k + gamma/T); a topic is active when
    it holds at least one token after the final sweep, and only active rows
    are returned.
    """
    if max_topics < 2:
        raise ValueError("max_topics must be >= 2")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    from . import _kernels

    T = max_topics
    tokens, doc_of = _token_arrays(corpus)
    rng = np.random.default_rng(seed)
    z = np.minimum((rng.random(tokens.shape[0]) * T).astype(np.int32), T - 1)
    n_dk, n_kw, n_k = _init_counts(tokens, doc_of, z, corpus.num_docs, T,
                                   corpus.num_terms)
    for _ in range(iters):
        tau = (n_k + gamma / T) / (n_k.sum() + gamma)
        alpha_vec = alpha0 * tau
        u = rng.random(tokens.shape[0])
        _kernels.gibbs_sweep(tokens, doc_of, z, n_dk, n_kw, n_k,
                             alpha_vec, beta, u)
    active = np.flatnonzero(n_k > 0)
    tau = (n_k + gamma / T) / (n_k.sum() + gamma)
    phi = (n_kw[active] + beta) / (n_k[active, None] + corpus.num_terms * beta)
    return TopicModel(
        kind=ModelKind.HDP, num_topics=len(active), topic_term=phi,
        trained_on=corpus.fingerprint(), seed=seed, terms=corpus.id_to_term,
        alpha=(alpha0 * tau[active]).astype(np.float64), beta=beta,
    )


def tfidf_matrix(corpus: Corpus) -> np.ndarray:
    """Dense D x V matrix with tf = raw count and idf = ln(D/df)."""
    idf = np.array([corpus.idf(i) for i in range(corpus.num_terms)])
    X = np.zeros((corpus.num_docs, corpus.num_terms), dtype=np.float64)
    for d, bow in enumerate(corpus.bows):
        for tid, count in bow:
            X[d, tid] = count * idf[tid]
    return X


def truncated_svd(X: np.ndarray, K: int, tol: float = 1e-9,
                  max_iter: int = 1000, seed: int = 0,
                  ) -> tuple[np.ndarray, np.ndarray, bool]:
    """Top-K right singular vectors of X by power iteration with deflation.

    Returns (rows, singular_values, truncated): rows is (k, V) with k <= K;
    truncated is True when the matrix rank cut the requested K short.  Each
    accepted vector is re-orthogonalized against the previous ones on every
    iteration, and its sign is fixed so the largest-magnitude entry is
    positive.
    """
    V = X.shape[1]
    rng = np.random.default_rng(seed)
    rows: list[np.ndarray] = []
    sigmas: list[float] = []
    for _ in range(K):
        v = rng.standard_normal(V)
        for prev in rows:
            v -= np.dot(prev, v) * prev
        norm = np.linalg.norm(v)
        if norm == 0.0:
            break
        v /= norm
        for _ in range(max_iter):
            w = X.T @ (X @ v)
            for prev in rows:
                w -= np.dot(prev, w) * prev
            norm = np.linalg.norm(w)
            if norm < 1e-14:
                v = None
                break
            w /= norm
            if abs(1.0 - abs(np.dot(w, v))) < tol:
                v = w
                break
            v = w
        if v is None:
            break
        sigma = float(np.linalg.norm(X @ v))
        cutoff = 1e-10 * sigmas[0] if sigmas else 1e-12
        if sigma <= cutoff:
            break
        peak = int(np.argmax(np.abs(v)))
        if v[peak] < 0:
            v = -v
        rows.append(v)
        sigmas.append(sigma)
    truncated = len(rows) < K
    if not rows:
        raise DataError("matrix has rank 0; no singular vectors found")
    return np.vstack(rows), np.asarray(sigmas), truncated


def train_lsi(corpus: Corpus, K: int) -> TopicModel:
    """LSI over the TF-IDF matrix; rows are right singular vectors.

    When K exceeds the matrix rank the model comes back with num_topics set
    to the found rank and rank_truncated flagged.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    if K > min(corpus.num_docs, corpus.num_terms):
        raise ValueError(
            f"K={K} exceeds min(D, V) = "
            f"{min(corpus.num_docs, corpus.num_terms)}"
        )
    X = tfidf_matrix(corpus)
    rows, sigmas, truncated = truncated_svd(X, K)
    idf = np.array([corpus.idf(i) for i in range(corpus.num_terms)])
    return TopicModel(
        kind=ModelKind.LSI, num_topics=rows.shape[0], topic_term=rows,
        trained_on=corpus.fingerprint(), seed=0, terms=corpus.id_to_term,
        idf=idf, singular_values=sigmas, rank_truncated=truncated,
    )


def _doc_sets(corpus: Corpus) -> list[set[int]]:
    """For each term id, the set of documents containing it."""
    sets: list[set[int]] = [set() for _ in range(corpus.num_terms)]
    for d, bow in enumerate(corpus.bows):
        for tid, _ in bow:
            sets[tid].add(d)
    return sets


def _corpus_term_id(corpus: Corpus, term: str) -> int:
    tid = corpus.vocabulary.get(term)
    if tid is None:
        raise DataError(f"top term {term!r} is not in the scoring corpus")
    return tid


def coherence_umass(model: TopicModel, corpus: Corpus,
                    top_n: int = 10) -> CoherenceScore:
    """UMass coherence: mean over ordered top-term pairs (i > j) of
    ln((D(w_i, w_j) + 1) / D(w_j)), averaged over topics.  Natural log."""
    if top_n < 2:
        raise ValueError("top_n must be >= 2")
    sets = _doc_sets(corpus)
    topic_scores = []
    for t in range(model.num_topics):
        ids = model.top_term_ids(t, top_n)
        cids = [_corpus_term_id(corpus, model.terms[i]) for i in ids]
        total = 0.0
        pairs = 0
        for i in range(1, len(cids)):
            for j in range(i):
                d_j = len(sets[cids[j]])
                d_ij = len(sets[cids[i]] & sets[cids[j]])
                total += math.log((d_ij + 1) / d_j)
                pairs += 1
        topic_scores.append(total / pairs if pairs else 0.0)
    value = sum(topic_scores) / len(topic_scores)
    return CoherenceScore(CoherenceMeasure.UMASS, value, top_n)


def _window_sets(tokenized_docs, window: int) -> list[set[str]]:
    out: list[set[str]] = []
    for tokens in tokenized_docs:
        tokens = list(tokens)
        if len(tokens) <= window:
            out.append(set(tokens))
        else:
            for i in range(len(tokens) - window + 1):
                out.append(set(tokens[i:i + window]))
    return out


def coherence_cv(model: TopicModel, tokenized_docs, top_n: int = 10,
                 window: int = 110) -> CoherenceScore:
    """C_v coherence over boolean sliding windows.

    One-set segmentation: each top term's NPMI vector against the topic's
    top-term set is compared (indirect cosine) with the summed set vector;
    arithmetic means over terms then topics.  Documents shorter than the
    window width count as a single window.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    if top_n < 2:
        raise ValueError("top_n must be >= 2")
    wsets = _window_sets(tokenized_docs, window)
    n_windows = len(wsets)
    if n_windows == 0:
        raise DataError("no windows: tokenized_docs is empty")
    eps = 1e-12
    topic_scores = []
    for t in range(model.num_topics):
        terms = [model.terms[i] for i in model.top_term_ids(t, top_n)]
        n = len(terms)
        single = np.array(
            [sum(1 for ws in wsets if term in ws) for term in terms],
            dtype=np.float64,
        ) / n_windows
        joint = np.zeros((n, n))
        for i in range(n):
            joint[i, i] = single[i]
            for j in range(i + 1, n):
                c = sum(1 for ws in wsets if terms[i] in ws and terms[j] in ws)
                joint[i, j] = joint[j, i] = c / n_windows
        npmi = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if single[i] == 0.0 or single[j] == 0.0:
                    continue
                p_ij = joint[i, j]
                pmi = math.log((p_ij + eps) / (single[i] * single[j]))
                npmi[i, j] = pmi / -math.log(p_ij + eps)
        set_vec = npmi.sum(axis=0)
        sims = []
        for i in range(n):
            na = np.linalg.norm(npmi[i])
            nb = np.linalg.norm(set_vec)
            sims.append(float(npmi[i] @ set_vec / (na * nb))
                        if na > 0 and nb > 0 else 0.0)
        topic_scores.append(sum(sims) / n)
    value = sum(topic_scores) / len(topic_scores)
    return CoherenceScore(CoherenceMeasure.CV, value, top_n)


@dataclass(frozen=True)
class SweepSpec:
    """Hyper-parameter grid for model optimization."""

    k_values: tuple[int, ...] = (2, 4, 6, 8, 10)
    lda_alpha: float | None = None
    lda_beta: float = 0.01
    lda_iters: int = 500
    hdp_max_topics: int = 50
    hdp_gamma: float = 1.0
    hdp_alpha0: float = 1.0
    hdp_iters: int = 500
    seed: int = 42
    top_n: int = 10
    cv_window: int = 110


@dataclass(frozen=True)
class SweepCandidate:
    model: TopicModel
    score: CoherenceScore


@dataclass(frozen=True)
class SweepResult:
    candidates: tuple[SweepCandidate, ...]
    best: int
    failures: tuple[tuple[str, str], ...] = ()

    @property
    def best_model(self) -> TopicModel:
        return self.candidates[self.best].model

    @property
    def best_score(self) -> CoherenceScore:
        return self.candidates[self.best].score


def _pick_best(candidates: list[SweepCandidate]) -> int:
    return min(
        range(len(candidates)),
        key=lambda i: (
            -candidates[i].score.value,
            candidates[i].model.num_topics,
            _KIND_ORDER[candidates[i].model.kind],
        ),
    )


def optimize_models(corpus: Corpus, docs: list[Document], spec: SweepSpec,
                    measure: CoherenceMeasure = CoherenceMeasure.UMASS,
                    kinds: frozenset[ModelKind] = frozenset(ModelKind),
                    ) -> SweepResult:
    """Train every (kind, K) candidate, score it, and pick the argmax.

    HDP contributes a single candidate since it selects its own topic count.
    Ties break toward smaller K, then kind order LDA < LSI < HDP.  Individual
    candidate failures are collected; only an all-failed sweep raises.
    """
    if not kinds:
        raise ValueError("at least one model kind is required")
    plan: list[tuple[ModelKind, int | None]] = []
    if ModelKind.LDA in kinds:
        plan.extend((ModelKind.LDA, k) for k in spec.k_values)
    if ModelKind.LSI in kinds:
        plan.extend((ModelKind.LSI, k) for k in spec.k_values)
    if ModelKind.HDP in kinds:
        plan.append((ModelKind.HDP, None))

    token_docs = [list(d.terms) for d in docs]
    candidates: list[SweepCandidate] = []
    failures: list[tuple[str, str]] = []
    for kind, k in plan:
        desc = f"{kind.value}(K={k if k is not None else 'auto'})"
        try:
            if kind is ModelKind.LDA:
                model = train_lda(corpus, k, alpha=spec.lda_alpha,
                                  beta=spec.lda_beta, iters=spec.lda_iters,
                                  seed=spec.seed)
            elif kind is ModelKind.LSI:
                model = train_lsi(corpus, k)
            else:
                model = train_hdp(corpus, max_topics=spec.hdp_max_topics,
                                  gamma=spec.hdp_gamma, alpha0=spec.hdp_alpha0,
                                  iters=spec.hdp_iters, seed=spec.seed,
                                  beta=spec.lda_beta)
            if measure is CoherenceMeasure.UMASS:
                score = coherence_umass(model, corpus, spec.top_n)
            else:
                score = coherence_cv(model, token_docs, spec.top_n,
                                     spec.cv_window)
            candidates.append(SweepCandidate(model, score))
        except Exception as exc:  # noqa: BLE001 - isolate candidate failures
            failures.append((desc, f"{type(exc).__name__}: {exc}"))
    if not candidates:
        detail = "; ".join(f"{d}: {m}" for d, m in failures)
        raise CallSumError(f"all sweep candidates failed: {detail}")
    return SweepResult(tuple(candidates), _pick_best(candidates),
                       tuple(failures))


@dataclass(frozen=True)
class DominantTopic:
    topic_id: int
    weight: float
    keywords: tuple[tuple[str, float], ...]


def _keywords(model: TopicModel, topic: int, n_keywords: int,
              ) -> tuple[tuple[str, float], ...]:
    ids = model.top_term_ids(topic, n_keywords)
    row = model.topic_term[topic]
    if model.kind is ModelKind.LSI:
        return tuple((model.terms[i], float(abs(row[i]))) for i in ids)
    return tuple((model.terms[i], float(row[i])) for i in ids)


def dominant_topics(model: TopicModel, doc: Document, n_dominant: int = 1,
                    n_keywords: int = 10, fold_in_sweeps: int = 100,
                    ) -> list[DominantTopic]:
    """Most dominant topics for one document, with their top keywords.

    LDA/HDP fold in the document by Gibbs sampling against the fixed
    topic-term rows and average the topic proportions over the last half of
    the sweeps; LSI projects the TF-IDF vector onto the singular directions
    and ranks by projection magnitude.  The fold-in seed is derived from the
    model seed and the document's term sequence, so results are per-document
    deterministic.
    """
    if n_dominant < 1:
        raise ValueError("n_dominant must be >= 1")
    if not doc.terms:
        raise EmptyDocumentError("document has no terms")
    ids = [model._term_ids[t] for t in doc.terms if t in model._term_ids]
    if not ids:
        raise EmptyDocumentError("document has no terms known to the model")

    K = model.num_topics
    if model.kind is ModelKind.LSI:
        x = np.zeros(len(model.terms))
        for tid in ids:
            x[tid] += 1.0
        x *= model.idf
        proj = model.topic_term @ x
        weights = np.abs(proj)
    else:
        from . import _kernels

        tokens = np.asarray(ids, dtype=np.int32)
        crc = zlib.crc32(" ".join(doc.terms).encode("utf-8"))
        rng = np.random.default_rng([model.seed, crc])
        z = np.minimum((rng.random(tokens.shape[0]) * K).astype(np.int32),
                       K - 1)
        m_k = np.zeros(K, dtype=np.int32)
        np.add.at(m_k, z, 1)
        alpha = (model.alpha if model.alpha is not None
                 else np.ones(K, dtype=np.float64))
        phi = model.topic_term
        acc = np.zeros(K, dtype=np.float64)
        kept = 0
        for sweep in range(fold_in_sweeps):
            u = rng.random(tokens.shape[0])
            _kernels.fold_in_sweep(tokens, z, m_k, phi, alpha, u)
            if sweep >= fold_in_sweeps // 2:
                prop = (m_k + alpha) / (m_k.sum() + alpha.sum())
                acc += prop
                kept += 1
        weights = acc / kept

    order = np.argsort(-weights, kind="stable")[:min(n_dominant, K)]
    return [
        DominantTopic(int(t), float(weights[t]), _keywords(model, int(t), n_keywords))
        for t in order
    ]


def save_model(model: TopicModel, path: str) -> None:
    """Serialize a trained model to documented JSON."""
    payload = {
        "format": "callsum-topic-model-v1",
        "kind": model.kind.value,
        "num_topics": model.num_topics,
        "trained_on": model.trained_on,
        "seed": model.seed,
        "terms": list(model.terms),
        "topic_term": model.topic_term.tolist(),
        "alpha": None if model.alpha is None else model.alpha.tolist(),
        "beta": model.beta,
        "idf": None if model.idf is None else model.idf.tolist(),
        "singular_values": (None if model.singular_values is None
                            else model.singular_values.tolist()),
        "rank_truncated": model.rank_truncated,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path: str) -> TopicModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "callsum-topic-model-v1":
        raise DataError(f"{path}: not a recognized topic-model file")
    return TopicModel(
        kind=ModelKind(payload["kind"]),
        num_topics=payload["num_topics"],
        topic_term=np.asarray(payload["topic_term"], dtype=np.float64),
        trained_on=payload["trained_on"],
        seed=payload["seed"],
        terms=tuple(payload["terms"]),
        alpha=(None if payload["alpha"] is None
               else np.asarray(payload["alpha"], dtype=np.float64)),
        beta=payload["beta"],
        idf=(None if payload["idf"] is None
             else np.asarray(payload["idf"], dtype=np.float64)),
        singular_values=(None if payload["singular_values"] is None
                         else np.asarray(payload["singular_values"])),
        rank_truncated=payload["rank_truncated"],
    )
