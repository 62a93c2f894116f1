"""Term selection, sentence selection, and the end-to-end pipeline.

Glues the other modules into the full batch flow: channel separation,
partial restoration, document preparation, per-role model sweeps, dominant
topics, global/local term selection, uniqueness filtering, similarity-ranked
sentence selection, summary restoration, and tabulation.  The customer and
agent sides get independent model sweeps and may end up with different model
kinds.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .errors import DataError, EmptyDocumentError
from .ingest import ChannelTranscript, Role, load_calls, separate_channels
from .punct import TaggerModel, restore_full, restore_partial
from .textprep import (Corpus, Document, PhraseModel, PrepConfig,
                       build_corpus, prepare_document, prepare_documents)
from .topics import (CoherenceMeasure, DominantTopic, ModelKind, SweepSpec,
                     TopicModel, dominant_topics, optimize_models)
from .vectors import (SentenceEncoder, WordAveragingEncoder, WordVectorStore,
                      cosine, similarity_matrix, term_similarity)


class TermMode(Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass(frozen=True)
class TermSelection:
    terms: tuple[str, ...]
    query: str
    mode: TermMode
    threshold: float

    @classmethod
    def from_terms(cls, terms, mode: TermMode, threshold: float,
                   ) -> "TermSelection":
        seen: dict[str, None] = {}
        for t in terms:
            seen.setdefault(t)
        ordered = tuple(seen)
        return cls(ordered, " ".join(ordered), mode, threshold)


@dataclass(frozen=True)
class SummaryRecord:
    call_id: str
    role: Role
    extracted: str
    partial: str
    full: str
    sentence_indices: tuple[int, ...]
    n_requested: int
    reference: str = ""
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class PipelineConfig:
    n_sentences: int = 5
    extraction_mode: TermMode = TermMode.GLOBAL
    term_threshold: float = 0.5
    uniqueness_threshold: float = 0.9
    uniqueness_enabled: bool = True
    n_dominant: int = 1
    n_keywords: int = 10
    model_kinds: frozenset[ModelKind] = frozenset(ModelKind)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    coherence_measure: CoherenceMeasure = CoherenceMeasure.UMASS
    seed: int = 42
    prep: PrepConfig = field(default_factory=PrepConfig)
    fold_in_sweeps: int = 100

    def __post_init__(self) -> None:
        if self.n_sentences < 1:
            raise ValueError("n_sentences must be >= 1")
        for name in ("term_threshold", "uniqueness_threshold"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1]")
        if self.n_dominant < 1:
            raise ValueError("n_dominant must be >= 1")


def merge_dominant_topics(topics: list[DominantTopic]) -> DominantTopic:
    """Collapse several dominant topics into one keyword pool.

    Keywords are deduplicated keeping each term's highest weight and ordered
    weight-descending, so term selection over multiple dominant topics works
    on one merged list.
    """
    best: dict[str, float] = {}
    for topic in topics:
        for term, weight in topic.keywords:
            if term not in best or weight > best[term]:
                best[term] = weight
    merged = tuple(sorted(best.items(), key=lambda kv: (-kv[1], kv[0])))
    return DominantTopic(
        topic_id=topics[0].topic_id,
        weight=sum(t.weight for t in topics),
        keywords=merged,
    )


def select_terms_global(cust_topic: DominantTopic, agent_topic: DominantTopic,
                        store: WordVectorStore, threshold: float,
                        ) -> tuple[TermSelection, TermSelection]:
    """Cross-match the two keyword lists by word-vector similarity.

    Every (customer, agent) keyword pair at or above the threshold
    contributes both members to their side's selection, each side ordered by
    its own topic weights.  When no pair clears, both sides fall back to
    their full keyword lists.
    """
    ckw = [t for t, _ in cust_topic.keywords]
    akw = [t for t, _ in agent_topic.keywords]
    c_hit: set[str] = set()
    a_hit: set[str] = set()
    for c in ckw:
        for a in akw:
            sim = term_similarity(store, c, a)
            if sim is not None and sim >= threshold:
                c_hit.add(c)
                a_hit.add(a)
    if not c_hit:
        c_sel, a_sel = ckw, akw
    else:
        c_sel = [t for t in ckw if t in c_hit]
        a_sel = [t for t in akw if t in a_hit]
    return (TermSelection.from_terms(c_sel, TermMode.GLOBAL, threshold),
            TermSelection.from_terms(a_sel, TermMode.GLOBAL, threshold))


def _stage1(doc: Document, topic: DominantTopic, store: WordVectorStore,
            threshold: float) -> list[tuple[str, float]]:
    keywords = [t for t, _ in topic.keywords]
    scored: dict[str, float] = {}
    for term in doc.terms:
        if term in scored:
            continue
        sims = [term_similarity(store, term, k) for k in keywords]
        sims = [s for s in sims if s is not None]
        if sims and max(sims) >= threshold:
            scored[term] = max(sims)
    return sorted(scored.items(), key=lambda kv: (-kv[1], kv[0]))


def select_terms_local(cust_doc: Document, agent_doc: Document,
                       cust_topic: DominantTopic, agent_topic: DominantTopic,
                       store: WordVectorStore, threshold: float,
                       ) -> tuple[TermSelection, TermSelection]:
    """Two-stage local term selection.

    Stage 1 keeps document terms similar to the role's own topic keywords;
    stage 2 keeps, from those, terms most inter-related across the two roles.
    A side whose stage 1 empties reverts to its topic keywords; a side whose
    stage 2 empties reverts to its stage-1 set.
    """
    c1 = _stage1(cust_doc, cust_topic, store, threshold)
    a1 = _stage1(agent_doc, agent_topic, store, threshold)
    if not c1:
        c1 = [(t, w) for t, w in cust_topic.keywords]
    if not a1:
        a1 = [(t, w) for t, w in agent_topic.keywords]

    def cross(side: list[tuple[str, float]], other: list[tuple[str, float]],
              ) -> list[tuple[str, float]]:
        kept = []
        other_terms = [t for t, _ in other]
        for term, weight in side:
            sims = [term_similarity(store, term, o) for o in other_terms]
            sims = [s for s in sims if s is not None]
            if sims and max(sims) >= threshold:
                kept.append((term, weight))
        return kept

    c2 = cross(c1, a1) or c1
    a2 = cross(a1, c1) or a1
    return (
        TermSelection.from_terms([t for t, _ in c2], TermMode.LOCAL, threshold),
        TermSelection.from_terms([t for t, _ in a2], TermMode.LOCAL, threshold),
    )


def filter_unique_sentences(sentences: list[str], encoder: SentenceEncoder,
                            threshold: float) -> list[tuple[int, str]]:
    """Greedy forward de-duplication by sentence-embedding similarity.

    Sentence i is kept unless its cosine against any already-kept sentence
    reaches the threshold; the earlier occurrence always wins.
    """
    embeddings = [encoder.encode(s.split(), i) for i, s in enumerate(sentences)]
    mat = similarity_matrix(embeddings)
    kept: list[tuple[int, str]] = []
    for i, sentence in enumerate(sentences):
        if all(mat[i, j] < threshold for j, _ in kept):
            kept.append((i, sentence))
    return kept


@dataclass(frozen=True)
class SentenceSelection:
    selected: tuple[tuple[int, str], ...]
    zero_query: bool = False


def select_sentences(kept: list[tuple[int, str]], query: str,
                     encoder: SentenceEncoder, n: int) -> SentenceSelection:
    """Top-n kept sentences by similarity to the query, in transcript order.

    Ranking ties break toward the smaller index.  A query that embeds to the
    zero vector (all OOV) falls back to the first n kept sentences and flags
    the selection.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not kept:
        return SentenceSelection(())
    query_emb = encoder.encode(query.split())
    if query_emb.oov:
        return SentenceSelection(tuple(kept[:n]), zero_query=True)
    ranked = sorted(
        kept,
        key=lambda pair: (-cosine(encoder.encode(pair[1].split()).vector,
                                  query_emb.vector), pair[0]),
    )
    chosen = sorted(ranked[:n], key=lambda pair: pair[0])
    return SentenceSelection(tuple(chosen))


@dataclass
class RoleContext:
    """Frozen per-role model state shared by every call in a run."""

    model: TopicModel
    corpus: Corpus
    phrases: list[PhraseModel]
    idf: dict[str, float]


def _split_sentences(partial_rendered: str) -> list[str]:
    return [s.strip() for s in partial_rendered.split(".") if s.strip()]


def _join_extracted(selected: tuple[tuple[int, str], ...]) -> str:
    if not selected:
        return ""
    return ". ".join(s for _, s in selected) + "."


def _topics_or_none(ctx: RoleContext, doc: Document, cfg: PipelineConfig,
                    ) -> list[DominantTopic] | None:
    try:
        return dominant_topics(ctx.model, doc, cfg.n_dominant, cfg.n_keywords,
                               cfg.fold_in_sweeps)
    except EmptyDocumentError:
        return None


def _choose_sentences(sentences: list[str], selection: TermSelection | None,
                      encoder: SentenceEncoder, cfg: PipelineConfig,
                      ) -> tuple[tuple[tuple[int, str], ...], tuple[str, ...]]:
    """Uniqueness filter + query-ranked selection for one role.

    selection=None means no usable topics: fall back to the first n
    sentences with the "no-topic" flag.
    """
    flags: tuple[str, ...] = ()
    if not sentences:
        return (), ("empty-transcript",)
    if selection is None:
        n = min(cfg.n_sentences, len(sentences))
        return tuple((i, sentences[i]) for i in range(n)), ("no-topic",)
    if cfg.uniqueness_enabled:
        kept = filter_unique_sentences(sentences, encoder,
                                       cfg.uniqueness_threshold)
    else:
        kept = list(enumerate(sentences))
    result = select_sentences(kept, selection.query, encoder, cfg.n_sentences)
    if result.zero_query:
        flags = ("zero-query",)
    return result.selected, flags


def _build_record(call_id: str, role: Role, tagger: TaggerModel,
                  selected, flags, reference: str, cfg: PipelineConfig,
                  ) -> SummaryRecord:
    extracted = _join_extracted(selected)
    # summary tokens are already stutter-collapsed; collapsing again across
    # the new sentence joins would desync partial/full from extracted
    partial = (restore_partial(tagger, extracted,
                               collapse_stutters=False).rendered
               if extracted else "")
    full = (restore_full(tagger, extracted, cfg.prep.contraction_map,
                         collapse_stutters=False).rendered
            if extracted else "")
    return SummaryRecord(
        call_id=call_id, role=role, extracted=extracted, partial=partial,
        full=full, sentence_indices=tuple(i for i, _ in selected),
        n_requested=cfg.n_sentences, reference=reference, flags=flags,
    )


def summarize_call(cust: ChannelTranscript, agent: ChannelTranscript,
                   contexts: dict[Role, RoleContext], tagger: TaggerModel,
                   store: WordVectorStore, cfg: PipelineConfig,
                   ) -> tuple[SummaryRecord, SummaryRecord]:
    """Run steps 2-8 for one call using pre-trained per-role contexts."""
    if not cust.raw_text.strip() and not agent.raw_text.strip():
        raise DataError(f"call {cust.call_id}: both transcripts empty")

    state: dict[Role, dict] = {}
    for tx in (cust, agent):
        ctx = contexts[tx.role]
        if tx.raw_text.strip():
            partial = restore_partial(tagger, tx.raw_text).rendered
        else:
            partial = ""
        sentences = _split_sentences(partial)
        doc = prepare_document(
            ChannelTranscript(tx.call_id, tx.role, partial),
            cfg.prep, ctx.phrases,
        )
        topics = _topics_or_none(ctx, doc, cfg) if sentences else None
        state[tx.role] = {
            "partial": partial, "sentences": sentences,
            "doc": doc, "topics": topics,
        }

    selections = _term_selections(state, store, cfg)
    records = []
    for tx in (cust, agent):
        ctx = contexts[tx.role]
        encoder = WordAveragingEncoder(store, ctx.idf)
        st = state[tx.role]
        selected, flags = _choose_sentences(
            st["sentences"], selections.get(tx.role), encoder, cfg)
        records.append(_build_record(tx.call_id, tx.role, tagger, selected,
                                     flags, st["partial"], cfg))
    return records[0], records[1]


def _term_selections(state: dict[Role, dict], store: WordVectorStore,
                     cfg: PipelineConfig) -> dict[Role, TermSelection]:
    """Per-role term selections; a role missing topics gets no entry (its
    summary falls back), and a lone topical side uses its own keywords."""
    merged = {
        role: (merge_dominant_topics(st["topics"]) if st["topics"] else None)
        for role, st in state.items()
    }
    cust_t, agent_t = merged.get(Role.CUSTOMER), merged.get(Role.AGENT)
    out: dict[Role, TermSelection] = {}
    if cust_t is not None and agent_t is not None:
        if cfg.extraction_mode is TermMode.GLOBAL:
            c_sel, a_sel = select_terms_global(cust_t, agent_t, store,
                                               cfg.term_threshold)
        else:
            c_sel, a_sel = select_terms_local(
                state[Role.CUSTOMER]["doc"], state[Role.AGENT]["doc"],
                cust_t, agent_t, store, cfg.term_threshold)
        out[Role.CUSTOMER] = c_sel
        out[Role.AGENT] = a_sel
    else:
        # one-sided fallback: the topical side queries with its own keywords
        for role, topic in merged.items():
            if topic is not None:
                out[role] = TermSelection.from_terms(
                    [t for t, _ in topic.keywords], cfg.extraction_mode,
                    cfg.term_threshold)
    return out


@dataclass(frozen=True)
class PipelineResult:
    records: tuple[tuple[SummaryRecord, SummaryRecord], ...]
    timings: dict[str, float]
    errors: tuple[tuple[str, str], ...]


DEFAULT_ROLE_MAP = {"0": Role.CUSTOMER, "1": Role.AGENT}

_STEPS = (
    "1_channel_separation", "2_partial_restoration", "3_document_preparation",
    "4_model_optimization", "5_dominant_topics", "6_term_selection",
    "7_sentence_selection", "8_summary_restoration", "9_tabulation",
)


def run_pipeline(input_path: str, cfg: PipelineConfig,
                 store: WordVectorStore, tagger: TaggerModel,
                 role_map: dict[str, Role] | None = None,
                 out_dir: str | None = None) -> PipelineResult:
    """Execute the nine batch steps over every call in a transcript file.

    Per-call problems are collected and reported; only corpus- or model-level
    failures abort the run.  When out_dir is given, summaries.csv,
    summaries.jsonl, timings.json, and errors.json are written there.
    """
    role_map = dict(DEFAULT_ROLE_MAP) if role_map is None else role_map
    timings: dict[str, float] = {}
    errors: list[tuple[str, str]] = []

    t0 = time.perf_counter()
    report = load_calls(input_path, role_map)
    errors.extend((f"line {e.line_no}", e.message) for e in report.errors)
    pairs: list[tuple[ChannelTranscript, ChannelTranscript]] = []
    for call in report.calls:
        try:
            cust, agent = separate_channels(call, role_map)
        except Exception as exc:  # noqa: BLE001 - per-call isolation
            errors.append((call.call_id, f"{type(exc).__name__}: {exc}"))
            continue
        if not cust.raw_text.strip() and not agent.raw_text.strip():
            errors.append((call.call_id, "both transcripts empty"))
            continue
        pairs.append((cust, agent))
    timings[_STEPS[0]] = time.perf_counter() - t0

    t0 = time.perf_counter()
    partials: dict[tuple[str, Role], str] = {}
    sentences: dict[tuple[str, Role], list[str]] = {}
    for cust, agent in pairs:
        for tx in (cust, agent):
            rendered = (restore_partial(tagger, tx.raw_text).rendered
                        if tx.raw_text.strip() else "")
            partials[(tx.call_id, tx.role)] = rendered
            sentences[(tx.call_id, tx.role)] = _split_sentences(rendered)
    timings[_STEPS[1]] = time.perf_counter() - t0

    t0 = time.perf_counter()
    docs: dict[tuple[str, Role], Document] = {}
    role_docs: dict[Role, list[Document]] = {}
    role_phrases: dict[Role, list[PhraseModel]] = {}
    for role in (Role.CUSTOMER, Role.AGENT):
        txs = [
            ChannelTranscript(cid, role, partials[(cid, role)])
            for cid, r in partials if r == role
        ]
        prepared, phrases = prepare_documents(txs, cfg.prep)
        role_docs[role] = prepared
        role_phrases[role] = phrases
        for doc in prepared:
            docs[(doc.call_id, role)] = doc
    timings[_STEPS[2]] = time.perf_counter() - t0

    t0 = time.perf_counter()
    contexts: dict[Role, RoleContext] = {}
    for role in (Role.CUSTOMER, Role.AGENT):
        corpus = build_corpus(role_docs[role])
        sweep = optimize_models(corpus, role_docs[role], cfg.sweep,
                                cfg.coherence_measure, cfg.model_kinds)
        contexts[role] = RoleContext(
            model=sweep.best_model, corpus=corpus,
            phrases=role_phrases[role], idf=corpus.idf_table(),
        )
    timings[_STEPS[3]] = time.perf_counter() - t0

    t0 = time.perf_counter()
    topics_by_key: dict[tuple[str, Role], list[DominantTopic] | None] = {}
    for cust, agent in pairs:
        for tx in (cust, agent):
            key = (tx.call_id, tx.role)
            if not sentences[key]:
                topics_by_key[key] = None
                continue
            topics_by_key[key] = _topics_or_none(
                contexts[tx.role], docs[key], cfg)
    timings[_STEPS[4]] = time.perf_counter() - t0

    t0 = time.perf_counter()
    selections_by_call: dict[str, dict[Role, TermSelection]] = {}
    for cust, agent in pairs:
        state = {
            tx.role: {
                "doc": docs[(tx.call_id, tx.role)],
                "topics": topics_by_key[(tx.call_id, tx.role)],
            }
            for tx in (cust, agent)
        }
        selections_by_call[cust.call_id] = _term_selections(state, store, cfg)
    timings[_STEPS[5]] = time.perf_counter() - t0

    t0 = time.perf_counter()
    chosen: dict[tuple[str, Role], tuple] = {}
    for cust, agent in pairs:
        for tx in (cust, agent):
            encoder = WordAveragingEncoder(store, contexts[tx.role].idf)
            key = (tx.call_id, tx.role)
            chosen[key] = _choose_sentences(
                sentences[key],
                selections_by_call[tx.call_id].get(tx.role),
                encoder, cfg,
            )
    timings[_STEPS[6]] = time.perf_counter() - t0

    t0 = time.perf_counter()
    records: list[tuple[SummaryRecord, SummaryRecord]] = []
    for cust, agent in pairs:
        pair_records = []
        for tx in (cust, agent):
            key = (tx.call_id, tx.role)
            selected, flags = chosen[key]
            pair_records.append(_build_record(
                tx.call_id, tx.role, tagger, selected, flags,
                partials[key], cfg))
        records.append((pair_records[0], pair_records[1]))
    timings[_STEPS[7]] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_summary_table(records, out / "summaries.csv",
                            out / "summaries.jsonl")
        with open(out / "errors.json", "w", encoding="utf-8") as fh:
            json.dump([{"where": w, "message": m} for w, m in errors], fh,
                      indent=2)
    timings[_STEPS[8]] = time.perf_counter() - t0

    if out_dir is not None:
        with open(Path(out_dir) / "timings.json", "w", encoding="utf-8") as fh:
            json.dump(timings, fh, indent=2)
    return PipelineResult(tuple(records), timings, tuple(errors))


def write_summary_table(records, csv_path, jsonl_path) -> None:
    """Step-9 table: CSV for reading, JSONL with the full per-role records."""
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["call_id", "customer_summary", "agent_summary",
                         "customer_flags", "agent_flags"])
        for cust, agent in records:
            writer.writerow([cust.call_id, cust.full, agent.full,
                             ";".join(cust.flags), ";".join(agent.flags)])
    with open(jsonl_path, "w", encoding="utf-8") as fh:
        for cust, agent in records:
            row = {"call_id": cust.call_id}
            for rec in (cust, agent):
                row[rec.role.value] = {
                    "extracted": rec.extracted,
                    "partial": rec.partial,
                    "full": rec.full,
                    "sentence_indices": list(rec.sentence_indices),
                    "n_requested": rec.n_requested,
                    "reference": rec.reference,
                    "flags": list(rec.flags),
                }
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_summary_records(jsonl_path) -> list[tuple[SummaryRecord, SummaryRecord]]:
    """Load records written by write_summary_table for evaluation."""
    records = []
    with open(jsonl_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            pair = []
            for role in (Role.CUSTOMER, Role.AGENT):
                body = row[role.value]
                pair.append(SummaryRecord(
                    call_id=row["call_id"], role=role,
                    extracted=body["extracted"], partial=body["partial"],
                    full=body["full"],
                    sentence_indices=tuple(body["sentence_indices"]),
                    n_requested=body["n_requested"],
                    reference=body["reference"],
                    flags=tuple(body["flags"]),
                ))
            records.append((pair[0], pair[1]))
    return records
