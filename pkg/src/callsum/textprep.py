"""Transcript-to-document preprocessing and corpus construction.

Turns period-restored channel transcripts into keyword documents through a
fixed stage order (lowercase, contraction expansion, regex cleanup, tokenize,
stop-word removal, short-word removal, n-gram promotion, lemmatization,
optional POS filtering) and builds the shared bag-of-words corpus.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import EmptyCorpusError
from .ingest import ChannelTranscript, Role

_APOSTROPHES = re.compile(r"[’']")
# underscore survives cleanup so promoted n-grams round-trip through the
# pipeline unchanged
_NON_ALPHA = re.compile(r"[^a-z_\s]+")
_WS = re.compile(r"\s+")
_VOWELS = set("aeiouy")


def _load_lines(name: str) -> list[str]:
    text = resources.files("callsum.resources").joinpath(name).read_text("utf-8")
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def load_stopwords() -> frozenset[str]:
    """Bundled extended English stop list (includes conversational fillers)."""
    return frozenset(_load_lines("stopwords.txt"))


def load_contractions() -> dict[str, str]:
    """Bundled contraction table, token -> space-joined expansion."""
    table = {}
    for line in _load_lines("contractions.txt"):
        token, _, expansion = line.partition("\t")
        table[token] = expansion
    return table


def load_lemma_exceptions() -> dict[str, str]:
    """Bundled irregular-inflection lookup, form -> lemma."""
    table = {}
    for line in _load_lines("lemma_exceptions.txt"):
        form, _, lemma = line.partition("\t")
        table[form] = lemma
    return table


@dataclass(frozen=True)
class PrepConfig:
    """Knobs for the document-preparation pipeline.

    min_word_len is the smallest surviving token length; the default 5 drops
    every token of length <= 4.  allowed_pos enables the heuristic POS filter
    when set (any subset of {"NOUN", "VERB", "ADJ", "ADV"}).
    """

    stopwords: frozenset[str] = field(default_factory=load_stopwords)
    min_word_len: int = 5
    contraction_map: dict[str, str] = field(default_factory=load_contractions)
    ngram_min_count: int = 5
    ngram_threshold: float = 10.0
    allowed_pos: frozenset[str] | None = None
    lemma_exceptions: dict[str, str] = field(default_factory=load_lemma_exceptions)

    def __post_init__(self) -> None:
        if self.min_word_len < 1:
            raise ValueError("min_word_len must be >= 1")
        if self.ngram_min_count < 1:
            raise ValueError("ngram_min_count must be >= 1")


@dataclass(frozen=True)
class Document:
    call_id: str
    role: Role
    terms: tuple[str, ...]


def strip_punctuation(raw_text: str) -> str:
    """Lowercase, drop apostrophes in place (so "don't" -> "dont"), and map
    every other non-alphanumeric character to whitespace."""
    text = _APOSTROPHES.sub("", raw_text.lower())
    return re.sub(r"[^a-z0-9\s]+", " ", text)


def clean_for_tagging(raw_text: str) -> str:
    """Strip punctuation and collapse stuttered repeats for the tagger.

    On top of strip_punctuation, collapses immediate repetitions of unigrams
    and bigrams to a single occurrence.  Non-adjacent repeats are kept.
    """
    tokens = strip_punctuation(raw_text).split()
    out: list[str] = []
    for tok in tokens:
        out.append(tok)
        # collapse to fixpoint against the current tail
        while True:
            if len(out) >= 2 and out[-1] == out[-2]:
                out.pop()
            elif len(out) >= 4 and out[-2:] == out[-4:-2]:
                del out[-2:]
            else:
                break
    return " ".join(out)


def expand_contractions(text: str, table: dict[str, str]) -> str:
    """Replace mapped tokens, preserving any attached edge punctuation."""
    pieces = []
    for piece in text.split():
        core = piece.strip(".,?!;:\"()")
        if core in table:
            start = piece.find(core)
            piece = piece[:start] + table[core] + piece[start + len(core):]
        pieces.append(piece)
    return " ".join(pieces)


def _lemmatize_once(word: str, exceptions: dict[str, str]) -> str:
    if word in exceptions:
        return exceptions[word]
    n = len(word)
    if n <= 3:
        return word
    # plural / third-person -s
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-3] + "y" if n > 4 else word[:-1]
    if word.endswith(("xes", "zes", "ches", "shes")):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s") and not word.endswith(("us", "is")):
        return word[:-1]

    def _repair(stem: str) -> str | None:
        if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in "lsz":
            stem = stem[:-1]
        if len(stem) < 3 or not set(stem) & _VOWELS:
            return None
        return stem

    if word.endswith("ing") and n >= 6:
        stem = _repair(word[:-3])
        return stem if stem is not None else word
    if word.endswith("ied") and n >= 5:
        return word[:-3] + "y"
    if word.endswith("ed") and n >= 5:
        stem = _repair(word[:-2])
        return stem if stem is not None else word
    return word


def lemmatize(word: str, exceptions: dict[str, str]) -> str:
    """Exception-table lookup with suffix-rule fallback, applied to fixpoint.

    Fixpoint application makes the pipeline idempotent: a term that survived
    preparation once maps to itself on a second pass.
    """
    for _ in range(10):
        new = _lemmatize_once(word, exceptions)
        if new == word:
            return word
        word = new
    return word


# Heuristic suffix tagger; only consulted when PrepConfig.allowed_pos is set.
_ADJ_SUFFIXES = ("ous", "ful", "ible", "able", "less", "ish", "ive", "ical")
_VERB_SUFFIXES = ("ate", "ize", "ify")


def _pos_tag(word: str) -> str:
    head = word.split("_", 1)[0]
    if head.endswith("ly"):
        return "ADV"
    if head.endswith(_ADJ_SUFFIXES):
        return "ADJ"
    if head.endswith(_VERB_SUFFIXES):
        return "VERB"
    return "NOUN"


def prepare_tokens(raw_text: str, cfg: PrepConfig) -> list[str]:
    """Pipeline stages up to (not including) n-gram promotion."""
    text = raw_text.lower()
    text = expand_contractions(text, cfg.contraction_map)
    text = _APOSTROPHES.sub("", text)
    text = _NON_ALPHA.sub(" ", text)
    tokens = text.split()
    return [
        t for t in tokens
        if t not in cfg.stopwords and len(t) >= cfg.min_word_len
    ]


class PhraseModel:
    """Corpus-level collocation scorer for bigram promotion.

    Adjacent pair (a, b) is promoted to "a_b" when count(a,b) >= min_count
    and (count(a,b) - min_count) * N / (count(a) * count(b)) >= threshold,
    with N the number of distinct units (unigrams plus pairs) observed.
    Trigrams come from learning a second model over once-promoted streams.
    """

    def __init__(self, min_count: int, threshold: float) -> None:
        self.min_count = min_count
        self.threshold = threshold
        self._promoted: set[tuple[str, str]] = set()

    @classmethod
    def learn(cls, token_lists: list[list[str]], min_count: int,
              threshold: float) -> "PhraseModel":
        uni: dict[str, int] = {}
        pair: dict[tuple[str, str], int] = {}
        for tokens in token_lists:
            for t in tokens:
                uni[t] = uni.get(t, 0) + 1
            for a, b in zip(tokens, tokens[1:]):
                pair[(a, b)] = pair.get((a, b), 0) + 1
        model = cls(min_count, threshold)
        n_units = len(uni) + len(pair)
        for (a, b), c in pair.items():
            if c < min_count:
                continue
            score = (c - min_count) * n_units / (uni[a] * uni[b])
            if score >= threshold:
                model._promoted.add((a, b))
        return model

    def apply(self, tokens: list[str]) -> list[str]:
        out: list[str] = []
        i = 0
        while i < len(tokens):
            if i + 1 < len(tokens) and (tokens[i], tokens[i + 1]) in self._promoted:
                out.append(tokens[i] + "_" + tokens[i + 1])
                i += 2
            else:
                out.append(tokens[i])
                i += 1
        return out

    @property
    def promoted_pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset(self._promoted)


def _finalize_terms(tokens: list[str], cfg: PrepConfig) -> tuple[str, ...]:
    terms = []
    for tok in tokens:
        lemma = "_".join(
            lemmatize(part, cfg.lemma_exceptions) for part in tok.split("_")
        )
        # re-apply the surface filters: lemmatization may shorten a term
        # below the length floor or onto the stop list
        if len(lemma) < cfg.min_word_len or lemma in cfg.stopwords:
            continue
        if cfg.allowed_pos is not None and _pos_tag(lemma) not in cfg.allowed_pos:
            continue
        terms.append(lemma)
    return tuple(terms)


def prepare_document(transcript: ChannelTranscript, cfg: PrepConfig,
                     phrases: list[PhraseModel] | None = None) -> Document:
    """Prepare one transcript; phrase models (if any) are applied in order.

    The collocation statistics behind phrase promotion are corpus-level, so
    callers wanting n-grams should go through prepare_documents, which learns
    the models and threads them back here.
    """
    tokens = prepare_tokens(transcript.raw_text, cfg)
    for model in phrases or []:
        tokens = model.apply(tokens)
    return Document(transcript.call_id, transcript.role, _finalize_terms(tokens, cfg))


def prepare_documents(transcripts: list[ChannelTranscript], cfg: PrepConfig,
                      ) -> tuple[list[Document], list[PhraseModel]]:
    """Prepare a batch with corpus-level bigram then trigram promotion."""
    token_lists = [prepare_tokens(t.raw_text, cfg) for t in transcripts]
    bigrams = PhraseModel.learn(token_lists, cfg.ngram_min_count, cfg.ngram_threshold)
    token_lists = [bigrams.apply(ts) for ts in token_lists]
    trigrams = PhraseModel.learn(token_lists, cfg.ngram_min_count, cfg.ngram_threshold)
    token_lists = [trigrams.apply(ts) for ts in token_lists]
    docs = [
        Document(t.call_id, t.role, _finalize_terms(ts, cfg))
        for t, ts in zip(transcripts, token_lists)
    ]
    return docs, [bigrams, trigrams]


class Corpus:
    """Dense term ids, per-document bags of words, and document lookup.

    Vocabulary ids are assigned in first-seen order over the given document
    sequence, so a fixed document order yields deterministic ids.
    """

    def __init__(self, documents: list[Document]) -> None:
        if not any(d.terms for d in documents):
            raise EmptyCorpusError("empty corpus: all documents have no terms")
        vocab: dict[str, int] = {}
        bows: list[tuple[tuple[int, int], ...]] = []
        index: dict[tuple[str, Role], int] = {}
        for pos, doc in enumerate(documents):
            counts: dict[int, int] = {}
            for term in doc.terms:
                tid = vocab.setdefault(term, len(vocab))
                counts[tid] = counts.get(tid, 0) + 1
            bows.append(tuple(sorted(counts.items())))
            index[(doc.call_id, doc.role)] = pos
        self.vocabulary = vocab
        self.id_to_term = tuple(sorted(vocab, key=vocab.get))
        self.bows = tuple(bows)
        self.doc_index = index
        self.num_docs = len(bows)
        self.num_terms = len(vocab)
        df = [0] * self.num_terms
        for bow in bows:
            for tid, _ in bow:
                df[tid] += 1
        self.doc_freq = tuple(df)

    def idf(self, term_id: int) -> float:
        """ln(D / df); 0 for terms that appear in no document."""
        df = self.doc_freq[term_id]
        return math.log(self.num_docs / df) if df > 0 else 0.0

    def idf_table(self) -> dict[str, float]:
        return {t: self.idf(i) for t, i in self.vocabulary.items()}

    @property
    def token_total(self) -> int:
        return sum(c for bow in self.bows for _, c in bow)

    def fingerprint(self) -> str:
        payload = json.dumps(
            {"vocab": list(self.id_to_term), "bows": [list(b) for b in self.bows]},
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def build_corpus(documents: list[Document]) -> Corpus:
    """Build the shared vocabulary and bag-of-words vectors.

    Raises EmptyCorpusError when every document is empty.  Empty documents in
    a non-empty batch are kept (with empty bows) so positions line up with
    the input order.
    """
    return Corpus(documents)
