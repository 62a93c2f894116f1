"""Trainable 4-class punctuation tagger and restoration renderers.

The tagger is a linear multiclass classifier over concatenated context-window
token embeddings.  For every token position a segment of `window` slots is
built around it with a learned mask embedding at the halfway slot (the slot
the punctuation mark would occupy), pad embeddings beyond the ends, and the
classifier scores the four classes from the concatenated slot embeddings.
Partial restoration keeps only periods; full restoration renders all four
classes and applies readability post-processing.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import DataError, DegenerateCorpusError
from .textprep import clean_for_tagging, load_contractions, strip_punctuation

PAD_ID = 0
MASK_ID = 1
UNK_ID = 2
_N_SPECIAL = 3

_APOSTROPHES = re.compile(r"[’']")
_WORD = re.compile(r"[a-z0-9]+")


class PunctClass(IntEnum):
    OTHER = 0
    COMMA = 1
    PERIOD = 2
    QUESTION = 3


_MARK_TO_CLASS = {",": PunctClass.COMMA, ".": PunctClass.PERIOD,
                  "?": PunctClass.QUESTION}
_CLASS_TO_MARK = {PunctClass.OTHER: "", PunctClass.COMMA: ",",
                  PunctClass.PERIOD: ".", PunctClass.QUESTION: "?"}


@dataclass
class TaggerModel:
    """Linear window classifier: embeddings + one dense layer.

    vocab maps tokens to embedding ids; ids 0..2 are reserved for the pad,
    mask, and unknown-token embeddings.  weights has shape (window*dim, 4).
    """

    window: int
    dim: int
    vocab: dict[str, int]
    emb: np.ndarray
    weights: np.ndarray
    bias: np.ndarray
    class_weights: np.ndarray
    fingerprint: str
    seed: int
    epochs: int


@dataclass(frozen=True)
class PunctuatedText:
    tokens: tuple[str, ...]
    labels: tuple[PunctClass, ...]
    rendered: str


def parse_corpus(text: str) -> tuple[list[str], list[PunctClass]]:
    """Tokens plus per-token labels from punctuated plain text.

    A token's label is the class of the first of ",", ".", "?" appearing
    between it and the next token; anything else in the gap is ignored.
    """
    clean = _APOSTROPHES.sub("", text.lower())
    tokens: list[str] = []
    labels: list[PunctClass] = []
    last_end = None
    for m in _WORD.finditer(clean):
        if last_end is not None:
            labels.append(_gap_label(clean[last_end:m.start()]))
        tokens.append(m.group())
        last_end = m.end()
    if last_end is not None:
        labels.append(_gap_label(clean[last_end:]))
    return tokens, labels


def _gap_label(gap: str) -> PunctClass:
    for ch in gap:
        cls = _MARK_TO_CLASS.get(ch)
        if cls is not None:
            return cls
    return PunctClass.OTHER


def corpus_sentences(text: str, keep_marks: bool = False) -> list[str]:
    """Split punctuated text into sentences on ".", "?", "!" terminators."""
    out = []
    for m in re.finditer(r"[^.?!]+[.?!]?", text):
        body = m.group()
        mark = body[-1] if body[-1] in ".?!" else ""
        core = body.rstrip(".?!").strip()
        if core:
            out.append(core + mark if keep_marks else core)
    return out


def _segment_matrix(ids: np.ndarray, window: int) -> np.ndarray:
    """(n, window) id matrix; slot window//2 is the mask, the current token
    sits immediately left of it, and out-of-range slots are pad."""
    n = ids.shape[0]
    half = window // 2
    left = half            # context slots incl. the current token
    right = window - half - 1
    padded = np.full(n + left - 1 + right, PAD_ID, dtype=np.int32)
    padded[left - 1:left - 1 + n] = ids
    seg = np.empty((n, window), dtype=np.int32)
    base = np.arange(n)[:, None]
    seg[:, :left] = padded[base + np.arange(left)]
    seg[:, half] = MASK_ID
    seg[:, half + 1:] = padded[base + left + np.arange(right)]
    return seg


def _token_ids(model_vocab: dict[str, int], tokens: list[str]) -> np.ndarray:
    return np.asarray([model_vocab.get(t, UNK_ID) for t in tokens],
                      dtype=np.int32)


def _forward(model: TaggerModel, seg: np.ndarray) -> np.ndarray:
    feats = model.emb[seg].reshape(seg.shape[0], -1)
    return feats @ model.weights + model.bias


def train_tagger_text(text: str, window: int = 32, epochs: int = 5,
                      seed: int = 42, dim: int = 16, lr: float = 0.5,
                      batch_size: int = 64) -> TaggerModel:
    """Train on punctuated text already in memory (see train_tagger)."""
    if window % 2 != 0 or window < 4:
        raise ValueError("window must be even and >= 4")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    tokens, labels = parse_corpus(text)
    if not tokens:
        raise DegenerateCorpusError("degenerate corpus: no tokens")
    y = np.asarray([int(l) for l in labels], dtype=np.int64)
    counts = np.bincount(y, minlength=4).astype(np.float64)
    if counts[PunctClass.PERIOD] == 0:
        raise DegenerateCorpusError("degenerate corpus: no period labels")
    class_weights = np.zeros(4)
    present = counts > 0
    class_weights[present] = y.shape[0] / (4.0 * counts[present])

    # deterministic vocab order: frequency desc, then lexicographic
    freq: dict[str, int] = {}
    for t in tokens:
        freq[t] = freq.get(t, 0) + 1
    ordered = sorted(freq, key=lambda t: (-freq[t], t))
    vocab = {t: i + _N_SPECIAL for i, t in enumerate(ordered)}

    rng = np.random.default_rng(seed)
    emb = rng.normal(0.0, 0.1, size=(len(vocab) + _N_SPECIAL, dim))
    weights = rng.normal(0.0, 0.01, size=(window * dim, 4))
    bias = np.zeros(4)

    ids = _token_ids(vocab, tokens)
    seg = _segment_matrix(ids, window)
    n = seg.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            sb = seg[idx]
            feats = emb[sb].reshape(idx.shape[0], -1)
            logits = feats @ weights + bias
            logits -= logits.max(axis=1, keepdims=True)
            p = np.exp(logits)
            p /= p.sum(axis=1, keepdims=True)
            yb = y[idx]
            p[np.arange(idx.shape[0]), yb] -= 1.0
            p *= class_weights[yb][:, None] / idx.shape[0]
            dfeats = p @ weights.T
            weights -= lr * (feats.T @ p)
            bias -= lr * p.sum(axis=0)
            np.subtract.at(
                emb, sb.ravel(),
                lr * dfeats.reshape(-1, dim),
            )
    fp = hashlib.sha256("\n".join(ordered).encode("utf-8")).hexdigest()[:16]
    return TaggerModel(window=window, dim=dim, vocab=vocab, emb=emb,
                       weights=weights, bias=bias, class_weights=class_weights,
                       fingerprint=fp, seed=seed, epochs=epochs)


def train_tagger(corpus_path: str, window: int = 32, epochs: int = 5,
                 seed: int = 42, dim: int = 16, lr: float = 0.5,
                 batch_size: int = 64) -> TaggerModel:
    """Train the tagger on a punctuated plain-text corpus file.

    Labels are derived per token as the punctuation mark immediately
    following it (else Other); training is minibatch SGD on softmax
    cross-entropy with inverse-frequency class weights, deterministic for a
    fixed seed.
    """
    with open(corpus_path, encoding="utf-8") as fh:
        text = fh.read()
    return train_tagger_text(text, window=window, epochs=epochs, seed=seed,
                             dim=dim, lr=lr, batch_size=batch_size)


def predict_labels(model: TaggerModel, tokens: list[str]) -> list[PunctClass]:
    """One label per token; each position is classified from its segment."""
    if not tokens:
        return []
    ids = _token_ids(model.vocab, tokens)
    seg = _segment_matrix(ids, model.window)
    logits = _forward(model, seg)
    return [PunctClass(int(k)) for k in logits.argmax(axis=1)]


def _render(tokens: list[str], labels: list[PunctClass],
            capitalize: bool = False) -> str:
    pieces = []
    sentence_start = True
    for tok, lab in zip(tokens, labels):
        if capitalize:
            if tok == "i":
                tok = "I"
            elif sentence_start:
                tok = tok[:1].upper() + tok[1:]
        sentence_start = lab in (PunctClass.PERIOD, PunctClass.QUESTION)
        pieces.append(tok + _CLASS_TO_MARK[lab])
    return " ".join(pieces)


def restore_partial(model: TaggerModel, raw: str,
                    collapse_stutters: bool = True) -> PunctuatedText:
    """Periods-only restoration: predict, demote commas/questions to Other,
    force a terminal period, and render.  Output has no mark but ".".

    collapse_stutters=False skips the repeat collapse for text whose tokens
    are already final (e.g. re-punctuating an extracted summary, where a
    collapse would desync it from its source token sequence).
    """
    cleaner = clean_for_tagging if collapse_stutters else strip_punctuation
    tokens = cleaner(raw).split()
    if not tokens:
        return PunctuatedText((), (), "")
    labels = [
        lab if lab is PunctClass.PERIOD else PunctClass.OTHER
        for lab in predict_labels(model, tokens)
    ]
    labels[-1] = PunctClass.PERIOD
    return PunctuatedText(tuple(tokens), tuple(labels),
                          _render(tokens, labels))


def restore_full(model: TaggerModel, raw: str,
                 contraction_map: dict[str, str] | None = None,
                 collapse_stutters: bool = True) -> PunctuatedText:
    """Full 4-class restoration with readability post-processing.

    Post-processing: contraction expansion (a mapped token becomes its
    expansion words, the label moving to the last of them), capitalization of
    sentence starts and standalone "i", and a terminal period when the last
    label is Other.  collapse_stutters as in restore_partial.
    """
    if contraction_map is None:
        contraction_map = load_contractions()
    cleaner = clean_for_tagging if collapse_stutters else strip_punctuation
    tokens = cleaner(raw).split()
    if not tokens:
        return PunctuatedText((), (), "")
    labels = predict_labels(model, tokens)
    out_tokens: list[str] = []
    out_labels: list[PunctClass] = []
    for tok, lab in zip(tokens, labels):
        expansion = contraction_map.get(tok)
        words = expansion.split() if expansion else [tok]
        out_tokens.extend(words)
        out_labels.extend([PunctClass.OTHER] * (len(words) - 1))
        out_labels.append(lab)
    if out_labels[-1] is PunctClass.OTHER:
        out_labels[-1] = PunctClass.PERIOD
    return PunctuatedText(tuple(out_tokens), tuple(out_labels),
                          _render(out_tokens, out_labels, capitalize=True))


def classification_report(model: TaggerModel, tokens: list[str],
                          labels: list[PunctClass],
                          ) -> dict[str, dict[str, float]]:
    """Per-class precision/recall/support of predictions on labeled tokens."""
    preds = predict_labels(model, tokens)
    report = {}
    for cls in PunctClass:
        tp = sum(1 for p, t in zip(preds, labels) if p == cls and t == cls)
        fp = sum(1 for p, t in zip(preds, labels) if p == cls and t != cls)
        fn = sum(1 for p, t in zip(preds, labels) if p != cls and t == cls)
        report[cls.name] = {
            "precision": tp / (tp + fp) if tp + fp else 0.0,
            "recall": tp / (tp + fn) if tp + fn else 0.0,
            "support": float(tp + fn),
        }
    return report


_TAGGER_FORMAT = "callsum-tagger-v1"


def save_tagger(model: TaggerModel, path: str) -> None:
    """Flat binary dump: one JSON header line, then raw float64 buffers.

    The layout (not an archive format) keeps same-seed retrains byte
    identical; zip-based containers embed timestamps and break that.
    """
    header = {
        "format": _TAGGER_FORMAT,
        "window": model.window,
        "dim": model.dim,
        "classes": {c.name: int(c) for c in PunctClass},
        "vocab": sorted(model.vocab, key=model.vocab.get),
        "class_weights": model.class_weights.tolist(),
        "fingerprint": model.fingerprint,
        "seed": model.seed,
        "epochs": model.epochs,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(model.emb, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.weights, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.bias, dtype="<f8").tobytes())


def load_tagger(path: str) -> TaggerModel:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError:
            raise DataError(f"{path}: not a tagger model file") from None
        if header.get("format") != _TAGGER_FORMAT:
            raise DataError(f"{path}: not a tagger model file")
        window, dim = header["window"], header["dim"]
        words = header["vocab"]
        n_emb = len(words) + _N_SPECIAL
        buf = fh.read()
    need = (n_emb * dim + window * dim * 4 + 4) * 8
    if len(buf) != need:
        raise DataError(f"{path}: truncated tagger model file")
    flat = np.frombuffer(buf, dtype="<f8")
    emb_n = n_emb * dim
    w_n = window * dim * 4
    return TaggerModel(
        window=window, dim=dim,
        vocab={t: i + _N_SPECIAL for i, t in enumerate(words)},
        emb=flat[:emb_n].reshape(n_emb, dim).copy(),
        weights=flat[emb_n:emb_n + w_n].reshape(window * dim, 4).copy(),
        bias=flat[emb_n + w_n:].copy(),
        class_weights=np.asarray(header["class_weights"]),
        fingerprint=header["fingerprint"],
        seed=header["seed"],
        epochs=header["epochs"],
    )
