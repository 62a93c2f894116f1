"""Extractive summarization toolkit for two-party call transcripts.

The pipeline separates each call into customer and agent channels, restores
punctuation with a trainable 4-class tagger, selects the best-coherence topic
model per role (LDA, LSI, or HDP), extracts significant terms with word
vectors, picks the most query-similar sentences, and scores the result with
ROUGE-L and a punctuation-restoration accuracy metric.
"""

from .errors import (AlignmentError, CallSumError, ChannelError, DataError,
                     DegenerateCorpusError, EmptyCorpusError,
                     EmptyDocumentError, InvariantError)
from .evalmetrics import (CallScores, EvaluationReport, PunctAccuracy,
                          RougeScore, evaluate_run, punct_accuracy, rouge_l)
from .ingest import (ChannelTranscript, LoadReport, RawCall, Role, Turn,
                     load_calls, separate_channels)
from .punct import (PunctClass, PunctuatedText, TaggerModel, load_tagger,
                    restore_full, restore_partial, save_tagger, train_tagger,
                    train_tagger_text)
from .summarize import (PipelineConfig, PipelineResult, SummaryRecord,
                        TermMode, read_summary_records, run_pipeline,
                        summarize_call, write_summary_table)
from .textprep import (Corpus, Document, PrepConfig, build_corpus,
                       prepare_document, prepare_documents)
from .topics import (CoherenceMeasure, ModelKind, SweepResult, SweepSpec,
                     TopicModel, coherence_cv, coherence_umass,
                     dominant_topics, load_model, optimize_models, save_model,
                     train_hdp, train_lda, train_lsi)
from .vectors import (SentenceEmbedding, WordVectorStore, cosine,
                      embed_sentence, load_vectors, term_similarity)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError", "CallSumError", "ChannelError", "DataError",
    "DegenerateCorpusError", "EmptyCorpusError", "EmptyDocumentError",
    "InvariantError",
    "CallScores", "EvaluationReport", "PunctAccuracy", "RougeScore",
    "evaluate_run", "punct_accuracy", "rouge_l",
    "ChannelTranscript", "LoadReport", "RawCall", "Role", "Turn",
    "load_calls", "separate_channels",
    "PunctClass", "PunctuatedText", "TaggerModel", "load_tagger",
    "restore_full", "restore_partial", "save_tagger", "train_tagger",
    "train_tagger_text",
    "PipelineConfig", "PipelineResult", "SummaryRecord", "TermMode",
    "read_summary_records", "run_pipeline", "summarize_call",
    "write_summary_table",
    "Corpus", "Document", "PrepConfig", "build_corpus", "prepare_document",
    "prepare_documents",
    "CoherenceMeasure", "ModelKind", "SweepResult", "SweepSpec", "TopicModel",
    "coherence_cv", "coherence_umass", "dominant_topics", "load_model",
    "optimize_models", "save_model", "train_hdp", "train_lda", "train_lsi",
    "SentenceEmbedding", "WordVectorStore", "cosine", "embed_sentence",
    "load_vectors", "term_similarity",
    "__version__",
]
