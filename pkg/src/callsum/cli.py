"""Command-line front end and configuration handling.

Subcommands: summarize, eval, punct train, punct restore, topics sweep.
Every flag has a config-file equivalent (flat key=value lines); CLI flags
override the file.  The only environment variable honored is
CALLSUM_OUTPUT_DIR, which overrides the default output directory but not an
explicit --output-dir.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal
invariant breach.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CallSumError, DataError, InvariantError
from .evalmetrics import EvaluationReport, evaluate_run
from .ingest import ChannelTranscript, Role, load_calls, separate_channels
from .punct import (classification_report, corpus_sentences, load_tagger,
                    parse_corpus, restore_full, restore_partial, save_tagger,
                    train_tagger_text)
from .summarize import (PipelineConfig, TermMode, read_summary_records,
                        run_pipeline)
from .textprep import PrepConfig, build_corpus, prepare_documents
from .topics import CoherenceMeasure, ModelKind, SweepSpec, optimize_models
from .vectors import load_vectors

USAGE_ERROR = 1
DATA_ERROR = 2
INTERNAL_ERROR = 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


_CONFIG_KEYS = {
    "input", "vectors", "tagger", "output_dir", "vector_limit",
    "sentences", "mode", "term_threshold", "uniqueness_threshold",
    "uniqueness", "n_dominant", "n_keywords",
    "model_kinds", "k_values", "lda_iters", "hdp_iters", "hdp_max_topics",
    "top_n", "coherence", "cv_window",
    "seed", "jobs", "fold_in_sweeps",
    "min_word_len", "ngram_min_count", "ngram_threshold",
}


def parse_config_file(path: str) -> dict[str, str]:
    """Flat key=value config; '#' starts a comment; role.<channel> maps roles."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ValueError(f"{path}:{line_no}: expected key=value")
            if key not in _CONFIG_KEYS and not key.startswith("role."):
                raise ValueError(f"{path}:{line_no}: unknown key {key!r}")
            values[key] = value.strip()
    return values


@dataclass
class ToolConfig:
    """Merged file/flag/environment settings for one invocation."""

    input: str | None = None
    vectors: str | None = None
    tagger: str | None = None
    output_dir: str = "callsum-out"
    vector_limit: int | None = None
    sentences: int = 5
    mode: str = "global"
    term_threshold: float = 0.5
    uniqueness_threshold: float = 0.9
    uniqueness: bool = True
    n_dominant: int = 1
    n_keywords: int = 10
    model_kinds: tuple[str, ...] = ("lda", "lsi", "hdp")
    k_values: tuple[int, ...] = (2, 4, 6, 8, 10)
    lda_iters: int = 500
    hdp_iters: int = 500
    hdp_max_topics: int = 50
    top_n: int = 10
    coherence: str = "u_mass"
    cv_window: int = 110
    seed: int = 42
    jobs: int = 0
    fold_in_sweeps: int = 100
    min_word_len: int = 5
    ngram_min_count: int = 5
    ngram_threshold: float = 10.0
    role_map: dict[str, Role] = field(
        default_factory=lambda: {"0": Role.CUSTOMER, "1": Role.AGENT})

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            n_sentences=self.sentences,
            extraction_mode=TermMode(self.mode),
            term_threshold=self.term_threshold,
            uniqueness_threshold=self.uniqueness_threshold,
            uniqueness_enabled=self.uniqueness,
            n_dominant=self.n_dominant,
            n_keywords=self.n_keywords,
            model_kinds=frozenset(ModelKind(k) for k in self.model_kinds),
            sweep=SweepSpec(
                k_values=self.k_values, lda_iters=self.lda_iters,
                hdp_iters=self.hdp_iters, hdp_max_topics=self.hdp_max_topics,
                seed=self.seed, top_n=self.top_n, cv_window=self.cv_window,
            ),
            coherence_measure=CoherenceMeasure(self.coherence),
            seed=self.seed,
            prep=PrepConfig(
                min_word_len=self.min_word_len,
                ngram_min_count=self.ngram_min_count,
                ngram_threshold=self.ngram_threshold,
            ),
            fold_in_sweeps=self.fold_in_sweeps,
        )


_BOOL = {"1": True, "true": True, "on": True, "yes": True,
         "0": False, "false": False, "off": False, "no": False}


def _apply_config_values(cfg: ToolConfig, values: dict[str, str]) -> None:
    for key, raw in values.items():
        if key.startswith("role."):
            cfg.role_map[key[len("role."):]] = Role(raw.lower())
        elif key in ("input", "vectors", "tagger", "output_dir", "mode",
                     "coherence"):
            setattr(cfg, key, raw)
        elif key in ("sentences", "n_dominant", "n_keywords", "lda_iters",
                     "hdp_iters", "hdp_max_topics", "top_n", "cv_window",
                     "seed", "jobs", "fold_in_sweeps", "min_word_len",
                     "ngram_min_count", "vector_limit"):
            setattr(cfg, key, int(raw))
        elif key in ("term_threshold", "uniqueness_threshold",
                     "ngram_threshold"):
            setattr(cfg, key, float(raw))
        elif key == "uniqueness":
            cfg.uniqueness = _BOOL[raw.lower()]
        elif key == "model_kinds":
            cfg.model_kinds = tuple(p.strip() for p in raw.split(",") if p.strip())
        elif key == "k_values":
            cfg.k_values = tuple(int(p) for p in raw.split(",") if p.strip())


def _build_tool_config(args: argparse.Namespace) -> ToolConfig:
    cfg = ToolConfig()
    if getattr(args, "config", None):
        _apply_config_values(cfg, parse_config_file(args.config))
    env_out = os.environ.get("CALLSUM_OUTPUT_DIR")
    if env_out:
        cfg.output_dir = env_out
    overrides: dict[str, str] = {}
    for key in _CONFIG_KEYS:
        flag = key
        if not hasattr(args, flag):
            continue
        value = getattr(args, flag)
        if value is None:
            continue
        if isinstance(value, bool):
            overrides[key] = "true" if value else "false"
        elif isinstance(value, (list, tuple)):
            overrides[key] = ",".join(str(v) for v in value)
        else:
            overrides[key] = str(value)
    _apply_config_values(cfg, overrides)
    for spec in getattr(args, "role", None) or []:
        channel, sep, role = spec.partition("=")
        if not sep:
            raise ValueError(f"--role expects CHANNEL=ROLE, got {spec!r}")
        cfg.role_map[channel] = Role(role.lower())
    return cfg


def _require_files(*paths: tuple[str, str | None]) -> None:
    for label, p in paths:
        if not p:
            raise ValueError(f"missing required path: {label}")
        if not Path(p).is_file():
            raise DataError(f"{label} file not found: {p}")


def cmd_summarize(args: argparse.Namespace) -> int:
    cfg = _build_tool_config(args)
    _require_files(("input", cfg.input), ("vectors", cfg.vectors),
                   ("tagger", cfg.tagger))
    pipeline_cfg = cfg.pipeline_config()
    store = load_vectors(cfg.vectors, cfg.vector_limit)
    tagger = load_tagger(cfg.tagger)
    result = run_pipeline(cfg.input, pipeline_cfg, store, tagger,
                          role_map=cfg.role_map, out_dir=cfg.output_dir)
    print(f"summarized {len(result.records)} calls -> {cfg.output_dir}/summaries.csv")
    if result.errors:
        print(f"{len(result.errors)} record error(s) -> {cfg.output_dir}/errors.json")
    return 0


def _write_eval_report(report: EvaluationReport, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "references_supplied": report.references_supplied,
        "averages": {
            "customer_rouge": vars(report.avg_customer_rouge),
            "agent_rouge": vars(report.avg_agent_rouge),
            "customer_punct_percent": report.avg_customer_punct,
            "agent_punct_percent": report.avg_agent_punct,
        },
        "calls": [
            {
                "call_id": c.call_id,
                "customer_rouge": vars(c.customer_rouge),
                "agent_rouge": vars(c.agent_rouge),
                "customer_punct_percent": c.customer_punct.percent,
                "agent_punct_percent": c.agent_punct.percent,
            }
            for c in report.calls
        ],
        "errors": [{"call_id": c, "message": m} for c, m in report.errors],
    }
    with open(out / "eval_report.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    lines = ["call_id,customer_rouge_f1,agent_rouge_f1,"
             "customer_punct_percent,agent_punct_percent"]
    for c in report.calls:
        lines.append(f"{c.call_id},{c.customer_rouge.f1:.6f},"
                     f"{c.agent_rouge.f1:.6f},{c.customer_punct.percent:.2f},"
                     f"{c.agent_punct.percent:.2f}")
    lines.append(f"AVERAGE,{report.avg_customer_rouge.f1:.6f},"
                 f"{report.avg_agent_rouge.f1:.6f},"
                 f"{report.avg_customer_punct:.2f},"
                 f"{report.avg_agent_punct:.2f}")
    (out / "eval_report.csv").write_text("\n".join(lines) + "\n", "utf-8")


def _load_references(path: str) -> dict[tuple[str, Role], str]:
    refs: dict[tuple[str, Role], str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            for role in Role:
                if role.value in row:
                    refs[(row["call_id"], role)] = row[role.value]
    return refs


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _build_tool_config(args)
    _require_files(("summaries", args.summaries))
    records = read_summary_records(args.summaries)
    if not records:
        raise DataError(f"{args.summaries}: no summary records")
    references = None
    if args.references:
        _require_files(("references", args.references))
        references = _load_references(args.references)
        table_ids = {rec.call_id for pair in records for rec in pair}
        ref_ids = {cid for cid, _ in references}
        missing = sorted(table_ids - ref_ids)
        extra = sorted(ref_ids - table_ids)
        if missing or extra:
            for cid in missing:
                print(f"no reference for call {cid}", file=sys.stderr)
            for cid in extra:
                print(f"reference for unknown call {cid}", file=sys.stderr)
            raise DataError("summary table and references disagree on call ids")
    report = evaluate_run(records, references)
    _write_eval_report(report, cfg.output_dir)
    if not report.references_supplied:
        print("note: no references supplied; period-restored transcripts used")
    print(f"avg customer rouge-l f1: {report.avg_customer_rouge.f1:.4f}")
    print(f"avg agent rouge-l f1: {report.avg_agent_rouge.f1:.4f}")
    print(f"avg customer punct accuracy: {report.avg_customer_punct:.2f}%")
    print(f"avg agent punct accuracy: {report.avg_agent_punct:.2f}%")
    print(f"report -> {cfg.output_dir}/eval_report.json")
    return 0


def cmd_punct_train(args: argparse.Namespace) -> int:
    _require_files(("corpus", args.corpus))
    text = Path(args.corpus).read_text("utf-8")
    holdout = args.holdout
    if holdout > 0:
        stride = max(2, round(1.0 / holdout))
        sentences = corpus_sentences(text, keep_marks=True)
        train_sents = [s for i, s in enumerate(sentences) if i % stride != stride - 1]
        held_sents = [s for i, s in enumerate(sentences) if i % stride == stride - 1]
        train_text = " ".join(train_sents)
        held_text = " ".join(held_sents)
    else:
        train_text, held_text = text, ""
    model = train_tagger_text(train_text, window=args.window,
                              epochs=args.epochs, seed=args.seed)
    save_tagger(model, args.output)
    print(f"model written to {args.output} "
          f"(window={model.window}, epochs={model.epochs}, seed={model.seed})")
    if held_text:
        tokens, labels = parse_corpus(held_text)
        report = classification_report(model, tokens, labels)
        print("held-out class-wise precision/recall:")
        for name, row in report.items():
            print(f"  {name:<8} precision={row['precision']:.3f} "
                  f"recall={row['recall']:.3f} support={int(row['support'])}")
    return 0


def cmd_punct_restore(args: argparse.Namespace) -> int:
    _require_files(("model", args.model), ("input", args.input))
    model = load_tagger(args.model)
    raw = Path(args.input).read_text("utf-8")
    restore = restore_full if args.mode == "full" else restore_partial
    rendered = restore(model, raw).rendered
    if args.output:
        Path(args.output).write_text(rendered + "\n", "utf-8")
        print(f"restored text -> {args.output}")
    else:
        print(rendered)
    return 0


def cmd_topics_sweep(args: argparse.Namespace) -> int:
    cfg = _build_tool_config(args)
    _require_files(("input", cfg.input), ("tagger", cfg.tagger))
    pipeline_cfg = cfg.pipeline_config()
    tagger = load_tagger(cfg.tagger)
    report = load_calls(cfg.input, cfg.role_map)
    roles = ([Role(args.side)] if args.side in ("customer", "agent")
             else [Role.CUSTOMER, Role.AGENT])
    transcripts: dict[Role, list[ChannelTranscript]] = {r: [] for r in roles}
    for call in report.calls:
        cust, agent = separate_channels(call, cfg.role_map)
        for tx in (cust, agent):
            if tx.role in transcripts:
                rendered = (restore_partial(tagger, tx.raw_text).rendered
                            if tx.raw_text.strip() else "")
                transcripts[tx.role].append(
                    ChannelTranscript(tx.call_id, tx.role, rendered))
    payload = {}
    for role in roles:
        docs, _ = prepare_documents(transcripts[role], pipeline_cfg.prep)
        corpus = build_corpus(docs)
        sweep = optimize_models(corpus, docs, pipeline_cfg.sweep,
                                pipeline_cfg.coherence_measure,
                                pipeline_cfg.model_kinds)
        payload[role.value] = {
            "candidates": [
                {
                    "descriptor": c.model.descriptor(),
                    "num_topics": c.model.num_topics,
                    "coherence": c.score.value,
                    "measure": c.score.measure.value,
                }
                for c in sweep.candidates
            ],
            "best": sweep.best_model.descriptor(),
            "failures": [{"candidate": d, "message": m}
                         for d, m in sweep.failures],
        }
    text = json.dumps(payload, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n", "utf-8")
        print(f"sweep report -> {args.output}")
    else:
        print(text)
    return 0


def _add_common_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--input", help="JSON-Lines call transcripts")
    p.add_argument("--tagger", help="trained punctuation tagger model file")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="parallelism degree (results are "
                   "deterministic for any value)")
    p.add_argument("--model-type", dest="model_kinds",
                   help="comma list from lda,lsi,hdp; restricts the sweep")
    p.add_argument("--k-values", dest="k_values",
                   type=lambda s: tuple(int(x) for x in s.split(",")))
    p.add_argument("--lda-iters", dest="lda_iters", type=int)
    p.add_argument("--hdp-iters", dest="hdp_iters", type=int)
    p.add_argument("--hdp-max-topics", dest="hdp_max_topics", type=int)
    p.add_argument("--top-n", dest="top_n", type=int)
    p.add_argument("--coherence", choices=["u_mass", "c_v"])
    p.add_argument("--cv-window", dest="cv_window", type=int)
    p.add_argument("--min-word-len", dest="min_word_len", type=int)
    p.add_argument("--ngram-min-count", dest="ngram_min_count", type=int)
    p.add_argument("--ngram-threshold", dest="ngram_threshold", type=float)
    p.add_argument("--role", action="append",
                   help="CHANNEL=customer|agent (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="callsum",
                     description="Extractive summarization toolkit for "
                                 "two-party call transcripts")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sum = sub.add_parser("summarize", help="run the batch pipeline")
    _add_common_pipeline_flags(p_sum)
    p_sum.add_argument("--vectors", help="word2vec-format text vectors")
    p_sum.add_argument("--vector-limit", dest="vector_limit", type=int)
    p_sum.add_argument("--sentences", type=int, help="summary length")
    p_sum.add_argument("--mode", choices=["global", "local"],
                       help="term extraction mode")
    p_sum.add_argument("--term-threshold", dest="term_threshold", type=float)
    p_sum.add_argument("--uniqueness-threshold", dest="uniqueness_threshold",
                       type=float)
    p_sum.add_argument("--no-uniqueness", dest="uniqueness",
                       action="store_false", default=None)
    p_sum.add_argument("--n-dominant", dest="n_dominant", type=int)
    p_sum.add_argument("--n-keywords", dest="n_keywords", type=int)
    p_sum.add_argument("--fold-in-sweeps", dest="fold_in_sweeps", type=int)
    p_sum.set_defaults(func=cmd_summarize)

    p_eval = sub.add_parser("eval", help="score a summaries table")
    p_eval.add_argument("--summaries", required=True,
                        help="summaries.jsonl from a summarize run")
    p_eval.add_argument("--references",
                        help="JSONL with call_id/customer/agent reference "
                             "texts; defaults to the stored transcripts")
    p_eval.add_argument("--output-dir", dest="output_dir")
    p_eval.add_argument("--config", help="flat key=value config file")
    p_eval.set_defaults(func=cmd_eval)

    p_punct = sub.add_parser("punct", help="punctuation tagger tools")
    punct_sub = p_punct.add_subparsers(dest="punct_command", required=True)

    p_train = punct_sub.add_parser("train", help="train the tagger")
    p_train.add_argument("--corpus", required=True,
                         help="punctuated plain-text training corpus")
    p_train.add_argument("--output", required=True, help="model file to write")
    p_train.add_argument("--window", type=int, default=32)
    p_train.add_argument("--epochs", type=int, default=5)
    p_train.add_argument("--seed", type=int, default=42)
    p_train.add_argument("--holdout", type=float, default=0.1,
                         help="held-out fraction for the report; 0 disables")
    p_train.set_defaults(func=cmd_punct_train)

    p_restore = punct_sub.add_parser("restore", help="restore punctuation")
    p_restore.add_argument("--model", required=True)
    p_restore.add_argument("--input", required=True, help="plain-text file")
    p_restore.add_argument("--mode", choices=["partial", "full"],
                           default="full")
    p_restore.add_argument("--output")
    p_restore.set_defaults(func=cmd_punct_restore)

    p_topics = sub.add_parser("topics", help="topic model tools")
    topics_sub = p_topics.add_subparsers(dest="topics_command", required=True)
    p_sweep = topics_sub.add_parser("sweep",
                                    help="run model optimization standalone")
    _add_common_pipeline_flags(p_sweep)
    p_sweep.add_argument("--side", choices=["customer", "agent", "both"],
                         default="both", help="which channel(s) to sweep")
    p_sweep.add_argument("--output", help="JSON report path (default stdout)")
    p_sweep.set_defaults(func=cmd_topics_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"callsum: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except InvariantError as exc:
        print(f"callsum: invariant breach: {exc}", file=sys.stderr)
        return INTERNAL_ERROR
    except (DataError, OSError) as exc:
        print(f"callsum: {exc}", file=sys.stderr)
        return DATA_ERROR
    except CallSumError as exc:
        print(f"callsum: {exc}", file=sys.stderr)
        return INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
