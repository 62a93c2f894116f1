"""ROUGE-L scoring and the punctuation-restoration-accuracy metric.

Both metrics tokenize the way the transcript pipeline does (lowercase,
apostrophes dropped, everything non-alphanumeric treated as a separator) so
scores are insensitive to restoration casing and rendering.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import AlignmentError, DataError
from .ingest import Role

_APOSTROPHES = re.compile(r"[’']")
_TOKEN = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(_APOSTROPHES.sub("", text.lower()))


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class PunctAccuracy:
    matched: int
    total_reference: int
    percent: float

    @property
    def undefined(self) -> bool:
        """True when the reference had no periods (percent reported as 0)."""
        return self.total_reference == 0


def _lcs_length(a: list[str], b: list[str]) -> int:
    # rolling two-row DP; the full-table version lives in the tests as an
    # independent oracle
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    cur = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = cur[j - 1] if cur[j - 1] >= prev[j] else prev[j]
        prev, cur = cur, prev
    return prev[len(b)]


def rouge_l(hypothesis: str, reference: str) -> RougeScore:
    """Token-level LCS precision/recall/F1; zeros when either side is empty."""
    hyp = _tokens(hypothesis)
    ref = _tokens(reference)
    if not hyp or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = _lcs_length(hyp, ref)
    p = lcs / len(hyp)
    r = lcs / len(ref)
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return RougeScore(p, r, f1)


def _period_indices(text: str) -> tuple[list[str], set[int]]:
    """Token list plus the set of token indices followed by a period."""
    clean = _APOSTROPHES.sub("", text.lower())
    tokens: list[str] = []
    periods: set[int] = set()
    last_end = None
    for m in _TOKEN.finditer(clean):
        if last_end is not None and "." in clean[last_end:m.start()]:
            periods.add(len(tokens) - 1)
        tokens.append(m.group())
        last_end = m.end()
    if last_end is not None and "." in clean[last_end:]:
        periods.add(len(tokens) - 1)
    return tokens, periods


def punct_accuracy(extracted: str, partial: str) -> PunctAccuracy:
    """Share of the partial text's periods found at the same token index in
    the extracted text.

    Both strings must tokenize to the same unpunctuated sequence; a mismatch
    means an upstream invariant broke and raises AlignmentError.
    """
    ext_tokens, ext_periods = _period_indices(extracted)
    par_tokens, par_periods = _period_indices(partial)
    if ext_tokens != par_tokens:
        raise AlignmentError("texts not alignable: token sequences differ")
    matched = len(ext_periods & par_periods)
    total = len(par_periods)
    percent = 100.0 * matched / total if total > 0 else 0.0
    return PunctAccuracy(matched=matched, total_reference=total, percent=percent)


@dataclass(frozen=True)
class CallScores:
    call_id: str
    customer_rouge: RougeScore
    agent_rouge: RougeScore
    customer_punct: PunctAccuracy
    agent_punct: PunctAccuracy


@dataclass(frozen=True)
class EvaluationReport:
    calls: tuple[CallScores, ...]
    errors: tuple[tuple[str, str], ...]
    avg_customer_rouge: RougeScore
    avg_agent_rouge: RougeScore
    avg_customer_punct: float
    avg_agent_punct: float
    references_supplied: bool


def _avg_rouge(scores: list[RougeScore]) -> RougeScore:
    n = len(scores)
    if n == 0:
        return RougeScore(0.0, 0.0, 0.0)
    return RougeScore(
        sum(s.precision for s in scores) / n,
        sum(s.recall for s in scores) / n,
        sum(s.f1 for s in scores) / n,
    )


def evaluate_run(records, references=None) -> EvaluationReport:
    """Score every (customer, agent) summary pair and average the results.

    records: list of (SummaryRecord, SummaryRecord) pairs.  references maps
    (call_id, role) to reference text; when absent for a call, the record's
    stored period-restored source transcript is used.  Calls whose scoring
    raises are excluded from the averages and listed in the report.
    """
    if not records:
        raise DataError("no summary records to evaluate")
    rows: list[CallScores] = []
    errors: list[tuple[str, str]] = []
    for cust, agent in records:
        call_id = cust.call_id
        try:
            refs = {}
            for rec in (cust, agent):
                ref = None
                if references is not None:
                    ref = references.get((rec.call_id, rec.role))
                refs[rec.role] = rec.reference if ref is None else ref
            rows.append(CallScores(
                call_id=call_id,
                customer_rouge=rouge_l(cust.extracted, refs[Role.CUSTOMER]),
                agent_rouge=rouge_l(agent.extracted, refs[Role.AGENT]),
                customer_punct=punct_accuracy(cust.extracted, cust.partial),
                agent_punct=punct_accuracy(agent.extracted, agent.partial),
            ))
        except Exception as exc:  # noqa: BLE001 - per-call isolation
            errors.append((call_id, f"{type(exc).__name__}: {exc}"))
    n = len(rows)
    return EvaluationReport(
        calls=tuple(rows),
        errors=tuple(errors),
        avg_customer_rouge=_avg_rouge([r.customer_rouge for r in rows]),
        avg_agent_rouge=_avg_rouge([r.agent_rouge for r in rows]),
        avg_customer_punct=sum(r.customer_punct.percent for r in rows) / n if n else 0.0,
        avg_agent_punct=sum(r.agent_punct.percent for r in rows) / n if n else 0.0,
        references_supplied=references is not None,
    )
