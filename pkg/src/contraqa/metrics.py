"""Evaluation metrics: answer F1, evidence-aware F1, Hits@k / MHits@k, stance P/R/F.

Scale conventions follow the reporting tables: ``f1_from_correctness``,
``hits_at_k`` and ``mhits_at_k`` return fractions in [0, 1] per question;
``f1_ans``, ``f1_contro_at_e``, ``stance_prf`` and the aggregate report
return percentages in [0, 100].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from contraqa.corpus import Dataset, GoldAnswer, QType
from contraqa.errors import DatasetValidationError
from contraqa.reader import normalize_answer
from contraqa.retrieval import RankedTweet
from contraqa.stance import StanceLabel

# A predicted tuple: (answer text, supporting tweet ids ranked best-first,
# refuting tweet ids ranked best-first).
PredTuple = tuple[str, Sequence[str], Sequence[str]]

MatchFn = Callable[[Iterable[str], Iterable[str]], int]


def evidence_match(evidence: Iterable[str], gold_evidence: Iterable[str]) -> int:
    """1 iff the two evidence id sets intersect."""
    return 1 if set(evidence) & set(gold_evidence) else 0


def answer_match_always(evidence: Iterable[str], gold_evidence: Iterable[str]) -> int:
    return 1


@dataclass
class AnswerMatchBreakdown:
    """Per-prediction supporting/refuting match scores and correctness."""

    se: list[int]
    re: list[int]
    c: list[float]


def score_tuples(
    preds: Sequence[PredTuple],
    golds: Sequence[GoldAnswer],
    mode: QType,
    match_fn: MatchFn = evidence_match,
) -> AnswerMatchBreakdown:
    """Match predicted tuples against gold tuples.

    Answers are compared by exact match after answer normalization; evidence
    by tweet id. Each prediction takes the max over gold answers of
    answer-indicator times the evidence match. Correctness is the mean of
    the supporting and refuting matches for entity questions, and the
    supporting match alone for yes/no questions (the two sides are symmetric
    there).
    """
    gold_rows = [(normalize_answer(g.text), g.supporting, g.refuting) for g in golds]
    se_list: list[int] = []
    re_list: list[int] = []
    c_list: list[float] = []
    for answer, supporting, refuting in preds:
        answer_norm = normalize_answer(answer)
        se = 0
        re = 0
        for gold_norm, gold_sup, gold_ref in gold_rows:
            if answer_norm != gold_norm:
                continue
            se = max(se, match_fn(supporting, gold_sup))
            re = max(re, match_fn(refuting, gold_ref))
        se_list.append(se)
        re_list.append(re)
        c_list.append(float(se) if mode is QType.YESNO else (se + re) / 2.0)
    return AnswerMatchBreakdown(se=se_list, re=re_list, c=c_list)


def f1_from_correctness(c: Sequence[float], m: int, n: int) -> tuple[float, float, float]:
    """(precision, recall, F1) as fractions, treating c as correctness mass.

    precision = sum(c)/m (0 when nothing was predicted), recall = sum(c)/n,
    F1 their harmonic mean (0 when both are 0). n = 0 is a dataset invariant
    violation.
    """
    if n < 1:
        raise ValueError("gold answer count n must be >= 1")
    total = sum(c)
    prec = total / m if m > 0 else 0.0
    rec = total / n
    f1 = (2.0 * prec * rec / (prec + rec)) if (prec + rec) > 0 else 0.0
    return prec, rec, f1


def f1_ans(preds: Sequence[PredTuple], golds: Sequence[GoldAnswer], mode: QType = QType.ENTITY) -> float:
    """Answer-only F1 (evidence ignored), in percent."""
    breakdown = score_tuples(preds, golds, mode, match_fn=answer_match_always)
    _, _, f1 = f1_from_correctness(breakdown.c, len(preds), len(golds))
    return 100.0 * f1


def truncate_evidence(preds: Sequence[PredTuple], e: int) -> list[PredTuple]:
    return [(answer, list(sup)[:e], list(ref)[:e]) for answer, sup, ref in preds]


def f1_contro_at_e(
    preds: Sequence[PredTuple], golds: Sequence[GoldAnswer], e: int, mode: QType = QType.ENTITY
) -> float:
    """Contradictory-evidence F1 at evidence depth e, in percent.

    Prediction evidence lists are truncated to their top-e entries before
    matching; a tuple only scores when some gold evidence appears there.
    """
    breakdown = score_tuples(truncate_evidence(preds, e), golds, mode, match_fn=evidence_match)
    _, _, f1 = f1_from_correctness(breakdown.c, len(preds), len(golds))
    return 100.0 * f1


def _retrieved_ids(retrieved: Sequence[RankedTweet | str], k: int) -> set[str]:
    top = list(retrieved)[:k]
    return {hit.tweet_id if isinstance(hit, RankedTweet) else str(hit) for hit in top}


def hits_at_k(retrieved: Sequence[RankedTweet | str], golds: Sequence[GoldAnswer], k: int) -> int:
    """1 iff any supporting-or-refuting gold tweet appears in the top-k."""
    top = _retrieved_ids(retrieved, k)
    for gold in golds:
        if top & (gold.supporting | gold.refuting):
            return 1
    return 0


def mhits_at_k(retrieved: Sequence[RankedTweet | str], golds: Sequence[GoldAnswer], k: int) -> float:
    """Hits@k scaled by the fraction of answers with evidence in the top-k.

    Penalizes a retriever that covers only some of a question's distinct
    answers.
    """
    if not golds:
        raise ValueError("gold answer list must be non-empty")
    top = _retrieved_ids(retrieved, k)
    covered = sum(1 for gold in golds if top & (gold.supporting | gold.refuting))
    return hits_at_k(retrieved, golds, k) * covered / len(golds)


@dataclass
class PRF:
    precision: float
    recall: float
    f1: float


def stance_prf(
    pred_labels: Sequence[StanceLabel], gold_labels: Sequence[StanceLabel]
) -> dict[str, PRF]:
    """One-vs-rest P/R/F per stance class plus the macro average, in percent.

    Precision (and F) are 0 for a class that is never predicted; recall is 0
    for a class absent from the gold labels.
    """
    if len(pred_labels) != len(gold_labels):
        raise ValueError(
            f"pred/gold length mismatch: {len(pred_labels)} vs {len(gold_labels)}"
        )
    out: dict[str, PRF] = {}
    classes = (StanceLabel.SUPPORTING, StanceLabel.REFUTING, StanceLabel.NEUTRAL)
    for cls in classes:
        tp = sum(1 for p, g in zip(pred_labels, gold_labels) if p is cls and g is cls)
        fp = sum(1 for p, g in zip(pred_labels, gold_labels) if p is cls and g is not cls)
        fn = sum(1 for p, g in zip(pred_labels, gold_labels) if p is not cls and g is cls)
        prec = 100.0 * tp / (tp + fp) if (tp + fp) > 0 else 0.0
        rec = 100.0 * tp / (tp + fn) if (tp + fn) > 0 else 0.0
        f1 = 2.0 * prec * rec / (prec + rec) if (prec + rec) > 0 else 0.0
        out[cls.value] = PRF(precision=prec, recall=rec, f1=f1)
    out["macro"] = PRF(
        precision=sum(out[c.value].precision for c in classes) / 3.0,
        recall=sum(out[c.value].recall for c in classes) / 3.0,
        f1=sum(out[c.value].f1 for c in classes) / 3.0,
    )
    return out


# ---------------------------------------------------------------------------
# Dataset-level aggregation over prediction / retrieval / stance dump records
# ---------------------------------------------------------------------------


@dataclass
class EvalReport:
    f1_ans: float = 0.0
    f1_contro: dict[int, float] = field(default_factory=dict)
    precision: float = 0.0
    recall: float = 0.0
    hits: dict[int, float] = field(default_factory=dict)
    mhits: dict[int, float] = field(default_factory=dict)
    stance: dict[str, PRF] | None = None
    by_qtype: dict[str, dict] = field(default_factory=dict)
    question_count: int = 0

    def to_json(self) -> dict:
        payload = {
            "f1_ans": self.f1_ans,
            "f1_contro": {str(e): v for e, v in self.f1_contro.items()},
            "precision": self.precision,
            "recall": self.recall,
            "hits": {str(k): v for k, v in self.hits.items()},
            "mhits": {str(k): v for k, v in self.mhits.items()},
            "question_count": self.question_count,
            "by_qtype": self.by_qtype,
        }
        if self.stance is not None:
            payload["stance"] = {
                name: {"precision": prf.precision, "recall": prf.recall, "f1": prf.f1}
                for name, prf in self.stance.items()
            }
        return payload


def _evidence_ids(raw: object, where: str) -> list[str]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise DatasetValidationError(f"{where}: evidence must be a list")
    ids = []
    for item in raw:
        if isinstance(item, str):
            ids.append(item)
        elif isinstance(item, dict) and isinstance(item.get("tweet_id"), str):
            ids.append(item["tweet_id"])
        else:
            raise DatasetValidationError(f"{where}: evidence entries must be ids or objects with tweet_id")
    return ids


def tuples_from_record(record: dict, qtype: QType) -> list[PredTuple]:
    """Parse one prediction-dump record into (answer, S, R) tuples."""
    qid = record.get("question_id", "<missing id>")
    preds = record.get("predictions")
    if not isinstance(preds, list):
        raise DatasetValidationError(f"record {qid}: 'predictions' must be a list")
    if qtype is QType.ENTITY:
        tuples = []
        for p in preds:
            if not isinstance(p, dict) or not isinstance(p.get("answer"), str):
                raise DatasetValidationError(f"record {qid}: malformed entity prediction")
            tuples.append(
                (
                    p["answer"],
                    _evidence_ids(p.get("supporting"), f"record {qid}"),
                    _evidence_ids(p.get("refuting"), f"record {qid}"),
                )
            )
        return tuples
    if not preds:
        return []
    obj = preds[0]
    if not isinstance(obj, dict):
        raise DatasetValidationError(f"record {qid}: malformed yes/no prediction")
    verdicts = {str(v).upper() for v in obj.get("verdicts", [])}
    yes_evidence = _evidence_ids(obj.get("yes_evidence"), f"record {qid}")
    no_evidence = _evidence_ids(obj.get("no_evidence"), f"record {qid}")
    tuples: list[PredTuple] = []
    if "YES" in verdicts:
        tuples.append(("YES", yes_evidence, []))
    if "NO" in verdicts:
        tuples.append(("NO", no_evidence, []))
    return tuples


def evaluate_predictions(
    dataset: Dataset,
    records: Iterable[dict],
    e_values: Sequence[int] = (1, 10, 100),
) -> EvalReport:
    """Aggregate answer/evidence F1 over a prediction dump.

    Questions present in the dataset but absent from the dump score 0
    (a system is evaluated on every question it was asked).
    """
    by_qid: dict[str, dict] = {}
    for record in records:
        qid = record.get("question_id")
        if not isinstance(qid, str) or qid not in dataset:
            raise DatasetValidationError(f"prediction record has unknown question_id: {qid!r}")
        by_qid[qid] = record

    rows: list[tuple[QType, float, float, float, dict[int, float]]] = []
    for entry in dataset:
        qtype = entry.question.qtype
        record = by_qid.get(entry.question.id, {"question_id": entry.question.id, "predictions": []})
        preds = tuples_from_record(record, qtype)
        golds = list(entry.answers)
        breakdown = score_tuples(preds, golds, qtype, match_fn=answer_match_always)
        prec, rec, f1 = f1_from_correctness(breakdown.c, len(preds), len(golds))
        contro = {e: f1_contro_at_e(preds, golds, e, qtype) for e in e_values}
        rows.append((qtype, 100.0 * prec, 100.0 * rec, 100.0 * f1, contro))

    report = EvalReport(question_count=len(rows))
    if not rows:
        report.f1_contro = {e: 0.0 for e in e_values}
        return report

    def summarize(selected: list[tuple[QType, float, float, float, dict[int, float]]]) -> dict:
        count = len(selected)
        return {
            "question_count": count,
            "precision": sum(r[1] for r in selected) / count,
            "recall": sum(r[2] for r in selected) / count,
            "f1_ans": sum(r[3] for r in selected) / count,
            "f1_contro": {
                str(e): sum(r[4][e] for r in selected) / count for e in e_values
            },
        }

    overall = summarize(rows)
    report.precision = overall["precision"]
    report.recall = overall["recall"]
    report.f1_ans = overall["f1_ans"]
    report.f1_contro = {e: float(overall["f1_contro"][str(e)]) for e in e_values}
    for qtype in (QType.ENTITY, QType.YESNO):
        selected = [r for r in rows if r[0] is qtype]
        if selected:
            report.by_qtype[qtype.value] = summarize(selected)
    return report


def evaluate_retrieval(
    dataset: Dataset,
    records: Iterable[dict],
    k_values: Sequence[int] = (100, 1000),
) -> EvalReport:
    """Aggregate Hits@k / MHits@k over a retrieval dump."""
    by_qid: dict[str, list[str]] = {}
    for record in records:
        qid = record.get("question_id")
        if not isinstance(qid, str) or qid not in dataset:
            raise DatasetValidationError(f"retrieval record has unknown question_id: {qid!r}")
        by_qid[qid] = _evidence_ids(record.get("ranked"), f"retrieval record {qid}")

    rows: list[tuple[QType, dict[int, int], dict[int, float]]] = []
    for entry in dataset:
        ranked = by_qid.get(entry.question.id, [])
        golds = list(entry.answers)
        hits = {k: hits_at_k(ranked, golds, k) for k in k_values}
        mhits = {k: mhits_at_k(ranked, golds, k) for k in k_values}
        rows.append((entry.question.qtype, hits, mhits))

    report = EvalReport(question_count=len(rows))
    if not rows:
        report.hits = {k: 0.0 for k in k_values}
        report.mhits = {k: 0.0 for k in k_values}
        return report

    def summarize(selected: list[tuple[QType, dict[int, int], dict[int, float]]]) -> dict:
        count = len(selected)
        return {
            "question_count": count,
            "hits": {str(k): 100.0 * sum(r[1][k] for r in selected) / count for k in k_values},
            "mhits": {str(k): 100.0 * sum(r[2][k] for r in selected) / count for k in k_values},
        }

    overall = summarize(rows)
    report.hits = {k: float(overall["hits"][str(k)]) for k in k_values}
    report.mhits = {k: float(overall["mhits"][str(k)]) for k in k_values}
    for qtype in (QType.ENTITY, QType.YESNO):
        selected = [r for r in rows if r[0] is qtype]
        if selected:
            existing = report.by_qtype.setdefault(qtype.value, {})
            existing.update(summarize(selected))
    return report


def evaluate_stance_dump(records: Iterable[dict]) -> dict[str, PRF]:
    """Per-class stance P/R/F from a dump of {"pred", "gold"} label rows."""
    preds: list[StanceLabel] = []
    golds: list[StanceLabel] = []
    for i, record in enumerate(records):
        try:
            preds.append(StanceLabel(str(record["pred"]).lower()))
            golds.append(StanceLabel(str(record["gold"]).lower()))
        except (KeyError, ValueError) as exc:
            raise DatasetValidationError(f"stance record {i}: {exc}") from exc
    return stance_prf(preds, golds)


def merge_reports(
    predictions: EvalReport | None,
    retrieval: EvalReport | None = None,
    stance: dict[str, PRF] | None = None,
) -> EvalReport:
    report = predictions if predictions is not None else EvalReport()
    if retrieval is not None:
        report.hits = retrieval.hits
        report.mhits = retrieval.mhits
        report.question_count = max(report.question_count, retrieval.question_count)
        for qtype, values in retrieval.by_qtype.items():
            report.by_qtype.setdefault(qtype, {}).update(values)
    if stance is not None:
        report.stance = stance
    return report


def format_report_table(report: EvalReport) -> str:
    """Aligned plain-text rendering of an EvalReport (percent values)."""

    def fmt_row(cells: list[str], widths: list[int]) -> str:
        return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()

    def render(headers: list[str], rows: list[list[str]]) -> list[str]:
        widths = [
            max(len(headers[i]), *(len(r[i]) for r in rows)) if rows else len(headers[i])
            for i in range(len(headers))
        ]
        lines = [fmt_row(headers, widths), fmt_row(["-" * w for w in widths], widths)]
        lines.extend(fmt_row(r, widths) for r in rows)
        return lines

    def pct(value: float) -> str:
        return f"{value:.2f}"

    lines: list[str] = []
    qtype_rows = [("entity", "Entity"), ("yesno", "Yes/No")]

    if report.f1_contro or report.f1_ans or report.precision or report.by_qtype:
        e_values = sorted(report.f1_contro)
        headers = ["Q Type", "#Q", "F1_ans"] + [f"F1_CONTRO@{e}" for e in e_values]
        rows = []
        for key, label in qtype_rows:
            values = report.by_qtype.get(key)
            if values and "f1_ans" in values:
                rows.append(
                    [label, str(values["question_count"]), pct(values["f1_ans"])]
                    + [pct(values["f1_contro"][str(e)]) for e in e_values]
                )
        rows.append(
            ["Overall", str(report.question_count), pct(report.f1_ans)]
            + [pct(report.f1_contro[e]) for e in e_values]
        )
        lines.append("Answer and contradictory-evidence F1 (%)")
        lines.extend(render(headers, rows))
        lines.append("")

    if report.hits:
        k_values = sorted(report.hits)
        headers = ["Q Type"] + [f"MH@{k}" for k in k_values] + [f"H@{k}" for k in k_values]
        rows = []
        for key, label in qtype_rows:
            values = report.by_qtype.get(key)
            if values and "hits" in values:
                rows.append(
                    [label]
                    + [pct(values["mhits"][str(k)]) for k in k_values]
                    + [pct(values["hits"][str(k)]) for k in k_values]
                )
        rows.append(
            ["Overall"]
            + [pct(report.mhits[k]) for k in k_values]
            + [pct(report.hits[k]) for k in k_values]
        )
        lines.append("Retrieval (%)")
        lines.extend(render(headers, rows))
        lines.append("")

    if report.stance:
        headers = ["Class", "P", "R", "F"]
        order = ["macro", "supporting", "refuting", "neutral"]
        rows = [
            [name.capitalize(), pct(prf.precision), pct(prf.recall), pct(prf.f1)]
            for name in order
            if (prf := report.stance.get(name)) is not None
        ]
        lines.append("Stance detection (%)")
        lines.extend(render(headers, rows))
        lines.append("")

    return "\n".join(lines).rstrip() + "\n"
