"""Frequency aggregation over mention streams and configuration comparison.

CSV rows are ``cui,preferred_label,mention_count,document_count``; JSON
mirrors the report structure; plotdata is a bare ``label<TAB>count`` table
ready for any bar-chart tool. Zero-count concepts stay in the report so
rarely-firing terms remain visible.
"""

import csv
import json
from dataclasses import dataclass, field
from typing import IO, Iterable

from .annotator import Mention
from .errors import AceminerError, SchemaError
from .terminology import Terminology


@dataclass
class ReportRow:
    cui: str
    preferred_label: str
    mention_count: int
    document_count: int = 0


@dataclass
class FrequencyReport:
    corpus_name: str
    terminology_name: str
    concept_count: int
    rows: list[ReportRow]
    total_mentions: int
    documents_processed: int
    documents_with_mentions: int

    def top_row(self) -> ReportRow | None:
        return self.rows[0] if self.rows and self.rows[0].mention_count > 0 else None

    def count_by_cui(self) -> dict[str, int]:
        return {row.cui: row.mention_count for row in self.rows}

    def label_by_cui(self) -> dict[str, str]:
        return {row.cui: row.preferred_label for row in self.rows}


def aggregate(
    mentions: Iterable[Mention],
    terminology: Terminology,
    corpus_name: str,
    doc_count: int | None = None,
) -> FrequencyReport:
    """Exact per-concept mention counts over the full terminology.

    A mention whose CUI is not in the terminology aborts: it means the
    mention file and the terminology configuration do not belong together.
    """
    accepted = terminology.accepted()
    counts = {entry.cui: 0 for entry in accepted}
    doc_sets: dict[str, set[str]] = {entry.cui: set() for entry in accepted}
    labels = {entry.cui: entry.preferred_label for entry in accepted}
    docs_seen: set[str] = set()
    total = 0
    for mention in mentions:
        if mention.cui not in counts:
            raise AceminerError(
                f"mention of {mention.cui} in {mention.doc_id} is not part of "
                f"terminology {terminology.name!r}; was the corpus annotated "
                "with a different configuration?"
            )
        counts[mention.cui] += 1
        doc_sets[mention.cui].add(mention.doc_id)
        docs_seen.add(mention.doc_id)
        total += 1
    rows = [
        ReportRow(
            cui=cui,
            preferred_label=labels[cui],
            mention_count=count,
            document_count=len(doc_sets[cui]),
        )
        for cui, count in counts.items()
    ]
    rows.sort(key=lambda r: (-r.mention_count, r.cui))
    return FrequencyReport(
        corpus_name=corpus_name,
        terminology_name=terminology.name,
        concept_count=len(accepted),
        rows=rows,
        total_mentions=total,
        documents_processed=doc_count if doc_count is not None else len(docs_seen),
        documents_with_mentions=len(docs_seen),
    )


@dataclass
class DeltaRow:
    cui: str
    preferred_label: str
    left_count: int
    right_count: int

    @property
    def delta(self) -> int:
        return self.right_count - self.left_count


@dataclass
class ComparisonReport:
    left: FrequencyReport
    right: FrequencyReport
    deltas: list[DeltaRow] = field(default_factory=list)

    @property
    def left_only(self) -> list[str]:
        right_cuis = {r.cui for r in self.right.rows}
        return sorted(r.cui for r in self.left.rows if r.cui not in right_cuis)

    @property
    def right_only(self) -> list[str]:
        left_cuis = {r.cui for r in self.left.rows}
        return sorted(r.cui for r in self.right.rows if r.cui not in left_cuis)


def compare(left: FrequencyReport, right: FrequencyReport) -> ComparisonReport:
    """Per-concept deltas over the union of both reports' concepts."""
    left_counts = left.count_by_cui()
    right_counts = right.count_by_cui()
    labels = {**right.label_by_cui(), **left.label_by_cui()}
    deltas = [
        DeltaRow(
            cui=cui,
            preferred_label=labels[cui],
            left_count=left_counts.get(cui, 0),
            right_count=right_counts.get(cui, 0),
        )
        for cui in set(left_counts) | set(right_counts)
    ]
    deltas.sort(key=lambda d: (-abs(d.delta), d.cui))
    return ComparisonReport(left=left, right=right, deltas=deltas)


# --- emission ----------------------------------------------------------------


def report_to_dict(report: FrequencyReport) -> dict:
    return {
        "corpus_name": report.corpus_name,
        "terminology_name": report.terminology_name,
        "concept_count": report.concept_count,
        "total_mentions": report.total_mentions,
        "documents_processed": report.documents_processed,
        "documents_with_mentions": report.documents_with_mentions,
        "rows": [
            {
                "cui": r.cui,
                "preferred_label": r.preferred_label,
                "mention_count": r.mention_count,
                "document_count": r.document_count,
            }
            for r in report.rows
        ],
    }


def report_from_dict(payload: dict) -> FrequencyReport:
    try:
        rows = [
            ReportRow(
                cui=str(r["cui"]),
                preferred_label=str(r["preferred_label"]),
                mention_count=int(r["mention_count"]),
                document_count=int(r.get("document_count", 0)),
            )
            for r in payload["rows"]
        ]
        return FrequencyReport(
            corpus_name=str(payload["corpus_name"]),
            terminology_name=str(payload["terminology_name"]),
            concept_count=int(payload["concept_count"]),
            rows=rows,
            total_mentions=int(payload["total_mentions"]),
            documents_processed=int(payload["documents_processed"]),
            documents_with_mentions=int(payload["documents_with_mentions"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"not a frequency report: {exc}") from exc


def load_report(source: IO | str) -> FrequencyReport:
    data = source.read() if hasattr(source, "read") else source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"report file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise SchemaError("report file must be a JSON object")
    return report_from_dict(payload)


def emit(report: FrequencyReport, format: str, sink: IO, top: int | None = None) -> None:
    """Write a frequency report as csv, json, or plotdata."""
    if format == "json":
        sink.write(json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n")
    elif format == "csv":
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["cui", "preferred_label", "mention_count", "document_count"])
        for r in report.rows:
            writer.writerow([r.cui, r.preferred_label, r.mention_count, r.document_count])
    elif format == "plotdata":
        rows = report.rows if top is None else report.rows[:top]
        for r in rows:
            sink.write(f"{r.preferred_label}\t{r.mention_count}\n")
    else:
        raise AceminerError(f"unknown report format {format!r}")


def emit_comparison(comparison: ComparisonReport, format: str, sink: IO) -> None:
    """Write a comparison as csv or json, with each side's top concept in
    the summary header."""
    def summary(side: FrequencyReport) -> dict:
        top_row = side.top_row()
        return {
            "corpus_name": side.corpus_name,
            "terminology_name": side.terminology_name,
            "concept_count": side.concept_count,
            "total_mentions": side.total_mentions,
            "top_concept": (
                {"cui": top_row.cui, "preferred_label": top_row.preferred_label,
                 "mention_count": top_row.mention_count}
                if top_row
                else None
            ),
        }

    if format == "json":
        payload = {
            "left": summary(comparison.left),
            "right": summary(comparison.right),
            "left_only": comparison.left_only,
            "right_only": comparison.right_only,
            "deltas": [
                {
                    "cui": d.cui,
                    "preferred_label": d.preferred_label,
                    "left_count": d.left_count,
                    "right_count": d.right_count,
                    "delta": d.delta,
                }
                for d in comparison.deltas
            ],
        }
        sink.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    elif format == "csv":
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["cui", "preferred_label", "left_count", "right_count", "delta"])
        for d in comparison.deltas:
            writer.writerow([d.cui, d.preferred_label, d.left_count, d.right_count, d.delta])
    else:
        raise AceminerError(f"unknown comparison format {format!r}")
