"""Candidate mapping tables, curation decisions, and terminology assembly.

File formats owned by this module:

* Candidate set: JSON ``{"rows": [{"class_iri", "label", "context",
  "candidates": [...], "ambiguous", "resolution"}]}``.
* Decision log: JSON-lines, one decision object per line, append-only.
* Project terms: JSON array of ``{"cui", "preferred_label", "synonyms"?}``.
* Terminology: JSON ``{"name", "entries": [...]}`` with entries sorted by
  CUI so repeated saves are byte-identical.
"""

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import IO, Iterable, Sequence

from .errors import AceminerError, CurationError, SchemaError
from .lexicon import Candidate, CandidateList, Lexicon, Matcher, is_valid_cui, normalize
from .ontology import OntologyClass

SOURCE_ACESO = "aceso"
SOURCE_PROJECT = "project"
SOURCE_BOTH = "both"

STATUS_CANDIDATE = "candidate"
STATUS_ACCEPTED = "accepted"
STATUS_REJECTED = "rejected"


def dedupe_synonyms(preferred_label: str, synonyms: Iterable[str]) -> list[str]:
    """Drop synonyms duplicating each other or the label after normalization."""
    seen = {normalize(preferred_label)}
    out = []
    for syn in synonyms:
        norm = normalize(syn)
        if not norm or norm in seen:
            continue
        seen.add(norm)
        out.append(syn)
    return out


@dataclass
class TermEntry:
    cui: str
    preferred_label: str
    synonyms: list[str] = field(default_factory=list)
    source: str = SOURCE_ACESO
    status: str = STATUS_CANDIDATE
    origin_class_iri: str | None = None

    def __post_init__(self):
        if not is_valid_cui(self.cui):
            raise SchemaError(f"malformed CUI {self.cui!r}")
        if not self.preferred_label.strip():
            raise SchemaError(f"entry {self.cui} has an empty preferred label")
        self.synonyms = dedupe_synonyms(self.preferred_label, self.synonyms)

    def to_dict(self) -> dict:
        return {
            "cui": self.cui,
            "preferred_label": self.preferred_label,
            "synonyms": list(self.synonyms),
            "source": self.source,
            "status": self.status,
            "origin_class_iri": self.origin_class_iri,
        }


@dataclass
class Terminology:
    name: str
    entries: list[TermEntry]

    def __post_init__(self):
        seen = set()
        for entry in self.entries:
            if entry.cui in seen:
                raise SchemaError(f"duplicate CUI {entry.cui} in terminology {self.name!r}")
            seen.add(entry.cui)

    def accepted(self) -> list[TermEntry]:
        return [e for e in self.entries if e.status == STATUS_ACCEPTED]

    def entry(self, cui: str) -> TermEntry | None:
        for e in self.entries:
            if e.cui == cui:
                return e
        return None


VERDICT_ACCEPT = "accept"
VERDICT_REJECT = "reject"


@dataclass
class CurationDecision:
    class_iri: str
    verdict: str
    chosen_cui: str | None = None
    curator: str = ""
    timestamp: datetime | None = None
    note: str | None = None

    def __post_init__(self):
        if self.verdict not in (VERDICT_ACCEPT, VERDICT_REJECT):
            raise CurationError(f"verdict must be accept or reject, got {self.verdict!r}")
        if self.verdict == VERDICT_ACCEPT:
            if not self.chosen_cui or not is_valid_cui(self.chosen_cui):
                raise CurationError(
                    f"accept decision for {self.class_iri} needs a well-formed CUI, "
                    f"got {self.chosen_cui!r}"
                )
        if self.timestamp is None:
            self.timestamp = datetime.now(timezone.utc)
        elif self.timestamp.tzinfo is None:
            self.timestamp = self.timestamp.replace(tzinfo=timezone.utc)

    def to_dict(self) -> dict:
        return {
            "class_iri": self.class_iri,
            "verdict": self.verdict,
            "chosen_cui": self.chosen_cui,
            "curator": self.curator,
            "timestamp": self.timestamp.isoformat().replace("+00:00", "Z"),
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CurationDecision":
        if not isinstance(data, dict):
            raise CurationError(f"decision must be an object, got {type(data).__name__}")
        try:
            raw_ts = data.get("timestamp")
            ts = None
            if raw_ts:
                ts = datetime.fromisoformat(str(raw_ts).replace("Z", "+00:00"))
            return cls(
                class_iri=str(data["class_iri"]),
                verdict=str(data["verdict"]),
                chosen_cui=data.get("chosen_cui"),
                curator=str(data.get("curator", "")),
                timestamp=ts,
                note=data.get("note"),
            )
        except KeyError as exc:
            raise CurationError(f"decision is missing field {exc.args[0]!r}") from exc
        except ValueError as exc:
            raise CurationError(f"bad decision timestamp: {exc}") from exc


UNRESOLVED = None  # a row's resolution before any decision applies


@dataclass
class CandidateRow:
    class_iri: str
    label: str
    candidates: CandidateList
    context: list[str] = field(default_factory=list)
    resolution: CurationDecision | None = UNRESOLVED

    @property
    def status(self) -> str:
        if self.resolution is None:
            return "unresolved"
        return STATUS_ACCEPTED if self.resolution.verdict == VERDICT_ACCEPT else STATUS_REJECTED


@dataclass
class MappingCandidateSet:
    rows: list[CandidateRow]

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            if row.class_iri in seen:
                raise SchemaError(f"duplicate class IRI {row.class_iri} in candidate set")
            seen.add(row.class_iri)

    def row(self, class_iri: str) -> CandidateRow | None:
        for row in self.rows:
            if row.class_iri == class_iri:
                return row
        return None

    def progress(self) -> dict[str, int]:
        counts = {"unresolved": 0, STATUS_ACCEPTED: 0, STATUS_REJECTED: 0}
        for row in self.rows:
            counts[row.status] += 1
        counts["total"] = len(self.rows)
        return counts


def build_candidates(
    leaves: Sequence[OntologyClass],
    matcher: Matcher,
    contexts: dict[str, list[str]] | None = None,
) -> MappingCandidateSet:
    """One candidate row per leaf class, all unresolved.

    Leaves whose label finds nothing keep an empty candidate list; those are
    the unmappable classes. Any matcher failure aborts the whole build so a
    run is reproducible or absent, never partial.
    """
    if not leaves:
        raise AceminerError("cannot build candidates from an empty leaf list")
    rows = []
    for leaf in leaves:
        label = leaf.display_label
        try:
            candidates = matcher(label)
        except AceminerError as exc:
            raise AceminerError(f"matcher failed for leaf label {label!r}: {exc}") from exc
        rows.append(
            CandidateRow(
                class_iri=leaf.iri,
                label=label,
                candidates=candidates,
                context=(contexts or {}).get(leaf.iri, []),
            )
        )
    return MappingCandidateSet(rows=rows)


def validate_decision(candidate_set: MappingCandidateSet, decision: CurationDecision) -> CandidateRow:
    """The shared curation rule: the row must exist and an accepted CUI must
    come from that row's candidate list."""
    row = candidate_set.row(decision.class_iri)
    if row is None:
        raise CurationError(f"no candidate row for class {decision.class_iri!r}")
    if decision.verdict == VERDICT_ACCEPT and decision.chosen_cui not in row.candidates.cuis:
        raise CurationError(
            f"CUI {decision.chosen_cui} is not among the candidates for "
            f"{decision.class_iri!r}; add it as a project term instead"
        )
    return row


def apply_decisions(
    candidate_set: MappingCandidateSet, decisions: Sequence[CurationDecision]
) -> MappingCandidateSet:
    """Apply curation decisions, later ones superseding earlier ones.

    Ordering is by timestamp, ties broken by position in ``decisions``
    (file order). Every decision is validated; an invalid one aborts.
    Returns a new set; rows not named by any decision are untouched.
    """
    ordered = sorted(enumerate(decisions), key=lambda item: (item[1].timestamp, item[0]))
    resolutions: dict[str, CurationDecision] = {}
    for _, decision in ordered:
        validate_decision(candidate_set, decision)
        resolutions[decision.class_iri] = decision
    rows = [
        replace(row, resolution=resolutions.get(row.class_iri, row.resolution))
        for row in candidate_set.rows
    ]
    return MappingCandidateSet(rows=rows)


def load_project_terms(source: IO | str) -> list[TermEntry]:
    """Read the project-defined concept file (JSON array)."""
    data = source
    if hasattr(source, "read"):
        data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"project terms file is not valid JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise SchemaError("project terms file must be a JSON array")
    entries = []
    seen = set()
    for i, item in enumerate(payload):
        if not isinstance(item, dict):
            raise SchemaError(f"project term #{i} is not an object")
        try:
            cui = str(item["cui"])
            label = str(item["preferred_label"])
        except KeyError as exc:
            raise SchemaError(f"project term #{i} is missing field {exc.args[0]!r}") from exc
        if not is_valid_cui(cui):
            raise SchemaError(f"project term #{i} has malformed CUI {cui!r}")
        if cui in seen:
            raise SchemaError(f"duplicate CUI {cui} in project terms file")
        seen.add(cui)
        synonyms = item.get("synonyms", [])
        if not isinstance(synonyms, list):
            raise SchemaError(f"project term #{i}: synonyms must be a list")
        entries.append(
            TermEntry(
                cui=cui,
                preferred_label=label,
                synonyms=[str(s) for s in synonyms],
                source=SOURCE_PROJECT,
                status=STATUS_ACCEPTED,
            )
        )
    return entries


def accepted_entries(
    candidate_set: MappingCandidateSet, lexicon: Lexicon | None = None
) -> list[TermEntry]:
    """Terminology entries for the accepted rows of a candidate set.

    Synonyms are pulled from every lexicon surface form of the chosen CUI
    when a lexicon is supplied; the ontology itself carries none. Two rows
    accepting the same CUI collapse into one entry (smallest class IRI
    kept as origin, labels of the others become synonyms).
    """
    by_cui: dict[str, TermEntry] = {}
    for row in sorted(candidate_set.rows, key=lambda r: r.class_iri):
        if row.status != STATUS_ACCEPTED:
            continue
        cui = row.resolution.chosen_cui
        preferred = row.label
        for cand in row.candidates.candidates:
            if cand.cui == cui:
                preferred = cand.preferred_label
                break
        synonyms = [row.label]
        if lexicon is not None:
            synonyms.extend(lexicon.surfaces(cui))
        if cui in by_cui:
            prior = by_cui[cui]
            prior.synonyms = dedupe_synonyms(
                prior.preferred_label, prior.synonyms + [preferred] + synonyms
            )
            continue
        by_cui[cui] = TermEntry(
            cui=cui,
            preferred_label=preferred,
            synonyms=synonyms,
            source=SOURCE_ACESO,
            status=STATUS_ACCEPTED,
            origin_class_iri=row.class_iri,
        )
    return [by_cui[cui] for cui in sorted(by_cui)]


def merge_terminologies(
    aceso_accepted: Sequence[TermEntry], project: Sequence[TermEntry], name: str
) -> Terminology:
    """Union by CUI. A CUI on both sides keeps the project label (expert
    curated), unions the synonym lists, and is tagged source=both."""
    merged: dict[str, TermEntry] = {}
    for entry in aceso_accepted:
        if entry.cui in merged:
            raise SchemaError(f"duplicate CUI {entry.cui} among accepted entries")
        merged[entry.cui] = replace(entry, synonyms=list(entry.synonyms))
    for entry in project:
        prior = merged.get(entry.cui)
        if prior is None:
            merged[entry.cui] = replace(entry, synonyms=list(entry.synonyms))
            continue
        if prior.source == SOURCE_PROJECT or prior.source == SOURCE_BOTH:
            raise SchemaError(f"duplicate CUI {entry.cui} among project entries")
        merged[entry.cui] = TermEntry(
            cui=entry.cui,
            preferred_label=entry.preferred_label,
            synonyms=dedupe_synonyms(
                entry.preferred_label,
                list(entry.synonyms) + [prior.preferred_label] + list(prior.synonyms),
            ),
            source=SOURCE_BOTH,
            status=STATUS_ACCEPTED,
            origin_class_iri=prior.origin_class_iri,
        )
    entries = [merged[cui] for cui in sorted(merged)]
    return Terminology(name=name, entries=entries)


# --- serialization ---------------------------------------------------------


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=False) + "\n"


def terminology_to_json(t: Terminology) -> str:
    entries = sorted(t.entries, key=lambda e: e.cui)
    return _dump_json({"name": t.name, "entries": [e.to_dict() for e in entries]})


def save_terminology(t: Terminology, sink: IO) -> None:
    data = terminology_to_json(t)
    if hasattr(sink, "buffer"):
        sink = sink.buffer
    try:
        sink.write(data.encode("utf-8"))
    except TypeError:
        sink.write(data)


def load_terminology(source: IO | str) -> Terminology:
    data = source.read() if hasattr(source, "read") else source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"terminology file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "entries" not in payload:
        raise SchemaError("terminology file must be an object with an 'entries' array")
    raw_entries = payload["entries"]
    if not isinstance(raw_entries, list):
        raise SchemaError("'entries' must be an array")
    entries = []
    for i, item in enumerate(raw_entries):
        if not isinstance(item, dict):
            raise SchemaError(f"terminology entry #{i} is not an object")
        try:
            entry = TermEntry(
                cui=str(item["cui"]),
                preferred_label=str(item["preferred_label"]),
                synonyms=[str(s) for s in item.get("synonyms", [])],
                source=str(item.get("source", SOURCE_ACESO)),
                status=str(item.get("status", STATUS_ACCEPTED)),
                origin_class_iri=item.get("origin_class_iri"),
            )
        except KeyError as exc:
            raise SchemaError(f"terminology entry #{i} is missing field {exc.args[0]!r}") from exc
        if entry.source not in (SOURCE_ACESO, SOURCE_PROJECT, SOURCE_BOTH):
            raise SchemaError(f"terminology entry #{i} has unknown source {entry.source!r}")
        if entry.status not in (STATUS_CANDIDATE, STATUS_ACCEPTED, STATUS_REJECTED):
            raise SchemaError(f"terminology entry #{i} has unknown status {entry.status!r}")
        entries.append(entry)
    return Terminology(name=str(payload.get("name", "")), entries=entries)


def candidate_set_to_json(candidate_set: MappingCandidateSet) -> str:
    rows = []
    for row in sorted(candidate_set.rows, key=lambda r: r.class_iri):
        rows.append(
            {
                "class_iri": row.class_iri,
                "label": row.label,
                "context": list(row.context),
                "candidates": [
                    {
                        "cui": c.cui,
                        "preferred_label": c.preferred_label,
                        "score": round(c.score, 6),
                        "match_kind": c.match_kind,
                        "is_preferred": c.is_preferred,
                    }
                    for c in row.candidates.candidates
                ],
                "ambiguous": row.candidates.ambiguous,
                "resolution": row.resolution.to_dict() if row.resolution else None,
            }
        )
    return _dump_json({"rows": rows})


def save_candidate_set(candidate_set: MappingCandidateSet, sink: IO) -> None:
    data = candidate_set_to_json(candidate_set)
    if hasattr(sink, "buffer"):
        sink = sink.buffer
    try:
        sink.write(data.encode("utf-8"))
    except TypeError:
        sink.write(data)


def load_candidate_set(source: IO | str) -> MappingCandidateSet:
    data = source.read() if hasattr(source, "read") else source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"candidate set file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("rows"), list):
        raise SchemaError("candidate set file must be an object with a 'rows' array")
    rows = []
    for i, item in enumerate(payload["rows"]):
        if not isinstance(item, dict):
            raise SchemaError(f"candidate row #{i} is not an object")
        try:
            candidates = [
                Candidate(
                    cui=str(c["cui"]),
                    preferred_label=str(c["preferred_label"]),
                    score=float(c["score"]),
                    match_kind=str(c["match_kind"]),
                    is_preferred=bool(c.get("is_preferred", False)),
                )
                for c in item.get("candidates", [])
            ]
            row = CandidateRow(
                class_iri=str(item["class_iri"]),
                label=str(item["label"]),
                context=[str(x) for x in item.get("context", [])],
                candidates=CandidateList(query_label=str(item["label"]), candidates=candidates),
                resolution=(
                    CurationDecision.from_dict(item["resolution"])
                    if item.get("resolution")
                    else None
                ),
            )
        except KeyError as exc:
            raise SchemaError(f"candidate row #{i} is missing field {exc.args[0]!r}") from exc
        rows.append(row)
    return MappingCandidateSet(rows=rows)


def read_decision_log(source: IO | Iterable[str]) -> list[CurationDecision]:
    """Parse a JSON-lines decision log; blank lines are ignored."""
    decisions = []
    for line_no, line in enumerate(source, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.strip()
        if not line:
            continue
        try:
            decisions.append(CurationDecision.from_dict(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise CurationError(f"decision log line {line_no} is not valid JSON: {exc}") from exc
    return decisions


def append_decision(decision: CurationDecision, sink: IO) -> None:
    """Write one decision as a single JSON line and flush."""
    line = json.dumps(decision.to_dict(), ensure_ascii=False) + "\n"
    sink.write(line)
    sink.flush()
