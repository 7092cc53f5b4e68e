"""Seeded synthetic fixtures: ontology, lexicon, decisions, project terms,
and corpora with planted mentions.

Licensed corpora are never bundled; these generators emit format-identical
synthetic stand-ins. Everything is driven by one ``random.Random(seed)`` so
identical seeds produce byte-identical files.

Planting guarantees that make manifest counts exact ground truth:

* every concept's label and synonyms use tokens disjoint from all other
  concepts, the filler vocabulary, and the note templates, so nothing
  matches by accident and no pattern can prefix or overlap another
  concept's pattern;
* plants are inserted at distinct sentence boundaries, so planted spans
  never overlap each other.
"""

import csv
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO
from xml.sax.saxutils import escape, quoteattr

from .errors import AceminerError
from .terminology import TermEntry, Terminology

ONTOLOGY_BASE_IRI = "http://example.org/synthetic-ace"

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"

# Tokens appearing in note templates; pattern tokens must avoid them.
_TEMPLATE_TOKENS = frozenset(
    """admission date discharge service history of present illness the patient
    is a year old with reports denies follow up plan medications on none
    hospital course stable at home был""".split()
)


def _pseudo_word(rng: random.Random, syllables: int) -> str:
    return "".join(
        rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(syllables)
    )


class _WordMint:
    """Hands out pseudo-words, never repeating one and never colliding with
    the reserved template vocabulary."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[str] = set(_TEMPLATE_TOKENS)

    def word(self, syllables: int | None = None) -> str:
        while True:
            n = syllables or self.rng.randint(2, 4)
            w = _pseudo_word(self.rng, n)
            if w not in self.used:
                self.used.add(w)
                return w

    def phrase(self, n_tokens: int) -> str:
        return " ".join(self.word() for _ in range(n_tokens))


# --- ontology ----------------------------------------------------------------


@dataclass
class PipelineFixture:
    ontology_xml: bytes
    lexicon_tsv: str
    decisions_jsonl: str
    project_terms_json: str
    leaf_iris: list[str]
    leaf_labels: dict[str, str]
    mapped_iris: list[str]
    accepted_iris: list[str]
    accepted_cuis: dict[str, str]  # class iri -> chosen cui
    expected: dict = field(default_factory=dict)


def generate_pipeline_fixture(
    seed: int,
    classes: int = 297,
    leaves: int = 140,
    mapped: int = 76,
    accepted: int = 38,
    project_terms: int = 20,
    object_properties: int = 93,
    data_properties: int = 3,
    ambiguous: int = 5,
    synonyms_per_cui: int = 1,
) -> PipelineFixture:
    """Build the full pipeline input set with controlled cardinalities.

    The defaults mirror the reference ontology: 297 classes with 140
    leaves, 76 of them coverable by the lexicon, 38 accepted in curation,
    plus 20 disjoint project concepts for a 58-entry combined terminology.
    """
    internals = classes - leaves
    if internals < 1:
        raise AceminerError("need at least one internal class for the root")
    if leaves < (internals + 1) // 2:
        raise AceminerError("not enough leaves to keep every internal class non-leaf")
    if not 0 <= accepted <= mapped <= leaves:
        raise AceminerError("need accepted <= mapped <= leaves")
    ambiguous = min(ambiguous, mapped)

    rng = random.Random(seed)
    mint = _WordMint(rng)

    internal_iris = [f"{ONTOLOGY_BASE_IRI}#N{i:04d}" for i in range(internals)]
    internal_labels = {iri: mint.phrase(1).capitalize() for iri in internal_iris}
    # Heap-shaped skeleton: node i's parent is (i-1)//2, so every prefix
    # node has children and only the tail nodes need leaves attached.
    parents: dict[str, list[str]] = {iri: [] for iri in internal_iris}
    for i in range(1, internals):
        parents[internal_iris[i]].append(internal_iris[(i - 1) // 2])

    # In a heap of n nodes the last parent is node (n-2)//2.
    first_childless = (internals - 2) // 2 + 1 if internals > 1 else 0
    childless = internal_iris[first_childless:]

    leaf_iris = [f"{ONTOLOGY_BASE_IRI}#L{i:04d}" for i in range(leaves)]
    leaf_labels = {iri: mint.phrase(2) for iri in leaf_iris}
    for i, iri in enumerate(leaf_iris):
        parents[iri] = [childless[i % len(childless)]]

    # Sprinkle multiple inheritance between internals. Extra parents always
    # have a smaller heap index, so every edge points root-ward and the
    # graph stays acyclic; adding a parent link never changes leafhood.
    for idx in range(2, internals):
        if rng.random() < 0.1:
            extra = internal_iris[rng.randrange(idx - 1)]
            if extra not in parents[internal_iris[idx]]:
                parents[internal_iris[idx]].append(extra)

    labels = {**internal_labels, **leaf_labels}
    snomed = {
        iri: str(rng.randint(10**8, 10**9 - 1))
        for iri in rng.sample(leaf_iris, k=min(len(leaf_iris), leaves // 3))
    }
    ontology_xml = _ontology_to_rdfxml(
        labels, parents, snomed, object_properties, data_properties, rng
    )

    # Lexicon: exact surfaces for the first `mapped` leaves (sorted by IRI,
    # matching candidate-set order), optional extra synonym surfaces, and a
    # second CUI sharing the surface on the first `ambiguous` rows.
    sorted_leaves = sorted(leaf_iris)
    mapped_iris = sorted_leaves[:mapped]
    next_cui = iter(range(1, 10**7))
    lexicon_lines = ["# synthetic lexicon"]
    cui_of: dict[str, str] = {}
    for idx, iri in enumerate(mapped_iris):
        cui = f"C{next(next_cui):07d}"
        cui_of[iri] = cui
        label = leaf_labels[iri]
        semtype = rng.choice(["Finding", "Event", "Social Behavior"])
        lexicon_lines.append(f"{cui}\t{label}\tP\t{semtype}")
        for _ in range(synonyms_per_cui):
            lexicon_lines.append(f"{cui}\t{mint.phrase(rng.randint(1, 2))}\tS\t{semtype}")
        if idx < ambiguous:
            rival = f"C{next(next_cui):07d}"
            lexicon_lines.append(f"{rival}\t{label}\tS\t{semtype}")
    lexicon_tsv = "\n".join(lexicon_lines) + "\n"

    # Decisions: accept the first `accepted` mapped rows, reject the rest.
    decisions = []
    accepted_iris = mapped_iris[:accepted]
    base_ts = "2024-05-01T{h:02d}:{m:02d}:{s:02d}Z"
    for i, iri in enumerate(mapped_iris):
        verdict = "accept" if i < accepted else "reject"
        decision = {
            "class_iri": iri,
            "verdict": verdict,
            "chosen_cui": cui_of[iri] if verdict == "accept" else None,
            "curator": "fixture",
            "timestamp": base_ts.format(h=9 + i // 3600, m=(i // 60) % 60, s=i % 60),
            "note": None,
        }
        decisions.append(json.dumps(decision, ensure_ascii=False))
    decisions_jsonl = "\n".join(decisions) + "\n"

    project = []
    for _ in range(project_terms):
        # A distinct C9xxxxxx series keeps project CUIs disjoint from the
        # lexicon's C0xxxxxx series.
        cui = f"C9{next(next_cui) % 10**6:06d}"
        project.append(
            {
                "cui": cui,
                "preferred_label": mint.phrase(rng.randint(1, 3)),
                "synonyms": [mint.phrase(rng.randint(1, 2))],
            }
        )
    project_terms_json = json.dumps(project, indent=2, ensure_ascii=False) + "\n"

    expected = {
        "classes": classes,
        "object_properties": object_properties,
        "data_properties": data_properties,
        "leaves": leaves,
        "mapped": mapped,
        "accepted": accepted,
        "project_terms": project_terms,
        "combined": accepted + project_terms,
    }
    return PipelineFixture(
        ontology_xml=ontology_xml,
        lexicon_tsv=lexicon_tsv,
        decisions_jsonl=decisions_jsonl,
        project_terms_json=project_terms_json,
        leaf_iris=sorted_leaves,
        leaf_labels=leaf_labels,
        mapped_iris=mapped_iris,
        accepted_iris=accepted_iris,
        accepted_cuis={iri: cui_of[iri] for iri in accepted_iris},
        expected=expected,
    )


def _ontology_to_rdfxml(
    labels: dict[str, str],
    parents: dict[str, list[str]],
    snomed: dict[str, str],
    object_properties: int,
    data_properties: int,
    rng: random.Random,
) -> bytes:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"',
        '         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"',
        '         xmlns:owl="http://www.w3.org/2002/07/owl#"',
        '         xmlns:oboInOwl="http://www.geneontology.org/formats/oboInOwl#">',
        f'  <owl:Ontology rdf:about={quoteattr(ONTOLOGY_BASE_IRI)}/>',
    ]
    for iri in sorted(labels):
        lines.append(f"  <owl:Class rdf:about={quoteattr(iri)}>")
        lines.append(f"    <rdfs:label>{escape(labels[iri])}</rdfs:label>")
        for parent in sorted(parents.get(iri, ())):
            lines.append(f"    <rdfs:subClassOf rdf:resource={quoteattr(parent)}/>")
        if iri in snomed:
            lines.append(
                f"    <oboInOwl:hasDbXref>SCTID:{escape(snomed[iri])}</oboInOwl:hasDbXref>"
            )
        lines.append("  </owl:Class>")
    for i in range(object_properties):
        lines.append(
            f'  <owl:ObjectProperty rdf:about={quoteattr(f"{ONTOLOGY_BASE_IRI}#op{i:03d}")}/>'
        )
    for i in range(data_properties):
        lines.append(
            f'  <owl:DatatypeProperty rdf:about={quoteattr(f"{ONTOLOGY_BASE_IRI}#dp{i:03d}")}/>'
        )
    lines.append("</rdf:RDF>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_pipeline_fixture(fixture: PipelineFixture, outdir: str | Path) -> dict[str, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "ontology": outdir / "ontology.owl",
        "lexicon": outdir / "lexicon.tsv",
        "decisions": outdir / "decisions.jsonl",
        "project_terms": outdir / "project_terms.json",
        "expected": outdir / "expected.json",
    }
    paths["ontology"].write_bytes(fixture.ontology_xml)
    paths["lexicon"].write_text(fixture.lexicon_tsv, encoding="utf-8")
    paths["decisions"].write_text(fixture.decisions_jsonl, encoding="utf-8")
    paths["project_terms"].write_text(fixture.project_terms_json, encoding="utf-8")
    paths["expected"].write_text(
        json.dumps(fixture.expected, indent=2) + "\n", encoding="utf-8"
    )
    return paths


# --- corpora with planted mentions -------------------------------------------

_CASINGS = ("lower", "title", "upper", "original")
_SEPARATORS = (" ", " ", " ", "  ", " - ", ", ")
_SUBREDDITS = (
    "addiction", "anxiety", "depression", "lonely", "suicidewatch",
    "mentalhealth", "ptsd", "adhd", "bipolar", "alcoholism",
)


@dataclass
class CorpusManifest:
    format: str
    seed: int
    documents: int
    planted_documents: int
    total_text_chars: int
    planted_total: int
    mention_counts: dict[str, int]
    document_counts: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "format": self.format,
            "seed": self.seed,
            "documents": self.documents,
            "planted_documents": self.planted_documents,
            "total_text_chars": self.total_text_chars,
            "planted_total": self.planted_total,
            "mention_counts": dict(sorted(self.mention_counts.items())),
            "document_counts": dict(sorted(self.document_counts.items())),
        }


def _apply_casing(surface: str, casing: str) -> str:
    if casing == "lower":
        return surface.lower()
    if casing == "title":
        return surface.title()
    if casing == "upper":
        return surface.upper()
    return surface


class _DocFactory:
    """Assembles filler documents and plants concept surfaces at sentence
    boundaries, tracking exact character spans."""

    def __init__(self, rng: random.Random, terminology: Terminology, doc_chars: int):
        self.rng = rng
        self.doc_chars = doc_chars
        pattern_tokens: set[str] = set()
        self.plantables: list[tuple[str, list[str]]] = []  # (cui, surfaces)
        for entry in terminology.accepted():
            surfaces = [entry.preferred_label, *entry.synonyms]
            for s in surfaces:
                pattern_tokens.update(s.lower().split())
            self.plantables.append((entry.cui, surfaces))
        if not self.plantables:
            raise AceminerError("terminology has no accepted entries to plant")

        mint = _WordMint(rng)
        mint.used |= pattern_tokens
        filler = [mint.word() for _ in range(600)]
        self.sentences = []
        for _ in range(400):
            n = rng.randint(5, 13)
            words = rng.choices(filler, k=n)
            self.sentences.append(" ".join(words).capitalize() + ".")

    def build(self, plants: int, paragraph_every: int = 6) -> tuple[str, list[tuple[str, int, int, str]]]:
        """One document text plus its planted (cui, start, end, surface) list."""
        rng = self.rng
        parts: list[str] = []
        size = 0
        while size < self.doc_chars:
            s = rng.choice(self.sentences)
            parts.append(s)
            size += len(s) + 1
        plants = min(plants, max(len(parts) - 1, 0))
        plant_slots = sorted(rng.sample(range(len(parts)), k=plants)) if plants else []
        planted: list[tuple[str, str]] = []  # (cui, rendered surface)
        for _ in plant_slots:
            cui, surfaces = rng.choice(self.plantables)
            surface = rng.choice(surfaces)
            rendered = _apply_casing(surface, rng.choice(_CASINGS))
            if " " in rendered:
                rendered = rng.choice(_SEPARATORS).join(rendered.split(" "))
            planted.append((cui, rendered))

        text_parts: list[str] = []
        spans: list[tuple[str, int, int, str]] = []
        cursor = 0
        plant_i = 0
        for i, part in enumerate(parts):
            if plant_i < len(plant_slots) and plant_slots[plant_i] == i:
                cui, rendered = planted[plant_i]
                if text_parts:
                    text_parts.append(" ")
                    cursor += 1
                spans.append((cui, cursor, cursor + len(rendered), rendered))
                text_parts.append(rendered + ".")
                cursor += len(rendered) + 1
                plant_i += 1
            if text_parts:
                sep = "\n" if i % paragraph_every == paragraph_every - 1 else " "
                text_parts.append(sep)
                cursor += 1
            text_parts.append(part)
            cursor += len(part)
        return "".join(text_parts), spans


def _plant_count(rng: random.Random, rate: float) -> int:
    """Poisson-like plant count: binomial(8, rate/8), so zero-plant
    documents occur at roughly exp(-rate)."""
    if rate <= 0:
        return 0
    p = min(rate / 8.0, 1.0)
    return sum(1 for _ in range(8) if rng.random() < p)


def generate_corpus(
    out_path: str | Path,
    terminology: Terminology,
    seed: int,
    docs: int = 1000,
    doc_chars: int = 8000,
    fmt: str = "mimic",
    plant_rate: float = 1.5,
    other_category_every: int = 0,
    spans_path: str | Path | None = None,
) -> CorpusManifest:
    """Write a synthetic corpus with planted mentions and return its manifest.

    ``fmt`` is "mimic" (NOTEEVENTS-style CSV) or "reddit" (JSON-lines).
    ``other_category_every`` interleaves one non-discharge note every N
    discharge rows to exercise the reader's category filter; those rows
    carry no plants and are not counted as documents.
    """
    rng = random.Random(seed)
    factory = _DocFactory(rng, terminology, doc_chars)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    mention_counts: dict[str, int] = {}
    document_counts: dict[str, int] = {}
    planted_docs = 0
    planted_total = 0
    total_chars = 0

    spans_sink: IO | None = None
    if spans_path is not None:
        spans_sink = open(spans_path, "w", encoding="utf-8")

    try:
        with open(out_path, "w", encoding="utf-8", newline="") as f:
            if fmt == "mimic":
                writer = csv.writer(f)
                writer.writerow(
                    ["ROW_ID", "SUBJECT_ID", "HADM_ID", "CHARTDATE", "CATEGORY",
                     "DESCRIPTION", "TEXT"]
                )
                row_id = 0
                for i in range(docs):
                    row_id += 1
                    if other_category_every and i and i % other_category_every == 0:
                        filler_text, _ = factory.build(plants=0)
                        writer.writerow(
                            [str(row_id), str(10000 + i), str(20000 + i),
                             "2150-01-01", "Nursing", "Report", filler_text[:600]]
                        )
                        row_id += 1
                    text, spans = _build_doc(factory, rng, plant_rate)
                    doc_id = str(row_id)
                    header = "Admission Date: 2150-01-01\nService: MEDICINE\n\n"
                    text = header + text
                    spans = [(c, s + len(header), e + len(header), surf) for c, s, e, surf in spans]
                    writer.writerow(
                        [doc_id, str(10000 + i), str(20000 + i), "2150-01-02",
                         "Discharge summary", "Report", text]
                    )
                    total_chars += len(text)
                    _tally(spans, doc_id, mention_counts, document_counts, spans_sink)
                    planted_total += len(spans)
                    planted_docs += 1 if spans else 0
            elif fmt == "reddit":
                for i in range(docs):
                    text, spans = _build_doc(factory, rng, plant_rate)
                    doc_id = f"{out_path.stem}:{i + 1}"
                    record = {"post": text, "subreddit": rng.choice(_SUBREDDITS)}
                    f.write(json.dumps(record, ensure_ascii=False) + "\n")
                    total_chars += len(text)
                    _tally(spans, doc_id, mention_counts, document_counts, spans_sink)
                    planted_total += len(spans)
                    planted_docs += 1 if spans else 0
            else:
                raise AceminerError(f"unknown corpus format {fmt!r}")
    finally:
        if spans_sink is not None:
            spans_sink.close()

    return CorpusManifest(
        format=fmt,
        seed=seed,
        documents=docs,
        planted_documents=planted_docs,
        total_text_chars=total_chars,
        planted_total=planted_total,
        mention_counts=mention_counts,
        document_counts=document_counts,
    )


def _build_doc(factory: _DocFactory, rng: random.Random, plant_rate: float):
    return factory.build(plants=_plant_count(rng, plant_rate))


def _tally(spans, doc_id, mention_counts, document_counts, spans_sink) -> None:
    seen_cuis = set()
    for cui, start, end, surface in spans:
        mention_counts[cui] = mention_counts.get(cui, 0) + 1
        if cui not in seen_cuis:
            document_counts[cui] = document_counts.get(cui, 0) + 1
            seen_cuis.add(cui)
        if spans_sink is not None:
            spans_sink.write(
                json.dumps(
                    {"doc_id": doc_id, "cui": cui, "start": start, "end": end,
                     "surface": surface},
                    ensure_ascii=False,
                )
                + "\n"
            )


def save_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(manifest.to_dict(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def make_subset_terminologies(
    seed: int, project_count: int = 20, extra_count: int = 38
) -> tuple[Terminology, Terminology]:
    """A project-only terminology and its combined superset, with pairwise
    token-disjoint patterns (so no pattern can prefix or displace another
    concept's match)."""
    rng = random.Random(seed)
    mint = _WordMint(rng)
    entries = []
    for i in range(project_count + extra_count):
        source = "project" if i < project_count else "aceso"
        entries.append(
            TermEntry(
                cui=f"C{5_000_000 + i:07d}",
                preferred_label=mint.phrase(rng.randint(1, 3)),
                synonyms=[mint.phrase(rng.randint(1, 2))],
                source=source,
                status="accepted",
            )
        )
    project_only = Terminology(name="project-only", entries=list(entries[:project_count]))
    combined = Terminology(name="combined", entries=list(entries))
    return project_only, combined
