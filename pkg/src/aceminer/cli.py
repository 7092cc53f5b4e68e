"""Command-line pipeline: one subcommand per stage, files as the only
inter-stage contract.

Exit codes: 0 success, 1 input/validation error, 2 internal error. All
diagnostics go to stderr; data goes to stdout or the --out path.
"""

import argparse
import itertools
import json
import os
import sys
import time
from contextlib import ExitStack
from pathlib import Path

from . import annotator, corpus, figures, fixtures, ontology, report
from .curation import CurationService, CurationSession
from .errors import AceminerError
from .lexicon import CachedRemoteMatcher, LexiconMatcher, RemoteMatcherConfig, load_lexicon
from .terminology import (
    accepted_entries,
    apply_decisions,
    build_candidates,
    load_candidate_set,
    load_project_terms,
    load_terminology,
    merge_terminologies,
    read_decision_log,
    save_candidate_set,
    save_terminology,
)

PAPER_REFERENCE_STATS = {
    "classes": 297,
    "object_properties": 93,
    "data_properties": 3,
    "leaves": 140,
}


class _Parser(argparse.ArgumentParser):
    """argparse, but usage errors exit 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _out_stream(stack: ExitStack, path: str | None):
    if path is None or path == "-":
        return sys.stdout
    return stack.enter_context(open(path, "w", encoding="utf-8", newline=""))


def _load_graph(path: str) -> ontology.OntologyGraph:
    if path == "-":
        return ontology.parse_ontology(sys.stdin.buffer)
    with open(path, "rb") as f:
        return ontology.parse_ontology(f)


def _load_lexicon_file(path: str):
    with open(path, "r", encoding="utf-8") as f:
        return load_lexicon(f)


# --- ontology ---------------------------------------------------------------


def cmd_ontology_stats(args) -> int:
    graph = _load_graph(args.ontology)
    stats = ontology.stats(graph)
    with ExitStack() as stack:
        out = _out_stream(stack, args.out)
        if args.json:
            out.write(json.dumps(stats, indent=2) + "\n")
        else:
            for key in ("classes", "object_properties", "data_properties", "leaves"):
                out.write(f"{key}={stats[key]}\n")
    expected = PAPER_REFERENCE_STATS if args.expect == "reference" else _parse_expect(args.expect)
    if expected:
        for key, want in expected.items():
            got = stats.get(key)
            if got != want:
                print(
                    f"warning: {key}={got} differs from expected {want} "
                    "(ontology version drift?)",
                    file=sys.stderr,
                )
    if graph.dangling_parent_iris:
        print(
            f"warning: {len(graph.dangling_parent_iris)} parent IRI(s) are not "
            "declared in this document",
            file=sys.stderr,
        )
    return 0


def _parse_expect(expect: str | None) -> dict[str, int]:
    if not expect:
        return {}
    out = {}
    for pair in expect.split(","):
        key, _, value = pair.partition("=")
        key = key.strip()
        if key not in PAPER_REFERENCE_STATS:
            raise AceminerError(f"unknown metric {key!r} in --expect")
        try:
            out[key] = int(value)
        except ValueError:
            raise AceminerError(f"--expect value for {key!r} is not an integer")
    return out


def cmd_ontology_leaves(args) -> int:
    graph = _load_graph(args.ontology)
    leaves = ontology.extract_leaf_nodes(graph)
    with ExitStack() as stack:
        out = _out_stream(stack, args.out)
        for leaf in leaves:
            out.write(f"{leaf.iri}\t{leaf.display_label}\n")
    print(f"leaves={len(leaves)}", file=sys.stderr)
    return 0


# --- mapping ------------------------------------------------------------------


def cmd_map_candidates(args) -> int:
    graph = _load_graph(args.ontology)
    leaves = ontology.extract_leaf_nodes(graph)
    if not leaves:
        raise AceminerError("the ontology has no leaf classes to map")
    contexts = {leaf.iri: ontology.class_context(graph, leaf.iri) for leaf in leaves}
    if args.remote:
        if not args.cache:
            raise AceminerError("--remote requires --cache DIR for reproducible runs")
        matcher = CachedRemoteMatcher(
            RemoteMatcherConfig(endpoint_url=args.remote), args.cache
        )
    elif args.lexicon:
        matcher = LexiconMatcher(_load_lexicon_file(args.lexicon))
    else:
        raise AceminerError("provide --lexicon TSV or --remote URL")
    candidate_set = build_candidates(leaves, matcher, contexts)
    with ExitStack() as stack:
        out = _out_stream(stack, args.out)
        save_candidate_set(candidate_set, out)
    covered = sum(1 for row in candidate_set.rows if row.candidates.candidates)
    print(f"rows={len(candidate_set.rows)} with_candidates={covered}", file=sys.stderr)
    return 0


# --- terminology ---------------------------------------------------------------


def cmd_terminology_build(args) -> int:
    with open(args.candidates, "r", encoding="utf-8") as f:
        candidate_set = load_candidate_set(f)
    if args.decisions:
        with open(args.decisions, "r", encoding="utf-8") as f:
            decisions = read_decision_log(f)
        candidate_set = apply_decisions(candidate_set, decisions)
    lexicon = _load_lexicon_file(args.lexicon) if args.lexicon else None
    aceso = accepted_entries(candidate_set, lexicon)
    project = []
    if args.project:
        with open(args.project, "rb") as f:
            project = load_project_terms(f)
    terminology = merge_terminologies(aceso, project, args.name)
    with ExitStack() as stack:
        out = _out_stream(stack, args.out)
        save_terminology(terminology, out)
    print(
        f"entries={len(terminology.entries)} aceso={len(aceso)} project={len(project)}",
        file=sys.stderr,
    )
    return 0


# --- annotate -------------------------------------------------------------------


def _document_stream(args, stack: ExitStack, stats: corpus.ReaderStats):
    path = args.corpus
    if path == "-":
        source = sys.stdin.buffer
    else:
        source = stack.enter_context(open(path, "rb"))
    if args.format == "mimic":
        return corpus.read_mimic_notes(source, stats=stats)
    if args.format == "reddit":
        config = corpus.ReaderConfig(
            format=args.reader_format,
            text_column=args.text_field or "post",
            group_column=args.group_field or "subreddit",
            id_column=args.id_field,
            source_name=Path(path).stem if path != "-" else "stdin",
            source_tag=corpus.SOURCE_REDDIT,
        )
        return corpus.read_reddit_posts(source, config, stats=stats)
    if args.format == "generic":
        config = corpus.ReaderConfig(
            format=args.reader_format,
            text_column=args.text_field or "text",
            group_column=args.group_field or "",
            id_column=args.id_field,
            source_name=Path(path).stem if path != "-" else "stdin",
            source_tag=corpus.SOURCE_GENERIC,
        )
        return corpus.read_reddit_posts(source, config, stats=stats)
    raise AceminerError(f"unknown corpus format {args.format!r}")


def cmd_annotate(args) -> int:
    with open(args.terminology, "r", encoding="utf-8") as f:
        terminology = load_terminology(f)
    matcher = annotator.CompiledMatcher(terminology)
    reader_stats = corpus.ReaderStats()
    started = time.perf_counter()
    chars = 0

    def counted(docs):
        nonlocal chars
        for doc in docs:
            chars += len(doc.text)
            yield doc

    with ExitStack() as stack:
        docs = _document_stream(args, stack, reader_stats)
        if args.limit is not None:
            docs = itertools.islice(docs, args.limit)
        mentions, errors = annotator.annotate_corpus(
            counted(docs), matcher, workers=args.workers
        )
        out = _out_stream(stack, args.out)
        if args.output_format == "tsv":
            annotator.write_mentions_tsv(mentions, out)
        else:
            annotator.write_mentions_jsonl(mentions, out)
    elapsed = time.perf_counter() - started
    for err in errors:
        print(f"error: document {err.doc_id}: {err.message}", file=sys.stderr)
    rate = chars / elapsed / 1e6 if elapsed > 0 else 0.0
    summary = {
        "documents": reader_stats.yielded if args.limit is None else min(
            reader_stats.yielded, args.limit
        ),
        "records_skipped": reader_stats.skipped,
        "records_filtered": reader_stats.filtered,
        "mentions": len(mentions),
        "annotation_errors": len(errors),
        "text_chars": chars,
        "elapsed_s": round(elapsed, 3),
        "throughput_mb_s": round(rate, 2),
    }
    if args.stats_out:
        Path(args.stats_out).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(
        "annotated {documents} documents, {mentions} mentions, "
        "{throughput_mb_s} MB/s".format(**summary),
        file=sys.stderr,
    )
    return 0


# --- report ---------------------------------------------------------------------


def cmd_report_aggregate(args) -> int:
    with open(args.terminology, "r", encoding="utf-8") as f:
        terminology = load_terminology(f)
    with ExitStack() as stack:
        mentions_src = (
            sys.stdin
            if args.mentions == "-"
            else stack.enter_context(open(args.mentions, "r", encoding="utf-8"))
        )
        freq = report.aggregate(
            annotator.read_mentions_jsonl(mentions_src),
            terminology,
            corpus_name=args.corpus_name,
            doc_count=args.docs,
        )
        out = _out_stream(stack, args.out)
        report.emit(freq, args.format, out, top=args.top)
    if args.figure:
        figures.render_report_figure(freq, args.figure, top=args.top)
        print(f"figure written to {args.figure}", file=sys.stderr)
    return 0


def cmd_report_compare(args) -> int:
    with open(args.left, "r", encoding="utf-8") as f:
        left = report.load_report(f)
    with open(args.right, "r", encoding="utf-8") as f:
        right = report.load_report(f)
    comparison = report.compare(left, right)
    with ExitStack() as stack:
        out = _out_stream(stack, args.out)
        report.emit_comparison(comparison, args.format, out)
    if args.figure:
        figures.render_comparison_figure(comparison, args.figure)
        print(f"figure written to {args.figure}", file=sys.stderr)
    return 0


# --- curation -------------------------------------------------------------------


def cmd_curate_serve(args) -> int:
    host, _, port = args.addr.partition(":")
    try:
        port_no = int(port) if port else 8787
    except ValueError:
        raise AceminerError(f"bad --addr {args.addr!r}, expected host:port")
    session = CurationSession(
        candidate_path=Path(args.candidates),
        decision_log_path=Path(args.log),
        host=host or "127.0.0.1",
        port=port_no,
        assets_dir=Path(args.assets) if args.assets else None,
        lexicon=_load_lexicon_file(args.lexicon) if args.lexicon else None,
    )
    service = CurationService(session)
    service.serve_forever()
    return 0


# --- fixtures -------------------------------------------------------------------


def cmd_fixtures_generate(args) -> int:
    outdir = Path(args.out)
    if args.kind == "pipeline":
        fixture = fixtures.generate_pipeline_fixture(
            seed=args.seed,
            classes=args.classes,
            leaves=args.leaves,
            mapped=args.mapped,
            accepted=args.accepted,
            project_terms=args.project_terms,
            object_properties=args.object_properties,
            data_properties=args.data_properties,
        )
        paths = fixtures.write_pipeline_fixture(fixture, outdir)
        for name, path in paths.items():
            print(f"{name}: {path}", file=sys.stderr)
        return 0
    if args.kind == "corpus":
        if not args.terminology:
            raise AceminerError("corpus fixtures need --terminology to plant mentions from")
        with open(args.terminology, "r", encoding="utf-8") as f:
            terminology = load_terminology(f)
        outdir.mkdir(parents=True, exist_ok=True)
        corpus_file = outdir / ("notes.csv" if args.format == "mimic" else "posts.jsonl")
        spans_path = outdir / "spans.jsonl" if args.spans else None
        manifest = fixtures.generate_corpus(
            corpus_file,
            terminology,
            seed=args.seed,
            docs=args.docs,
            doc_chars=args.doc_chars,
            fmt=args.format,
            plant_rate=args.plant_rate,
            other_category_every=args.other_category_every,
            spans_path=spans_path,
        )
        fixtures.save_manifest(manifest, outdir / "manifest.json")
        print(
            f"{corpus_file}: {manifest.documents} documents, "
            f"{manifest.planted_total} planted mentions",
            file=sys.stderr,
        )
        return 0
    raise AceminerError(f"unknown fixture kind {args.kind!r}")


# --- parser ----------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="aceminer", description=__doc__)
    top = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_ont = top.add_parser("ontology", help="ontology statistics and leaf extraction")
    ont_sub = p_ont.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    p = ont_sub.add_parser("stats", help="report class/property/leaf counts")
    p.add_argument("ontology", help="OWL/RDF-XML file, or - for stdin")
    p.add_argument("--json", action="store_true", help="emit JSON instead of key=value lines")
    p.add_argument(
        "--expect",
        help="comma-separated metric=value pairs to verify, or 'reference' "
        "for the published ACESO counts; mismatches warn but never fail",
    )
    p.add_argument("--out", help="write output here instead of stdout")
    p.set_defaults(func=cmd_ontology_stats)
    p = ont_sub.add_parser("leaves", help="list leaf classes (iri<TAB>label)")
    p.add_argument("ontology", help="OWL/RDF-XML file, or - for stdin")
    p.add_argument("--out", help="write output here instead of stdout")
    p.set_defaults(func=cmd_ontology_leaves)

    p_map = top.add_parser("map", help="map ontology leaves to lexicon concepts")
    map_sub = p_map.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    p = map_sub.add_parser("candidates", help="build the candidate mapping table")
    p.add_argument("--ontology", required=True)
    p.add_argument("--lexicon", help="local lexicon TSV")
    p.add_argument("--remote", help="remote matcher endpoint URL")
    p.add_argument("--cache", help="response cache directory for --remote")
    p.add_argument("--out", help="candidate set JSON path (default stdout)")
    p.set_defaults(func=cmd_map_candidates)

    p_cur = top.add_parser("curate", help="human review of candidate mappings")
    cur_sub = p_cur.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    p = cur_sub.add_parser("serve", help="serve the review API and UI")
    p.add_argument("--candidates", required=True, help="candidate set JSON")
    p.add_argument("--log", required=True, help="append-only decision log (JSON lines)")
    p.add_argument("--addr", default="127.0.0.1:8787", help="host:port to bind")
    p.add_argument("--lexicon", help="lexicon TSV for synonym-aware previews")
    p.add_argument("--assets", help="override the bundled UI assets directory")
    p.set_defaults(func=cmd_curate_serve)

    p_term = top.add_parser("terminology", help="assemble the NLP-ready terminology")
    term_sub = p_term.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    p = term_sub.add_parser("build", help="apply decisions and merge project terms")
    p.add_argument("--candidates", required=True, help="candidate set JSON")
    p.add_argument("--decisions", help="decision log to apply")
    p.add_argument("--project", help="project-defined terms JSON")
    p.add_argument("--lexicon", help="lexicon TSV (pulls synonyms for accepted CUIs)")
    p.add_argument("--name", required=True, help="terminology configuration name")
    p.add_argument("--out", help="terminology JSON path (default stdout)")
    p.set_defaults(func=cmd_terminology_build)

    p = top.add_parser("annotate", help="extract concept mentions from a corpus")
    p.add_argument("corpus", help="corpus file, or - for stdin")
    p.add_argument("--terminology", required=True, help="terminology JSON")
    p.add_argument(
        "--format", default="generic", choices=("mimic", "reddit", "generic"),
        help="corpus flavor (default: generic)",
    )
    p.add_argument(
        "--reader-format", default="jsonl", choices=("csv", "jsonl"),
        help="container format for reddit/generic corpora",
    )
    p.add_argument("--text-field", help="text column/field name")
    p.add_argument("--group-field", help="group column/field name")
    p.add_argument("--id-field", help="id column/field name (default: synthesized)")
    p.add_argument(
        "--workers", type=int, default=os.cpu_count() or 1,
        help="worker processes (default: available cores)",
    )
    p.add_argument("--limit", type=int, help="annotate at most N documents")
    p.add_argument(
        "--output-format", default="jsonl", choices=("jsonl", "tsv"),
        help="mention output format",
    )
    p.add_argument("--out", help="mention output path (default stdout)")
    p.add_argument("--stats-out", help="write a JSON run summary here")
    p.set_defaults(func=cmd_annotate)

    p_rep = top.add_parser("report", help="frequency reports and comparisons")
    rep_sub = p_rep.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    p = rep_sub.add_parser("aggregate", help="per-concept mention counts")
    p.add_argument("--terminology", required=True)
    p.add_argument("--mentions", required=True, help="mention JSONL file, or - for stdin")
    p.add_argument("--corpus-name", default="corpus")
    p.add_argument("--docs", type=int, help="documents processed (for the report header)")
    p.add_argument("--format", default="json", choices=("csv", "json", "plotdata"))
    p.add_argument("--top", type=int, help="cap plotdata/figure at the top N concepts")
    p.add_argument("--figure", help="also render a bar chart PNG/SVG here")
    p.add_argument("--out", help="report path (default stdout)")
    p.set_defaults(func=cmd_report_aggregate)
    p = rep_sub.add_parser("compare", help="diff two frequency reports")
    p.add_argument("left", help="frequency report JSON")
    p.add_argument("right", help="frequency report JSON")
    p.add_argument("--format", default="json", choices=("csv", "json"))
    p.add_argument("--figure", help="also render a grouped bar chart here")
    p.add_argument("--out", help="comparison path (default stdout)")
    p.set_defaults(func=cmd_report_compare)

    p_fix = top.add_parser("fixtures", help="seeded synthetic test data")
    fix_sub = p_fix.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    p = fix_sub.add_parser("generate", help="emit fixture files")
    p.add_argument("--kind", required=True, choices=("pipeline", "corpus"))
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--classes", type=int, default=297)
    p.add_argument("--leaves", type=int, default=140)
    p.add_argument("--mapped", type=int, default=76)
    p.add_argument("--accepted", type=int, default=38)
    p.add_argument("--project-terms", type=int, default=20)
    p.add_argument("--object-properties", type=int, default=93)
    p.add_argument("--data-properties", type=int, default=3)
    p.add_argument("--terminology", help="terminology JSON to plant mentions from (corpus kind)")
    p.add_argument("--docs", type=int, default=1000)
    p.add_argument("--doc-chars", type=int, default=8000)
    p.add_argument("--plant-rate", type=float, default=1.5)
    p.add_argument("--format", default="mimic", choices=("mimic", "reddit"))
    p.add_argument("--spans", action="store_true", help="also record exact planted spans")
    p.add_argument(
        "--other-category-every", type=int, default=0,
        help="interleave one non-discharge note every N rows (mimic only)",
    )
    p.set_defaults(func=cmd_fixtures_generate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AceminerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # internal fault: distinct exit code for scripts
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
