import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from aceminer.cli import main


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "aceminer", *args],
        capture_output=True, text=True, cwd=cwd,
    )


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    """One shared pipeline fixture directory built through the CLI itself."""
    root = tmp_path_factory.mktemp("cli-pipeline")
    assert main(["fixtures", "generate", "--kind", "pipeline", "--out",
                 str(root / "fx"), "--seed", "17", "--classes", "40",
                 "--leaves", "24", "--mapped", "12", "--accepted", "7",
                 "--project-terms", "5", "--object-properties", "4",
                 "--data-properties", "1"]) == 0
    assert main(["map", "candidates", "--ontology", str(root / "fx/ontology.owl"),
                 "--lexicon", str(root / "fx/lexicon.tsv"),
                 "--out", str(root / "cands.json")]) == 0
    assert main(["terminology", "build", "--candidates", str(root / "cands.json"),
                 "--decisions", str(root / "fx/decisions.jsonl"),
                 "--project", str(root / "fx/project_terms.json"),
                 "--lexicon", str(root / "fx/lexicon.tsv"),
                 "--name", "combined", "--out", str(root / "combined.json")]) == 0
    return root


class TestOntologyCommands:
    def test_stats_lines(self, pipeline_dir):
        result = run_cli("ontology", "stats", str(pipeline_dir / "fx/ontology.owl"))
        assert result.returncode == 0
        assert result.stdout.splitlines() == [
            "classes=40", "object_properties=4", "data_properties=1", "leaves=24",
        ]

    def test_stats_json(self, pipeline_dir):
        result = run_cli("ontology", "stats", str(pipeline_dir / "fx/ontology.owl"), "--json")
        assert json.loads(result.stdout) == {
            "classes": 40, "object_properties": 4, "data_properties": 1, "leaves": 24,
        }

    def test_stats_expect_mismatch_warns_but_succeeds(self, pipeline_dir):
        result = run_cli("ontology", "stats", str(pipeline_dir / "fx/ontology.owl"),
                         "--expect", "classes=297")
        assert result.returncode == 0
        assert "classes=40" in result.stdout
        assert "differs from expected 297" in result.stderr

    def test_leaves_line_count(self, pipeline_dir):
        result = run_cli("ontology", "leaves", str(pipeline_dir / "fx/ontology.owl"))
        assert result.returncode == 0
        assert len(result.stdout.splitlines()) == 24
        assert "leaves=24" in result.stderr

    def test_missing_file_is_exit_1(self):
        result = run_cli("ontology", "stats", "/nonexistent/thing.owl")
        assert result.returncode == 1
        assert "error" in result.stderr.lower()

    def test_malformed_ontology_is_exit_1(self, tmp_path):
        bad = tmp_path / "bad.owl"
        bad.write_bytes(b"<unclosed")
        result = run_cli("ontology", "stats", str(bad))
        assert result.returncode == 1


class TestUsageErrors:
    def test_unknown_subcommand(self):
        result = run_cli("frobnicate")
        assert result.returncode == 1
        assert "usage" in result.stderr.lower()

    def test_unknown_flag(self):
        result = run_cli("ontology", "stats", "--bogus")
        assert result.returncode == 1

    def test_help_exits_zero(self):
        result = run_cli("--help")
        assert result.returncode == 0
        assert "COMMAND" in result.stdout


class TestAnnotateCommand:
    def test_header_only_corpus_empty_mentions(self, pipeline_dir, tmp_path):
        notes = tmp_path / "notes.csv"
        notes.write_text("ROW_ID,SUBJECT_ID,HADM_ID,CATEGORY,TEXT\n")
        out = tmp_path / "mentions.jsonl"
        result = run_cli("annotate", str(notes), "--terminology",
                         str(pipeline_dir / "combined.json"), "--format", "mimic",
                         "--out", str(out))
        assert result.returncode == 0
        assert out.read_text() == ""

    def test_tsv_output(self, pipeline_dir, tmp_path):
        corpus_dir = tmp_path / "corp"
        assert main(["fixtures", "generate", "--kind", "corpus", "--out", str(corpus_dir),
                     "--seed", "3", "--terminology", str(pipeline_dir / "combined.json"),
                     "--docs", "10", "--doc-chars", "500", "--format", "reddit"]) == 0
        result = run_cli("annotate", str(corpus_dir / "posts.jsonl"),
                         "--terminology", str(pipeline_dir / "combined.json"),
                         "--format", "reddit", "--output-format", "tsv")
        assert result.returncode == 0
        header = result.stdout.splitlines()[0]
        assert header == "doc_id\tcui\tstart\tend\tsurface\tpattern"

    def test_limit_flag(self, pipeline_dir, tmp_path):
        corpus_dir = tmp_path / "corp"
        assert main(["fixtures", "generate", "--kind", "corpus", "--out", str(corpus_dir),
                     "--seed", "3", "--terminology", str(pipeline_dir / "combined.json"),
                     "--docs", "10", "--doc-chars", "400", "--format", "reddit"]) == 0
        stats_path = tmp_path / "stats.json"
        result = run_cli("annotate", str(corpus_dir / "posts.jsonl"),
                         "--terminology", str(pipeline_dir / "combined.json"),
                         "--format", "reddit", "--limit", "4",
                         "--stats-out", str(stats_path), "--out", os.devnull)
        assert result.returncode == 0
        assert json.loads(stats_path.read_text())["documents"] == 4


class TestReportCommands:
    def test_compare_report_with_itself_is_all_zero(self, pipeline_dir, tmp_path):
        corpus_dir = tmp_path / "corp"
        main(["fixtures", "generate", "--kind", "corpus", "--out", str(corpus_dir),
              "--seed", "5", "--terminology", str(pipeline_dir / "combined.json"),
              "--docs", "20", "--doc-chars", "600", "--format", "reddit"])
        mentions = tmp_path / "m.jsonl"
        main(["annotate", str(corpus_dir / "posts.jsonl"), "--terminology",
              str(pipeline_dir / "combined.json"), "--format", "reddit",
              "--out", str(mentions)])
        rep = tmp_path / "r.json"
        assert main(["report", "aggregate", "--terminology",
                     str(pipeline_dir / "combined.json"), "--mentions", str(mentions),
                     "--corpus-name", "synthetic", "--out", str(rep)]) == 0
        result = run_cli("report", "compare", str(rep), str(rep))
        assert result.returncode == 0
        payload = json.loads(result.stdout)
        assert all(d["delta"] == 0 for d in payload["deltas"])
        assert payload["left_only"] == payload["right_only"] == []

    def test_aggregate_csv_and_plotdata(self, pipeline_dir, tmp_path):
        mentions = tmp_path / "empty.jsonl"
        mentions.write_text("")
        result = run_cli("report", "aggregate", "--terminology",
                         str(pipeline_dir / "combined.json"), "--mentions", str(mentions),
                         "--format", "csv")
        assert result.returncode == 0
        lines = result.stdout.splitlines()
        assert lines[0] == "cui,preferred_label,mention_count,document_count"
        assert len(lines) == 1 + 12  # 7 accepted + 5 project
        result = run_cli("report", "aggregate", "--terminology",
                         str(pipeline_dir / "combined.json"), "--mentions", str(mentions),
                         "--format", "plotdata", "--top", "3")
        assert result.returncode == 0
        assert len(result.stdout.splitlines()) == 3

    def test_figure_rendered(self, pipeline_dir, tmp_path):
        mentions = tmp_path / "empty.jsonl"
        mentions.write_text("")
        figure = tmp_path / "fig.png"
        result = run_cli("report", "aggregate", "--terminology",
                         str(pipeline_dir / "combined.json"), "--mentions", str(mentions),
                         "--format", "csv", "--out", str(tmp_path / "r.csv"),
                         "--figure", str(figure))
        assert result.returncode == 0
        assert figure.exists() and figure.stat().st_size > 0


class TestEndToEndDeterminism:
    def script(self, root: Path) -> bytes:
        """fixtures -> terminology -> corpus -> annotate -> report, returning
        the final report bytes."""
        fx = root / "fx"
        main(["fixtures", "generate", "--kind", "pipeline", "--out", str(fx),
              "--seed", "23", "--classes", "30", "--leaves", "18", "--mapped", "9",
              "--accepted", "5", "--project-terms", "4",
              "--object-properties", "3", "--data-properties", "1"])
        main(["map", "candidates", "--ontology", str(fx / "ontology.owl"),
              "--lexicon", str(fx / "lexicon.tsv"), "--out", str(root / "cands.json")])
        main(["terminology", "build", "--candidates", str(root / "cands.json"),
              "--decisions", str(fx / "decisions.jsonl"),
              "--project", str(fx / "project_terms.json"),
              "--lexicon", str(fx / "lexicon.tsv"),
              "--name", "combined", "--out", str(root / "combined.json")])
        main(["fixtures", "generate", "--kind", "corpus", "--out", str(root / "corp"),
              "--seed", "29", "--terminology", str(root / "combined.json"),
              "--docs", "40", "--doc-chars", "700", "--format", "mimic"])
        main(["annotate", str(root / "corp/notes.csv"), "--terminology",
              str(root / "combined.json"), "--format", "mimic",
              "--out", str(root / "mentions.jsonl")])
        main(["report", "aggregate", "--terminology", str(root / "combined.json"),
              "--mentions", str(root / "mentions.jsonl"), "--corpus-name", "det",
              "--format", "json", "--out", str(root / "report.json")])
        return (root / "report.json").read_bytes()

    def test_scripted_pipeline_twice_is_byte_identical(self, tmp_path):
        a = self.script(tmp_path / "run1")
        b = self.script(tmp_path / "run2")
        assert a == b
        assert json.loads(a)["total_mentions"] > 0

    def test_no_writes_outside_out_paths(self, pipeline_dir, tmp_path):
        workdir = tmp_path / "clean"
        workdir.mkdir()
        mentions = workdir / "m.jsonl"
        mentions.write_text("")
        before = set(os.listdir(workdir))
        result = run_cli("report", "aggregate",
                         "--terminology", str(pipeline_dir / "combined.json"),
                         "--mentions", str(mentions), "--format", "json",
                         "--out", str(workdir / "report.json"), cwd=workdir)
        assert result.returncode == 0
        after = set(os.listdir(workdir))
        assert after - before == {"report.json"}
