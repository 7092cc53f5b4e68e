import io
import json
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aceminer.annotator import Mention
from aceminer.errors import AceminerError
from aceminer.report import (
    aggregate,
    compare,
    emit,
    emit_comparison,
    load_report,
    report_from_dict,
    report_to_dict,
)
from aceminer.terminology import TermEntry, Terminology


def terminology_of(n: int, name: str = "t") -> Terminology:
    return Terminology(name=name, entries=[
        TermEntry(cui=f"C{i + 1:07d}", preferred_label=f"concept {i + 1}",
                  status="accepted")
        for i in range(n)
    ])


def mention(cui: str, doc_id: str = "d1", start: int = 0) -> Mention:
    return Mention(doc_id=doc_id, cui=cui, start_char=start, end_char=start + 3,
                   surface="xxx", pattern="xxx")


class TestAggregate:
    def test_counts_match_brute_force_group_by(self):
        rng = random.Random(5)
        t = terminology_of(8)
        cuis = [e.cui for e in t.entries]
        mentions = [
            mention(rng.choice(cuis), doc_id=f"d{rng.randint(1, 20)}", start=i * 5)
            for i in range(300)
        ]
        expected = Counter(m.cui for m in mentions)
        report = aggregate(mentions, t, "fixture", doc_count=20)
        assert {r.cui: r.mention_count for r in report.rows if r.mention_count} == dict(expected)
        assert report.total_mentions == 300
        # per-concept document counts against a brute-force group-by
        expected_docs = {}
        for m in mentions:
            expected_docs.setdefault(m.cui, set()).add(m.doc_id)
        got_docs = {r.cui: r.document_count for r in report.rows if r.document_count}
        assert got_docs == {cui: len(v) for cui, v in expected_docs.items()}

    def test_empty_stream_full_zero_coverage(self):
        t = terminology_of(58)
        report = aggregate([], t, "empty", doc_count=0)
        assert report.concept_count == 58
        assert len(report.rows) == 58
        assert all(r.mention_count == 0 for r in report.rows)
        assert report.total_mentions == 0

    def test_unknown_cui_is_an_error(self):
        t = terminology_of(2)
        with pytest.raises(AceminerError):
            aggregate([mention("C9999999")], t, "bad")

    def test_sort_contract_count_desc_then_cui(self):
        t = terminology_of(5)
        mentions = [mention("C0000003")] * 4 + [mention("C0000001")] * 4 + [mention("C0000005")]
        report = aggregate(mentions, t, "sorted", doc_count=1)
        keys = [(-r.mention_count, r.cui) for r in report.rows]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)  # strict ordering, no equal adjacent keys

    @given(st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=40, deadline=None)
    def test_aggregation_equals_group_by(self, seed):
        rng = random.Random(seed)
        t = terminology_of(rng.randint(1, 10))
        cuis = [e.cui for e in t.entries]
        mentions = [mention(rng.choice(cuis), doc_id=f"d{rng.randint(1, 6)}")
                    for _ in range(rng.randint(0, 80))]
        report = aggregate(mentions, t, "prop")
        assert {r.cui: r.mention_count for r in report.rows} == {
            cui: sum(1 for m in mentions if m.cui == cui) for cui in cuis
        }
        assert report.total_mentions == len(mentions)


class TestCompare:
    def test_report_vs_itself_all_zero(self):
        t = terminology_of(4)
        report = aggregate([mention("C0000001")] * 3, t, "same", doc_count=1)
        comparison = compare(report, report)
        assert all(d.delta == 0 for d in comparison.deltas)
        assert comparison.left_only == comparison.right_only == []

    def test_disjoint_concepts_exclusive_lists(self):
        a = aggregate([], terminology_of(2, "a"), "left")
        b_entries = [TermEntry(cui=f"C{i:07d}", preferred_label=f"x{i}", status="accepted")
                     for i in (7, 8, 9)]
        b = aggregate([], Terminology(name="b", entries=b_entries), "right")
        comparison = compare(a, b)
        assert comparison.left_only == ["C0000001", "C0000002"]
        assert comparison.right_only == ["C0000007", "C0000008", "C0000009"]

    def test_deltas_cover_union(self):
        t_small = terminology_of(2, "small")
        t_big = terminology_of(3, "big")
        left = aggregate([mention("C0000001")], t_small, "l", doc_count=1)
        right = aggregate([mention("C0000001"), mention("C0000003")], t_big, "r", doc_count=1)
        comparison = compare(left, right)
        assert {d.cui for d in comparison.deltas} == {"C0000001", "C0000002", "C0000003"}
        by_cui = {d.cui: d for d in comparison.deltas}
        assert by_cui["C0000003"].left_count == 0
        assert by_cui["C0000003"].right_count == 1


class TestEmit:
    def make_report(self):
        t = terminology_of(3)
        mentions = [mention("C0000002")] * 5 + [mention("C0000001")] * 2
        return aggregate(mentions, t, "emit-me", doc_count=4)

    def test_plotdata_top2_descending(self):
        report = self.make_report()
        buf = io.StringIO()
        emit(report, "plotdata", buf, top=2)
        lines = buf.getvalue().splitlines()
        assert lines == ["concept 2\t5", "concept 1\t2"]

    def test_json_round_trip(self):
        report = self.make_report()
        buf = io.StringIO()
        emit(report, "json", buf)
        loaded = load_report(buf.getvalue())
        assert report_to_dict(loaded) == report_to_dict(report)

    def test_csv_row_count_is_concepts_plus_header(self):
        report = self.make_report()
        buf = io.StringIO()
        emit(report, "csv", buf)
        assert len(buf.getvalue().splitlines()) == report.concept_count + 1

    def test_emission_is_deterministic(self):
        report = self.make_report()
        a, b = io.StringIO(), io.StringIO()
        emit(report, "json", a)
        emit(report_from_dict(json.loads(a.getvalue())), "json", b)
        assert a.getvalue() == b.getvalue()

    def test_unknown_format(self):
        with pytest.raises(AceminerError):
            emit(self.make_report(), "yaml", io.StringIO())

    def test_comparison_json_carries_top_concepts(self):
        report = self.make_report()
        comparison = compare(report, report)
        buf = io.StringIO()
        emit_comparison(comparison, "json", buf)
        payload = json.loads(buf.getvalue())
        assert payload["left"]["top_concept"]["cui"] == "C0000002"
        assert payload["right"]["total_mentions"] == 7

    def test_comparison_csv(self):
        report = self.make_report()
        buf = io.StringIO()
        emit_comparison(compare(report, report), "csv", buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "cui,preferred_label,left_count,right_count,delta"
        assert len(lines) == 1 + report.concept_count
