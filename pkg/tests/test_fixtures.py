"""Regression fixture registry invariants."""

import json

from xpathdiff.fixtures import FIXTURES, fixture, run_fixtures, write_fixture_files
from xpathdiff.harness import mutant_engine, run_engine
from xpathdiff.xpathast import XPathStandard, render

V1 = XPathStandard.V1_0
V3 = XPathStandard.V3_0


def test_every_fixture_passes_on_both_builtins():
    results = run_fixtures()
    assert results
    for result in results:
        assert result.ok, result


def test_fixture_texts_are_the_canonical_renderings():
    for entry in FIXTURES:
        for standard in entry.expected:
            assert render(entry.expr(standard)) == entry.query_text()


def test_fixtures_trip_their_mutants():
    pairs = {
        "negated_id_comparison": ("mul_compare_rewrite", V1),
        "range_disjunction_absent_attr": ("or_true_rewrite", V1),
        "tail_of_subsequence": ("tail_subseq_off_by_one", V3),
    }
    for name, (mutation, standard) in pairs.items():
        entry = fixture(name)
        case = entry.case(standard)
        got = run_engine(mutant_engine(mutation, standard), case)
        assert list(got.node_ids) != entry.expected[standard], name


def test_fixture_files_roundtrip(tmp_path):
    written = write_fixture_files(tmp_path)
    assert len(written) == 3 * len(FIXTURES)
    for entry in FIXTURES:
        doc_text = (tmp_path / f"{entry.name}.xml").read_text().strip()
        query = (tmp_path / f"{entry.name}.query").read_text().strip()
        expected = json.loads((tmp_path / f"{entry.name}.expected.json").read_text())
        assert doc_text == entry.doc_text
        assert query == entry.query_text()
        assert expected == {s.value: ids for s, ids in entry.expected.items()}
