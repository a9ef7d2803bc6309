"""Known bug-pattern regression fixtures.

Each fixture pins a document, a query (as both AST and text), and the node
ids a correct engine must return per standard. They cover the arithmetic
comparison rewrite, the range-disjunction tautology rewrite, positional
pre-check overflow, the sequence-window off-by-one, and the 1.0-vs-3.0
boolean comparison divergence. The suite doubles as replayable data for
external engines via the files written by `write_fixture_files`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .harness import EngineSpec, TestCase, run_engine
from .xmldoc import parse
from .xpathast import (
    AttributeRef,
    Binary,
    ChildPathSubject,
    Constant,
    FunctionCall,
    Predicate,
    RangeTo,
    Section,
    SectionPrefix,
    XPathExpr,
    XPathStandard,
    render,
)

V1 = XPathStandard.V1_0
V3 = XPathStandard.V3_0


@dataclass(frozen=True)
class RegressionFixture:
    name: str
    description: str
    doc_text: str
    sections: tuple[Section, ...]
    expected: dict  # XPathStandard -> list of node ids

    def expr(self, standard: XPathStandard) -> XPathExpr:
        return XPathExpr(self.sections, standard)

    def query_text(self) -> str:
        return render(self.expr(min(self.expected, key=lambda s: s.value)))

    def case(self, standard: XPathStandard) -> TestCase:
        return TestCase(
            doc_text=self.doc_text,
            query_text=render(self.expr(standard)),
            standard=standard,
            provenance={"fixture": self.name},
            expr=self.expr(standard),
        )


def _negated_id_comparison() -> tuple[Section, ...]:
    body = Binary("<", Binary("*", AttributeRef("id"), Constant(-1)), Constant(2))
    return (Section(SectionPrefix("double_slash", "child", None), (Predicate("boolean", body),)),)


def _range_disjunction() -> tuple[Section, ...]:
    body = Binary(
        "or",
        Binary(">=", AttributeRef("t"), Constant(0)),
        Binary("<=", AttributeRef("t"), Constant(1)),
    )
    return (Section(SectionPrefix("double_slash", "child", "T"), (Predicate("boolean", body),)),)


def _positional_precheck() -> tuple[Section, ...]:
    big = 9_000_000_000_000_000
    body = Binary(
        "<=",
        Binary("*", FunctionCall("position"), Constant(big)),
        Binary("*", FunctionCall("last"), Constant(big)),
    )
    return (Section(SectionPrefix("double_slash", "child", "S"), (Predicate("boolean", body),)),)


def _sequence_window() -> tuple[Section, ...]:
    window = FunctionCall(
        "subsequence", (RangeTo(Constant(1), Constant(2)), Constant(1), Constant(2))
    )
    body = Binary("=", FunctionCall("tail", (window,)), Constant(2))
    return (Section(SectionPrefix("double_slash", "child", "A"), (Predicate("boolean", body),)),)


def _absent_attribute_boolean() -> tuple[Section, ...]:
    body = Binary("=", ChildPathSubject("Book", "name"), Constant(False))
    return (Section(SectionPrefix("slash", "child", "Books"), (Predicate("boolean", body),)),)


FIXTURES: tuple[RegressionFixture, ...] = (
    RegressionFixture(
        name="negated_id_comparison",
        description="//*[@id * -1 < 2] keeps every node; engines must not fold "
        "the multiplication into the bound without flipping the operator",
        doc_text='<Book id="1"><Book id="2"><Book id="3"/></Book></Book>',
        sections=_negated_id_comparison(),
        expected={V1: [1, 2, 3], V3: [1, 2, 3]},
    ),
    RegressionFixture(
        name="range_disjunction_absent_attr",
        description="@t >= 0 or @t <= 1 is not a tautology when @t is absent",
        doc_text='<T id="1"/>',
        sections=_range_disjunction(),
        expected={V1: [], V3: []},
    ),
    RegressionFixture(
        name="positional_precheck_overflow",
        description="large constants in positional conditions must not be "
        "pre-checked with overflowing integer arithmetic",
        doc_text='<S id="1"/>',
        sections=_positional_precheck(),
        expected={V1: [1], V3: [1]},
    ),
    RegressionFixture(
        name="tail_of_subsequence",
        description="tail(subsequence(1 to 2, 1, 2)) is (2), not the empty sequence",
        doc_text='<A id="1"/>',
        sections=_sequence_window(),
        expected={V3: [1]},
    ),
    RegressionFixture(
        name="absent_attribute_boolean_comparison",
        description="Book/@name = false() is true under 1.0 (boolean coercion "
        "of the empty node-set) and false under 3.0 (existential comparison)",
        doc_text='<Books id="1"><Book id="2" year="2020">A fairy tale</Book></Books>',
        sections=_absent_attribute_boolean(),
        expected={V1: [1], V3: []},
    ),
)


def fixture(name: str) -> RegressionFixture:
    for entry in FIXTURES:
        if entry.name == name:
            return entry
    raise KeyError(name)


@dataclass
class FixtureResult:
    fixture: str
    standard: str
    engine: str
    expected: list[int]
    got: list[int] | str
    ok: bool


def run_fixtures(engines: list[EngineSpec] | None = None) -> list[FixtureResult]:
    """Execute every fixture on the given engines (default: both builtins)."""
    results = []
    for entry in FIXTURES:
        for standard, expected in entry.expected.items():
            if engines is None:
                chosen = [
                    EngineSpec("builtin_a", "builtin_a", standard),
                    EngineSpec("builtin_b", "builtin_b", standard),
                ]
            else:
                chosen = [spec for spec in engines if spec.standard is standard]
            case = entry.case(standard)
            for spec in chosen:
                outcome = run_engine(spec, case)
                if outcome.outcome == "nodes":
                    got: list[int] | str = list(outcome.node_ids)
                else:
                    got = outcome.error_class or outcome.outcome
                results.append(
                    FixtureResult(
                        fixture=entry.name,
                        standard=standard.value,
                        engine=spec.name,
                        expected=list(expected),
                        got=got,
                        ok=got == list(expected),
                    )
                )
    return results


def write_fixture_files(directory: str | Path) -> list[Path]:
    """Emit each fixture as doc + query + expected files for external use."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for entry in FIXTURES:
        doc_path = directory / f"{entry.name}.xml"
        query_path = directory / f"{entry.name}.query"
        expected_path = directory / f"{entry.name}.expected.json"
        doc_path.write_text(entry.doc_text + "\n", encoding="utf-8")
        query_path.write_text(entry.query_text() + "\n", encoding="utf-8")
        expected_path.write_text(
            json.dumps(
                {standard.value: ids for standard, ids in entry.expected.items()},
                sort_keys=True,
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )
        written.extend([doc_path, query_path, expected_path])
    return written
