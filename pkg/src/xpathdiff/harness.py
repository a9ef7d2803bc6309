"""Differential execution harness.

Runs one test case on every configured engine, normalizes outcomes to
ordered node-id lists (or error classes, or timeouts), classifies
disagreements and fingerprints them for deduplication. Engines are either
builtin (the two reference strategies and fault-injected mutants) or
external subprocess wrappers speaking a one-line-per-node wire protocol.
"""

from __future__ import annotations

import hashlib
import json
import re
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import evaluator, mutations, seteval
from .values import ElemItem, EvalError
from .xmldoc import ParseError, XmlDocument, parse
from .xpathast import XPathExpr, XPathStandard, operator_names, render

DEFAULT_TIMEOUT_MS = 10_000

ENGINE_KINDS = ("builtin_a", "builtin_b", "builtin_mutant", "subprocess")


class EngineConfigError(Exception):
    pass


@dataclass(frozen=True)
class EngineSpec:
    name: str
    kind: str
    standard: XPathStandard = XPathStandard.V1_0
    command_template: str | None = None  # subprocess only; needs {doc} and {query}
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    mutation: str | None = None  # builtin_mutant only

    def __post_init__(self):
        if self.kind not in ENGINE_KINDS:
            raise EngineConfigError(f"unknown engine kind {self.kind!r}")
        if self.kind == "subprocess":
            template = self.command_template or ""
            if template.count("{doc}") != 1 or template.count("{query}") != 1:
                raise EngineConfigError(
                    "subprocess template must contain {doc} and {query} exactly once"
                )
        if self.kind == "builtin_mutant" and self.mutation not in mutations.MUTATIONS:
            raise EngineConfigError(f"unknown mutation {self.mutation!r}")


@dataclass(frozen=True)
class EngineResult:
    outcome: str  # "nodes" | "error" | "timeout"
    node_ids: tuple[int, ...] | None = None
    error_class: str | None = None
    wall_ms: float = 0.0

    @staticmethod
    def nodes(ids, wall_ms: float = 0.0) -> "EngineResult":
        return EngineResult("nodes", node_ids=tuple(ids), wall_ms=wall_ms)

    @staticmethod
    def error(klass: str, wall_ms: float = 0.0) -> "EngineResult":
        return EngineResult("error", error_class=klass, wall_ms=wall_ms)

    @staticmethod
    def timeout(wall_ms: float = 0.0) -> "EngineResult":
        return EngineResult("timeout", wall_ms=wall_ms)

    def succeeded(self) -> bool:
        return self.outcome == "nodes"

    def shape(self) -> str:
        if self.outcome == "nodes":
            return "nonempty" if self.node_ids else "empty"
        return self.outcome if self.outcome == "timeout" else "error"


@dataclass
class TestCase:
    __test__ = False  # keep pytest from collecting this as a test class

    doc_text: str
    query_text: str
    standard: XPathStandard
    provenance: dict | None = None
    expr: XPathExpr | None = None
    doc: XmlDocument | None = None

    def document(self) -> XmlDocument:
        if self.doc is None:
            self.doc = parse(self.doc_text)
        return self.doc

    @staticmethod
    def from_parts(doc: XmlDocument, expr: XPathExpr, provenance: dict | None = None) -> "TestCase":
        from .xmldoc import serialize

        return TestCase(
            doc_text=serialize(doc),
            query_text=render(expr),
            standard=expr.standard,
            provenance=provenance,
            expr=expr,
            doc=doc,
        )


@dataclass
class Discrepancy:
    case: TestCase
    results: dict[str, EngineResult]
    klass: str  # "logic" | "error"
    fingerprint: str


def mutant_engine(mutation_id: str, standard: XPathStandard = XPathStandard.V1_0) -> EngineSpec:
    """A builtin engine that applies the named unsound rewrite before
    evaluating with strategy A."""
    if mutation_id not in mutations.MUTATIONS:
        raise EngineConfigError(f"unknown mutation {mutation_id!r}")
    return EngineSpec(
        name=f"mutant_{mutation_id}", kind="builtin_mutant", standard=standard,
        mutation=mutation_id,
    )


def builtin_engine(kind: str, standard: XPathStandard) -> EngineSpec:
    return EngineSpec(name=kind, kind=kind, standard=standard)


# --- execution ----------------------------------------------------------------

def _run_builtin(spec: EngineSpec, case: TestCase) -> EngineResult:
    started = time.perf_counter()

    def wall() -> float:
        return (time.perf_counter() - started) * 1000.0

    if case.expr is None:
        return EngineResult.error("no-ast", wall())
    try:
        doc = case.document()
    except ParseError:
        return EngineResult.error("doc-parse", wall())
    expr = case.expr
    try:
        if spec.kind == "builtin_mutant":
            expr = mutations.apply_mutation(spec.mutation, expr)
            value = evaluator.evaluate(doc, expr)
        elif spec.kind == "builtin_b":
            value = seteval.evaluate_strategy_b(doc, expr)
        else:
            value = evaluator.evaluate(doc, expr)
    except EvalError as exc:
        return EngineResult.error(exc.klass, wall())
    if not all(isinstance(item, ElemItem) for item in value):
        return EngineResult.error("non-node-result", wall())
    return EngineResult.nodes((item.node for item in value), wall())


_OUTPUT_NODE_RE = re.compile(r"N (-?\d+)\s*$")
_OUTPUT_ERR_RE = re.compile(r"ERR (\S+)\s*$")


def _parse_wire_output(stdout: str) -> EngineResult | None:
    """Wire protocol: `N <id>` per selected node, or one `ERR <class>` line."""
    lines = [line for line in stdout.splitlines() if line.strip()]
    if len(lines) == 1:
        err = _OUTPUT_ERR_RE.fullmatch(lines[0])
        if err:
            return EngineResult.error(err.group(1))
    ids = []
    for line in lines:
        matched = _OUTPUT_NODE_RE.fullmatch(line)
        if not matched:
            return None
        ids.append(int(matched.group(1)))
    return EngineResult.nodes(ids)


def _run_subprocess(spec: EngineSpec, case: TestCase) -> EngineResult:
    started = time.perf_counter()

    def wall() -> float:
        return (time.perf_counter() - started) * 1000.0

    with tempfile.TemporaryDirectory(prefix="xpathdiff-") as workdir:
        doc_path = Path(workdir) / "doc.xml"
        doc_path.write_text(case.doc_text, encoding="utf-8")
        argv = []
        for token in shlex.split(spec.command_template):
            token = token.replace("{doc}", str(doc_path))
            token = token.replace("{query}", case.query_text)
            argv.append(token)
        try:
            completed = subprocess.run(
                argv,
                capture_output=True,
                timeout=spec.timeout_ms / 1000.0,
            )
        except subprocess.TimeoutExpired:
            return EngineResult.timeout(wall())
        except (OSError, ValueError):
            return EngineResult.error("spawn", wall())
    if completed.returncode != 0:
        return EngineResult.error("adapter", wall())
    parsed = _parse_wire_output(completed.stdout.decode("utf-8", errors="replace"))
    if parsed is None:
        return EngineResult.error("adapter", wall())
    return EngineResult(parsed.outcome, parsed.node_ids, parsed.error_class, wall())


def run_engine(spec: EngineSpec, case: TestCase) -> EngineResult:
    """Execute one case on one engine; never raises for engine behavior."""
    if spec.standard is not case.standard:
        raise EngineConfigError(
            f"engine {spec.name} speaks {spec.standard.value}, case is {case.standard.value}"
        )
    if spec.kind == "subprocess":
        return _run_subprocess(spec, case)
    return _run_builtin(spec, case)


# --- comparison and fingerprinting ---------------------------------------------

def compare(case: TestCase, results: dict[str, EngineResult]) -> Discrepancy | None:
    """Classify the joint outcome of >= 2 engines on one case.

    Logic discrepancy: two engines succeeded with different ordered id
    lists. Error discrepancy: success and error/timeout outcomes are mixed.
    All engines erroring (even with different classes) is agreement.
    """
    if len(results) < 2:
        raise ValueError("differential comparison needs at least two engines")
    succeeded = [r for r in results.values() if r.succeeded()]
    failed = len(results) - len(succeeded)
    klass = None
    if any(a.node_ids != b.node_ids for a in succeeded for b in succeeded):
        klass = "logic"
    elif succeeded and failed:
        klass = "error"
    if klass is None:
        return None
    discrepancy = Discrepancy(case, dict(results), klass, "")
    discrepancy.fingerprint = fingerprint(discrepancy)
    return discrepancy


def fingerprint(discrepancy: Discrepancy) -> str:
    """Constant-erased structural dedup key.

    Hash of the discrepancy class, the sorted multiset of function/operator
    names in the query skeleton, and each engine's outcome shape; cases that
    retrigger one bug with different constants collide on purpose.
    """
    case = discrepancy.case
    if case.expr is None:
        raise ValueError("fingerprinting needs the query AST")
    payload = json.dumps(
        [
            discrepancy.klass,
            operator_names(case.expr),
            sorted(
                (name, result.shape())
                for name, result in discrepancy.results.items()
            ),
        ],
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
