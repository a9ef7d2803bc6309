"""Greedy structural minimization of bug-inducing test cases.

Reduction steps: pruning leading/trailing sections, dropping predicates,
replacing predicate subtrees by one of their children or a small literal,
deleting XML subtrees, and dropping attributes. Each candidate must still
satisfy the caller's check (same discrepancy class between the same engine
pair), must not grow the serialized case, and must strictly shrink a
structural size measure, which makes the fixpoint loop terminate. Node ids
are never renumbered so engine outputs stay comparable mid-reduction.
"""

from __future__ import annotations

from typing import Callable, Iterator

from .harness import TestCase
from .xmldoc import XmlDocument, serialize
from .xpathast import (
    Binary,
    Constant,
    ExprNode,
    FunctionCall,
    Predicate,
    RangeTo,
    Section,
    Unary,
    XPathExpr,
    render,
    walk_expr,
)

ReductionCheck = Callable[[TestCase], bool]


def _expr_children(node: ExprNode) -> tuple[ExprNode, ...]:
    if isinstance(node, FunctionCall):
        return node.args
    if isinstance(node, Binary):
        return (node.lhs, node.rhs)
    if isinstance(node, Unary):
        return (node.arg,)
    if isinstance(node, RangeTo):
        return (node.lhs, node.rhs)
    return ()


def _with_child(node: ExprNode, index: int, child: ExprNode) -> ExprNode:
    if isinstance(node, FunctionCall):
        args = list(node.args)
        args[index] = child
        return FunctionCall(node.name, tuple(args))
    if isinstance(node, Binary):
        return Binary(node.op, child if index == 0 else node.lhs, child if index == 1 else node.rhs)
    if isinstance(node, Unary):
        return Unary(node.op, child)
    if isinstance(node, RangeTo):
        return RangeTo(child if index == 0 else node.lhs, child if index == 1 else node.rhs)
    raise TypeError(f"{node!r} has no children")


def _node_paths(node: ExprNode, prefix: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], ExprNode]]:
    yield prefix, node
    for index, child in enumerate(_expr_children(node)):
        yield from _node_paths(child, prefix + (index,))


def _replace_at(node: ExprNode, path: tuple[int, ...], replacement: ExprNode) -> ExprNode:
    if not path:
        return replacement
    child = _expr_children(node)[path[0]]
    return _with_child(node, path[0], _replace_at(child, path[1:], replacement))


def _ast_size(expr: XPathExpr) -> int:
    total = len(expr.sections)
    for section in expr.sections:
        for predicate in section.predicates:
            total += sum(1 for _ in walk_expr(predicate.body))
    return total


def _doc_size(doc: XmlDocument) -> int:
    return len(doc.nodes) + sum(len(n.attributes) for n in doc.nodes.values())


def case_measure(case: TestCase) -> int:
    return _ast_size(case.expr) + _doc_size(case.document())


def _rebuild(case: TestCase, doc: XmlDocument, expr: XPathExpr) -> TestCase:
    provenance = dict(case.provenance or {})
    provenance["reduced"] = True
    return TestCase(
        doc_text=serialize(doc),
        query_text=render(expr),
        standard=case.standard,
        provenance=provenance,
        expr=expr,
        doc=doc,
    )


def _delete_subtree(doc: XmlDocument, victim: int) -> XmlDocument | None:
    if victim == doc.root:
        return None
    doomed = set()
    stack = [victim]
    while stack:
        nid = stack.pop()
        doomed.add(nid)
        stack.extend(doc.nodes[nid].children)
    nodes = {}
    for nid, node in doc.nodes.items():
        if nid in doomed:
            continue
        clone = node.copy()
        clone.children = [c for c in clone.children if c not in doomed]
        nodes[nid] = clone
    return XmlDocument(doc.root, nodes)


def _reroot(doc: XmlDocument, new_root: int) -> XmlDocument:
    """Promote a subtree to be the whole document (ids unchanged)."""
    keep = set()
    stack = [new_root]
    while stack:
        nid = stack.pop()
        keep.add(nid)
        stack.extend(doc.nodes[nid].children)
    nodes = {}
    for nid in keep:
        clone = doc.nodes[nid].copy()
        if nid == new_root:
            clone.parent = None
        nodes[nid] = clone
    return XmlDocument(new_root, nodes)


def _drop_attribute(doc: XmlDocument, owner: int, name: str) -> XmlDocument:
    nodes = {}
    for nid, node in doc.nodes.items():
        clone = node.copy()
        if nid == owner:
            del clone.attributes[name]
        nodes[nid] = clone
    return XmlDocument(doc.root, nodes)


_LITERAL_PALETTE = (Constant(True), Constant(1), Constant("a"))


def _candidates(case: TestCase) -> Iterator[TestCase]:
    """All single-step reductions of the case, smallest-impact steps first."""
    expr = case.expr
    doc = case.document()
    sections = expr.sections

    if len(sections) > 1:
        yield _rebuild(case, doc, XPathExpr(sections[:-1], expr.standard))
        yield _rebuild(case, doc, XPathExpr(sections[1:], expr.standard))

    for si, section in enumerate(sections):
        for pi in range(len(section.predicates)):
            pruned = section.predicates[:pi] + section.predicates[pi + 1 :]
            new_sections = sections[:si] + (Section(section.prefix, pruned),) + sections[si + 1 :]
            yield _rebuild(case, doc, XPathExpr(new_sections, expr.standard))

    for si, section in enumerate(sections):
        for pi, predicate in enumerate(section.predicates):
            for path, node in _node_paths(predicate.body):
                replacements = list(_expr_children(node))
                if not isinstance(node, Constant):
                    replacements.extend(_LITERAL_PALETTE)
                for replacement in replacements:
                    if replacement == node:
                        continue
                    new_body = _replace_at(predicate.body, path, replacement)
                    new_predicates = (
                        section.predicates[:pi]
                        + (Predicate(predicate.kind, new_body),)
                        + section.predicates[pi + 1 :]
                    )
                    new_sections = (
                        sections[:si] + (Section(section.prefix, new_predicates),) + sections[si + 1 :]
                    )
                    yield _rebuild(case, doc, XPathExpr(new_sections, expr.standard))

    for child in doc.nodes[doc.root].children:
        yield _rebuild(case, _reroot(doc, child), expr)

    for nid in doc.document_order():
        smaller = _delete_subtree(doc, nid)
        if smaller is not None:
            yield _rebuild(case, smaller, expr)

    for nid in doc.document_order():
        for name in list(doc.nodes[nid].attributes):
            if name == "id":
                continue
            yield _rebuild(case, _drop_attribute(doc, nid, name), expr)


def reduce_case(case: TestCase, check: ReductionCheck, max_rounds: int = 10_000) -> TestCase:
    """Shrink `case` while `check` keeps holding.

    Greedy first-improvement with an outer fixpoint loop: each accepted step
    strictly decreases the structural measure and never grows the serialized
    text, so the loop terminates; the result admits no further single step.
    """
    if case.expr is None:
        raise ValueError("reduction needs the query AST")
    if not check(case):
        raise ValueError("reduction precondition: the input case must satisfy the check")

    current = case
    for _ in range(max_rounds):
        measure = case_measure(current)
        text_size = len(current.doc_text) + len(current.query_text)
        improved = None
        for candidate in _candidates(current):
            if case_measure(candidate) >= measure:
                continue
            if len(candidate.doc_text) + len(candidate.query_text) > text_size:
                continue
            if check(candidate):
                improved = candidate
                break
        if improved is None:
            return current
        current = improved
    return current
