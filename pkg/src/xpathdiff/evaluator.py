"""Reference evaluator, strategy A: per-node recursive pipeline.

Sections are applied left to right. Each axis step runs per origin node via
pointer-walking axis navigation, predicates filter each origin's batch with
that batch's own positions (reverse axes count in reverse document order),
and the path operator merges batches in document order without duplicates.
Queries start from a virtual document origin whose only child is the root
element, so `/Books` selects the root and `//*` selects every element.
"""

from __future__ import annotations

from . import runtime
from .values import ElemItem, Value
from .xmldoc import XmlDocument, document_order_dedup, navigate_axis
from .xpathast import Predicate, Section, SectionPrefix, XPathExpr, XPathStandard

# Sentinel origin for the virtual document node addressed by a leading `/`.
DOC_ORIGIN = 0


def _child_axis(doc: XmlDocument, nid: int) -> list[int]:
    return navigate_axis(doc, nid, "child")


def axis_from(doc: XmlDocument, origin: int, axis: str) -> list[int]:
    """Axis step for real nodes and for the virtual document origin."""
    if origin != DOC_ORIGIN:
        return navigate_axis(doc, origin, axis)
    if axis == "child":
        return [doc.root]
    if axis in ("descendant", "descendant-or-self"):
        # The document node itself can never match an element name test, so
        # both descendant axes surface the same element list.
        return doc.document_order()
    return []


def make_context(
    doc: XmlDocument, node: int, position: int, size: int, standard: XPathStandard
) -> runtime.EvalContext:
    return runtime.EvalContext(doc, node, position, size, standard, _child_axis)


def evaluate_subexpr(ctx: runtime.EvalContext, node) -> Value:
    """Expression evaluation with full context; the generator's value probe."""
    return runtime.evaluate_expr(ctx, node)


def step_batches(
    doc: XmlDocument,
    base: list[int],
    prefix: SectionPrefix,
) -> list[tuple[int, list[int]]]:
    """Axis-step results per origin, before predicates.

    For `//` the origins are the descendant-or-self closure of the incoming
    sequence, mirroring the expansion to /descendant-or-self::node()/step;
    predicates later apply within each origin's batch separately. Because
    subtree blocks in pre-order either nest or stay disjoint, the deduped
    closure of a document-ordered base is itself document-ordered.
    """
    if prefix.step_kind == "double_slash":
        origins: list[int] = []
        seen: set[int] = set()
        for nid in base:
            closure = (
                [DOC_ORIGIN] + doc.document_order()
                if nid == DOC_ORIGIN
                else navigate_axis(doc, nid, "descendant-or-self")
            )
            for member in closure:
                if member not in seen:
                    seen.add(member)
                    origins.append(member)
    else:
        origins = list(base)

    batches = []
    for origin in origins:
        nodes = axis_from(doc, origin, prefix.axis)
        if prefix.name_test is not None:
            nodes = [nid for nid in nodes if doc.nodes[nid].tag == prefix.name_test]
        batches.append((origin, nodes))
    return batches


def filter_batch(
    doc: XmlDocument,
    batch: list[int],
    predicate: Predicate,
    standard: XPathStandard,
) -> list[int]:
    """One predicate over one batch, positions counted in batch order."""
    size = len(batch)
    kept = []
    for position, nid in enumerate(batch, start=1):
        ctx = make_context(doc, nid, position, size, standard)
        if runtime.predicate_keeps(ctx, predicate.body):
            kept.append(nid)
    return kept


def merge_batches(doc: XmlDocument, batches: list[tuple[int, list[int]]]) -> list[int]:
    merged: list[int] = []
    for _, batch in batches:
        merged.extend(batch)
    return document_order_dedup(doc, merged)


def eval_section(
    doc: XmlDocument, base: list[int], section: Section, standard: XPathStandard
) -> list[int]:
    batches = step_batches(doc, base, section.prefix)
    for predicate in section.predicates:
        batches = [
            (origin, filter_batch(doc, batch, predicate, standard))
            for origin, batch in batches
        ]
    return merge_batches(doc, batches)


def eval_sections(
    doc: XmlDocument, sections, standard: XPathStandard
) -> list[int]:
    base = [DOC_ORIGIN]
    for section in sections:
        base = eval_section(doc, base, section, standard)
        if not base:
            return []
    return base


def evaluate(doc: XmlDocument, expr: XPathExpr) -> Value:
    """Full query evaluation; raises EvalError subclasses on failure."""
    ids = eval_sections(doc, expr.sections, expr.standard)
    return [ElemItem(nid) for nid in ids]


def evaluate_ids(doc: XmlDocument, expr: XPathExpr) -> list[int]:
    return eval_sections(doc, expr.sections, expr.standard)
