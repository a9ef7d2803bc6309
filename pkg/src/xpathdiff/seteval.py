"""Reference evaluator, strategy B: index-interval set algebra.

An independent route to the same observable contract as strategy A. The
document is flattened once into a pre-order array with subtree sizes; every
axis then becomes interval arithmetic over that array (descendants are a
contiguous slice, ancestors are the nodes whose interval contains the
context, the child axis is a parent-array scan). Steps materialize whole
index batches per origin and predicates filter those batches positionally.
"""

from __future__ import annotations

from . import runtime
from .values import ElemItem, Value
from .xmldoc import XmlDocument, REVERSE_AXES
from .xpathast import Predicate, Section, SectionPrefix, XPathExpr, XPathStandard

DOC_ORIGIN = 0


class DocIndex:
    """Pre-order flattening with interval bookkeeping."""

    def __init__(self, doc: XmlDocument):
        self.doc = doc
        order: list[int] = []
        stack = [doc.root]
        while stack:
            nid = stack.pop()
            order.append(nid)
            stack.extend(reversed(doc.nodes[nid].children))
        self.order = order
        self.pre = {nid: i for i, nid in enumerate(order)}
        self.parent = {nid: doc.nodes[nid].parent for nid in order}
        # Subtree sizes: children appear after their parent in pre-order, so
        # a reverse sweep accumulates child sizes before their parent's.
        size = {nid: 1 for nid in order}
        for nid in reversed(order):
            parent = self.parent[nid]
            if parent is not None:
                size[parent] += size[nid]
        self.size = size

    def interval(self, nid: int) -> tuple[int, int]:
        start = self.pre[nid]
        return start, start + self.size[nid]

    def axis(self, origin: int, axis: str) -> list[int]:
        order = self.order
        if origin == DOC_ORIGIN:
            if axis == "child":
                return [order[0]]
            if axis in ("descendant", "descendant-or-self"):
                return list(order)
            return []
        start, end = self.interval(origin)
        if axis == "self":
            return [origin]
        if axis == "child":
            return [nid for nid in order[start + 1 : end] if self.parent[nid] == origin]
        if axis == "descendant":
            return order[start + 1 : end]
        if axis == "descendant-or-self":
            return order[start:end]
        if axis == "parent":
            parent = self.parent[origin]
            return [] if parent is None else [parent]
        if axis in ("ancestor", "ancestor-or-self"):
            found = [
                nid
                for nid in order[:start]
                if self.pre[nid] < start < self.pre[nid] + self.size[nid]
            ]
            found.reverse()  # nearest ancestor first
            if axis == "ancestor-or-self":
                return [origin] + found
            return found
        if axis == "following":
            return order[end:]
        if axis == "preceding":
            return [
                nid
                for nid in reversed(order[:start])
                if self.pre[nid] + self.size[nid] <= start
            ]
        if axis == "following-sibling":
            parent = self.parent[origin]
            return [nid for nid in order[end:] if self.parent[nid] == parent]
        if axis == "preceding-sibling":
            parent = self.parent[origin]
            return [nid for nid in reversed(order[:start]) if self.parent[nid] == parent]
        raise ValueError(f"unknown axis {axis!r}")


_INDEX_CACHE: dict[int, tuple[XmlDocument, DocIndex]] = {}


def doc_index(doc: XmlDocument) -> DocIndex:
    cached = _INDEX_CACHE.get(id(doc))
    if cached is not None and cached[0] is doc:
        return cached[1]
    index = DocIndex(doc)
    if len(_INDEX_CACHE) > 64:
        _INDEX_CACHE.clear()
    _INDEX_CACHE[id(doc)] = (doc, index)
    return index


def _child_axis(doc: XmlDocument, nid: int) -> list[int]:
    return doc_index(doc).axis(nid, "child")


def _step_batches(
    index: DocIndex, base: list[int], prefix: SectionPrefix
) -> list[tuple[int, list[int]]]:
    if prefix.step_kind == "double_slash":
        origins: list[int] = []
        seen: set[int] = set()
        for nid in base:
            closure = (
                [DOC_ORIGIN] + list(index.order)
                if nid == DOC_ORIGIN
                else index.axis(nid, "descendant-or-self")
            )
            for member in closure:
                if member not in seen:
                    seen.add(member)
                    origins.append(member)
    else:
        origins = list(base)
    batches = []
    nodes_by_id = index.doc.nodes
    for origin in origins:
        step = index.axis(origin, prefix.axis)
        if prefix.name_test is not None:
            step = [nid for nid in step if nodes_by_id[nid].tag == prefix.name_test]
        batches.append((origin, step))
    return batches


def _filter_batch(
    index: DocIndex, batch: list[int], predicate: Predicate, standard: XPathStandard
) -> list[int]:
    size = len(batch)
    kept = []
    for position, nid in enumerate(batch, start=1):
        ctx = runtime.EvalContext(index.doc, nid, position, size, standard, _child_axis)
        if runtime.predicate_keeps(ctx, predicate.body):
            kept.append(nid)
    return kept


def _merge(index: DocIndex, batches: list[tuple[int, list[int]]]) -> list[int]:
    collected: set[int] = set()
    for _, batch in batches:
        collected.update(batch)
    return sorted(collected, key=index.pre.__getitem__)


def evaluate_strategy_b(doc: XmlDocument, expr: XPathExpr) -> Value:
    """Full query evaluation, observably identical to strategy A."""
    index = doc_index(doc)
    base = [DOC_ORIGIN]
    for section in expr.sections:
        batches = _step_batches(index, base, section.prefix)
        for predicate in section.predicates:
            batches = [
                (origin, _filter_batch(index, batch, predicate, expr.standard))
                for origin, batch in batches
            ]
        base = _merge(index, batches)
        if not base:
            return []
    return [ElemItem(nid) for nid in base]


def evaluate_ids(doc: XmlDocument, expr: XPathExpr) -> list[int]:
    return [item.node for item in evaluate_strategy_b(doc, expr)]
