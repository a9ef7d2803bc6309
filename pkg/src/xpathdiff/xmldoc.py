"""In-memory model for the generated XML subset.

Documents are rooted ordered trees of element nodes. Every element carries a
reserved integer ``id`` attribute that doubles as its node id, which is how
engine outputs are matched up across implementations. Attribute values and
text content are typed (integer or string). Namespaces, mixed content,
comments, processing instructions and DTDs are out of scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from xml.etree import ElementTree
from xml.sax.saxutils import escape

AXES = (
    "self",
    "child",
    "descendant",
    "descendant-or-self",
    "parent",
    "ancestor",
    "ancestor-or-self",
    "following",
    "following-sibling",
    "preceding",
    "preceding-sibling",
)

# Reverse axes yield results in reverse document order; everything else is
# forward (document order).
REVERSE_AXES = frozenset(
    {"parent", "ancestor", "ancestor-or-self", "preceding", "preceding-sibling"}
)

_INTEGER_RE = re.compile(r"-?[1-9][0-9]*|0")
_INT64_MIN = -(2**63)
_INT64_MAX = 2**63 - 1


class XmlModelError(Exception):
    """Document structure violates a model invariant."""


class ParseError(XmlModelError):
    """Input text is outside the supported XML subset."""

    def __init__(self, message: str, position: str | None = None):
        self.position = position
        if position:
            message = f"{message} (at {position})"
        super().__init__(message)


@dataclass(frozen=True)
class TypedValue:
    """Attribute or text payload: a signed 64-bit integer or a plain string."""

    kind: str  # "integer" | "string"
    value: int | str

    def __post_init__(self):
        if self.kind == "integer":
            if not isinstance(self.value, int):
                raise XmlModelError(f"integer TypedValue holds {type(self.value).__name__}")
            if not _INT64_MIN <= self.value <= _INT64_MAX:
                raise XmlModelError(f"integer out of 64-bit range: {self.value}")
        elif self.kind == "string":
            if not isinstance(self.value, str):
                raise XmlModelError(f"string TypedValue holds {type(self.value).__name__}")
        else:
            raise XmlModelError(f"unknown TypedValue kind: {self.kind!r}")

    def text(self) -> str:
        return str(self.value)

    @staticmethod
    def from_text(text: str) -> "TypedValue":
        """Infer the kind from the lexical shape (canonical decimals only)."""
        if _INTEGER_RE.fullmatch(text) and _INT64_MIN <= int(text) <= _INT64_MAX:
            return TypedValue("integer", int(text))
        return TypedValue("string", text)


class ElementNode:
    """One element: tag, ordered typed attributes, optional text, child links.

    The ``id`` attribute is reserved; it is always present and always equals
    the node id. ``parent`` is None exactly for the root.
    """

    __slots__ = ("id", "tag", "attributes", "text", "children", "parent")

    def __init__(
        self,
        id: int,
        tag: str,
        attributes: dict[str, TypedValue] | None = None,
        text: TypedValue | None = None,
        children: list[int] | None = None,
        parent: int | None = None,
    ):
        self.id = id
        self.tag = tag
        self.attributes = {"id": TypedValue("integer", id)}
        for name, value in (attributes or {}).items():
            if name == "id":
                if value.kind != "integer" or value.value != id:
                    raise XmlModelError(f"id attribute {value!r} does not match node id {id}")
                continue
            self.attributes[name] = value
        self.text = text
        self.children = list(children or [])
        self.parent = parent

    def copy(self) -> "ElementNode":
        clone = ElementNode(self.id, self.tag, text=self.text, parent=self.parent)
        clone.attributes = dict(self.attributes)
        clone.children = list(self.children)
        return clone

    def __eq__(self, other):
        if not isinstance(other, ElementNode):
            return NotImplemented
        return (
            self.id == other.id
            and self.tag == other.tag
            and list(self.attributes.items()) == list(other.attributes.items())
            and self.text == other.text
            and self.children == other.children
            and self.parent == other.parent
        )

    def __repr__(self):
        return f"ElementNode(id={self.id}, tag={self.tag!r})"


class XmlDocument:
    """A validated element tree with a total document order (pre-order)."""

    def __init__(self, root: int, nodes: dict[int, ElementNode]):
        self.root = root
        self.nodes = nodes
        self._validate()
        self._order = self._preorder()
        self._pre = {nid: i for i, nid in enumerate(self._order)}

    def _validate(self):
        if self.root not in self.nodes:
            raise XmlModelError(f"root id {self.root} not among nodes")
        seen: set[int] = set()
        stack = [self.root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                raise XmlModelError(f"node {nid} reachable twice (cycle or shared child)")
            seen.add(nid)
            node = self.nodes.get(nid)
            if node is None:
                raise XmlModelError(f"dangling child reference {nid}")
            if node.id != nid:
                raise XmlModelError(f"node keyed {nid} carries id {node.id}")
            if nid <= 0:
                raise XmlModelError(f"node id must be positive, got {nid}")
            id_attr = node.attributes.get("id")
            if id_attr != TypedValue("integer", nid):
                raise XmlModelError(f"node {nid} id attribute mismatch: {id_attr!r}")
            if node.text is not None and node.children:
                raise XmlModelError(f"node {nid} mixes text content with children")
            for child in node.children:
                if child not in self.nodes:
                    raise XmlModelError(f"node {nid} references missing child {child}")
                if self.nodes[child].parent != nid:
                    raise XmlModelError(f"child {child} parent link != {nid}")
                stack.append(child)
        if self.nodes[self.root].parent is not None:
            raise XmlModelError("root must have no parent")
        if seen != set(self.nodes):
            raise XmlModelError(f"unreachable nodes: {sorted(set(self.nodes) - seen)}")

    def _preorder(self) -> list[int]:
        order: list[int] = []
        stack = [self.root]
        while stack:
            nid = stack.pop()
            order.append(nid)
            stack.extend(reversed(self.nodes[nid].children))
        return order

    def document_order(self) -> list[int]:
        return list(self._order)

    def pre_index(self, nid: int) -> int:
        return self._pre[nid]

    def node(self, nid: int) -> ElementNode:
        return self.nodes[nid]

    def string_value(self, nid: int) -> str:
        """Concatenated text content of the node's subtree, document order."""
        parts = []
        for did in navigate_axis(self, nid, "descendant-or-self"):
            text = self.nodes[did].text
            if text is not None:
                parts.append(text.text())
        return "".join(parts)

    def __eq__(self, other):
        if not isinstance(other, XmlDocument):
            return NotImplemented
        return self.root == other.root and self.nodes == other.nodes

    def __repr__(self):
        return f"XmlDocument(root={self.root}, nodes={len(self.nodes)})"


def navigate_axis(doc: XmlDocument, context: int, axis: str) -> list[int]:
    """Nodes reached from ``context`` along ``axis``, in canonical axis order.

    Forward axes come back in document order, reverse axes in reverse
    document order, never with duplicates. Axis results are computed by
    pointer walks over the tree; no document-order index is consulted (the
    set-algebra evaluator derives the same axes independently from index
    intervals).
    """
    if context not in doc.nodes:
        raise XmlModelError(f"unknown node id {context}")
    node = doc.nodes[context]
    if axis == "self":
        return [context]
    if axis == "child":
        return list(node.children)
    if axis == "parent":
        return [] if node.parent is None else [node.parent]
    if axis == "descendant":
        out: list[int] = []
        stack = list(reversed(node.children))
        while stack:
            nid = stack.pop()
            out.append(nid)
            stack.extend(reversed(doc.nodes[nid].children))
        return out
    if axis == "descendant-or-self":
        return [context] + navigate_axis(doc, context, "descendant")
    if axis == "ancestor":
        out = []
        parent = node.parent
        while parent is not None:
            out.append(parent)
            parent = doc.nodes[parent].parent
        return out
    if axis == "ancestor-or-self":
        return [context] + navigate_axis(doc, context, "ancestor")
    if axis == "following-sibling":
        if node.parent is None:
            return []
        siblings = doc.nodes[node.parent].children
        return siblings[siblings.index(context) + 1 :]
    if axis == "preceding-sibling":
        if node.parent is None:
            return []
        siblings = doc.nodes[node.parent].children
        return list(reversed(siblings[: siblings.index(context)]))
    if axis == "following":
        # Subtrees of later siblings of self and of each ancestor; the
        # blocks closest to the context come first in document order.
        out = []
        cursor = context
        while doc.nodes[cursor].parent is not None:
            for sib in navigate_axis(doc, cursor, "following-sibling"):
                out.extend(navigate_axis(doc, sib, "descendant-or-self"))
            cursor = doc.nodes[cursor].parent
        return out
    if axis == "preceding":
        # Earlier siblings' subtrees of self and ancestors; assembled in
        # document order (outermost blocks first), returned reversed.
        blocks = []
        cursor = context
        while doc.nodes[cursor].parent is not None:
            level = []
            siblings = doc.nodes[doc.nodes[cursor].parent].children
            for sib in siblings[: siblings.index(cursor)]:
                level.extend(navigate_axis(doc, sib, "descendant-or-self"))
            blocks.append(level)
            cursor = doc.nodes[cursor].parent
        doc_order = [nid for level in reversed(blocks) for nid in level]
        return list(reversed(doc_order))
    raise XmlModelError(f"unknown axis {axis!r}")


def document_order_dedup(doc: XmlDocument, nodes: list[int]) -> list[int]:
    """Sort ascending by document order and drop duplicates (path-operator law)."""
    return sorted(set(nodes), key=doc.pre_index)


def _escape_attr(value: str) -> str:
    return escape(value, {'"': "&quot;"})


def serialize(doc: XmlDocument, declaration: bool = False) -> str:
    """Well-formed single-line XML text; attributes in stored order."""
    out = []
    if declaration:
        out.append('<?xml version="1.0"?>')

    def emit(nid: int):
        node = doc.nodes[nid]
        attrs = "".join(
            f' {name}="{_escape_attr(value.text())}"' for name, value in node.attributes.items()
        )
        if node.text is None and not node.children:
            out.append(f"<{node.tag}{attrs}/>")
            return
        out.append(f"<{node.tag}{attrs}>")
        if node.text is not None:
            out.append(escape(node.text.text()))
        for child in node.children:
            emit(child)
        out.append(f"</{node.tag}>")

    emit(doc.root)
    return "".join(out)


def parse(text: str) -> XmlDocument:
    """Parse text from the generated subset back into a document.

    Attribute and text kinds are inferred from lexical shape: canonical
    decimal integers (no leading zeros, no ``-0``) within 64-bit range become
    integer-typed, everything else is a string. ``id`` attributes are adopted
    as node ids and must be unique positive integers.
    """
    try:
        root_elem = ElementTree.fromstring(text)
    except ElementTree.ParseError as exc:
        raise ParseError(f"malformed XML: {exc.msg if hasattr(exc, 'msg') else exc}",
                         position=str(getattr(exc, "position", None))) from exc

    nodes: dict[int, ElementNode] = {}

    def walk(elem, parent_id: int | None) -> int:
        if "{" in elem.tag or ":" in elem.tag:
            raise ParseError(f"namespaced tag unsupported: {elem.tag!r}")
        raw_id = elem.get("id")
        if raw_id is None:
            raise ParseError(f"element <{elem.tag}> missing id attribute")
        if not raw_id.isdigit() or int(raw_id) <= 0:
            raise ParseError(f"element <{elem.tag}> id not a positive integer: {raw_id!r}")
        nid = int(raw_id)
        if nid in nodes:
            raise ParseError(f"duplicate id {nid}")
        attrs: dict[str, TypedValue] = {}
        for name, value in elem.attrib.items():
            if "{" in name or ":" in name:
                raise ParseError(f"namespaced attribute unsupported: {name!r}")
            if name == "id":
                continue
            attrs[name] = TypedValue.from_text(value)
        has_children = len(elem) > 0
        text = elem.text or ""
        if has_children:
            if text.strip():
                raise ParseError(f"mixed content under element id {nid}")
            for child in elem:
                if (child.tail or "").strip():
                    raise ParseError(f"mixed content under element id {nid}")
            node_text = None
        else:
            node_text = TypedValue.from_text(text) if text != "" else None
        node = ElementNode(nid, elem.tag, attrs, text=node_text, parent=parent_id)
        nodes[nid] = node
        for child in elem:
            node.children.append(walk(child, nid))
        return nid

    try:
        root_id = walk(root_elem, None)
        return XmlDocument(root_id, nodes)
    except ParseError:
        raise
    except XmlModelError as exc:
        raise ParseError(str(exc)) from exc
