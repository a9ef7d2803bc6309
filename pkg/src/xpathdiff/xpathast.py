"""Query AST and bit-exact textual rendering.

A query is a nonempty chain of sections; each section is a prefix (`/` or
`//`, an axis, a name test) followed by zero or more predicates. Predicate
bodies are expression trees over a closed function/operator catalog (see
catalog.py). ASTs are immutable; rendering is a pure function and there is
deliberately no parser back from text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Iterator, Union

from .xmldoc import AXES


class XPathStandard(Enum):
    V1_0 = "1.0"
    V3_0 = "3.0"

    def allows(self, other: "XPathStandard") -> bool:
        """True when features of `other` may appear under this standard."""
        return self is XPathStandard.V3_0 or other is XPathStandard.V1_0


# --- expression nodes -------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    value: Union[bool, int, float, str]


@dataclass(frozen=True)
class ContextItem:
    pass


@dataclass(frozen=True)
class AttributeRef:
    name: str | None  # None renders as the wildcard @*


@dataclass(frozen=True)
class ChildPathSubject:
    """A one-step relative path subject: `Book`, or `Book/@name`."""

    tag: str
    attr: str | None = None


@dataclass(frozen=True)
class TextCall:
    pass


@dataclass(frozen=True)
class FunctionCall:
    name: str
    args: tuple["ExprNode", ...] = ()


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "ExprNode"
    rhs: "ExprNode"


@dataclass(frozen=True)
class Unary:
    op: str  # "negate" | "not"
    arg: "ExprNode"


@dataclass(frozen=True)
class RangeTo:
    lhs: "ExprNode"
    rhs: "ExprNode"


ExprNode = Union[
    Constant, ContextItem, AttributeRef, ChildPathSubject, TextCall,
    FunctionCall, Binary, Unary, RangeTo,
]


# --- query structure --------------------------------------------------------

@dataclass(frozen=True)
class SectionPrefix:
    step_kind: str  # "slash" | "double_slash"
    axis: str
    name_test: str | None  # None = wildcard *

    def __post_init__(self):
        if self.step_kind not in ("slash", "double_slash"):
            raise ValueError(f"bad step kind {self.step_kind!r}")
        if self.axis not in AXES:
            raise ValueError(f"bad axis {self.axis!r}")


@dataclass(frozen=True)
class Predicate:
    kind: str  # "boolean" | "positional"
    body: ExprNode


@dataclass(frozen=True)
class Section:
    prefix: SectionPrefix
    predicates: tuple[Predicate, ...] = ()


@dataclass(frozen=True)
class XPathExpr:
    sections: tuple[Section, ...]
    standard: XPathStandard = XPathStandard.V1_0

    def __post_init__(self):
        if not self.sections:
            raise ValueError("a query needs at least one section")


# --- rendering --------------------------------------------------------------

def render_number(value: int | float) -> str:
    """Shortest decimal form without exponent notation (valid in XPath 1.0)."""
    if isinstance(value, int):
        return str(value)
    if math.isnan(value) or math.isinf(value):
        raise ValueError(f"{value} has no XPath literal")
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    text = repr(value)
    if "e" in text or "E" in text:
        text = format(Decimal(text), "f")
    return text


def _render_string(value: str) -> str:
    if '"' not in value:
        return f'"{value}"'
    if "'" not in value:
        return f"'{value}'"
    raise ValueError("string mixes both quote kinds; not expressible as an XPath literal")


_BARE_OPERANDS = (Constant, ContextItem, AttributeRef, FunctionCall)


def _operand(node: ExprNode) -> str:
    """Operands are parenthesized unless self-delimiting (safe over-parens)."""
    text = render_expr(node)
    if isinstance(node, _BARE_OPERANDS):
        return text
    return f"({text})"


def render_expr(node: ExprNode) -> str:
    if isinstance(node, Constant):
        if isinstance(node.value, bool):
            return "true()" if node.value else "false()"
        if isinstance(node.value, str):
            return _render_string(node.value)
        return render_number(node.value)
    if isinstance(node, ContextItem):
        return "."
    if isinstance(node, AttributeRef):
        return f"@{node.name}" if node.name is not None else "@*"
    if isinstance(node, ChildPathSubject):
        if node.attr is None:
            return node.tag
        return f"{node.tag}/@{node.attr}"
    if isinstance(node, TextCall):
        return "text()"
    if isinstance(node, FunctionCall):
        args = ", ".join(render_expr(a) for a in node.args)
        return f"{node.name}({args})"
    if isinstance(node, Binary):
        return f"{_operand(node.lhs)} {node.op} {_operand(node.rhs)}"
    if isinstance(node, Unary):
        if node.op == "not":
            return f"not({render_expr(node.arg)})"
        return f"-{_operand(node.arg)}"
    if isinstance(node, RangeTo):
        return f"{_operand(node.lhs)} to {_operand(node.rhs)}"
    raise TypeError(f"not an ExprNode: {node!r}")


def render_prefix(prefix: SectionPrefix) -> str:
    step = "/" if prefix.step_kind == "slash" else "//"
    name = prefix.name_test if prefix.name_test is not None else "*"
    axis = "" if prefix.axis == "child" else f"{prefix.axis}::"
    return f"{step}{axis}{name}"


def render(expr: XPathExpr) -> str:
    """Deterministic query text; `child::` is left implicit, `//` unexpanded."""
    parts = []
    for section in expr.sections:
        parts.append(render_prefix(section.prefix))
        for pred in section.predicates:
            parts.append(f"[{render_expr(pred.body)}]")
    return "".join(parts)


# --- structural helpers -----------------------------------------------------

def walk_expr(node: ExprNode) -> Iterator[ExprNode]:
    yield node
    if isinstance(node, FunctionCall):
        for arg in node.args:
            yield from walk_expr(arg)
    elif isinstance(node, Binary):
        yield from walk_expr(node.lhs)
        yield from walk_expr(node.rhs)
    elif isinstance(node, Unary):
        yield from walk_expr(node.arg)
    elif isinstance(node, RangeTo):
        yield from walk_expr(node.lhs)
        yield from walk_expr(node.rhs)


def expr_depth(node: ExprNode) -> int:
    if isinstance(node, FunctionCall):
        return 1 + max((expr_depth(a) for a in node.args), default=0)
    if isinstance(node, Binary):
        return 1 + max(expr_depth(node.lhs), expr_depth(node.rhs))
    if isinstance(node, Unary):
        return 1 + expr_depth(node.arg)
    if isinstance(node, RangeTo):
        return 1 + max(expr_depth(node.lhs), expr_depth(node.rhs))
    return 1


SUBJECT_TYPES = (ContextItem, AttributeRef, ChildPathSubject, TextCall)


def count_subjects(node: ExprNode) -> int:
    return sum(1 for n in walk_expr(node) if isinstance(n, SUBJECT_TYPES))


def operator_names(expr: XPathExpr) -> list[str]:
    """Sorted multiset of function/operator names, constants erased."""
    names = []
    for section in expr.sections:
        for pred in section.predicates:
            for node in walk_expr(pred.body):
                if isinstance(node, FunctionCall):
                    names.append(node.name)
                elif isinstance(node, Binary):
                    names.append(node.op)
                elif isinstance(node, Unary):
                    names.append(node.op)
                elif isinstance(node, RangeTo):
                    names.append("to")
    return sorted(names)


def validate_expr(
    expr: XPathExpr,
    max_sections: int = 7,
    max_depth: int = 10,
    max_subjects: int = 10,
) -> None:
    """Raise ValueError on catalog, standard-gating, or bound violations."""
    from . import catalog

    if not 1 <= len(expr.sections) <= max_sections:
        raise ValueError(f"section count {len(expr.sections)} out of bounds")
    for section in expr.sections:
        for pred in section.predicates:
            if expr_depth(pred.body) > max_depth:
                raise ValueError("predicate tree too deep")
            if count_subjects(pred.body) > max_subjects:
                raise ValueError("too many subjects in one predicate")
            for node in walk_expr(pred.body):
                name = None
                arity = None
                if isinstance(node, FunctionCall):
                    name, arity = node.name, len(node.args)
                elif isinstance(node, Binary):
                    name, arity = node.op, 2
                elif isinstance(node, RangeTo):
                    name, arity = "to", 2
                if name is None:
                    continue
                entry = catalog.entry(name)
                if entry is None:
                    raise ValueError(f"{name!r} is not in the catalog")
                if not expr.standard.allows(entry.min_standard):
                    raise ValueError(f"{name} needs {entry.min_standard}, query is {expr.standard}")
                lo, hi = entry.arity
                if arity < lo or (hi is not None and arity > hi):
                    raise ValueError(f"{name} arity {arity} outside [{lo}, {hi}]")
