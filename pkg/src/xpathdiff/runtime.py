"""Shared predicate-expression semantics.

Both reference evaluation strategies delegate expression trees here; they
differ only in how they resolve axes and drive section pipelines, so each
context carries a `child_axis` callback supplied by its strategy. Standard
gating, implicit-context defaults and per-function coercion rules live in one
place to keep the two engines' scalar behavior identical by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import catalog
from .values import (
    AttrItem,
    BoolItem,
    DynamicError,
    ElemItem,
    EvalError,
    IntItem,
    Item,
    NumItem,
    StrItem,
    TypeMismatch,
    Unsupported,
    Value,
    _int_guard,
    arithmetic,
    atomize,
    cast_untyped_to_double,
    cast_untyped_to_integer,
    compare_general,
    effective_boolean,
    is_node_item,
    item_to_number,
    negate,
    number_to_string,
    parse_number,
    round_half_up,
    string_value_of,
    value_to_number_v1,
    value_to_string_v1,
)
from .xmldoc import XmlDocument
from .xpathast import (
    AttributeRef,
    Binary,
    ChildPathSubject,
    Constant,
    ContextItem,
    ExprNode,
    FunctionCall,
    RangeTo,
    TextCall,
    Unary,
    XPathStandard,
)

MAX_RANGE_LENGTH = 100_000


@dataclass
class EvalContext:
    doc: XmlDocument
    node: int  # context element node id
    position: int  # 1-based
    size: int
    standard: XPathStandard
    child_axis: Callable[[XmlDocument, int], list[int]]

    def __post_init__(self):
        if not 1 <= self.position <= max(self.size, 1):
            raise ValueError(f"context position {self.position} outside 1..{self.size}")


def _is_v3(ctx: EvalContext) -> bool:
    return ctx.standard is XPathStandard.V3_0


def _attr_items(ctx: EvalContext, nid: int, name: str | None) -> Value:
    attrs = ctx.doc.nodes[nid].attributes
    out = []
    for index, (attr_name, attr_value) in enumerate(attrs.items()):
        if name is None or attr_name == name:
            out.append(AttrItem(nid, index, attr_name, attr_value.text()))
    return out


def evaluate_expr(ctx: EvalContext, node: ExprNode) -> Value:
    if isinstance(node, Constant):
        value = node.value
        if isinstance(value, bool):
            return [BoolItem(value)]
        if isinstance(value, int):
            return [IntItem(value)] if _is_v3(ctx) else [NumItem(float(value))]
        if isinstance(value, float):
            return [NumItem(value)]
        if isinstance(value, str):
            return [StrItem(value)]
        raise TypeError(f"bad constant payload: {value!r}")
    if isinstance(node, ContextItem):
        return [ElemItem(ctx.node)]
    if isinstance(node, AttributeRef):
        return _attr_items(ctx, ctx.node, node.name)
    if isinstance(node, ChildPathSubject):
        children = [
            cid
            for cid in ctx.child_axis(ctx.doc, ctx.node)
            if ctx.doc.nodes[cid].tag == node.tag
        ]
        if node.attr is None:
            return [ElemItem(cid) for cid in children]
        out: Value = []
        for cid in children:
            out.extend(_attr_items(ctx, cid, node.attr))
        return out
    if isinstance(node, TextCall):
        text = ctx.doc.nodes[ctx.node].text
        return [] if text is None else [StrItem(text.text(), untyped=True)]
    if isinstance(node, Unary):
        if node.op == "not":
            return [BoolItem(not effective_boolean(ctx.doc, evaluate_expr(ctx, node.arg), ctx.standard))]
        if node.op == "negate":
            return negate(ctx.doc, evaluate_expr(ctx, node.arg), ctx.standard)
        raise TypeError(f"bad unary op {node.op!r}")
    if isinstance(node, Binary):
        return _evaluate_binary(ctx, node)
    if isinstance(node, RangeTo):
        return _evaluate_range(ctx, node)
    if isinstance(node, FunctionCall):
        return _evaluate_function(ctx, node)
    raise TypeError(f"not an ExprNode: {node!r}")


def _evaluate_binary(ctx: EvalContext, node: Binary) -> Value:
    op = node.op
    if op in ("and", "or"):
        left = effective_boolean(ctx.doc, evaluate_expr(ctx, node.lhs), ctx.standard)
        if op == "and" and not left:
            return [BoolItem(False)]
        if op == "or" and left:
            return [BoolItem(True)]
        right = effective_boolean(ctx.doc, evaluate_expr(ctx, node.rhs), ctx.standard)
        return [BoolItem(right)]
    if op in catalog.COMPARISON_OPS:
        lhs = evaluate_expr(ctx, node.lhs)
        rhs = evaluate_expr(ctx, node.rhs)
        return [BoolItem(compare_general(ctx.doc, lhs, rhs, op, ctx.standard))]
    if op in catalog.ARITHMETIC_OPS:
        lhs = evaluate_expr(ctx, node.lhs)
        rhs = evaluate_expr(ctx, node.rhs)
        return arithmetic(ctx.doc, op, lhs, rhs, ctx.standard)
    raise TypeError(f"bad binary op {op!r}")


def _evaluate_range(ctx: EvalContext, node: RangeTo) -> Value:
    if not _is_v3(ctx):
        raise Unsupported("the `to` range operator needs XPath 3.0")

    def bound(expr: ExprNode) -> int | None:
        atoms = atomize(ctx.doc, evaluate_expr(ctx, expr))
        if not atoms:
            return None
        if len(atoms) > 1:
            raise TypeMismatch("range bound must be a single item")
        item = atoms[0]
        if isinstance(item, IntItem):
            return item.value
        if isinstance(item, StrItem) and item.untyped:
            return cast_untyped_to_integer(item.value)
        raise TypeMismatch("range bounds must be integers")

    lo = bound(node.lhs)
    hi = bound(node.rhs)
    if lo is None or hi is None or lo > hi:
        return []
    if hi - lo + 1 > MAX_RANGE_LENGTH:
        raise DynamicError(f"range {lo} to {hi} exceeds {MAX_RANGE_LENGTH} items")
    return [IntItem(i) for i in range(lo, hi + 1)]


# --- function library -------------------------------------------------------

def _context_value(ctx: EvalContext) -> Value:
    return [ElemItem(ctx.node)]


def _arg_or_context(ctx: EvalContext, args: list[Value]) -> Value:
    return args[0] if args else _context_value(ctx)


def _string_arg(ctx: EvalContext, value: Value) -> str:
    """Coerce one argument to a string per the active standard."""
    if not _is_v3(ctx):
        return value_to_string_v1(ctx.doc, value)
    atoms = atomize(ctx.doc, value)
    if not atoms:
        return ""
    if len(atoms) > 1:
        raise TypeMismatch("expected at most one string item")
    item = atoms[0]
    if isinstance(item, StrItem):
        return item.value
    raise TypeMismatch(f"expected a string, got {type(item).__name__}")


def _numeric_arg(ctx: EvalContext, value: Value) -> float:
    if not _is_v3(ctx):
        return value_to_number_v1(ctx.doc, value)
    atoms = atomize(ctx.doc, value)
    if len(atoms) != 1:
        raise TypeMismatch("expected exactly one numeric item")
    item = atoms[0]
    if isinstance(item, NumItem):
        return item.value
    if isinstance(item, IntItem):
        return float(item.value)
    if isinstance(item, StrItem) and item.untyped:
        return cast_untyped_to_double(item.value)
    raise TypeMismatch(f"expected a number, got {type(item).__name__}")


def _single_node_arg(ctx: EvalContext, value: Value) -> Item | None:
    """3.0 `node()?` argument: zero or one node."""
    if not value:
        return None
    if len(value) > 1:
        raise TypeMismatch("expected at most one node")
    if not is_node_item(value[0]):
        raise TypeMismatch("expected a node")
    return value[0]


def _number_result(ctx: EvalContext, value: float) -> Value:
    return [NumItem(value)]


def _count_result(ctx: EvalContext, n: int) -> Value:
    return [IntItem(n)] if _is_v3(ctx) else [NumItem(float(n))]


def _floor_safe(value: float) -> float:
    if math.isnan(value) or math.isinf(value):
        return value
    return float(math.floor(value))


def _ceiling_safe(value: float) -> float:
    if math.isnan(value) or math.isinf(value):
        return value
    return float(math.ceil(value))


def _unary_numeric(ctx: EvalContext, value: Value, int_op, float_op) -> Value:
    """floor/ceiling/round/abs skeleton with 3.0 empty propagation.

    float_op must tolerate NaN and infinities itself.
    """
    if not _is_v3(ctx):
        return [NumItem(float(float_op(value_to_number_v1(ctx.doc, value))))]
    atoms = atomize(ctx.doc, value)
    if not atoms:
        return []
    if len(atoms) > 1:
        raise TypeMismatch("expected at most one numeric item")
    item = atoms[0]
    if isinstance(item, IntItem):
        return [IntItem(int_op(item.value))]
    if isinstance(item, NumItem):
        return [NumItem(float(float_op(item.value)))]
    if isinstance(item, StrItem) and item.untyped:
        return [NumItem(float(float_op(cast_untyped_to_double(item.value))))]
    raise TypeMismatch(f"expected a number, got {type(item).__name__}")


def _fn_count(ctx: EvalContext, args: list[Value]) -> Value:
    value = args[0]
    if not _is_v3(ctx) and not all(is_node_item(it) for it in value):
        raise TypeMismatch("1.0 count() needs a node-set")
    return _count_result(ctx, len(value))


def _fn_not(ctx: EvalContext, args: list[Value]) -> Value:
    return [BoolItem(not effective_boolean(ctx.doc, args[0], ctx.standard))]


def _fn_boolean(ctx: EvalContext, args: list[Value]) -> Value:
    return [BoolItem(effective_boolean(ctx.doc, args[0], ctx.standard))]


def _fn_number(ctx: EvalContext, args: list[Value]) -> Value:
    value = _arg_or_context(ctx, args)
    if not _is_v3(ctx):
        return [NumItem(value_to_number_v1(ctx.doc, value))]
    atoms = atomize(ctx.doc, value)
    if not atoms:
        return [NumItem(math.nan)]
    if len(atoms) > 1:
        raise TypeMismatch("number() needs at most one item")
    item = atoms[0]
    if isinstance(item, (NumItem, IntItem, BoolItem)):
        return [NumItem(item_to_number(ctx.doc, item, ctx.standard))]
    if isinstance(item, StrItem):
        return [NumItem(parse_number(item.value, XPathStandard.V3_0))]
    raise TypeMismatch("number() argument not castable")


def _fn_string(ctx: EvalContext, args: list[Value]) -> Value:
    value = _arg_or_context(ctx, args)
    if not _is_v3(ctx):
        return [StrItem(value_to_string_v1(ctx.doc, value))]
    if not value:
        return [StrItem("")]
    if len(value) > 1:
        raise TypeMismatch("3.0 string() needs at most one item")
    return [StrItem(string_value_of(ctx.doc, value[0]))]


def _fn_string_length(ctx: EvalContext, args: list[Value]) -> Value:
    if args:
        text = _string_arg(ctx, args[0])
    else:
        text = ctx.doc.string_value(ctx.node)
    return _count_result(ctx, len(text))


def _fn_starts_with(ctx: EvalContext, args: list[Value]) -> Value:
    return [BoolItem(_string_arg(ctx, args[0]).startswith(_string_arg(ctx, args[1])))]


def _fn_contains(ctx: EvalContext, args: list[Value]) -> Value:
    return [BoolItem(_string_arg(ctx, args[1]) in _string_arg(ctx, args[0]))]


def _fn_concat(ctx: EvalContext, args: list[Value]) -> Value:
    return [StrItem("".join(_string_arg(ctx, a) for a in args))]


def _fn_substring(ctx: EvalContext, args: list[Value]) -> Value:
    text = _string_arg(ctx, args[0])
    start = round_half_up(_numeric_arg(ctx, args[1]))
    if len(args) == 3:
        length = round_half_up(_numeric_arg(ctx, args[2]))
        end = start + length
        kept = [c for p, c in enumerate(text, start=1) if p >= start and p < end]
    else:
        kept = [c for p, c in enumerate(text, start=1) if p >= start]
    return [StrItem("".join(kept))]


def _fn_sum(ctx: EvalContext, args: list[Value]) -> Value:
    value = args[0]
    if not _is_v3(ctx):
        if not all(is_node_item(it) for it in value):
            raise TypeMismatch("1.0 sum() needs a node-set")
        total = 0.0
        for item in value:
            total += parse_number(string_value_of(ctx.doc, item), ctx.standard)
        return [NumItem(total)]
    atoms = atomize(ctx.doc, value)
    if not atoms:
        return [IntItem(0)]
    total_int = 0
    total_float = 0.0
    all_int = True
    for item in atoms:
        if isinstance(item, IntItem):
            total_int += item.value
            total_float += item.value
        elif isinstance(item, NumItem):
            all_int = False
            total_float += item.value
        elif isinstance(item, StrItem) and item.untyped:
            all_int = False
            total_float += cast_untyped_to_double(item.value)
        else:
            raise TypeMismatch("sum() over non-numeric items")
    if all_int:
        return [IntItem(_int_guard(total_int))]
    return [NumItem(total_float)]


def _fn_name(ctx: EvalContext, args: list[Value]) -> Value:
    def item_name(item: Item) -> str:
        if isinstance(item, ElemItem):
            return ctx.doc.nodes[item.node].tag
        if isinstance(item, AttrItem):
            return item.name
        raise TypeMismatch("name() argument must be a node")

    if not args:
        return [StrItem(ctx.doc.nodes[ctx.node].tag)]
    value = args[0]
    if not value:
        return [StrItem("")]
    if not _is_v3(ctx):
        if not all(is_node_item(it) for it in value):
            raise TypeMismatch("1.0 name() needs a node-set")
        return [StrItem(item_name(value[0]))]
    if len(value) > 1:
        raise TypeMismatch("3.0 name() needs at most one node")
    return [StrItem(item_name(value[0]))]


def _fn_subsequence(ctx: EvalContext, args: list[Value]) -> Value:
    source = args[0]
    start = round_half_up(_numeric_arg(ctx, args[1]))
    if len(args) == 3:
        length = round_half_up(_numeric_arg(ctx, args[2]))
        end = start + length
        return [it for p, it in enumerate(source, start=1) if p >= start and p < end]
    return [it for p, it in enumerate(source, start=1) if p >= start]


def _fn_tail(ctx: EvalContext, args: list[Value]) -> Value:
    return list(args[0][1:])


def _fn_head(ctx: EvalContext, args: list[Value]) -> Value:
    return list(args[0][:1])


def _fn_exists(ctx: EvalContext, args: list[Value]) -> Value:
    return [BoolItem(bool(args[0]))]


def _fn_empty(ctx: EvalContext, args: list[Value]) -> Value:
    return [BoolItem(not args[0])]


def _fn_abs(ctx: EvalContext, args: list[Value]) -> Value:
    return _unary_numeric(ctx, args[0], abs, math.fabs)


def _fn_min_max(ctx: EvalContext, args: list[Value], pick) -> Value:
    atoms = atomize(ctx.doc, args[0])
    if not atoms:
        return []
    numbers: list[Item] = []
    strings: list[str] = []
    for item in atoms:
        if isinstance(item, StrItem):
            if item.untyped:
                numbers.append(NumItem(cast_untyped_to_double(item.value)))
            else:
                strings.append(item.value)
        elif isinstance(item, (NumItem, IntItem)):
            numbers.append(item)
        else:
            raise TypeMismatch("min()/max() over non-comparable items")
    if numbers and strings:
        raise TypeMismatch("min()/max() over mixed strings and numbers")
    if strings:
        return [StrItem(pick(strings))]
    if any(isinstance(n, NumItem) and math.isnan(n.value) for n in numbers):
        return [NumItem(math.nan)]
    if all(isinstance(n, IntItem) for n in numbers):
        return [IntItem(pick(n.value for n in numbers))]
    return [NumItem(pick(float(n.value) for n in numbers))]


def _fn_string_join(ctx: EvalContext, args: list[Value]) -> Value:
    parts = []
    for item in atomize(ctx.doc, args[0]):
        if isinstance(item, StrItem):
            parts.append(item.value)
        else:
            raise TypeMismatch("string-join() over non-string items")
    separator = _string_arg(ctx, args[1])
    return [StrItem(separator.join(parts))]


def _fn_has_children(ctx: EvalContext, args: list[Value]) -> Value:
    if args:
        node = _single_node_arg(ctx, args[0])
    else:
        node = ElemItem(ctx.node)
    if node is None:
        return [BoolItem(False)]
    if isinstance(node, AttrItem):
        return [BoolItem(False)]
    return [BoolItem(bool(ctx.child_axis(ctx.doc, node.node)))]


def _evaluate_function(ctx: EvalContext, node: FunctionCall) -> Value:
    entry = catalog.entry(node.name)
    if entry is None or entry.form != "function":
        raise Unsupported(f"unknown function {node.name}()")
    if not ctx.standard.allows(entry.min_standard):
        raise Unsupported(f"{node.name}() needs XPath {entry.min_standard.value}")
    lo, hi = entry.arity
    if len(node.args) < lo or (hi is not None and len(node.args) > hi):
        raise TypeMismatch(f"{node.name}() called with {len(node.args)} arguments")

    name = node.name
    if name == "true":
        return [BoolItem(True)]
    if name == "false":
        return [BoolItem(False)]
    if name == "position":
        return _count_result(ctx, ctx.position)
    if name == "last":
        return _count_result(ctx, ctx.size)
    if name == "text":
        text = ctx.doc.nodes[ctx.node].text
        return [] if text is None else [StrItem(text.text(), untyped=True)]

    args = [evaluate_expr(ctx, arg) for arg in node.args]
    if name == "count":
        return _fn_count(ctx, args)
    if name == "not":
        return _fn_not(ctx, args)
    if name == "boolean":
        return _fn_boolean(ctx, args)
    if name == "number":
        return _fn_number(ctx, args)
    if name == "string":
        return _fn_string(ctx, args)
    if name == "string-length":
        return _fn_string_length(ctx, args)
    if name == "starts-with":
        return _fn_starts_with(ctx, args)
    if name == "contains":
        return _fn_contains(ctx, args)
    if name == "concat":
        return _fn_concat(ctx, args)
    if name == "substring":
        return _fn_substring(ctx, args)
    if name == "floor":
        return _unary_numeric(ctx, args[0], lambda i: i, _floor_safe)
    if name == "ceiling":
        return _unary_numeric(ctx, args[0], lambda i: i, _ceiling_safe)
    if name == "round":
        return _unary_numeric(ctx, args[0], lambda i: i, round_half_up)
    if name == "sum":
        return _fn_sum(ctx, args)
    if name == "name":
        return _fn_name(ctx, args)
    if name == "subsequence":
        return _fn_subsequence(ctx, args)
    if name == "tail":
        return _fn_tail(ctx, args)
    if name == "head":
        return _fn_head(ctx, args)
    if name == "exists":
        return _fn_exists(ctx, args)
    if name == "empty":
        return _fn_empty(ctx, args)
    if name == "abs":
        return _fn_abs(ctx, args)
    if name == "min":
        return _fn_min_max(ctx, args, min)
    if name == "max":
        return _fn_min_max(ctx, args, max)
    if name == "string-join":
        return _fn_string_join(ctx, args)
    if name == "has-children":
        return _fn_has_children(ctx, args)
    raise Unsupported(f"function {name}() has no implementation")


def predicate_keeps(ctx: EvalContext, body: ExprNode) -> bool:
    """Real predicate semantics: a numeric value is positional, else EBV."""
    value = evaluate_expr(ctx, body)
    if len(value) == 1 and isinstance(value[0], (NumItem, IntItem)):
        number = value[0].value
        if isinstance(number, float) and math.isnan(number):
            return False
        return number == ctx.position
    return effective_boolean(ctx.doc, value, ctx.standard)
