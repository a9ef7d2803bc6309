"""Evaluator runtime values and standard-dependent coercion rules.

Values are flat item sequences. Element and attribute items refer back into
the document; attribute and text content atomizes to *untyped* atomics, which
is what drives the 1.0-vs-3.0 differences in comparisons: 1.0 coerces
everything, 3.0 casts untyped atomics toward the other operand and raises
type errors on genuinely mismatched kinds.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Union

from .xmldoc import XmlDocument
from .xpathast import XPathStandard

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class EvalError(Exception):
    """Structured evaluation failure; never aborts a campaign."""

    klass = "dynamic-error"

    def __init__(self, message: str):
        super().__init__(message)


class TypeMismatch(EvalError):
    klass = "type-error"


class DynamicError(EvalError):
    klass = "dynamic-error"


class Unsupported(EvalError):
    klass = "unsupported-feature"


@dataclass(frozen=True)
class ElemItem:
    node: int


@dataclass(frozen=True)
class AttrItem:
    owner: int
    index: int  # position among the owner's attributes
    name: str
    value: str


@dataclass(frozen=True)
class NumItem:
    value: float


@dataclass(frozen=True)
class IntItem:
    value: int


@dataclass(frozen=True)
class StrItem:
    value: str
    untyped: bool = False  # True for content atomized out of the document


@dataclass(frozen=True)
class BoolItem:
    value: bool


Item = Union[ElemItem, AttrItem, NumItem, IntItem, StrItem, BoolItem]
Value = list  # list[Item]

_NODE_ITEMS = (ElemItem, AttrItem)
_NUMERIC_ITEMS = (NumItem, IntItem)

_V1_NUMBER_RE = re.compile(r"[ \t\r\n]*-?(\d+(\.\d*)?|\.\d+)[ \t\r\n]*")
_V3_DOUBLE_RE = re.compile(
    r"[ \t\r\n]*[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?[ \t\r\n]*"
)
_V3_INTEGER_RE = re.compile(r"[ \t\r\n]*[+-]?\d+[ \t\r\n]*")


def is_node_item(item: Item) -> bool:
    return isinstance(item, _NODE_ITEMS)


def is_node_sequence(value: Value) -> bool:
    return all(isinstance(it, _NODE_ITEMS) for it in value)


def number_to_string(value: float) -> str:
    """XPath number-to-string: no exponent, integral doubles without a point."""
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    text = repr(value)
    if "e" in text or "E" in text:
        text = format(Decimal(text), "f")
    return text


def parse_number(text: str, standard: XPathStandard) -> float:
    """Lexical string-to-number; NaN on anything outside the grammar."""
    if standard is XPathStandard.V1_0:
        if _V1_NUMBER_RE.fullmatch(text):
            return float(text)
        return math.nan
    stripped = text.strip()
    if stripped == "INF":
        return math.inf
    if stripped == "-INF":
        return -math.inf
    if stripped == "NaN":
        return math.nan
    if _V3_DOUBLE_RE.fullmatch(text):
        return float(text)
    return math.nan


def string_value_of(doc: XmlDocument, item: Item) -> str:
    if isinstance(item, ElemItem):
        return doc.string_value(item.node)
    if isinstance(item, AttrItem):
        return item.value
    if isinstance(item, NumItem):
        return number_to_string(item.value)
    if isinstance(item, IntItem):
        return str(item.value)
    if isinstance(item, StrItem):
        return item.value
    if isinstance(item, BoolItem):
        return "true" if item.value else "false"
    raise TypeError(f"not an item: {item!r}")


def atomize(doc: XmlDocument, value: Value) -> Value:
    """Replace node items by untyped atomics holding their string-values."""
    out = []
    for item in value:
        if isinstance(item, _NODE_ITEMS):
            out.append(StrItem(string_value_of(doc, item), untyped=True))
        else:
            out.append(item)
    return out


def item_to_number(doc: XmlDocument, item: Item, standard: XPathStandard) -> float:
    if isinstance(item, NumItem):
        return item.value
    if isinstance(item, IntItem):
        return float(item.value)
    if isinstance(item, BoolItem):
        return 1.0 if item.value else 0.0
    if isinstance(item, StrItem):
        return parse_number(item.value, standard)
    return parse_number(string_value_of(doc, item), standard)


def value_to_number_v1(doc: XmlDocument, value: Value) -> float:
    """XPath 1.0 number(): node-sets go through string() (first node)."""
    if is_node_sequence(value):
        return parse_number(value_to_string_v1(doc, value), XPathStandard.V1_0)
    if len(value) == 1:
        return item_to_number(doc, value[0], XPathStandard.V1_0)
    raise TypeMismatch("1.0 number() needs a single value or a node-set")


def value_to_string_v1(doc: XmlDocument, value: Value) -> str:
    """XPath 1.0 string(): node-sets yield the first node's string-value."""
    if is_node_sequence(value):
        return string_value_of(doc, value[0]) if value else ""
    if len(value) == 1:
        return string_value_of(doc, value[0])
    raise TypeMismatch("1.0 string() needs a single value or a node-set")


def value_to_boolean_v1(doc: XmlDocument, value: Value) -> bool:
    if is_node_sequence(value):
        return bool(value)
    if len(value) == 1:
        item = value[0]
        if isinstance(item, BoolItem):
            return item.value
        if isinstance(item, _NUMERIC_ITEMS):
            number = item_to_number(doc, item, XPathStandard.V1_0)
            return number != 0 and not math.isnan(number)
        if isinstance(item, StrItem):
            return len(item.value) > 0
    raise TypeMismatch("1.0 boolean() needs a single value or a node-set")


def effective_boolean(doc: XmlDocument, value: Value, standard: XPathStandard) -> bool:
    """Per-standard effective boolean value; 3.0 raises on invalid operands."""
    if standard is XPathStandard.V1_0:
        return value_to_boolean_v1(doc, value)
    if not value:
        return False
    if isinstance(value[0], _NODE_ITEMS):
        return True
    if len(value) > 1:
        raise TypeMismatch("no effective boolean value for a multi-item atomic sequence")
    item = value[0]
    if isinstance(item, BoolItem):
        return item.value
    if isinstance(item, StrItem):
        return len(item.value) > 0
    if isinstance(item, _NUMERIC_ITEMS):
        number = item.value if isinstance(item, NumItem) else float(item.value)
        return number != 0 and not math.isnan(number)
    raise TypeMismatch(f"no effective boolean value for {item!r}")


def cast_untyped_to_double(text: str) -> float:
    value = parse_number(text, XPathStandard.V3_0)
    if math.isnan(value) and text.strip() != "NaN":
        raise DynamicError(f"cannot cast {text!r} to xs:double")
    return value


def cast_untyped_to_integer(text: str) -> int:
    if not _V3_INTEGER_RE.fullmatch(text):
        raise DynamicError(f"cannot cast {text!r} to xs:integer")
    return int(text)


def cast_untyped_to_boolean(text: str) -> bool:
    stripped = text.strip()
    if stripped in ("true", "1"):
        return True
    if stripped in ("false", "0"):
        return False
    raise DynamicError(f"cannot cast {text!r} to xs:boolean")


def _numeric_pair(a: Item, b: Item):
    """Promote a numeric pair to comparable Python values."""
    if isinstance(a, IntItem) and isinstance(b, IntItem):
        return a.value, b.value
    av = a.value if isinstance(a, NumItem) else float(a.value)
    bv = b.value if isinstance(b, NumItem) else float(b.value)
    return av, bv


def _apply_op(a, b, op: str) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(f"not a comparison operator: {op}")


def _compare_atomic_v1(doc: XmlDocument, a: Item, b: Item, op: str) -> bool:
    if op in ("=", "!="):
        if isinstance(a, BoolItem) or isinstance(b, BoolItem):
            left = value_to_boolean_v1(doc, [a])
            right = value_to_boolean_v1(doc, [b])
            return _apply_op(left, right, op)
        if isinstance(a, _NUMERIC_ITEMS) or isinstance(b, _NUMERIC_ITEMS):
            return _apply_op(
                item_to_number(doc, a, XPathStandard.V1_0),
                item_to_number(doc, b, XPathStandard.V1_0),
                op,
            )
        return _apply_op(string_value_of(doc, a), string_value_of(doc, b), op)
    return _apply_op(
        item_to_number(doc, a, XPathStandard.V1_0),
        item_to_number(doc, b, XPathStandard.V1_0),
        op,
    )


def _compare_atomic_v3(a: Item, b: Item, op: str) -> bool:
    a_untyped = isinstance(a, StrItem) and a.untyped
    b_untyped = isinstance(b, StrItem) and b.untyped
    if a_untyped and isinstance(b, _NUMERIC_ITEMS):
        a = NumItem(cast_untyped_to_double(a.value))
    elif b_untyped and isinstance(a, _NUMERIC_ITEMS):
        b = NumItem(cast_untyped_to_double(b.value))
    elif a_untyped and isinstance(b, BoolItem):
        a = BoolItem(cast_untyped_to_boolean(a.value))
    elif b_untyped and isinstance(a, BoolItem):
        b = BoolItem(cast_untyped_to_boolean(b.value))

    if isinstance(a, _NUMERIC_ITEMS) and isinstance(b, _NUMERIC_ITEMS):
        return _apply_op(*_numeric_pair(a, b), op)
    if isinstance(a, StrItem) and isinstance(b, StrItem):
        return _apply_op(a.value, b.value, op)
    if isinstance(a, BoolItem) and isinstance(b, BoolItem):
        return _apply_op(a.value, b.value, op)
    raise TypeMismatch(
        f"cannot compare {type(a).__name__} with {type(b).__name__} in 3.0"
    )


def compare_general(
    doc: XmlDocument, lhs: Value, rhs: Value, op: str, standard: XPathStandard
) -> bool:
    """General comparison between two values under the given standard."""
    if standard is XPathStandard.V3_0:
        left = atomize(doc, lhs)
        right = atomize(doc, rhs)
        for a in left:
            for b in right:
                if _compare_atomic_v3(a, b, op):
                    return True
        return False

    lhs_nodes = is_node_sequence(lhs)
    rhs_nodes = is_node_sequence(rhs)
    # A node-set against a boolean is booleanized, not existential: this is
    # what makes `Book/@name = false()` true in 1.0 when @name is absent.
    if lhs_nodes and len(rhs) == 1 and isinstance(rhs[0], BoolItem):
        return _compare_atomic_v1(doc, BoolItem(bool(lhs)), rhs[0], op)
    if rhs_nodes and len(lhs) == 1 and isinstance(lhs[0], BoolItem):
        return _compare_atomic_v1(doc, lhs[0], BoolItem(bool(rhs)), op)
    if lhs_nodes and rhs_nodes:
        for a in lhs:
            for b in rhs:
                if _compare_atomic_v1(
                    doc,
                    StrItem(string_value_of(doc, a)),
                    StrItem(string_value_of(doc, b)),
                    op,
                ):
                    return True
        return False
    if lhs_nodes or rhs_nodes:
        nodes, other, flipped = (lhs, rhs, False) if lhs_nodes else (rhs, lhs, True)
        if len(other) != 1:
            raise TypeMismatch("1.0 comparison against a multi-item atomic value")
        for node in nodes:
            a = StrItem(string_value_of(doc, node))
            ok = (
                _compare_atomic_v1(doc, other[0], a, op)
                if flipped
                else _compare_atomic_v1(doc, a, other[0], op)
            )
            if ok:
                return True
        return False
    if len(lhs) != 1 or len(rhs) != 1:
        raise TypeMismatch("1.0 comparison of multi-item atomic values")
    return _compare_atomic_v1(doc, lhs[0], rhs[0], op)


def _int_guard(result: int) -> int:
    if not INT64_MIN <= result <= INT64_MAX:
        raise DynamicError(f"integer overflow: {result}")
    return result


def _atomic_numeric_operand(doc: XmlDocument, value: Value) -> Item | None:
    """3.0 arithmetic operand: empty propagates, untyped casts to double."""
    atoms = atomize(doc, value)
    if not atoms:
        return None
    if len(atoms) > 1:
        raise TypeMismatch("arithmetic needs at most one item per operand")
    item = atoms[0]
    if isinstance(item, StrItem):
        if item.untyped:
            return NumItem(cast_untyped_to_double(item.value))
        raise TypeMismatch("arithmetic on a string")
    if isinstance(item, BoolItem):
        raise TypeMismatch("arithmetic on a boolean")
    return item


def _double_arith(a: float, b: float, op: str) -> float:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "div":
        if b == 0:
            if a == 0 or math.isnan(a):
                return math.nan
            sign = math.copysign(1.0, a) * math.copysign(1.0, b)
            return math.copysign(math.inf, sign)
        return a / b
    if op == "mod":
        if b == 0 or math.isnan(a) or math.isnan(b) or math.isinf(a):
            return math.nan
        if math.isinf(b):
            return a
        return math.fmod(a, b)
    raise ValueError(f"not an arithmetic operator: {op}")


def arithmetic(
    doc: XmlDocument, op: str, lhs: Value, rhs: Value, standard: XPathStandard
) -> Value:
    if standard is XPathStandard.V1_0:
        a = value_to_number_v1(doc, lhs)
        b = value_to_number_v1(doc, rhs)
        return [NumItem(_double_arith(a, b, op))]

    left = _atomic_numeric_operand(doc, lhs)
    right = _atomic_numeric_operand(doc, rhs)
    if left is None or right is None:
        return []
    if isinstance(left, IntItem) and isinstance(right, IntItem):
        a, b = left.value, right.value
        if op == "+":
            return [IntItem(_int_guard(a + b))]
        if op == "-":
            return [IntItem(_int_guard(a - b))]
        if op == "*":
            return [IntItem(_int_guard(a * b))]
        if op == "div":
            if b == 0:
                raise DynamicError("integer division by zero")
            return [NumItem(a / b)]
        if op == "mod":
            if b == 0:
                raise DynamicError("integer modulus by zero")
            return [IntItem(int(math.fmod(a, b)))]
    a = left.value if isinstance(left, NumItem) else float(left.value)
    b = right.value if isinstance(right, NumItem) else float(right.value)
    return [NumItem(_double_arith(a, b, op))]


def negate(doc: XmlDocument, value: Value, standard: XPathStandard) -> Value:
    if standard is XPathStandard.V1_0:
        return [NumItem(-value_to_number_v1(doc, value))]
    operand = _atomic_numeric_operand(doc, value)
    if operand is None:
        return []
    if isinstance(operand, IntItem):
        return [IntItem(_int_guard(-operand.value))]
    return [NumItem(-operand.value)]


def round_half_up(value: float) -> float:
    if math.isnan(value) or math.isinf(value):
        return value
    return math.floor(value + 0.5)
