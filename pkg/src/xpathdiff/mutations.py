"""Unsound rewrites injected into mutant engines for self-validation.

Each mutation reproduces the root cause of a real engine bug as a predicate
rewrite applied before evaluation:

- mul_compare_rewrite: simplifies `x * a <op> b` to `x <op> b div a` without
  flipping the operator for negative a.
- or_true_rewrite: folds a range disjunction like `s >= c1 or s <= c2` to
  true when the constant ranges cover every number, ignoring that the
  subject may be absent or non-numeric.
- tail_subseq_off_by_one: evaluates tail(subsequence(e, s, l)) with the
  ending index reduced by one, dropping the last item.
"""

from __future__ import annotations

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
)


def _numeric_constant(node: ExprNode) -> float | None:
    if isinstance(node, Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    return None


_COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")


def _rewrite_mul_compare(node: ExprNode) -> ExprNode:
    if not (isinstance(node, Binary) and node.op in _COMPARISONS):
        return node
    lhs, rhs = node.lhs, node.rhs
    bound = _numeric_constant(rhs)
    if bound is None or not isinstance(lhs, Binary) or lhs.op != "*":
        return node
    factor = _numeric_constant(lhs.rhs)
    variable = lhs.lhs
    if factor is None:
        factor = _numeric_constant(lhs.lhs)
        variable = lhs.rhs
    if factor is None or factor == 0:
        return node
    # The unsound step: divide the bound without flipping the operator.
    folded = bound / factor
    if folded == int(folded):
        folded_const: Constant = Constant(int(folded))
    else:
        folded_const = Constant(folded)
    return Binary(node.op, variable, folded_const)


def _bound_shape(node: ExprNode) -> tuple[str, ExprNode, float, bool] | None:
    """Normalize a comparison into (side, subject, constant, strict)."""
    if not isinstance(node, Binary) or node.op not in ("<", "<=", ">", ">="):
        return None
    left_const = _numeric_constant(node.lhs)
    right_const = _numeric_constant(node.rhs)
    if right_const is not None and left_const is None:
        subject, constant, op = node.lhs, right_const, node.op
    elif left_const is not None and right_const is None:
        flip = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}
        subject, constant, op = node.rhs, left_const, flip[node.op]
    else:
        return None
    if op in (">", ">="):
        return ("lower", subject, constant, op == ">")
    return ("upper", subject, constant, op == "<")


def _rewrite_or_true(node: ExprNode) -> ExprNode:
    if not (isinstance(node, Binary) and node.op == "or"):
        return node
    a = _bound_shape(node.lhs)
    b = _bound_shape(node.rhs)
    if a is None or b is None:
        return node
    if a[0] == b[0]:
        return node
    lower, upper = (a, b) if a[0] == "lower" else (b, a)
    if lower[1] != upper[1]:
        return node
    lower_c, upper_c = lower[2], upper[2]
    both_strict = lower[3] and upper[3]
    covers = lower_c < upper_c if both_strict else lower_c <= upper_c
    if covers:
        return Constant(True)
    return node


def _rewrite_tail_subseq(node: ExprNode) -> ExprNode:
    if not (isinstance(node, FunctionCall) and node.name == "tail"):
        return node
    arg = node.args[0]
    if not (isinstance(arg, FunctionCall) and arg.name == "subsequence" and len(arg.args) == 3):
        return node
    source, start, length = arg.args

    def shifted(expr: ExprNode, delta: int) -> ExprNode:
        constant = _numeric_constant(expr)
        if constant is not None and constant == int(constant):
            return Constant(int(constant) + delta)
        op = "+" if delta > 0 else "-"
        return Binary(op, expr, Constant(abs(delta)))

    return FunctionCall("subsequence", (source, shifted(start, 1), shifted(length, -2)))


def _transform(node: ExprNode, rewrite) -> ExprNode:
    if isinstance(node, FunctionCall):
        node = FunctionCall(node.name, tuple(_transform(a, rewrite) for a in node.args))
    elif isinstance(node, Binary):
        node = Binary(node.op, _transform(node.lhs, rewrite), _transform(node.rhs, rewrite))
    elif isinstance(node, Unary):
        node = Unary(node.op, _transform(node.arg, rewrite))
    elif isinstance(node, RangeTo):
        node = RangeTo(_transform(node.lhs, rewrite), _transform(node.rhs, rewrite))
    return rewrite(node)


MUTATIONS = {
    "mul_compare_rewrite": _rewrite_mul_compare,
    "or_true_rewrite": _rewrite_or_true,
    "tail_subseq_off_by_one": _rewrite_tail_subseq,
}


def apply_mutation(mutation_id: str, expr: XPathExpr) -> XPathExpr:
    """The query as the buggy engine effectively evaluates it."""
    rewrite = MUTATIONS.get(mutation_id)
    if rewrite is None:
        raise ValueError(f"unknown mutation {mutation_id!r}")
    sections = tuple(
        Section(
            section.prefix,
            tuple(
                Predicate(p.kind, _transform(p.body, rewrite))
                for p in section.predicates
            ),
        )
        for section in expr.sections
    )
    return XPathExpr(sections, expr.standard)
