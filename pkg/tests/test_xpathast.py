"""AST rendering rules and the function/operator catalog."""

import pytest

from xpathdiff import catalog
from xpathdiff.catalog import Kind, functions_accepting
from xpathdiff.xpathast import (
    AttributeRef,
    Binary,
    ChildPathSubject,
    Constant,
    ContextItem,
    FunctionCall,
    Predicate,
    RangeTo,
    Section,
    SectionPrefix,
    TextCall,
    Unary,
    XPathExpr,
    XPathStandard,
    count_subjects,
    expr_depth,
    operator_names,
    render,
    render_expr,
    render_number,
    validate_expr,
    walk_expr,
)

V1 = XPathStandard.V1_0
V3 = XPathStandard.V3_0


def section(step, axis, name, *predicates):
    return Section(SectionPrefix(step, axis, name), tuple(predicates))


def test_render_negated_id_comparison():
    body = Binary("<", Binary("*", AttributeRef("id"), Constant(-1)), Constant(2))
    expr = XPathExpr((section("double_slash", "child", None, Predicate("boolean", body)),), V1)
    assert render(expr) == "//*[(@id * -1) < 2]"


def test_render_positional_path():
    expr = XPathExpr(
        (
            section("slash", "child", "Books"),
            section("slash", "child", "Book", Predicate("positional", Constant(1))),
        ),
        V1,
    )
    assert render(expr) == "/Books/Book[1]"


def test_render_is_deterministic():
    body = Binary("or", Binary(">=", AttributeRef("t"), Constant(0)), Binary("<=", AttributeRef("t"), Constant(1)))
    expr = XPathExpr((section("double_slash", "child", "T", Predicate("boolean", body)),), V1)
    assert render(expr) == render(expr) == "//T[(@t >= 0) or (@t <= 1)]"


def test_render_axes_and_wildcards():
    expr = XPathExpr(
        (
            section("slash", "ancestor-or-self", "A"),
            section("double_slash", "following-sibling", None),
            section("slash", "self", "B"),
        ),
        V1,
    )
    assert render(expr) == "/ancestor-or-self::A//following-sibling::*/self::B"


def test_render_function_calls_and_ranges():
    body = Binary(
        "=",
        FunctionCall("tail", (FunctionCall("subsequence", (RangeTo(Constant(1), Constant(2)), Constant(1), Constant(2))),)),
        Constant(2),
    )
    assert render_expr(body) == "tail(subsequence(1 to 2, 1, 2)) = 2"


def test_render_operand_parenthesization():
    # constants, the context item, attribute refs and calls stay bare;
    # everything else is safely over-parenthesized
    assert render_expr(Binary("+", ContextItem(), Constant(1))) == ". + 1"
    assert render_expr(Binary("+", TextCall(), Constant(1))) == "(text()) + 1"
    assert render_expr(Unary("negate", Binary("+", Constant(1), Constant(2)))) == "-(1 + 2)"
    assert render_expr(Unary("negate", Constant(5))) == "-5"
    assert render_expr(Unary("not", AttributeRef("a"))) == "not(@a)"
    assert render_expr(Binary("=", ChildPathSubject("Book", "name"), Constant(False))) == "(Book/@name) = false()"
    assert render_expr(AttributeRef(None)) == "@*"


def test_render_string_quoting():
    assert render_expr(Constant("plain")) == '"plain"'
    assert render_expr(Constant('with " quote')) == "'with \" quote'"
    with pytest.raises(ValueError):
        render_expr(Constant("both ' and \" quotes"))


def test_render_numbers():
    assert render_number(3) == "3"
    assert render_number(-7) == "-7"
    assert render_number(2.0) == "2"
    assert render_number(2.5) == "2.5"
    assert render_number(1e25) == "10000000000000000000000000"
    assert render_number(1e-7) == "0.0000001"
    with pytest.raises(ValueError):
        render_number(float("nan"))
    with pytest.raises(ValueError):
        render_number(float("inf"))


def test_walk_depth_subjects():
    body = Binary("and", Binary("=", AttributeRef("a"), Constant(1)), FunctionCall("not", (ContextItem(),)))
    assert expr_depth(body) == 3
    assert count_subjects(body) == 2
    assert sum(1 for _ in walk_expr(body)) == 6


def test_operator_names_erase_constants():
    body1 = Binary("or", Binary(">=", AttributeRef("t"), Constant(0)), Binary("<=", AttributeRef("t"), Constant(1)))
    body2 = Binary("or", Binary(">=", AttributeRef("t"), Constant(5)), Binary("<=", AttributeRef("t"), Constant(9)))
    expr1 = XPathExpr((section("double_slash", "child", "T", Predicate("boolean", body1)),), V1)
    expr2 = XPathExpr((section("double_slash", "child", "T", Predicate("boolean", body2)),), V1)
    assert operator_names(expr1) == operator_names(expr2) == ["<=", ">=", "or"]


def test_validate_flags_v3_features_in_v1():
    body = FunctionCall("subsequence", (ContextItem(), Constant(1)))
    expr = XPathExpr((section("slash", "child", "A", Predicate("boolean", body)),), V1)
    with pytest.raises(ValueError):
        validate_expr(expr)
    validate_expr(XPathExpr(expr.sections, V3))


def test_validate_flags_unknown_function_and_arity():
    body = FunctionCall("nonsuch", (ContextItem(),))
    expr = XPathExpr((section("slash", "child", "A", Predicate("boolean", body)),), V1)
    with pytest.raises(ValueError):
        validate_expr(expr)
    bad_arity = FunctionCall("count", (ContextItem(), ContextItem()))
    expr = XPathExpr((section("slash", "child", "A", Predicate("boolean", bad_arity)),), V1)
    with pytest.raises(ValueError):
        validate_expr(expr)


def test_validate_section_and_depth_bounds():
    many = tuple(section("slash", "child", "A") for _ in range(8))
    with pytest.raises(ValueError):
        validate_expr(XPathExpr(many, V1))
    deep = AttributeRef("a")
    for _ in range(11):
        deep = FunctionCall("not", (deep,))
    expr = XPathExpr((section("slash", "child", "A", Predicate("boolean", deep)),), V1)
    with pytest.raises(ValueError):
        validate_expr(expr)


# --- catalog -------------------------------------------------------------------

def names(entries):
    return [e.name for e in entries]


def test_nodeset_v1_includes_count_not_excludes_subsequence():
    got = names(functions_accepting(Kind.NODESET, V1))
    assert "count" in got and "not" in got
    assert "subsequence" not in got and "tail" not in got


def test_nodeset_v3_includes_sequence_functions():
    got = names(functions_accepting(Kind.NODESET, V3))
    for name in ("subsequence", "tail", "head", "count"):
        assert name in got


def test_boolean_accepting_includes_logic():
    for standard in (V1, V3):
        got = names(functions_accepting(Kind.BOOLEAN, standard))
        for name in ("not", "and", "or", "="):
            assert name in got


def test_zero_arity_entries_never_accept():
    for standard in (V1, V3):
        for kind in Kind:
            got = names(functions_accepting(kind, standard))
            for name in ("position", "last", "true", "false", "text"):
                assert name not in got


def test_catalog_closed_and_versioned():
    assert catalog.entry("count").min_standard is V1
    assert catalog.entry("subsequence").min_standard is V3
    assert catalog.entry("to").min_standard is V3
    assert catalog.entry("no-such-fn") is None
