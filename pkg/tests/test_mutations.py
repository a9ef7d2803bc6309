"""Fault-injection rewrites fire on their patterns and nothing else."""

import pytest

from xpathdiff.mutations import MUTATIONS, apply_mutation
from xpathdiff.xpathast import (
    AttributeRef,
    Binary,
    Constant,
    FunctionCall,
    Predicate,
    RangeTo,
    Section,
    SectionPrefix,
    XPathExpr,
    XPathStandard,
    render,
)

V1 = XPathStandard.V1_0
V3 = XPathStandard.V3_0


def one_section_query(body, standard=V1):
    return XPathExpr(
        (Section(SectionPrefix("double_slash", "child", None), (Predicate("boolean", body),)),),
        standard,
    )


def body_of(expr):
    return expr.sections[0].predicates[0].body


def test_unknown_mutation_rejected():
    with pytest.raises(ValueError):
        apply_mutation("nonsuch", one_section_query(Constant(True)))
    assert set(MUTATIONS) == {
        "mul_compare_rewrite",
        "or_true_rewrite",
        "tail_subseq_off_by_one",
    }


def test_mul_compare_folds_bound_without_flipping():
    body = Binary("<", Binary("*", AttributeRef("id"), Constant(-1)), Constant(2))
    mutated = apply_mutation("mul_compare_rewrite", one_section_query(body))
    assert body_of(mutated) == Binary("<", AttributeRef("id"), Constant(-2))


def test_mul_compare_handles_constant_on_the_left():
    body = Binary(">=", Binary("*", Constant(2), AttributeRef("a")), Constant(6))
    mutated = apply_mutation("mul_compare_rewrite", one_section_query(body))
    assert body_of(mutated) == Binary(">=", AttributeRef("a"), Constant(3))


def test_mul_compare_ignores_nonconstant_shapes():
    body = Binary("<", Binary("*", AttributeRef("id"), AttributeRef("a")), Constant(2))
    assert apply_mutation("mul_compare_rewrite", one_section_query(body)) == one_section_query(body)
    body = Binary("<", Binary("+", AttributeRef("id"), Constant(-1)), Constant(2))
    assert apply_mutation("mul_compare_rewrite", one_section_query(body)) == one_section_query(body)
    body = Binary("<", Binary("*", AttributeRef("id"), Constant(0)), Constant(2))
    assert apply_mutation("mul_compare_rewrite", one_section_query(body)) == one_section_query(body)


def test_or_true_folds_covering_ranges():
    body = Binary("or", Binary(">=", AttributeRef("t"), Constant(0)), Binary("<=", AttributeRef("t"), Constant(1)))
    mutated = apply_mutation("or_true_rewrite", one_section_query(body))
    assert body_of(mutated) == Constant(True)
    # reversed operand order and swapped sides fold too: 2 < @t is a lower
    # bound at 2, and together with @t <= 5 the ranges cover every number
    body = Binary("or", Binary("<=", AttributeRef("t"), Constant(5)), Binary("<", Constant(2), AttributeRef("t")))
    mutated = apply_mutation("or_true_rewrite", one_section_query(body))
    assert body_of(mutated) == Constant(True)


def test_or_true_requires_covering_constants_and_same_subject():
    non_covering = Binary("or", Binary(">=", AttributeRef("t"), Constant(5)), Binary("<=", AttributeRef("t"), Constant(1)))
    assert apply_mutation("or_true_rewrite", one_section_query(non_covering)) == one_section_query(non_covering)
    different = Binary("or", Binary(">=", AttributeRef("t"), Constant(0)), Binary("<=", AttributeRef("u"), Constant(1)))
    assert apply_mutation("or_true_rewrite", one_section_query(different)) == one_section_query(different)
    both_strict = Binary("or", Binary(">", AttributeRef("t"), Constant(1)), Binary("<", AttributeRef("t"), Constant(1)))
    assert apply_mutation("or_true_rewrite", one_section_query(both_strict)) == one_section_query(both_strict)
    strict_covering = Binary("or", Binary(">", AttributeRef("t"), Constant(0)), Binary("<", AttributeRef("t"), Constant(1)))
    assert body_of(apply_mutation("or_true_rewrite", one_section_query(strict_covering))) == Constant(True)


def test_tail_subseq_shifts_window():
    window = FunctionCall("subsequence", (RangeTo(Constant(1), Constant(2)), Constant(1), Constant(2)))
    body = Binary("=", FunctionCall("tail", (window,)), Constant(2))
    mutated = apply_mutation("tail_subseq_off_by_one", one_section_query(body, V3))
    expected = FunctionCall("subsequence", (RangeTo(Constant(1), Constant(2)), Constant(2), Constant(0)))
    assert body_of(mutated) == Binary("=", expected, Constant(2))


def test_tail_subseq_leaves_two_arg_form_alone():
    window = FunctionCall("subsequence", (RangeTo(Constant(1), Constant(2)), Constant(1)))
    body = FunctionCall("tail", (window,))
    assert apply_mutation("tail_subseq_off_by_one", one_section_query(body, V3)) == one_section_query(body, V3)


def test_rewrites_reach_nested_positions():
    inner = Binary("or", Binary(">=", AttributeRef("t"), Constant(0)), Binary("<=", AttributeRef("t"), Constant(1)))
    body = FunctionCall("not", (Binary("and", inner, Constant(True)),))
    mutated = apply_mutation("or_true_rewrite", one_section_query(body))
    assert render(mutated) != render(one_section_query(body))
    assert body_of(mutated) == FunctionCall("not", (Binary("and", Constant(True), Constant(True)),))
