"""Query generation: applicability, targeting, rectification, bounds."""

from random import Random

import pytest

from xpathdiff import evaluator
from xpathdiff.docgen import DocGenConfig, generate_document
from xpathdiff.querygen import (
    GenConfig,
    applicable_axes,
    generate_positional_predicate,
    generate_predicate,
    generate_query,
    generate_section_prefix,
    rectify_predicate,
    select_target,
)
from xpathdiff.values import effective_boolean
from xpathdiff.xmldoc import AXES, navigate_axis, parse
from xpathdiff.xpathast import (
    AttributeRef,
    Binary,
    ChildPathSubject,
    Constant,
    FunctionCall,
    Predicate,
    XPathStandard,
    render,
    validate_expr,
    walk_expr,
)

V1 = XPathStandard.V1_0
V3 = XPathStandard.V3_0

BOOKS = parse(
    '<Books id="1">'
    '<Book id="2" year="2020">A fairy tale</Book>'
    '<Book id="3" year="2001" name="bob"><Author id="5"/><Author id="6"/></Book>'
    '<Book id="4"/>'
    "</Books>"
)


def brute_force_applicable(doc, context_nodes):
    return {
        axis
        for axis in AXES
        if any(navigate_axis(doc, nid, axis) for nid in context_nodes)
    }


def test_single_node_doc_only_self_applies():
    doc = parse('<T id="1"/>')
    assert applicable_axes(doc, [1]) == {"self", "descendant-or-self", "ancestor-or-self"}
    # the brute-force definition agrees: or-self axes yield the node itself
    assert brute_force_applicable(doc, [1]) == applicable_axes(doc, [1])


def test_root_context_applicability():
    axes = applicable_axes(BOOKS, [1])
    assert "child" in axes and "descendant" in axes and "self" in axes
    assert "parent" not in axes and "ancestor" not in axes
    assert "following" not in axes and "preceding" not in axes


def test_applicability_matches_brute_force_on_random_docs():
    cfg = DocGenConfig(node_count_range=(1, 30))
    rng = Random(0)
    for seed in range(120):
        doc = generate_document(Random(seed), cfg)
        ids = list(doc.nodes)
        contexts = [[nid] for nid in ids]
        for _ in range(4):
            k = rng.randint(1, len(ids))
            contexts.append(sorted(rng.sample(ids, k)))
        for context in contexts:
            assert applicable_axes(doc, context) == brute_force_applicable(doc, context), (
                seed,
                context,
            )


def test_select_target_singleton_and_uniformity():
    assert select_target(Random(0), [7]) == 7
    counts = {nid: 0 for nid in (1, 2, 3, 4, 5)}
    rng = Random(42)
    draws = 10_000
    for _ in range(draws):
        counts[select_target(rng, [1, 2, 3, 4, 5])] += 1
    expected = draws / 5
    for count in counts.values():
        # wide sanity bound: five sigma around the binomial expectation
        assert abs(count - expected) < 5 * (draws * 0.2 * 0.8) ** 0.5


def test_section_prefix_result_nonempty_and_tag_membership():
    cfg = GenConfig(standard=V1)
    for seed in range(300):
        rng = Random(seed)
        prefix, batches = generate_section_prefix(rng, BOOKS, [evaluator.DOC_ORIGIN], cfg)
        merged = evaluator.merge_batches(BOOKS, batches)
        assert merged, (seed, prefix)
        if prefix.name_test is not None:
            tags = {BOOKS.nodes[nid].tag for nid in merged}
            assert tags == {prefix.name_test}


def test_prefix_chain_from_intermediate_context():
    cfg = GenConfig(standard=V1)
    for seed in range(200):
        rng = Random(seed + 1000)
        prefix, batches = generate_section_prefix(rng, BOOKS, [2, 3, 4], cfg)
        assert evaluator.merge_batches(BOOKS, batches), (seed, prefix)


# --- targeted predicates -----------------------------------------------------

def test_targeted_predicates_hold_at_target_more_often_than_untargeted():
    from xpathdiff.querygen import generate_predicate_untargeted

    cfg = GenConfig(standard=V1)
    ctx = evaluator.make_context(BOOKS, 3, 1, 1, V1)

    def truth_rate(builder, n=300):
        hits = 0
        for seed in range(n):
            body = builder(Random(seed))
            if body is None:
                continue
            try:
                value = evaluator.evaluate_subexpr(ctx, body)
                hits += effective_boolean(BOOKS, value, V1)
            except Exception:
                pass
        return hits / n

    targeted = truth_rate(lambda rng: generate_predicate(rng, BOOKS, 3, cfg))
    untargeted = truth_rate(lambda rng: generate_predicate_untargeted(rng, BOOKS, cfg))
    assert targeted > untargeted + 0.05
    assert targeted > 0.25


def test_predicate_references_existing_context():
    cfg = GenConfig(standard=V1)
    target = 3  # Book with @year @name and Author children
    node = BOOKS.nodes[target]
    child_tags = {BOOKS.nodes[c].tag for c in node.children}
    for seed in range(300):
        body = generate_predicate(Random(seed), BOOKS, target, cfg)
        if body is None:
            continue
        for sub in walk_expr(body):
            if isinstance(sub, AttributeRef) and sub.name is not None:
                assert sub.name in node.attributes
            if isinstance(sub, ChildPathSubject):
                assert sub.tag in child_tags


def test_equal_operand_bias_produces_true_equality():
    cfg = GenConfig(standard=V1, equal_operand_prob=1.0)
    found = 0
    for seed in range(300):
        body = generate_predicate(Random(seed), BOOKS, 3, cfg)
        if body is None:
            continue
        for sub in walk_expr(body):
            if (
                isinstance(sub, Binary)
                and sub.op == "="
                and isinstance(sub.lhs, AttributeRef)
                and sub.lhs.name == "id"
                and isinstance(sub.rhs, Constant)
            ):
                assert sub.rhs.value == 3
                found += 1
    assert found > 0


# --- rectification ------------------------------------------------------------

def rectify_at(rng, doc, body, target, cfg):
    return rectify_predicate(rng, doc, body, target, 1, 1, cfg)


def holds_at(doc, body, target, standard):
    ctx = evaluator.make_context(doc, target, 1, 1, standard)
    return effective_boolean(doc, evaluator.evaluate_subexpr(ctx, body), standard)


def test_rectify_keeps_true_predicates_unchanged():
    cfg = GenConfig(standard=V1)
    body = Binary("=", AttributeRef("id"), Constant(3))
    out, fallback = rectify_at(Random(0), BOOKS, body, 3, cfg)
    assert out == body and fallback is False


def test_rectify_flips_comparison():
    cfg = GenConfig(standard=V1, not_wrap_prob=0.0)
    body = Binary("<=", FunctionCall("count", (ChildPathSubject("Author"),)), Constant(1))
    out, _ = rectify_at(Random(1), BOOKS, body, 3, cfg)
    assert out == Binary(">", FunctionCall("count", (ChildPathSubject("Author"),)), Constant(1))
    assert holds_at(BOOKS, out, 3, V1)


def test_rectify_wrong_equality_two_ways():
    body = Binary("=", AttributeRef("id"), Constant(99))
    seen = set()
    for seed in range(40):
        cfg = GenConfig(standard=V1)
        out, _ = rectify_at(Random(seed), BOOKS, body, 2, cfg)
        assert holds_at(BOOKS, out, 2, V1)
        seen.add(render_shape(out))
    assert len(seen) >= 2  # not(...) and the flipped operator both occur


def render_shape(expr):
    from xpathdiff.xpathast import render_expr

    return render_expr(expr)


def test_rectify_fallback_on_existential_flip():
    # @zz <= 5 and @zz > 5 are both false when @zz is absent, so the
    # operator flip cannot save the predicate and the exact not() wrap must
    cfg = GenConfig(standard=V1, not_wrap_prob=0.0)
    body = Binary("<=", AttributeRef("zz"), Constant(5))
    out, fallback = rectify_at(Random(3), BOOKS, body, 2, cfg)
    assert fallback is True
    assert holds_at(BOOKS, out, 2, V1)


def test_rectify_or_and_recursion():
    cfg = GenConfig(standard=V1, not_wrap_prob=0.0)
    left = Binary("=", AttributeRef("id"), Constant(99))
    right = Binary("=", AttributeRef("id"), Constant(98))
    for seed in range(10):
        out, _ = rectify_at(Random(seed), BOOKS, Binary("or", left, right), 2, cfg)
        assert holds_at(BOOKS, out, 2, V1)
        out, _ = rectify_at(Random(seed), BOOKS, Binary("and", left, right), 2, cfg)
        assert holds_at(BOOKS, out, 2, V1)


def test_rectified_predicates_hold_at_target_in_bulk():
    cfg = GenConfig(standard=V1)
    fallbacks = 0
    for seed in range(400):
        rng = Random(seed)
        body = generate_predicate(rng, BOOKS, 2, cfg)
        if body is None:
            continue
        out, fallback = rectify_at(rng, BOOKS, body, 2, cfg)
        fallbacks += fallback
        assert holds_at(BOOKS, out, 2, V1)
    assert fallbacks >= 1  # the exact-negation fallback path gets exercised


# --- positional predicates ------------------------------------------------------

def test_positional_predicate_forms():
    assert generate_positional_predicate(Random(0), 1, 3).kind == "positional"
    for seed in range(200):
        position = Random(seed).randint(1, 6)
        predicate = generate_positional_predicate(Random(seed + 1), position, 6)
        ctx = evaluator.make_context(BOOKS, 1, position, 6, V1)
        value = evaluator.evaluate_subexpr(ctx, predicate.body)
        assert len(value) == 1 and value[0].value == position
    with pytest.raises(ValueError):
        generate_positional_predicate(Random(0), 4, 3)


def test_positional_last_form_only_at_end():
    seen_last = False
    for seed in range(200):
        predicate = generate_positional_predicate(Random(seed), 4, 4)
        from xpathdiff.xpathast import FunctionCall as FC

        if isinstance(predicate.body, FC) and predicate.body.name == "last":
            seen_last = True
    assert seen_last


# --- whole queries ----------------------------------------------------------------

def test_targeted_rectified_queries_nonempty_and_traced():
    dcfg = DocGenConfig()
    for standard in (V1, V3):
        cfg = GenConfig(standard=standard)
        for seed in range(30):
            doc = generate_document(Random(seed * 13 + 1), dcfg)
            expr, trace = generate_query(Random(seed), doc, cfg)
            validate_expr(expr)
            ids = evaluator.evaluate_ids(doc, expr)
            assert ids, render(expr)
            assert ids == trace.final
            for strace in trace.sections:
                if strace.target is not None:
                    assert strace.target in strace.candidates
                    assert strace.target in strace.result


def test_single_node_doc_always_selects_it():
    doc = parse('<T id="1"/>')
    cfg = GenConfig(standard=V1)
    for seed in range(150):
        expr, trace = generate_query(Random(seed), doc, cfg)
        assert evaluator.evaluate_ids(doc, expr) == [1], render(expr)


def test_generation_determinism():
    doc = generate_document(Random(5), DocGenConfig())
    for standard in (V1, V3):
        for mode in ("targeted", "untargeted"):
            for rectify in (True, False):
                cfg = GenConfig(standard=standard, mode=mode, rectify=rectify)
                first, _ = generate_query(Random(99), doc, cfg)
                second, _ = generate_query(Random(99), doc, cfg)
                assert render(first) == render(second)


def test_bounds_hold_across_modes():
    dcfg = DocGenConfig()
    for mode in ("targeted", "untargeted"):
        for rectify in (True, False):
            cfg = GenConfig(standard=V3, mode=mode, rectify=rectify)
            for seed in range(40):
                doc = generate_document(Random(seed * 3 + 2), dcfg)
                expr, _ = generate_query(Random(seed), doc, cfg)
                validate_expr(expr)


def test_targeted_without_rectification_stops_on_empty():
    dcfg = DocGenConfig()
    cfg = GenConfig(standard=V1, mode="targeted", rectify=False, sections_range=(7, 7))
    stopped = 0
    for seed in range(80):
        doc = generate_document(Random(seed * 7 + 3), dcfg)
        expr, trace = generate_query(Random(seed), doc, cfg)
        if trace.stopped_early:
            stopped += 1
            assert len(expr.sections) < 7
            assert trace.final == []
    assert stopped > 0


def test_untargeted_without_rectification_extends_blindly():
    dcfg = DocGenConfig()
    cfg = GenConfig(standard=V1, mode="untargeted", rectify=False, sections_range=(7, 7))
    blind_extended = 0
    for seed in range(60):
        doc = generate_document(Random(seed * 11 + 3), dcfg)
        expr, trace = generate_query(Random(seed), doc, cfg)
        empties = [i for i, s in enumerate(trace.sections) if not s.result and not s.candidates]
        if empties and len(expr.sections) > empties[0] + 1:
            blind_extended += 1
    assert blind_extended > 0


def test_untargeted_with_rectification_keeps_results_nonempty():
    dcfg = DocGenConfig()
    cfg = GenConfig(standard=V1, mode="untargeted", rectify=True)
    for seed in range(40):
        doc = generate_document(Random(seed * 17 + 3), dcfg)
        expr, trace = generate_query(Random(seed), doc, cfg)
        assert trace.final
        assert evaluator.evaluate_ids(doc, expr) == trace.final
