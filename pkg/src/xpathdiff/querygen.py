"""Targeted XPath query generation.

Queries grow section by section. For each section the generator picks an
applicable axis (one that cannot yield an empty step), selects a targeted
node from the step result, and builds predicates bottom-up while executing
every sub-expression on the designated evaluator to track its value and
kind. Rectification rewrites a finished predicate so the targeted node
passes it, which keeps intermediate and final results non-empty. Four
ablation modes: targeted/untargeted crossed with rectification on/off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from random import Random

from . import catalog, evaluator, runtime
from .catalog import ARITHMETIC_OPS, COMPARISON_OPS, CatalogEntry, Kind
from .values import (
    AttrItem,
    BoolItem,
    ElemItem,
    EvalError,
    IntItem,
    NumItem,
    StrItem,
    Value,
    atomize,
    effective_boolean,
    is_node_item,
    parse_number,
)
from .xmldoc import AXES, XmlDocument
from .xpathast import (
    AttributeRef,
    Binary,
    ChildPathSubject,
    Constant,
    ContextItem,
    ExprNode,
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
)

DOC_ORIGIN = evaluator.DOC_ORIGIN

OPPOSITE_COMPARISON = {"<=": ">", "<": ">=", ">=": "<", ">": "<=", "=": "!=", "!=": "="}

_RANDOM_STRING_ALPHABET = "abcdefghijklmnopqrstuvwxyz "


@dataclass(frozen=True)
class GenConfig:
    sections_range: tuple[int, int] = (1, 7)
    max_subjects: int = 10
    max_depth: int = 10
    queries_per_doc: int = 200
    predicates_per_section: tuple[int, int] = (0, 2)
    mode: str = "targeted"  # "targeted" | "untargeted"
    rectify: bool = True
    standard: XPathStandard = XPathStandard.V1_0
    wildcard_prob: float = 0.3
    equal_operand_prob: float = 0.5
    not_wrap_prob: float = 0.5
    positional_prob: float = 0.2
    subject_kind_prob: float = 0.5  # targeted node itself vs derived sequence
    operand_tree_prob: float = 0.25
    subject_reuse_prob: float = 0.5  # and/or sides built over the same subject
    chain_continue_prob: float = 0.55
    allow_has_children: bool = False
    max_retries: int = 5

    def __post_init__(self):
        if self.mode not in ("targeted", "untargeted"):
            raise ValueError(f"bad mode {self.mode!r}")
        for name in (
            "wildcard_prob",
            "equal_operand_prob",
            "not_wrap_prob",
            "positional_prob",
            "subject_kind_prob",
            "operand_tree_prob",
            "subject_reuse_prob",
            "chain_continue_prob",
        ):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} outside [0, 1]")


@dataclass
class SectionTrace:
    candidates: list[int]  # step result before any predicate
    target: int | None
    rectified: bool
    fallback_not: bool
    result: list[int] = field(default_factory=list)  # after predicates


@dataclass
class GenTrace:
    sections: list[SectionTrace] = field(default_factory=list)
    final: list[int] = field(default_factory=list)
    stopped_early: bool = False


class Designated:
    """The engine consulted during generation (reference strategy A).

    Any object with the same four methods can stand in, so a campaign can in
    principle designate a different evaluator.
    """

    def step_batches(self, doc, base, prefix):
        return evaluator.step_batches(doc, base, prefix)

    def filter_batch(self, doc, batch, predicate, standard):
        return evaluator.filter_batch(doc, batch, predicate, standard)

    def merge(self, doc, batches):
        return evaluator.merge_batches(doc, batches)

    def expr_value(self, doc, node, position, size, standard, expr) -> Value:
        ctx = evaluator.make_context(doc, node, position, size, standard)
        return runtime.evaluate_expr(ctx, expr)


_DESIGNATED = Designated()


def kind_of(value: Value) -> Kind:
    if all(is_node_item(item) for item in value):
        return Kind.NODESET
    if len(value) == 1:
        item = value[0]
        if isinstance(item, (NumItem, IntItem)):
            return Kind.NUMBER
        if isinstance(item, StrItem):
            return Kind.STRING
        if isinstance(item, BoolItem):
            return Kind.BOOLEAN
    return Kind.SEQUENCE


# Sequence-window chains and boundary disjunctions concentrate engine bugs,
# so the picker leans toward them instead of drawing uniformly.
_ENTRY_WEIGHTS_SEQ = {"subsequence": 4.0, "tail": 4.0, "head": 2.0}
_ENTRY_WEIGHTS_BOOL = {"or": 3.0, "and": 2.0}


def _entry_weight(entry: CatalogEntry, kind: Kind) -> float:
    if kind in (Kind.NODESET, Kind.SEQUENCE) and entry.name in _ENTRY_WEIGHTS_SEQ:
        return _ENTRY_WEIGHTS_SEQ[entry.name]
    if kind is Kind.BOOLEAN and entry.name in _ENTRY_WEIGHTS_BOOL:
        return _ENTRY_WEIGHTS_BOOL[entry.name]
    if entry.name in COMPARISON_OPS and kind in (Kind.NUMBER, Kind.STRING):
        return 2.0
    return 1.0


def _weighted_choice(rng: Random, items: list, weight_fn) -> object:
    weights = [weight_fn(item) for item in items]
    point = rng.random() * sum(weights)
    acc = 0.0
    for item, weight in zip(items, weights):
        acc += weight
        if point < acc:
            return item
    return items[-1]


# --- axis applicability -----------------------------------------------------

def applicable_axes(doc: XmlDocument, context_nodes: list[int]) -> set[str]:
    """Axes that cannot produce an empty result over the given context.

    Uses structural conditions only (children present, parent present,
    sibling positions, an up-walk for following/preceding); validated against
    the brute-force navigate_axis definition by the test suite.
    """
    if not context_nodes:
        raise ValueError("applicability needs a nonempty context")
    axes = {"self", "descendant-or-self", "ancestor-or-self"}
    for nid in context_nodes:
        if len(axes) == len(AXES):
            break
        node = doc.nodes[nid]
        if node.children:
            axes.add("child")
            axes.add("descendant")
        if node.parent is not None:
            axes.add("parent")
            axes.add("ancestor")
            siblings = doc.nodes[node.parent].children
            index = siblings.index(nid)
            if index + 1 < len(siblings):
                axes.add("following-sibling")
            if index > 0:
                axes.add("preceding-sibling")
        cursor = nid
        while doc.nodes[cursor].parent is not None:
            siblings = doc.nodes[doc.nodes[cursor].parent].children
            index = siblings.index(cursor)
            if index + 1 < len(siblings):
                axes.add("following")
            if index > 0:
                axes.add("preceding")
            cursor = doc.nodes[cursor].parent
    return axes


_DOC_ORIGIN_AXES = {"child", "descendant", "descendant-or-self"}


def _applicable_for_origins(doc: XmlDocument, origins: list[int]) -> set[str]:
    axes: set[str] = set()
    real = [nid for nid in origins if nid != DOC_ORIGIN]
    if len(real) < len(origins):
        axes |= _DOC_ORIGIN_AXES
    if real:
        axes |= applicable_axes(doc, real)
    return axes


def select_target(rng: Random, candidates: list[int]) -> int:
    if not candidates:
        raise ValueError("cannot target an empty candidate set")
    return rng.choice(candidates)


# --- section prefixes -------------------------------------------------------

def _closure_origins(doc: XmlDocument, origins: list[int]) -> list[int]:
    out: list[int] = []
    seen: set[int] = set()
    for nid in origins:
        members = (
            [DOC_ORIGIN] + doc.document_order()
            if nid == DOC_ORIGIN
            else [nid] + evaluator.axis_from(doc, nid, "descendant")
        )
        for member in members:
            if member not in seen:
                seen.add(member)
                out.append(member)
    return out


def generate_section_prefix(
    rng: Random,
    doc: XmlDocument,
    origins: list[int],
    cfg: GenConfig,
    designated: Designated = _DESIGNATED,
) -> tuple[SectionPrefix, list[tuple[int, list[int]]]]:
    """A guaranteed-nonempty section prefix plus its per-origin batches."""
    step_kind = rng.choice(("slash", "double_slash"))
    if step_kind == "double_slash":
        applicable = _applicable_for_origins(doc, _closure_origins(doc, origins))
    else:
        applicable = _applicable_for_origins(doc, origins)
    axis = rng.choice(sorted(applicable))
    batches = designated.step_batches(doc, origins, SectionPrefix(step_kind, axis, None))
    tags: list[str] = []
    seen_tags: set[str] = set()
    for _, batch in batches:
        for nid in batch:
            tag = doc.nodes[nid].tag
            if tag not in seen_tags:
                seen_tags.add(tag)
                tags.append(tag)
    name_test = None
    if tags and rng.random() >= cfg.wildcard_prob:
        name_test = rng.choice(tags)
        batches = [
            (origin, [nid for nid in batch if doc.nodes[nid].tag == name_test])
            for origin, batch in batches
        ]
    return SectionPrefix(step_kind, axis, name_test), batches


def _blind_prefix(rng: Random, doc: XmlDocument, cfg: GenConfig) -> SectionPrefix:
    """Untargeted continuation over an empty running result."""
    step_kind = rng.choice(("slash", "double_slash"))
    axis = rng.choice(AXES)
    if rng.random() < cfg.wildcard_prob:
        name_test = None
    else:
        tags = sorted({node.tag for node in doc.nodes.values()})
        name_test = rng.choice(tags)
    return SectionPrefix(step_kind, axis, name_test)


# --- constants and corner operands ------------------------------------------

def _random_int(rng: Random) -> int:
    return rng.randint(-100, 100)


def _random_string(rng: Random) -> str:
    return "".join(rng.choice(_RANDOM_STRING_ALPHABET) for _ in range(rng.randint(0, 5)))


def _random_constant(rng: Random) -> Constant:
    if rng.random() < 0.5:
        return Constant(_random_int(rng))
    return Constant(_random_string(rng))


def _constant_from_number(value: float | int) -> Constant | None:
    if isinstance(value, int):
        return Constant(value)
    if math.isnan(value) or math.isinf(value):
        return None
    if value == int(value) and abs(value) < 1e15:
        return Constant(int(value))
    return Constant(value)


def _corner_operand(rng: Random, doc: XmlDocument, value: Value, cfg: GenConfig) -> Constant:
    """An operand related to the current value: exact with the configured
    probability, otherwise nudged nearby to probe comparison boundaries."""
    atoms = atomize(doc, value)
    if not atoms:
        return _random_constant(rng)
    item = atoms[0]
    if isinstance(item, (NumItem, IntItem)):
        number = item.value
        if rng.random() < cfg.equal_operand_prob:
            exact = _constant_from_number(number)
            if exact is not None:
                return exact
        if isinstance(number, float) and (math.isnan(number) or math.isinf(number)):
            return Constant(_random_int(rng))
        return Constant(int(number) + rng.randint(-2, 2))
    if isinstance(item, StrItem):
        text = item.value
        number = parse_number(text, XPathStandard.V3_0)
        if item.untyped and not math.isnan(number):
            # integer-typed document content; compare numerically
            if rng.random() < cfg.equal_operand_prob:
                exact = _constant_from_number(number)
                if exact is not None:
                    return exact
            return Constant(int(number) + rng.randint(-2, 2))
        if rng.random() < cfg.equal_operand_prob and '"' not in text:
            return Constant(text)
        if text and rng.random() < 0.4 and '"' not in text:
            return Constant(text[: rng.randint(1, len(text))])
        return Constant(_random_string(rng))
    if isinstance(item, BoolItem):
        if rng.random() < cfg.equal_operand_prob:
            return Constant(item.value)
        return Constant(rng.random() < 0.5)
    return _random_constant(rng)


# --- targeted predicate construction ------------------------------------------

class _TargetEnv:
    """Everything the bottom-up builder knows about the targeted node."""

    def __init__(
        self,
        doc: XmlDocument,
        target: int,
        position: int,
        size: int,
        cfg: GenConfig,
        designated: Designated,
    ):
        self.doc = doc
        self.target = target
        self.position = position
        self.size = size
        self.cfg = cfg
        self.designated = designated
        self.subject_budget = cfg.max_subjects

    def value_of(self, expr: ExprNode) -> Value:
        return self.designated.expr_value(
            self.doc, self.target, self.position, self.size, self.cfg.standard, expr
        )


def _derived_subjects(env: _TargetEnv) -> list:
    """Subject constructors referencing context that exists at the target."""
    doc, node = env.doc, env.doc.nodes[env.target]
    pool = []
    for name in node.attributes:
        pool.append(lambda rng, name=name: AttributeRef(name))
    pool.append(lambda rng: AttributeRef(None))
    child_tags: list[str] = []
    for cid in node.children:
        tag = doc.nodes[cid].tag
        if tag not in child_tags:
            child_tags.append(tag)
    for tag in child_tags:
        pool.append(lambda rng, tag=tag: ChildPathSubject(tag))
        attr_names: list[str] = []
        for cid in node.children:
            if doc.nodes[cid].tag != tag:
                continue
            for name in doc.nodes[cid].attributes:
                if name not in attr_names:
                    attr_names.append(name)
        for name in attr_names[:4]:
            pool.append(lambda rng, tag=tag, name=name: ChildPathSubject(tag, name))
    if node.text is not None:
        pool.append(lambda rng: TextCall())
    if env.cfg.standard is XPathStandard.V3_0:
        def range_subject(rng):
            lo = rng.randint(1, 3)
            return RangeTo(Constant(lo), Constant(lo + rng.randint(0, 3)))

        pool.append(range_subject)
    return pool


def _draw_subject(rng: Random, env: _TargetEnv) -> ExprNode:
    env.subject_budget -= 1
    # Multi-item integer ranges get a dedicated slice: they are the cheapest
    # way to drive sequence-window functions through interesting lengths.
    if env.cfg.standard is XPathStandard.V3_0 and rng.random() < 0.2:
        lo = rng.randint(1, 3)
        return RangeTo(Constant(lo), Constant(lo + rng.randint(1, 3)))
    if rng.random() < env.cfg.subject_kind_prob:
        return ContextItem()
    pool = _derived_subjects(env)
    return rng.choice(pool)(rng)


def _is_numeric_castable(doc: XmlDocument, value: Value) -> bool:
    for item in atomize(doc, value):
        if isinstance(item, (NumItem, IntItem)):
            continue
        if isinstance(item, StrItem) and item.untyped:
            if math.isnan(parse_number(item.value, XPathStandard.V3_0)):
                return False
            continue
        return False
    return True


def _entry_applicable(entry: CatalogEntry, env: _TargetEnv, value: Value, kind: Kind) -> bool:
    """Value-based guards that keep the chosen application from erroring at
    the target (and, thanks to document-wide attribute typing, almost
    everywhere else)."""
    cfg = env.cfg
    v3 = cfg.standard is XPathStandard.V3_0
    name = entry.name
    if name == "has-children" and not cfg.allow_has_children:
        return False
    atoms_len = len(value)
    if name in ARITHMETIC_OPS or name in ("negate", "floor", "ceiling", "round", "abs"):
        if v3 and atoms_len > 1:
            return False
        return _is_numeric_castable(env.doc, value) if v3 else True
    if name in ("sum", "min", "max"):
        return _is_numeric_castable(env.doc, value) if v3 else True
    if name in ("string", "number", "string-length", "starts-with", "contains",
                "concat", "substring", "name"):
        return not (v3 and atoms_len > 1)
    if name == "string-join":
        if not v3:
            return False
        return all(
            isinstance(it, StrItem) for it in atomize(env.doc, value)
        )
    if name == "to":
        if atoms_len != 1:
            return False
        atom = atomize(env.doc, value)[0]
        if isinstance(atom, IntItem):
            return abs(atom.value) < 1000
        if isinstance(atom, StrItem) and atom.untyped:
            n = parse_number(atom.value, XPathStandard.V3_0)
            return not math.isnan(n) and n == int(n) and abs(n) < 1000
        return False
    if name in ("and", "or", "not", "boolean"):
        if not v3:
            return True
        return kind in (Kind.NODESET, Kind.NUMBER, Kind.STRING, Kind.BOOLEAN)
    return True


def _second_string_arg(rng: Random, env: _TargetEnv, value: Value, want_prefix: bool) -> Constant:
    doc, cfg = env.doc, env.cfg
    atoms = atomize(doc, value)
    text = atoms[0].value if atoms and isinstance(atoms[0], StrItem) else ""
    if text and rng.random() < cfg.equal_operand_prob and '"' not in text:
        if want_prefix:
            return Constant(text[: rng.randint(1, len(text))])
        start = rng.randint(0, max(0, len(text) - 1))
        return Constant(text[start : start + rng.randint(1, 3)])
    return Constant(_random_string(rng))


def _build_comparison(
    rng: Random, env: _TargetEnv, expr: ExprNode, value: Value, depth_left: int
) -> ExprNode:
    op = rng.choice(COMPARISON_OPS)
    cfg = env.cfg
    if (
        rng.random() < cfg.operand_tree_prob
        and depth_left > 2
        and env.subject_budget > 1
    ):
        operand = _grow_chain(rng, env, depth_left - 1, want_boolean=False)
        if operand is None:
            operand = _corner_operand(rng, env.doc, value, cfg)
    else:
        operand = _corner_operand(rng, env.doc, value, cfg)
    if rng.random() < 0.3:
        return Binary(op, operand, expr)
    return Binary(op, expr, operand)


_ORDER_COMPARISONS = ("<", "<=", ">", ">=")


def _paired_bound_comparison(rng: Random, expr: ExprNode) -> ExprNode | None:
    """The opposite half of a range check over the same subject.

    Given `s >= 0`, produces something like `s <= 1`, so disjunctions probe
    boundary tautologies the way `@t >= 0 or @t <= 1` did.
    """
    if not (isinstance(expr, Binary) and expr.op in _ORDER_COMPARISONS):
        return None
    lhs_const = isinstance(expr.lhs, Constant) and isinstance(expr.lhs.value, (int, float))
    rhs_const = isinstance(expr.rhs, Constant) and isinstance(expr.rhs.value, (int, float))
    if rhs_const and not lhs_const and not isinstance(expr.rhs.value, bool):
        subject, constant, op = expr.lhs, expr.rhs.value, expr.op
    elif lhs_const and not rhs_const and not isinstance(expr.lhs.value, bool):
        flip = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}
        subject, constant, op = expr.rhs, expr.lhs.value, flip[expr.op]
    else:
        return None
    paired = rng.choice(("<", "<=")) if op in (">", ">=") else rng.choice((">", ">="))
    nearby = Constant(int(constant) + rng.randint(-1, 3))
    if rng.random() < 0.3:
        return Binary({"<": ">", "<=": ">=", ">": "<", ">=": "<="}[paired], nearby, subject)
    return Binary(paired, subject, nearby)


def _reused_subject_comparison(
    rng: Random, env: _TargetEnv, expr: ExprNode, value: Value
) -> ExprNode | None:
    """A fresh comparison over a subject already occurring in `expr`.

    Produces shapes like `@t >= 0 or @t <= 1` that probe tautology-style
    rewrites in engines under test.
    """
    from .xpathast import SUBJECT_TYPES, walk_expr

    paired = _paired_bound_comparison(rng, expr)
    if paired is not None and rng.random() < 0.75:
        return paired
    subjects = [n for n in walk_expr(expr) if isinstance(n, SUBJECT_TYPES)]
    if not subjects:
        return None
    subject = rng.choice(subjects)
    try:
        subject_value = env.value_of(subject)
    except EvalError:
        return None
    return Binary(
        rng.choice(COMPARISON_OPS),
        subject,
        _corner_operand(rng, env.doc, subject_value, env.cfg),
    )


def _apply_entry(
    rng: Random,
    env: _TargetEnv,
    entry: CatalogEntry,
    expr: ExprNode,
    value: Value,
    depth_left: int,
) -> ExprNode | None:
    cfg = env.cfg
    name = entry.name
    if name in COMPARISON_OPS:
        return _build_comparison(rng, env, expr, value, depth_left)
    if name in ARITHMETIC_OPS:
        low, high = (1, 12) if name in ("div", "mod") else (-12, 12)
        constant = rng.randint(low, high)
        if constant == 0 and name in ("div", "mod"):
            constant = 1
        if name in ("div", "mod") and rng.random() < 0.5:
            constant = -constant
        operand = Constant(constant)
        if rng.random() < 0.3 and name in ("+", "*"):
            return Binary(name, operand, expr)
        return Binary(name, expr, operand)
    if name == "negate":
        return Unary("negate", expr)
    if name in ("and", "or"):
        other: ExprNode | None = None
        if rng.random() < cfg.subject_reuse_prob:
            other = _reused_subject_comparison(rng, env, expr, value)
        if other is None and depth_left > 2 and env.subject_budget > 1:
            other = _grow_chain(rng, env, depth_left - 1, want_boolean=True)
        if other is None:
            other = Constant(rng.random() < 0.5)
        if rng.random() < 0.5:
            return Binary(name, other, expr)
        return Binary(name, expr, other)
    if name == "to":
        atom = atomize(env.doc, value)[0]
        base = atom.value if isinstance(atom, IntItem) else int(parse_number(atom.value, cfg.standard))
        return RangeTo(expr, Constant(base + rng.randint(0, 3)))
    if name == "not":
        return FunctionCall("not", (expr,))
    if name == "starts-with":
        return FunctionCall(name, (expr, _second_string_arg(rng, env, value, want_prefix=True)))
    if name == "contains":
        return FunctionCall(name, (expr, _second_string_arg(rng, env, value, want_prefix=False)))
    if name == "concat":
        return FunctionCall(name, (expr, Constant(_random_string(rng))))
    if name == "substring":
        length = len(atomize(env.doc, value)[0].value) if value else 0
        start = Constant(rng.randint(1, max(1, length)))
        if rng.random() < 0.5:
            return FunctionCall(name, (expr, start))
        return FunctionCall(name, (expr, start, Constant(rng.randint(0, max(1, length)))))
    if name == "subsequence":
        size = len(value)
        start = rng.randint(1, max(1, size))
        if rng.random() < 0.35:
            return FunctionCall(name, (expr, Constant(start)))
        remaining = size - start + 1
        if remaining >= 2 and rng.random() < 0.7:
            # in-range window of >= 2 items; keeps every position observable
            length = rng.randint(2, remaining)
        else:
            length = rng.randint(0, max(1, size))
        return FunctionCall(name, (expr, Constant(start), Constant(length)))
    if name == "string-join":
        return FunctionCall(name, (expr, Constant(rng.choice(("", " ", ",")))))
    if name in catalog.FUNCTION_NAMES:
        return FunctionCall(name, (expr,))
    return None


def _grow_chain(
    rng: Random, env: _TargetEnv, depth_left: int, want_boolean: bool
) -> ExprNode | None:
    """Bottom-up chain: subject, then functions drawn from the catalog by the
    tracked kind of the current sub-expression."""
    cfg = env.cfg
    if env.subject_budget <= 0:
        return None
    expr = _draw_subject(rng, env)
    applications = 0
    while True:
        try:
            value = env.value_of(expr)
        except EvalError:
            return None
        kind = kind_of(value)
        if expr_depth(expr) >= depth_left or count_subjects(expr) >= cfg.max_subjects:
            break
        if applications > 0 and rng.random() > cfg.chain_continue_prob:
            break
        entries = [
            e
            for e in catalog.functions_accepting(kind, cfg.standard)
            if _entry_applicable(e, env, value, kind)
        ]
        if not entries:
            break
        entry = _weighted_choice(rng, entries, lambda e: _entry_weight(e, kind))
        grown = _apply_entry(rng, env, entry, expr, value, depth_left)
        if (
            grown is None
            or expr_depth(grown) > depth_left
            or count_subjects(grown) > cfg.max_subjects
        ):
            break
        expr = grown
        applications += 1
    if not want_boolean:
        return expr
    return _ensure_boolean(rng, env, expr)


def _ensure_boolean(rng: Random, env: _TargetEnv, expr: ExprNode) -> ExprNode | None:
    """Finalize a chain into a boolean-valued predicate body."""
    try:
        value = env.value_of(expr)
    except EvalError:
        return None
    kind = kind_of(value)
    if kind is Kind.BOOLEAN:
        return expr
    if kind in (Kind.NUMBER, Kind.STRING):
        return _build_comparison(rng, env, expr, value, depth_left=2)
    if kind is Kind.NODESET:
        if rng.random() < 0.5:
            return _build_comparison(rng, env, expr, value, depth_left=2)
        return FunctionCall("boolean", (expr,))
    if env.cfg.standard is XPathStandard.V3_0:
        return FunctionCall("exists", (expr,))
    return FunctionCall("boolean", (expr,))


def generate_predicate(
    rng: Random,
    doc: XmlDocument,
    target: int,
    cfg: GenConfig,
    position: int = 1,
    size: int = 1,
    designated: Designated = _DESIGNATED,
) -> ExprNode | None:
    """A boolean predicate body grown bottom-up from the targeted node.

    The chain budget leaves headroom under cfg.max_depth for the boolean
    finalization wrap (one level) and rectification (at most a not() along
    one path plus the exact-negation fallback; two levels).
    """
    env = _TargetEnv(doc, target, position, size, cfg, designated)
    return _grow_chain(rng, env, max(2, cfg.max_depth - 3), want_boolean=True)


# --- untargeted predicate construction ----------------------------------------

_STATIC_SUBJECT_KINDS = {
    ContextItem: Kind.NODESET,
    AttributeRef: Kind.NODESET,
    ChildPathSubject: Kind.NODESET,
    TextCall: Kind.STRING,
    RangeTo: Kind.SEQUENCE,
}


def _global_pools(doc: XmlDocument) -> tuple[list[str], list[str]]:
    tags = sorted({node.tag for node in doc.nodes.values()})
    attrs = sorted({name for node in doc.nodes.values() for name in node.attributes})
    return tags, attrs


def _untargeted_subject(rng: Random, doc: XmlDocument, cfg: GenConfig) -> ExprNode:
    tags, attrs = _global_pools(doc)
    choices = ["context", "attr", "child", "text"]
    if cfg.standard is XPathStandard.V3_0:
        choices.append("range")
    pick = rng.choice(choices)
    if pick == "context":
        return ContextItem()
    if pick == "attr":
        return AttributeRef(rng.choice(attrs)) if attrs else AttributeRef(None)
    if pick == "child":
        return ChildPathSubject(rng.choice(tags))
    if pick == "text":
        return TextCall()
    lo = rng.randint(1, 3)
    return RangeTo(Constant(lo), Constant(lo + rng.randint(0, 3)))


def _untargeted_apply(
    rng: Random, cfg: GenConfig, entry: CatalogEntry, expr: ExprNode
) -> ExprNode | None:
    name = entry.name
    if name in COMPARISON_OPS:
        if rng.random() < 0.3:
            return Binary(name, _random_constant(rng), expr)
        return Binary(name, expr, _random_constant(rng))
    if name in ARITHMETIC_OPS:
        constant = rng.randint(-12, 12)
        if constant == 0 and name in ("div", "mod"):
            constant = 1
        return Binary(name, expr, Constant(constant))
    if name == "negate":
        return Unary("negate", expr)
    if name in ("and", "or"):
        return Binary(name, expr, Constant(rng.random() < 0.5))
    if name == "to":
        return RangeTo(expr, Constant(rng.randint(1, 6)))
    if name == "not":
        return FunctionCall("not", (expr,))
    if name in ("starts-with", "contains", "concat"):
        return FunctionCall(name, (expr, Constant(_random_string(rng))))
    if name == "substring":
        if rng.random() < 0.5:
            return FunctionCall(name, (expr, Constant(rng.randint(0, 6))))
        return FunctionCall(name, (expr, Constant(rng.randint(0, 6)), Constant(rng.randint(0, 6))))
    if name == "subsequence":
        if rng.random() < 0.5:
            return FunctionCall(name, (expr, Constant(rng.randint(0, 4))))
        return FunctionCall(name, (expr, Constant(rng.randint(0, 4)), Constant(rng.randint(0, 4))))
    if name == "string-join":
        return FunctionCall(name, (expr, Constant(rng.choice(("", " ", ",")))))
    if name in catalog.FUNCTION_NAMES:
        return FunctionCall(name, (expr,))
    return None


def generate_predicate_untargeted(rng: Random, doc: XmlDocument, cfg: GenConfig) -> ExprNode:
    """A predicate body built from global pools with static kind tracking;
    nothing guarantees it references existing context or evaluates cleanly."""
    # Same headroom as targeted generation: one level for the boolean wrap
    # plus two for the rectification rewrites applied in untargeted+rectify.
    expr = _untargeted_subject(rng, doc, cfg)
    kind = _STATIC_SUBJECT_KINDS[type(expr)]
    applications = 0
    while expr_depth(expr) < cfg.max_depth - 3 and count_subjects(expr) < cfg.max_subjects:
        if applications > 0 and rng.random() > cfg.chain_continue_prob:
            break
        entries = [
            e
            for e in catalog.functions_accepting(kind, cfg.standard)
            if cfg.allow_has_children or e.name != "has-children"
        ]
        if not entries:
            break
        entry = _weighted_choice(rng, entries, lambda e: _entry_weight(e, kind))
        grown = _untargeted_apply(rng, cfg, entry, expr)
        if grown is None:
            break
        expr = grown
        kind = entry.result
        applications += 1
    if kind is Kind.BOOLEAN:
        return expr
    if kind is Kind.SEQUENCE:
        if cfg.standard is XPathStandard.V3_0:
            return FunctionCall("exists", (expr,))
        return FunctionCall("boolean", (expr,))
    if rng.random() < 0.5:
        return Binary(rng.choice(COMPARISON_OPS), expr, _random_constant(rng))
    return FunctionCall("boolean", (expr,))


# --- rectification ------------------------------------------------------------

def _not(expr: ExprNode) -> ExprNode:
    return FunctionCall("not", (expr,))


def rectify_predicate(
    rng: Random,
    doc: XmlDocument,
    body: ExprNode,
    target: int,
    position: int,
    size: int,
    cfg: GenConfig,
    designated: Designated = _DESIGNATED,
) -> tuple[ExprNode, bool]:
    """Rewrite `body` so its effective boolean value holds at the target.

    Follows the rectification procedure: an untouched predicate that already
    selects the target, otherwise a coin-flip between wrapping in not() and
    an operator-specific rewrite (one child of `or`, both children of `and`,
    opposite comparison operator). Operator flipping is not a true negation
    under existential node-set semantics, so the result is re-checked and, if
    the target is still excluded, wrapped in not() as an exact fallback.

    Returns (body, fallback_used).
    """

    def holds(expr: ExprNode) -> bool:
        value = designated.expr_value(doc, target, position, size, cfg.standard, expr)
        return effective_boolean(doc, value, cfg.standard)

    def rewrite(expr: ExprNode) -> ExprNode:
        if holds(expr):
            return expr
        if rng.random() < cfg.not_wrap_prob:
            return _not(expr)
        if isinstance(expr, Binary) and expr.op == "or":
            if rng.random() < 0.5:
                return Binary("or", rewrite(expr.lhs), expr.rhs)
            return Binary("or", expr.lhs, rewrite(expr.rhs))
        if isinstance(expr, Binary) and expr.op == "and":
            return Binary("and", rewrite(expr.lhs), rewrite(expr.rhs))
        if isinstance(expr, Binary) and expr.op in OPPOSITE_COMPARISON:
            return Binary(OPPOSITE_COMPARISON[expr.op], expr.lhs, expr.rhs)
        return _not(expr)

    rectified = rewrite(body)
    if holds(rectified):
        return rectified, False
    return _not(rectified), True


# --- positional predicates ------------------------------------------------------

def generate_positional_predicate(
    rng: Random, target_position: int, context_size: int
) -> Predicate:
    """A numeric predicate that evaluates exactly to the target position."""
    if not 1 <= target_position <= context_size:
        raise ValueError("target position outside the context")
    forms = ["const", "const", "const", "sum", "diff"]
    if target_position == context_size:
        forms.append("last")
    form = rng.choice(forms)
    if form == "sum":
        k = rng.randint(0, target_position)
        body: ExprNode = Binary("+", Constant(k), Constant(target_position - k))
    elif form == "diff":
        k = rng.randint(1, 3)
        body = Binary("-", Constant(target_position + k), Constant(k))
    elif form == "last":
        body = FunctionCall("last")
    else:
        body = Constant(target_position)
    return Predicate("positional", body)


# --- whole-query generation -----------------------------------------------------

def _locate_target(
    batches: list[tuple[int, list[int]]], target: int
) -> tuple[int, int, int] | None:
    """(batch index, 1-based position, batch size) of the first batch holding
    the target; predicates preserve membership through this batch."""
    for index, (_, batch) in enumerate(batches):
        if target in batch:
            return index, batch.index(target) + 1, len(batch)
    return None


def _filter_all(
    designated: Designated,
    doc: XmlDocument,
    batches: list[tuple[int, list[int]]],
    predicate: Predicate,
    standard: XPathStandard,
) -> list[tuple[int, list[int]]]:
    return [
        (origin, designated.filter_batch(doc, batch, predicate, standard))
        for origin, batch in batches
    ]


def _generate_section(
    rng: Random,
    doc: XmlDocument,
    cfg: GenConfig,
    origins: list[int],
    designated: Designated,
) -> tuple[Section, list[int], SectionTrace]:
    targeted = cfg.mode == "targeted"
    attempts = cfg.max_retries if cfg.rectify else 1
    for _ in range(attempts):
        prefix, batches = generate_section_prefix(rng, doc, origins, cfg, designated)
        candidates = designated.merge(doc, batches)
        trace = SectionTrace(candidates=candidates, target=None, rectified=False, fallback_not=False)
        target = None
        location = None
        if candidates and (targeted or cfg.rectify):
            target = select_target(rng, candidates)
            trace.target = target
            location = _locate_target(batches, target)

        predicates: list[Predicate] = []
        n_predicates = rng.randint(*cfg.predicates_per_section)
        failed = False
        for _ in range(n_predicates):
            if target is not None and location is not None and rng.random() < cfg.positional_prob:
                predicate = generate_positional_predicate(rng, location[1], location[2])
            else:
                if targeted and target is not None:
                    position, size = (location[1], location[2]) if location else (1, 1)
                    body = generate_predicate(rng, doc, target, cfg, position, size, designated)
                else:
                    body = generate_predicate_untargeted(rng, doc, cfg)
                if body is None:
                    failed = True
                    break
                if cfg.rectify and target is not None and location is not None:
                    try:
                        body, fallback = rectify_predicate(
                            rng, doc, body, target, location[1], location[2], cfg, designated
                        )
                        trace.rectified = True
                        trace.fallback_not = trace.fallback_not or fallback
                    except EvalError:
                        failed = True
                        break
                predicate = Predicate("boolean", body)
            try:
                batches = _filter_all(designated, doc, batches, predicate, cfg.standard)
            except EvalError:
                if cfg.rectify:
                    failed = True
                    break
                # Without rectification an erroring predicate is a legitimate
                # test case; the running result is treated as exhausted.
                predicates.append(predicate)
                trace.result = []
                return Section(prefix, tuple(predicates)), [], trace
            predicates.append(predicate)
            if target is not None:
                location = _locate_target(batches, target)
                if cfg.rectify and location is None:
                    raise AssertionError("rectified predicate dropped its target")
                if location is None:
                    target = None

        result = designated.merge(doc, batches)
        if failed or (cfg.rectify and not result):
            continue
        trace.result = result
        return Section(prefix, tuple(predicates)), result, trace

    # Retries exhausted: fall back to the bare prefix, which is nonempty by
    # construction of the applicability checks.
    prefix, batches = generate_section_prefix(rng, doc, origins, cfg, designated)
    result = designated.merge(doc, batches)
    trace = SectionTrace(candidates=result, target=None, rectified=False, fallback_not=False)
    if result and (targeted or cfg.rectify):
        trace.target = select_target(rng, result)
    trace.result = result
    return Section(prefix), result, trace


def _blind_section(rng: Random, doc: XmlDocument, cfg: GenConfig) -> Section:
    prefix = _blind_prefix(rng, doc, cfg)
    predicates = tuple(
        Predicate("boolean", generate_predicate_untargeted(rng, doc, cfg))
        for _ in range(rng.randint(*cfg.predicates_per_section))
    )
    return Section(prefix, predicates)


def generate_query(
    rng: Random,
    doc: XmlDocument,
    cfg: GenConfig,
    designated: Designated | None = None,
) -> tuple[XPathExpr, GenTrace]:
    """One query per the configured mode, plus its generation trace.

    In targeted+rectify mode the designated evaluator is guaranteed a
    non-empty, error-free result containing each section's targeted node.
    Targeted-without-rectification stops extending once a section comes back
    empty; untargeted-without-rectification keeps extending blindly.
    """
    designated = designated or _DESIGNATED
    n_sections = rng.randint(*cfg.sections_range)
    origins: list[int] = [DOC_ORIGIN]
    sections: list[Section] = []
    trace = GenTrace()

    for index in range(n_sections):
        if sections and not origins:
            if cfg.mode == "untargeted" and not cfg.rectify:
                sections.append(_blind_section(rng, doc, cfg))
                trace.sections.append(
                    SectionTrace(candidates=[], target=None, rectified=False, fallback_not=False)
                )
                continue
            trace.stopped_early = True
            break
        section, origins, strace = _generate_section(rng, doc, cfg, origins, designated)
        sections.append(section)
        trace.sections.append(strace)
        if cfg.mode == "targeted" and not cfg.rectify and not origins:
            # empty running result: no further sections get generated
            trace.stopped_early = index + 1 < n_sections
            break

    trace.final = list(origins)
    return XPathExpr(tuple(sections), cfg.standard), trace
