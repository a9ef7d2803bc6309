"""Random XML document generation from node templates.

A node template fixes a tag, a set of typed attributes and a content kind;
instantiating one fills in random values. Documents are built by creating n
nodes, linking node k (k >= 2) to a uniformly chosen earlier node, and then
instantiating every node from a randomly assigned template. Ids run 1..n and
node 1 is the root, so the structure is a tree by construction while still
allowing recursive tag nesting.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from random import Random

from .xmldoc import ElementNode, TypedValue, XmlDocument

CONTENT_KINDS = ("integer", "string", "none", "children")

STRING_ALPHABET = string.ascii_lowercase + " "

# Tag pool: A..Z then AA, AB, ... Attribute pool: a..z then two-letter codes,
# with the reserved name `id` skipped.
_UPPER = string.ascii_uppercase
_LOWER = string.ascii_lowercase
TAG_POOL = list(_UPPER) + [a + b for a in _UPPER for b in _UPPER]
ATTR_NAME_POOL = [n for n in list(_LOWER) + [a + b for a in _LOWER for b in _LOWER] if n != "id"]


@dataclass(frozen=True)
class NodeTemplate:
    tag: str
    attribute_specs: tuple[tuple[str, str], ...]  # (name, kind), kind in {integer,string}
    content_kind: str  # one of CONTENT_KINDS


@dataclass(frozen=True)
class DocGenConfig:
    node_count_range: tuple[int, int] = (1, 50)
    attr_count_range: tuple[int, int] = (0, 3)
    string_length_range: tuple[int, int] = (0, 10)
    integer_range: tuple[int, int] = (-100, 100)
    rng_seed: int = 0

    def __post_init__(self):
        for lo, hi in (
            self.node_count_range,
            self.attr_count_range,
            self.string_length_range,
            self.integer_range,
        ):
            if lo > hi:
                raise ValueError(f"empty range [{lo}, {hi}]")
        if self.node_count_range[0] < 1:
            raise ValueError("documents need at least one node")


def template_count_for(node_count: int) -> int:
    """Half as many templates as element nodes, rounded up."""
    return max(1, math.ceil(node_count / 2))


def generate_templates(rng: Random, count: int, cfg: DocGenConfig = DocGenConfig()) -> list[NodeTemplate]:
    """`count` templates with distinct tags.

    Attribute names are drawn from a shared pool and each name is bound to a
    single kind across the whole template set, so a name never switches
    between integer and string within one document.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if count > len(TAG_POOL):
        raise ValueError(f"at most {len(TAG_POOL)} templates supported")
    tags = TAG_POOL[: max(count, 8)]
    rng.shuffle(tags)
    tags = tags[:count]

    name_kinds: dict[str, str] = {}
    templates = []
    for tag in tags:
        n_attrs = rng.randint(*cfg.attr_count_range)
        names: list[str] = []
        pool = ATTR_NAME_POOL[:8]
        for _ in range(n_attrs):
            name = rng.choice(pool)
            if name in names:
                continue
            names.append(name)
        specs = []
        for name in names:
            if name not in name_kinds:
                name_kinds[name] = rng.choice(("integer", "string"))
            specs.append((name, name_kinds[name]))
        content_kind = rng.choice(CONTENT_KINDS)
        templates.append(NodeTemplate(tag, tuple(specs), content_kind))
    return templates


def _random_string(rng: Random, cfg: DocGenConfig) -> str:
    length = rng.randint(*cfg.string_length_range)
    return "".join(rng.choice(STRING_ALPHABET) for _ in range(length))


def instantiate_node(
    rng: Random,
    template: NodeTemplate,
    id: int,
    cfg: DocGenConfig = DocGenConfig(),
    has_children: bool = False,
) -> ElementNode:
    """Fill in attribute and text values for one node.

    The reserved `id` attribute always comes first and equals the node id.
    Nodes that end up with children carry no text, whatever the template's
    content kind says; an empty drawn string likewise yields no text node.
    """
    attrs: dict[str, TypedValue] = {}
    for name, kind in template.attribute_specs:
        if kind == "integer":
            attrs[name] = TypedValue("integer", rng.randint(*cfg.integer_range))
        else:
            attrs[name] = TypedValue("string", _random_string(rng, cfg))
    text = None
    if template.content_kind == "integer":
        text = TypedValue("integer", rng.randint(*cfg.integer_range))
    elif template.content_kind == "string":
        drawn = _random_string(rng, cfg)
        text = TypedValue("string", drawn) if drawn else None
    if has_children:
        text = None
    return ElementNode(id, template.tag, attrs, text=text)


def generate_document(rng: Random | None, cfg: DocGenConfig = DocGenConfig()) -> XmlDocument:
    """One random document; (rng state, cfg) fully determines the result."""
    if rng is None:
        rng = Random(cfg.rng_seed)
    n = rng.randint(*cfg.node_count_range)
    templates = generate_templates(rng, template_count_for(n), cfg)

    parents: dict[int, int | None] = {1: None}
    children: dict[int, list[int]] = {nid: [] for nid in range(1, n + 1)}
    for nid in range(2, n + 1):
        parent = rng.randint(1, nid - 1)
        parents[nid] = parent
        children[parent].append(nid)

    assigned = {nid: rng.choice(templates) for nid in range(1, n + 1)}

    nodes: dict[int, ElementNode] = {}
    for nid in range(1, n + 1):
        node = instantiate_node(rng, assigned[nid], nid, cfg, has_children=bool(children[nid]))
        node.parent = parents[nid]
        node.children = children[nid]
        nodes[nid] = node
    return XmlDocument(1, nodes)
