"""Closed, versioned function and operator catalog.

Each entry records which first-operand value kinds it accepts per standard,
its static result kind, its minimum standard and its arity. The registry is
the single source of truth for generation (picking applicable function
nodes), validation (arity/standard gating) and rendering closure.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .xpathast import XPathStandard


class Kind(Enum):
    NUMBER = "number"
    STRING = "string"
    BOOLEAN = "boolean"
    NODESET = "node-set"
    SEQUENCE = "sequence"


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    form: str  # "function" | "operator"
    accepts_v1: frozenset[Kind]
    accepts_v3: frozenset[Kind]
    result: Kind
    min_standard: XPathStandard
    arity: tuple[int, int | None]  # (min, max); max None = variadic

    def accepts(self, kind: Kind, standard: XPathStandard) -> bool:
        table = self.accepts_v3 if standard is XPathStandard.V3_0 else self.accepts_v1
        return kind in table


def _ks(*kinds: Kind) -> frozenset[Kind]:
    return frozenset(kinds)


_NONE = _ks()
_V1 = XPathStandard.V1_0
_V3 = XPathStandard.V3_0

_N = Kind.NUMBER
_S = Kind.STRING
_B = Kind.BOOLEAN
_NS = Kind.NODESET
_SQ = Kind.SEQUENCE

_EBV_V1 = _ks(_N, _S, _B, _NS)
_EBV_V3 = _ks(_N, _S, _B, _NS)  # general sequences have no EBV in 3.0
_ANY = _ks(_N, _S, _B, _NS, _SQ)

CATALOG: tuple[CatalogEntry, ...] = (
    # XPath 1.0 core functions
    CatalogEntry("count", "function", _ks(_NS), _ks(_NS, _SQ), _N, _V1, (1, 1)),
    CatalogEntry("position", "function", _NONE, _NONE, _N, _V1, (0, 0)),
    CatalogEntry("last", "function", _NONE, _NONE, _N, _V1, (0, 0)),
    CatalogEntry("not", "function", _EBV_V1, _EBV_V3, _B, _V1, (1, 1)),
    CatalogEntry("boolean", "function", _EBV_V1, _EBV_V3, _B, _V1, (1, 1)),
    CatalogEntry("number", "function", _ANY, _ks(_N, _S, _NS), _N, _V1, (0, 1)),
    CatalogEntry("string", "function", _ANY, _ks(_N, _S, _B, _NS), _S, _V1, (0, 1)),
    CatalogEntry("string-length", "function", _ks(_S, _NS), _ks(_S, _NS), _N, _V1, (0, 1)),
    CatalogEntry("starts-with", "function", _ks(_S, _NS), _ks(_S, _NS), _B, _V1, (2, 2)),
    CatalogEntry("contains", "function", _ks(_S, _NS), _ks(_S, _NS), _B, _V1, (2, 2)),
    CatalogEntry("concat", "function", _ks(_S, _NS), _ks(_S, _NS), _S, _V1, (2, None)),
    CatalogEntry("substring", "function", _ks(_S, _NS), _ks(_S, _NS), _S, _V1, (2, 3)),
    CatalogEntry("floor", "function", _ks(_N, _NS), _ks(_N, _NS), _N, _V1, (1, 1)),
    CatalogEntry("ceiling", "function", _ks(_N, _NS), _ks(_N, _NS), _N, _V1, (1, 1)),
    CatalogEntry("round", "function", _ks(_N, _NS), _ks(_N, _NS), _N, _V1, (1, 1)),
    CatalogEntry("sum", "function", _ks(_NS), _ks(_NS, _SQ), _N, _V1, (1, 1)),
    CatalogEntry("name", "function", _ks(_NS), _ks(_NS), _S, _V1, (0, 1)),
    CatalogEntry("true", "function", _NONE, _NONE, _B, _V1, (0, 0)),
    CatalogEntry("false", "function", _NONE, _NONE, _B, _V1, (0, 0)),
    CatalogEntry("text", "function", _NONE, _NONE, _S, _V1, (0, 0)),
    # XPath 3.0 additions
    CatalogEntry("subsequence", "function", _NONE, _ks(_NS, _SQ), _SQ, _V3, (2, 3)),
    CatalogEntry("tail", "function", _NONE, _ks(_NS, _SQ), _SQ, _V3, (1, 1)),
    CatalogEntry("head", "function", _NONE, _ks(_NS, _SQ), _SQ, _V3, (1, 1)),
    CatalogEntry("exists", "function", _NONE, _ks(_NS, _SQ), _B, _V3, (1, 1)),
    CatalogEntry("empty", "function", _NONE, _ks(_NS, _SQ), _B, _V3, (1, 1)),
    CatalogEntry("abs", "function", _NONE, _ks(_N, _NS), _N, _V3, (1, 1)),
    CatalogEntry("min", "function", _NONE, _ks(_N, _NS, _SQ), _N, _V3, (1, 1)),
    CatalogEntry("max", "function", _NONE, _ks(_N, _NS, _SQ), _N, _V3, (1, 1)),
    CatalogEntry("string-join", "function", _NONE, _ks(_S, _NS, _SQ), _S, _V3, (2, 2)),
    CatalogEntry("has-children", "function", _NONE, _ks(_NS), _B, _V3, (0, 1)),
    # operators
    CatalogEntry("+", "operator", _ks(_N, _NS), _ks(_N, _NS), _N, _V1, (2, 2)),
    CatalogEntry("-", "operator", _ks(_N, _NS), _ks(_N, _NS), _N, _V1, (2, 2)),
    CatalogEntry("*", "operator", _ks(_N, _NS), _ks(_N, _NS), _N, _V1, (2, 2)),
    CatalogEntry("div", "operator", _ks(_N, _NS), _ks(_N, _NS), _N, _V1, (2, 2)),
    CatalogEntry("mod", "operator", _ks(_N, _NS), _ks(_N, _NS), _N, _V1, (2, 2)),
    CatalogEntry("=", "operator", _ANY, _ANY, _B, _V1, (2, 2)),
    CatalogEntry("!=", "operator", _ANY, _ANY, _B, _V1, (2, 2)),
    CatalogEntry("<", "operator", _ANY, _ANY, _B, _V1, (2, 2)),
    CatalogEntry("<=", "operator", _ANY, _ANY, _B, _V1, (2, 2)),
    CatalogEntry(">", "operator", _ANY, _ANY, _B, _V1, (2, 2)),
    CatalogEntry(">=", "operator", _ANY, _ANY, _B, _V1, (2, 2)),
    CatalogEntry("and", "operator", _EBV_V1, _EBV_V3, _B, _V1, (2, 2)),
    CatalogEntry("or", "operator", _EBV_V1, _EBV_V3, _B, _V1, (2, 2)),
    CatalogEntry("negate", "operator", _ks(_N, _NS), _ks(_N, _NS), _N, _V1, (1, 1)),
    CatalogEntry("to", "operator", _NONE, _ks(_N), _SQ, _V3, (2, 2)),
)

_BY_NAME = {e.name: e for e in CATALOG}

FUNCTION_NAMES = frozenset(e.name for e in CATALOG if e.form == "function")
COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")
ARITHMETIC_OPS = ("+", "-", "*", "div", "mod")


def entry(name: str) -> CatalogEntry | None:
    return _BY_NAME.get(name)


def functions_accepting(kind: Kind, standard: XPathStandard) -> list[CatalogEntry]:
    """Catalog entries whose first parameter accepts `kind` under `standard`.

    Zero-argument entries never appear (they accept nothing). Order follows
    the registry, so callers drawing with a seeded RNG stay deterministic.
    """
    return [
        e
        for e in CATALOG
        if standard.allows(e.min_standard) and e.accepts(kind, standard)
    ]
