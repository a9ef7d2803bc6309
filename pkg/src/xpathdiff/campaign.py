"""Campaign orchestration: budgeted generate/execute/compare loops.

Seeds are derived hierarchically (campaign seed, document index, query
index), so any recorded case replays in O(1) without rerunning the campaign
and worker lanes stay deterministic regardless of scheduling. Discrepancy
records go to an append-only JSONL stream with full replay provenance;
records never contain wall-clock data so identical configurations produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from random import Random

from .docgen import DocGenConfig, generate_document
from .harness import (
    Discrepancy,
    EngineConfigError,
    EngineResult,
    EngineSpec,
    TestCase,
    compare,
    mutant_engine,
    run_engine,
)
from .querygen import GenConfig, generate_query
from .xmldoc import serialize
from .xpathast import XPathStandard, render

HANDSHAKE_DOC = '<T id="1"/>'


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from structured parts (never Python's salted hash)."""
    digest = hashlib.sha256("/".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class CampaignConfig:
    engines: list[EngineSpec]
    doc_gen: DocGenConfig = field(default_factory=DocGenConfig)
    query_gen: GenConfig = field(default_factory=GenConfig)
    seed: int = 0
    cases: int | None = 1000
    duration_s: float | None = None
    out_dir: str | None = None
    suppress: frozenset[str] = frozenset()
    lanes: int = 1
    drain: bool = False

    def __post_init__(self):
        if len(self.engines) < 2:
            raise EngineConfigError("a campaign needs at least two engines")
        standards = {spec.standard for spec in self.engines}
        if standards != {self.query_gen.standard}:
            raise EngineConfigError(
                "all engines must share the campaign standard "
                f"{self.query_gen.standard.value}; got {sorted(s.value for s in standards)}"
            )
        names = [spec.name for spec in self.engines]
        if len(set(names)) != len(names):
            raise EngineConfigError(f"duplicate engine names: {names}")
        if self.cases is None and self.duration_s is None:
            raise EngineConfigError("set a case budget or a duration")
        if self.lanes < 1:
            raise EngineConfigError("lanes must be >= 1")


@dataclass
class CampaignReport:
    cases: int = 0
    nonempty: int = 0
    discrepancies: int = 0
    suppressed: int = 0
    unique_fingerprints: int = 0
    fingerprints: list[str] = field(default_factory=list)
    per_engine: dict = field(default_factory=dict)
    wall_s: float = 0.0
    throughput_cps: float = 0.0
    mode: str = "targeted"
    rectify: bool = True
    standard: str = "1.0"

    @property
    def nonempty_rate(self) -> float:
        return self.nonempty / self.cases if self.cases else 0.0

    def to_json(self) -> str:
        payload = asdict(self)
        payload["nonempty_rate"] = self.nonempty_rate
        return json.dumps(payload, sort_keys=True, indent=2)

    @staticmethod
    def from_json(text: str) -> "CampaignReport":
        payload = json.loads(text)
        payload.pop("nonempty_rate", None)
        return CampaignReport(**payload)


def handshake(cfg: CampaignConfig) -> None:
    """Dry-run every engine on a trivial case; abort on misconfiguration."""
    from .xpathast import Section, SectionPrefix, XPathExpr

    expr = XPathExpr(
        (Section(SectionPrefix("slash", "child", "T")),), cfg.query_gen.standard
    )
    case = TestCase(
        doc_text=HANDSHAKE_DOC,
        query_text=render(expr),
        standard=cfg.query_gen.standard,
        expr=expr,
    )
    for spec in cfg.engines:
        result = run_engine(spec, case)
        if result.outcome == "error" and result.error_class in ("spawn", "adapter", "no-ast"):
            raise EngineConfigError(
                f"engine {spec.name} failed the handshake: {result.error_class}"
            )


def _record_for(discrepancy: Discrepancy, lane: int, seq: int) -> dict:
    results = {}
    for name, result in discrepancy.results.items():
        entry: dict = {"outcome": result.outcome}
        if result.outcome == "nodes":
            entry["ids"] = list(result.node_ids)
        if result.error_class is not None:
            entry["class"] = result.error_class
        results[name] = entry
    case = discrepancy.case
    return {
        "doc": case.doc_text,
        "fingerprint": discrepancy.fingerprint,
        "klass": discrepancy.klass,
        "lane": lane,
        "provenance": case.provenance,
        "query": case.query_text,
        "results": results,
        "standard": case.standard.value,
        "seq": seq,
    }


def record_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _lane_case_budget(cfg: CampaignConfig, lane: int) -> int | None:
    if cfg.cases is None:
        return None
    base, extra = divmod(cfg.cases, cfg.lanes)
    return base + (1 if lane < extra else 0)


def _run_lane(cfg: CampaignConfig, lane: int, deadline: float | None) -> tuple[list[dict], CampaignReport]:
    report = CampaignReport(
        mode=cfg.query_gen.mode,
        rectify=cfg.query_gen.rectify,
        standard=cfg.query_gen.standard.value,
    )
    report.per_engine = {spec.name: {"errors": 0, "timeouts": 0} for spec in cfg.engines}
    records: list[dict] = []
    seen_fingerprints: set[str] = set()
    budget = _lane_case_budget(cfg, lane)
    if budget == 0:
        return records, report

    doc_index = lane
    seq = 0
    exhausted = False

    def over_budget() -> bool:
        if budget is not None and report.cases >= budget:
            return True
        return deadline is not None and time.monotonic() >= deadline

    while not exhausted and not over_budget():
        doc = generate_document(Random(derive_seed(cfg.seed, "doc", doc_index)), cfg.doc_gen)
        doc_text = serialize(doc)
        for query_index in range(cfg.query_gen.queries_per_doc):
            if over_budget() and not cfg.drain:
                # without --drain the in-flight document is abandoned
                exhausted = True
                break
            rng = Random(derive_seed(cfg.seed, "query", doc_index, query_index))
            expr, trace = generate_query(rng, doc, cfg.query_gen)
            case = TestCase(
                doc_text=doc_text,
                query_text=render(expr),
                standard=cfg.query_gen.standard,
                provenance={
                    "seed": cfg.seed,
                    "doc_index": doc_index,
                    "query_index": query_index,
                },
                expr=expr,
                doc=doc,
            )
            results = {spec.name: run_engine(spec, case) for spec in cfg.engines}
            report.cases += 1
            if trace.final:
                report.nonempty += 1
            for name, result in results.items():
                if result.outcome == "error":
                    report.per_engine[name]["errors"] += 1
                elif result.outcome == "timeout":
                    report.per_engine[name]["timeouts"] += 1
            discrepancy = compare(case, results)
            if discrepancy is not None:
                if discrepancy.fingerprint in cfg.suppress:
                    report.suppressed += 1
                else:
                    report.discrepancies += 1
                    seen_fingerprints.add(discrepancy.fingerprint)
                    records.append(_record_for(discrepancy, lane, seq))
                    seq += 1
        doc_index += cfg.lanes
    report.fingerprints = sorted(seen_fingerprints)
    report.unique_fingerprints = len(seen_fingerprints)
    return records, report


def _lane_entry(args):
    cfg, lane, deadline_offset = args
    deadline = None if deadline_offset is None else time.monotonic() + deadline_offset
    return _run_lane(cfg, lane, deadline)


def run_campaign(cfg: CampaignConfig) -> CampaignReport:
    """Run to budget; merge lane outputs in (lane, seq) order; write files."""
    handshake(cfg)
    started = time.monotonic()
    if cfg.lanes == 1:
        deadline = None if cfg.duration_s is None else started + cfg.duration_s
        outputs = [_run_lane(cfg, 0, deadline)]
    else:
        with multiprocessing.get_context("fork").Pool(cfg.lanes) as pool:
            outputs = pool.map(
                _lane_entry, [(cfg, lane, cfg.duration_s) for lane in range(cfg.lanes)]
            )

    total = CampaignReport(
        mode=cfg.query_gen.mode,
        rectify=cfg.query_gen.rectify,
        standard=cfg.query_gen.standard.value,
    )
    total.per_engine = {spec.name: {"errors": 0, "timeouts": 0} for spec in cfg.engines}
    all_records: list[dict] = []
    fingerprints: set[str] = set()
    for records, lane_report in outputs:
        all_records.extend(records)
        total.cases += lane_report.cases
        total.nonempty += lane_report.nonempty
        total.discrepancies += lane_report.discrepancies
        total.suppressed += lane_report.suppressed
        fingerprints.update(lane_report.fingerprints)
        for name, counters in lane_report.per_engine.items():
            total.per_engine[name]["errors"] += counters["errors"]
            total.per_engine[name]["timeouts"] += counters["timeouts"]
    all_records.sort(key=lambda r: (r["lane"], r["seq"]))
    total.fingerprints = sorted(fingerprints)
    total.unique_fingerprints = len(fingerprints)
    total.wall_s = time.monotonic() - started
    total.throughput_cps = total.cases / total.wall_s if total.wall_s > 0 else 0.0

    if cfg.out_dir is not None:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "discrepancies.jsonl").open("w", encoding="utf-8") as handle:
            for record in all_records:
                handle.write(record_line(record) + "\n")
        (out / "report.json").write_text(total.to_json() + "\n", encoding="utf-8")
    return total


# --- replay ---------------------------------------------------------------------

def regenerate_case(cfg: CampaignConfig, provenance: dict) -> TestCase:
    """Rebuild a case bit-identically from (seed, doc index, query index)."""
    seed = provenance["seed"]
    doc_index = provenance["doc_index"]
    query_index = provenance["query_index"]
    doc = generate_document(Random(derive_seed(seed, "doc", doc_index)), cfg.doc_gen)
    rng = Random(derive_seed(seed, "query", doc_index, query_index))
    expr, _ = generate_query(rng, doc, cfg.query_gen)
    return TestCase(
        doc_text=serialize(doc),
        query_text=render(expr),
        standard=cfg.query_gen.standard,
        provenance=dict(provenance),
        expr=expr,
        doc=doc,
    )


@dataclass
class ReplayOutcome:
    record: dict
    results: dict[str, EngineResult]
    persists: bool
    klass: str | None
    fingerprint: str | None


def replay_record(cfg: CampaignConfig, record: dict) -> ReplayOutcome:
    """Re-execute a recorded discrepancy on the engines named in it."""
    by_name = {spec.name: spec for spec in cfg.engines}
    missing = [name for name in record["results"] if name not in by_name]
    if missing:
        raise EngineConfigError(
            f"replay needs engines {missing} which the configuration does not define"
        )
    case = regenerate_case(cfg, record["provenance"])
    if case.doc_text != record["doc"] or case.query_text != record["query"]:
        # Configuration drift: fall back to the recorded texts for external
        # engines; builtin engines cannot run without a regenerated AST.
        case = TestCase(
            doc_text=record["doc"],
            query_text=record["query"],
            standard=XPathStandard(record["standard"]),
            provenance=dict(record["provenance"]),
        )
    engines = [by_name[name] for name in sorted(record["results"])]
    results = {spec.name: run_engine(spec, case) for spec in engines}
    discrepancy = compare(case, results) if case.expr is not None else None
    return ReplayOutcome(
        record=record,
        results=results,
        persists=discrepancy is not None and discrepancy.klass == record["klass"],
        klass=discrepancy.klass if discrepancy else None,
        fingerprint=discrepancy.fingerprint if discrepancy else None,
    )


def load_records(path: str | Path) -> list[dict]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(json.loads(line))
    return records


def make_reduction_check(engines: list[EngineSpec], klass: str, pair: tuple[str, str]):
    """Does a candidate still split the same engine pair the same way?"""
    by_name = {spec.name: spec for spec in engines}
    chosen = [by_name[name] for name in pair]

    def check(case: TestCase) -> bool:
        results = {spec.name: run_engine(spec, case) for spec in chosen}
        found = compare(case, results)
        return found is not None and found.klass == klass

    return check


def witness_pair(discrepancy_results: dict[str, EngineResult], klass: str) -> tuple[str, str]:
    """A deterministic engine pair exhibiting the discrepancy."""
    names = sorted(discrepancy_results)
    if klass == "logic":
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                ra, rb = discrepancy_results[a], discrepancy_results[b]
                if ra.succeeded() and rb.succeeded() and ra.node_ids != rb.node_ids:
                    return a, b
    else:
        ok = next((n for n in names if discrepancy_results[n].succeeded()), None)
        bad = next((n for n in names if not discrepancy_results[n].succeeded()), None)
        if ok is not None and bad is not None:
            return tuple(sorted((ok, bad)))
    raise ValueError(f"results do not witness a {klass} discrepancy")


# --- stats ------------------------------------------------------------------------

def stats_table(reports: list[CampaignReport]) -> str:
    """Aggregate campaign reports into a four-column summary per mode."""
    header = ("Config", "Total cases", "Differences", "Unique fingerprints", "Non-empty result")
    rows = [header]
    for report in reports:
        label = f"{report.mode}{'' if report.rectify else ' w/o rect'} [{report.standard}]"
        rows.append(
            (
                label,
                str(report.cases),
                str(report.discrepancies),
                str(report.unique_fingerprints),
                f"{report.nonempty_rate:.0%}",
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for index, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if index == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(header))))
    return "\n".join(lines)


# --- configuration files -------------------------------------------------------

def _require(condition: bool, message: str):
    if not condition:
        raise EngineConfigError(message)


def engine_from_dict(entry: dict, standard: XPathStandard) -> EngineSpec:
    _require(isinstance(entry, dict), "engine entries must be objects")
    _require("kind" in entry, "engine entry needs a kind")
    kind = entry["kind"]
    name = entry.get("name", kind)
    if kind == "builtin_mutant":
        _require("mutation" in entry, "builtin_mutant engines need a mutation id")
        spec = mutant_engine(entry["mutation"], standard)
        return replace(spec, name=name)
    if kind == "subprocess":
        _require("command" in entry, "subprocess engines need a command template")
        return EngineSpec(
            name=name,
            kind=kind,
            standard=standard,
            command_template=entry["command"],
            timeout_ms=int(entry.get("timeout_ms", 10_000)),
        )
    return EngineSpec(name=name, kind=kind, standard=standard)


def engines_from_names(names: list[str], standard: XPathStandard) -> list[EngineSpec]:
    """Engine list from compact CLI notation: builtin_a, builtin_b,
    mutant:<mutation-id>."""
    specs = []
    for name in names:
        if name.startswith("mutant:"):
            specs.append(mutant_engine(name.split(":", 1)[1], standard))
        elif name in ("builtin_a", "builtin_b"):
            specs.append(EngineSpec(name=name, kind=name, standard=standard))
        else:
            raise EngineConfigError(
                f"unknown engine shorthand {name!r}; subprocess engines need a config file"
            )
    return specs


def _pair(value, name: str) -> tuple[int, int]:
    _require(
        isinstance(value, (list, tuple)) and len(value) == 2,
        f"{name} must be a two-element range",
    )
    return int(value[0]), int(value[1])


def config_from_dict(payload: dict) -> CampaignConfig:
    _require(isinstance(payload, dict), "configuration must be a JSON object")
    standard = XPathStandard(str(payload.get("standard", "1.0")))

    doc_gen_payload = payload.get("doc_gen", {})
    doc_kwargs = {}
    for key in ("node_count_range", "attr_count_range", "string_length_range", "integer_range"):
        if key in doc_gen_payload:
            doc_kwargs[key] = _pair(doc_gen_payload[key], key)
    doc_gen = DocGenConfig(**doc_kwargs)

    query_payload = dict(payload.get("query_gen", {}))
    query_kwargs = {"standard": standard}
    if "sections_range" in query_payload:
        query_kwargs["sections_range"] = _pair(query_payload.pop("sections_range"), "sections_range")
    if "predicates_per_section" in query_payload:
        query_kwargs["predicates_per_section"] = _pair(
            query_payload.pop("predicates_per_section"), "predicates_per_section"
        )
    for key, value in query_payload.items():
        query_kwargs[key] = value
    query_kwargs["mode"] = payload.get("mode", query_kwargs.get("mode", "targeted"))
    if "rectify" in payload:
        query_kwargs["rectify"] = bool(payload["rectify"])
    try:
        query_gen = GenConfig(**query_kwargs)
    except TypeError as exc:
        raise EngineConfigError(f"bad query_gen options: {exc}") from exc

    engines_payload = payload.get("engines", [])
    _require(isinstance(engines_payload, list), "engines must be a list")
    engines = [engine_from_dict(entry, standard) for entry in engines_payload]

    cases = payload.get("cases")
    duration_s = payload.get("duration_s")
    if cases is None and duration_s is None:
        cases = 1000
    return CampaignConfig(
        engines=engines,
        doc_gen=doc_gen,
        query_gen=query_gen,
        seed=int(payload.get("seed", 0)),
        cases=None if cases is None else int(cases),
        duration_s=None if duration_s is None else float(duration_s),
        out_dir=payload.get("out"),
        suppress=frozenset(payload.get("suppress", ())),
        lanes=int(payload.get("lanes", 1)),
        drain=bool(payload.get("drain", False)),
    )


def load_config(path: str | Path) -> CampaignConfig:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise EngineConfigError(f"configuration is not valid JSON: {exc}") from exc
    return config_from_dict(payload)
