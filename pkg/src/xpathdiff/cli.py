"""Command-line surface: generate, run, replay, reduce, stats."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from random import Random

from . import campaign as camp
from .docgen import generate_document
from .fixtures import run_fixtures, write_fixture_files
from .harness import EngineConfigError
from .querygen import generate_query
from .reducer import reduce_case
from .xmldoc import serialize
from .xpathast import XPathStandard, render


def _campaign_config(args) -> camp.CampaignConfig:
    if args.config:
        cfg = camp.load_config(args.config)
    else:
        cfg = camp.config_from_dict({"engines": [{"kind": "builtin_a"}, {"kind": "builtin_b"}]})
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "cases", None) is not None:
        overrides["cases"] = args.cases
        overrides["duration_s"] = None
    if getattr(args, "duration", None) is not None:
        overrides["duration_s"] = args.duration
        if getattr(args, "cases", None) is None:
            overrides["cases"] = None
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "suppress", None):
        overrides["suppress"] = cfg.suppress | frozenset(args.suppress)
    if getattr(args, "lanes", None) is not None:
        overrides["lanes"] = args.lanes
    if getattr(args, "drain", False):
        overrides["drain"] = True

    query_overrides = {}
    if getattr(args, "mode", None) is not None:
        query_overrides["mode"] = args.mode
    if getattr(args, "rectify", None) is not None:
        query_overrides["rectify"] = args.rectify
    if getattr(args, "standard", None) is not None:
        query_overrides["standard"] = XPathStandard(args.standard)

    from dataclasses import replace

    query_gen = replace(cfg.query_gen, **query_overrides) if query_overrides else cfg.query_gen
    engines = cfg.engines
    if getattr(args, "engines", None):
        engines = camp.engines_from_names(args.engines.split(","), query_gen.standard)
    elif query_overrides.get("standard") is not None:
        engines = [
            camp.EngineSpec(e.name, e.kind, query_gen.standard, e.command_template, e.timeout_ms, e.mutation)
            for e in cfg.engines
        ]
    return camp.CampaignConfig(
        engines=engines,
        doc_gen=cfg.doc_gen,
        query_gen=query_gen,
        seed=overrides.get("seed", cfg.seed),
        cases=overrides.get("cases", cfg.cases),
        duration_s=overrides.get("duration_s", cfg.duration_s),
        out_dir=overrides.get("out_dir", cfg.out_dir),
        suppress=overrides.get("suppress", cfg.suppress),
        lanes=overrides.get("lanes", cfg.lanes),
        drain=overrides.get("drain", cfg.drain),
    )


def _cmd_generate(args) -> int:
    cfg = _campaign_config(args)
    out = Path(args.out or cfg.out_dir or "generated")
    out.mkdir(parents=True, exist_ok=True)
    docs = args.docs
    for doc_index in range(docs):
        doc = generate_document(
            Random(camp.derive_seed(cfg.seed, "doc", doc_index)), cfg.doc_gen
        )
        (out / f"doc_{doc_index:05d}.xml").write_text(serialize(doc) + "\n", encoding="utf-8")
        queries = []
        for query_index in range(cfg.query_gen.queries_per_doc):
            rng = Random(camp.derive_seed(cfg.seed, "query", doc_index, query_index))
            expr, _ = generate_query(rng, doc, cfg.query_gen)
            queries.append(render(expr))
        (out / f"queries_{doc_index:05d}.txt").write_text(
            "\n".join(queries) + "\n", encoding="utf-8"
        )
    print(f"wrote {docs} documents with {cfg.query_gen.queries_per_doc} queries each to {out}")
    return 0


def _cmd_run(args) -> int:
    cfg = _campaign_config(args)
    report = camp.run_campaign(cfg)
    print(camp.stats_table([report]))
    print(
        f"\ncases={report.cases} discrepancies={report.discrepancies} "
        f"unique={report.unique_fingerprints} suppressed={report.suppressed} "
        f"throughput={report.throughput_cps:.0f}/s"
    )
    if cfg.out_dir:
        print(f"records: {Path(cfg.out_dir) / 'discrepancies.jsonl'}")
    return 0


def _cmd_replay(args) -> int:
    if args.fixtures:
        failures = 0
        for result in run_fixtures():
            status = "ok" if result.ok else "FAIL"
            failures += not result.ok
            print(
                f"[{status}] {result.fixture} [{result.standard}] {result.engine}: "
                f"expected {result.expected}, got {result.got}"
            )
        return 1 if failures else 0
    if not args.records:
        print("replay needs --records (or --fixtures)", file=sys.stderr)
        return 2
    cfg = _campaign_config(args)
    records = camp.load_records(args.records)
    indices = [args.index] if args.index is not None else range(len(records))
    exit_code = 0
    for index in indices:
        outcome = camp.replay_record(cfg, records[index])
        print(f"record {index}: klass={outcome.record['klass']} fingerprint={outcome.record['fingerprint']}")
        for name in sorted(outcome.results):
            result = outcome.results[name]
            if result.outcome == "nodes":
                print(f"  {name}: {list(result.node_ids)}")
            else:
                print(f"  {name}: {result.outcome} ({result.error_class})")
        print(f"  discrepancy persists: {outcome.persists}")
        if not outcome.persists:
            exit_code = 1
    return exit_code


def _cmd_reduce(args) -> int:
    cfg = _campaign_config(args)
    records = camp.load_records(args.records)
    record = records[args.index]
    case = camp.regenerate_case(cfg, record["provenance"])
    by_name = {spec.name: spec for spec in cfg.engines}
    missing = [n for n in record["results"] if n not in by_name]
    if missing:
        raise EngineConfigError(f"reduction needs engines {missing}")
    from .harness import EngineResult

    recorded_results = {
        name: EngineResult(
            outcome=entry["outcome"],
            node_ids=tuple(entry.get("ids", ())) if entry["outcome"] == "nodes" else None,
            error_class=entry.get("class"),
        )
        for name, entry in record["results"].items()
    }
    pair = camp.witness_pair(recorded_results, record["klass"])
    check = camp.make_reduction_check(cfg.engines, record["klass"], pair)
    reduced = reduce_case(case, check)
    print(f"document: {reduced.doc_text}")
    print(f"query:    {reduced.query_text}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"reduced_{args.index:05d}.xml").write_text(reduced.doc_text + "\n", encoding="utf-8")
        (out / f"reduced_{args.index:05d}.query").write_text(reduced.query_text + "\n", encoding="utf-8")
        print(f"written to {out}")
    return 0


def _cmd_stats(args) -> int:
    reports = []
    for path in args.reports:
        reports.append(camp.CampaignReport.from_json(Path(path).read_text(encoding="utf-8")))
    print(camp.stats_table(reports))
    return 0


def _cmd_fixtures_export(args) -> int:
    written = write_fixture_files(args.out)
    print(f"wrote {len(written)} fixture files to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xpathdiff",
        description="Differential testing of XPath engines over random XML documents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=True):
        p.add_argument("--config", help="campaign configuration JSON file")
        p.add_argument("--seed", type=int, help="campaign seed")
        p.add_argument("--mode", choices=("targeted", "untargeted"))
        rect = p.add_mutually_exclusive_group()
        rect.add_argument("--rectify", dest="rectify", action="store_true", default=None)
        rect.add_argument("--no-rectify", dest="rectify", action="store_false", default=None)
        p.add_argument("--standard", choices=("1.0", "3.0"))
        p.add_argument("--engines", help="comma list: builtin_a,builtin_b,mutant:<id>")
        p.add_argument("--out", help="output directory")
        if budget:
            p.add_argument("--cases", type=int, help="case budget")
            p.add_argument("--duration", type=float, help="time budget in seconds")
            p.add_argument("--suppress", action="append", default=[],
                           help="fingerprint to suppress (repeatable)")
            p.add_argument("--lanes", type=int, help="parallel worker lanes")
            p.add_argument("--drain", action="store_true",
                           help="finish the in-flight document when the budget expires")

    p_generate = sub.add_parser("generate", help="emit documents and queries without running engines")
    common(p_generate, budget=False)
    p_generate.add_argument("--docs", type=int, default=10, help="number of documents")
    p_generate.set_defaults(func=_cmd_generate)

    p_run = sub.add_parser("run", help="run a differential campaign")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_replay = sub.add_parser("replay", help="re-execute recorded discrepancies")
    common(p_replay, budget=False)
    p_replay.add_argument("--records", help="discrepancies.jsonl path")
    p_replay.add_argument("--index", type=int, help="record index (default: all)")
    p_replay.add_argument("--fixtures", action="store_true",
                          help="run the built-in regression fixtures instead")
    p_replay.set_defaults(func=_cmd_replay)

    p_reduce = sub.add_parser("reduce", help="minimize a recorded discrepancy")
    common(p_reduce, budget=False)
    p_reduce.add_argument("--records", required=True, help="discrepancies.jsonl path")
    p_reduce.add_argument("--index", type=int, required=True)
    p_reduce.set_defaults(func=_cmd_reduce)

    p_stats = sub.add_parser("stats", help="summarize campaign reports")
    p_stats.add_argument("reports", nargs="*", help="report.json paths")
    p_stats.set_defaults(func=_cmd_stats)

    p_fixtures = sub.add_parser("fixtures", help="export regression fixture files")
    p_fixtures.add_argument("--out", default="fixtures", help="target directory")
    p_fixtures.set_defaults(func=_cmd_fixtures_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
