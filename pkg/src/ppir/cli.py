"""Command-line interface.

Subcommands: run (experiment config), capacity (rate calculators), oracle
(bounds, brute-force minimum length, certificate), audit (privacy), replay
(decode serialized wire files).  Exit codes: 0 pass, 1 assertion failure,
2 configuration or format error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import picod
from .audit import MUTANT_SERVERS, audit_exact, audit_statistical
from .errors import (
    ConfigError,
    EnumerationCapError,
    ParameterError,
    PpirError,
    SearchBudgetError,
    WireFormatError,
)
from .harness import (
    auto_field_size,
    load_config,
    replay,
    report_csv,
    run_experiment,
    write_report,
)
from .model import InstanceParams, build_layout, random_store
from .rates import msi_rate_bounds, rate_report


def _int_list(text: str):
    return tuple(int(x) for x in text.split(",") if x != "")


def _params_from_args(args) -> InstanceParams:
    class_sizes = _int_list(args.class_sizes)
    side_counts = _int_list(args.side_counts)
    q = args.q or auto_field_size(class_sizes, side_counts, getattr(args, "demand", 1))
    return InstanceParams(class_sizes, side_counts, msg_len=args.msg_len, q=q)


def _emit(doc: dict, args) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def cmd_run(args) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.out is not None:
        overrides["output"] = args.out
    if args.format is not None:
        overrides["formats"] = ("json", "csv") if args.format == "both" else (args.format,)
    if args.budget is not None:
        overrides["oracle_budget"] = args.budget
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    report, ok = run_experiment(config)
    if config.output:
        for path in write_report(report, config.output, config.formats):
            print(f"wrote {path}")
    elif "csv" in config.formats:
        sys.stdout.write(report_csv(report))
    else:
        _emit(report, args)
    return 0 if ok else 1


def cmd_capacity(args) -> int:
    class_sizes = _int_list(args.class_sizes)
    side_counts = _int_list(args.side_counts)
    if any(mu == k for mu, k in zip(class_sizes, side_counts)):
        identified = sum(1 for mu, k in zip(class_sizes, side_counts) if mu == k)
        lo, hi = msi_rate_bounds(
            sum(class_sizes), sum(side_counts), len(class_sizes), identified
        )
        _emit(
            {
                "regime": "mixed-side-information",
                "status": "CONJECTURE",
                "rate_lower": {"num": lo.numerator, "den": lo.denominator},
                "rate_upper": {"num": hi.numerator, "den": hi.denominator},
                "identified": identified,
            },
            args,
        )
        return 0
    report = rate_report(
        class_sizes,
        side_counts,
        identified=args.identified,
        demand=args.demand,
        num_desired=args.num_desired,
    )
    _emit(report.to_json(), args)
    return 0


def cmd_oracle(args) -> int:
    params = _params_from_args(args)
    t = args.t or params.num_classes
    inst = picod.instance_from_params(params, demand_classes=t)
    lower = picod.broadcast_lower_bound(inst)
    upper = picod.broadcast_upper_bound(params.num_messages, params.total_side, t)
    doc = {
        "instance": {
            "class_sizes": list(params.class_sizes),
            "side_counts": list(params.side_counts),
            "q": params.q,
            "demand_classes": t,
        },
        "lower_bound": lower,
        "upper_bound": upper,
        "generic_min_field_size": picod.generic_min_field_size(params.num_messages),
    }
    ok = lower <= upper
    if not args.skip_search:
        try:
            search = picod.min_code_length_bruteforce(
                inst, args.l_max or lower, budget=args.budget
            )
            doc["bruteforce"] = search.to_json()
            if search.found:
                doc["bruteforce_matches_bound"] = search.min_length == lower
                ok = ok and search.min_length == lower
                cert = picod.rank_lower_bound_certificate(search.witness, inst)
                doc["certificate"] = cert.to_json()
                ok = ok and cert.ok
        except SearchBudgetError as exc:
            doc["bruteforce"] = {
                "skipped": str(exc),
                "exhausted_lengths": list(exc.exhausted_lengths),
            }
    _emit(doc, args)
    return 0 if ok else 1


def cmd_audit(args) -> int:
    params = _params_from_args(args)
    layout = build_layout(params, args.seed)
    server = None
    if args.mutant:
        by_name = {cls.name: cls for cls in MUTANT_SERVERS}
        if args.mutant not in by_name:
            raise ConfigError(
                f"unknown mutant {args.mutant!r}; have {sorted(by_name)}"
            )
        server = by_name[args.mutant]()
    if args.mode == "exact":
        store = random_store(layout, args.seed + 1)
        try:
            verdict = audit_exact(store, server=server, cap=args.cap)
        except EnumerationCapError as exc:
            _emit({"error": str(exc)}, args)
            return 2
    else:
        verdict = audit_statistical(
            layout, args.trials, args.seed + 1, server=server
        )
    doc = verdict.to_json()
    if args.mode == "exact" and len(doc.get("tv_table", [])) > 50:
        doc["tv_table"] = doc["tv_table"][:50] + ["... truncated"]
    _emit(doc, args)
    return 0 if verdict.passed else 1


def cmd_replay(args) -> int:
    result = replay(args.query, args.answer, args.side, desired=args.desired)
    _emit(
        {
            "new_from_class": list(result.new_from_class),
            "decoded": [
                {"label": list(lab), "symbols": list(sym)}
                for lab, sym in result.decoded
            ],
        },
        args,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppir",
        description="Pliable private retrieval with side information: simulator and calculators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="YAML config path")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--trials", type=int)
    p_run.add_argument("--out")
    p_run.add_argument("--format", choices=["json", "csv", "both"])
    p_run.add_argument("--budget", type=int)
    p_run.set_defaults(func=cmd_run)

    p_cap = sub.add_parser("capacity", help="exact rate calculators")
    p_cap.add_argument("--class-sizes", required=True)
    p_cap.add_argument("--side-counts", required=True)
    p_cap.add_argument("--identified", type=int, default=None)
    p_cap.add_argument("--demand", type=int, default=1)
    p_cap.add_argument("--num-desired", type=int, default=1)
    p_cap.set_defaults(func=cmd_capacity)

    p_oracle = sub.add_parser("oracle", help="converse bounds and brute-force search")
    p_oracle.add_argument("--class-sizes", required=True)
    p_oracle.add_argument("--side-counts", required=True)
    p_oracle.add_argument("--q", type=int, default=None)
    p_oracle.add_argument("--msg-len", type=int, default=1)
    p_oracle.add_argument("--t", type=int, default=None)
    p_oracle.add_argument("--l-max", type=int, default=None)
    p_oracle.add_argument("--budget", type=int, default=2_000_000)
    p_oracle.add_argument("--skip-search", action="store_true")
    p_oracle.set_defaults(func=cmd_oracle)

    p_audit = sub.add_parser("audit", help="privacy audit")
    p_audit.add_argument("--class-sizes", required=True)
    p_audit.add_argument("--side-counts", required=True)
    p_audit.add_argument("--q", type=int, default=None)
    p_audit.add_argument("--msg-len", type=int, default=1)
    p_audit.add_argument("--mode", choices=["exact", "statistical"], default="exact")
    p_audit.add_argument("--trials", type=int, default=10_000)
    p_audit.add_argument("--seed", type=int, default=0)
    p_audit.add_argument("--cap", type=int, default=50_000)
    p_audit.add_argument("--mutant", default=None)
    p_audit.set_defaults(func=cmd_audit)

    p_replay = sub.add_parser("replay", help="re-decode serialized wire files")
    p_replay.add_argument("--query", required=True)
    p_replay.add_argument("--answer", required=True)
    p_replay.add_argument("--side", required=True)
    p_replay.add_argument("--desired", type=int, default=None)
    p_replay.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, WireFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, PpirError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
