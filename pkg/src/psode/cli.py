"""Command line: ``psode run | sweep | rank | ecdf``.

Exit codes: 0 on success, 1 for usage or configuration errors, 2 when the
results directory lacks data needed for an aggregation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .bench import (
    FUNCTION_GROUP,
    FUNCTION_IDS,
    GROUPS,
    MissingData,
    ecdf,
    ert,
    ert_table,
    log_grid,
    rank_instances,
)
from .core import InvalidConfig, derive_seed
from .results import format_records, read_results_dir
from .sweep import MANIFEST, SweepConfig, default_workers, execute_task, run_sweep

EXIT_CONFIG = 1
EXIT_MISSING = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def cmd_run(args) -> int:
    if args.function not in FUNCTION_IDS:
        raise InvalidConfig(f"unknown function id {args.function}")
    seed = args.seed if args.seed is not None else derive_seed(0, args.instance, args.function, args.dim, 0)
    rec = execute_task((args.instance, args.function, args.dim, 0, seed,
                        args.budget_multiplier, args.pop_multiplier))
    text = format_records([rec])
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweep(args) -> int:
    overrides = dict(
        instances=args.instances, functions=args.functions, dims=args.dims, runs=args.runs,
        master_seed=args.master_seed, budget_multiplier=args.budget_multiplier,
        pop_multiplier=args.pop_multiplier, out_dir=args.out_dir, kinds=args.kinds,
    )
    if args.config:
        config = SweepConfig.load(args.config, **overrides)
    else:
        config = SweepConfig(**{k: v for k, v in overrides.items() if v is not None})
    out = run_sweep(config, workers=args.workers, log=lambda m: print(m, file=sys.stderr))
    print(out)
    return 0


def _load(results_dir):
    records = read_results_dir(results_dir)
    if not records:
        raise MissingData(f"no result files in {results_dir}")
    return records


def _check_complete(records, dim):
    instances = sorted({r.instance for r in records})
    functions = sorted({r.function_id for r in records})
    present = {(r.instance, r.function_id) for r in records}
    missing = [(i, f) for i in instances for f in functions if (i, f) not in present]
    if missing:
        cells = ", ".join(f"{i}/f{f}" for i, f in missing)
        raise MissingData(f"dim {dim}: missing (instance, function) cells: {cells}")
    return instances, functions


def rank_tables(records, target_index: int = 8) -> dict:
    """Per dimension: rows ``(instance, avg_rank, {function_id: ERT})`` best first."""
    tables = {}
    for dim in sorted({r.dim for r in records}):
        recs = [r for r in records if r.dim == dim]
        _, functions = _check_complete(recs, dim)
        by_cell = {}
        for r in recs:
            by_cell.setdefault((r.instance, r.function_id), []).append(r)
        ranking = rank_instances(ert_table(recs))
        tables[dim] = [(inst, avg, {f: ert(by_cell[(inst, f)], target_index) for f in functions})
                       for inst, avg in ranking]
    return tables


def cmd_rank(args) -> int:
    out_dir = Path(args.out_dir or args.results_dir)
    tables = rank_tables(_load(args.results_dir), args.target_index)
    for dim, rows in tables.items():
        functions = sorted(rows[0][2])
        path = out_dir / f"rank_d{dim}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["rank", "instance", "avg_rank"] + [f"ert_f{f}" for f in functions])
            for pos, (inst, avg, erts) in enumerate(rows, 1):
                writer.writerow([pos, inst, repr(avg)] + [repr(erts[f]) for f in functions])
        print(path)
    return 0


def _max_budget(results_dir, records, dim):
    manifest = Path(results_dir) / MANIFEST
    if manifest.exists():
        return json.loads(manifest.read_text())["config"]["budget_multiplier"] * dim
    return max(r.total_evals for r in records)


def ecdf_rows(records, group, max_budget_for_dim) -> list[tuple]:
    """Long-format ECDF rows ``(instance, dim, group, evals, fraction)``."""
    rows = []
    for dim in sorted({r.dim for r in records}):
        recs = [r for r in records if r.dim == dim
                and (group == "all" or FUNCTION_GROUP[r.function_id] == group)]
        if not recs:
            raise MissingData(f"dim {dim}: no records for function group {group}")
        grid = log_grid(max_budget_for_dim(dim))
        for inst in sorted({r.instance for r in recs}):
            for evals, frac in ecdf([r for r in recs if r.instance == inst], grid):
                rows.append((inst, dim, group, evals, frac))
    return rows


def cmd_ecdf(args) -> int:
    records = _load(args.results_dir)
    group = args.group if args.group == "all" else int(args.group)
    if group != "all" and group not in GROUPS:
        raise InvalidConfig(f"unknown function group {args.group}")
    rows = ecdf_rows(records, group, lambda d: _max_budget(args.results_dir, records, d))
    path = Path(args.out or Path(args.results_dir) / f"ecdf_{group}.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["instance", "dim", "group", "evals", "fraction"])
        writer.writerows((i, d, g, repr(e), repr(f)) for i, d, g, e, f in rows)
    print(path)
    return 0


def _list(kind):
    def convert(text):
        return [kind(v) for v in text.split(",") if v]
    return convert


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="psode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one instance on one test function")
    p.add_argument("--instance", required=True)
    p.add_argument("--function", type=int, required=True)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget-multiplier", type=int, default=10_000)
    p.add_argument("--pop-multiplier", type=int, default=5)
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run an instance x function x dim grid")
    p.add_argument("--config", help="YAML/JSON file with SweepConfig fields")
    p.add_argument("--instances", type=_list(str), help="comma-separated names or 'all'")
    p.add_argument("--kinds", type=_list(str), help="with --instances all: pso,de,hybrid")
    p.add_argument("--functions", type=_list(str), help="comma-separated ids or 'all'")
    p.add_argument("--dims", type=_list(int))
    p.add_argument("--runs", type=int)
    p.add_argument("--master-seed", type=int)
    p.add_argument("--budget-multiplier", type=int)
    p.add_argument("--pop-multiplier", type=int)
    p.add_argument("--out-dir")
    p.add_argument("--workers", type=int, default=default_workers())
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rank", help="average-rank table per dimension")
    p.add_argument("--results-dir", required=True)
    p.add_argument("--target-index", type=int, default=8,
                   help="target used for the ERT columns (0 -> 1e1, 8 -> 1e-7)")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("ecdf", help="ECDF data for a function group")
    p.add_argument("--results-dir", required=True)
    p.add_argument("--group", default="all", help="1-5 or 'all'")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ecdf)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MissingData as exc:
        print(f"psode: missing data: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (InvalidConfig, KeyError, ValueError) as exc:
        print(f"psode: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
