"""Command line entry point: ``taylornet run|aggregate|probe``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .bench import (
    aggregate,
    emit_report,
    load_manifest,
    load_probe_manifest,
    read_records,
    run_grid,
    run_probe,
    summary_markdown,
    write_probe_report,
)
from .bench.manifest import parse_list
from .errors import TaylorNetError
from .models import ModelKind

log = logging.getLogger("taylornet")


def _cmd_run(args) -> int:
    manifest = load_manifest(args.manifest)
    if args.models:
        manifest.models = [ModelKind.parse(m) for m in parse_list(args.models, str)]
    if args.seed_list:
        manifest.seeds = parse_list(args.seed_list, int)
    if args.output:
        manifest.output = Path(args.output)
    if args.workers:
        manifest.workers = args.workers
    manifest.validate()

    def progress(i, total, rec):
        log.info("[%d/%d] %s %s lr=%g L=%d seed=%d m=%d -> %s %s", i, total, rec.dataset,
                 rec.model.value, rec.learning_rate, rec.input_len, rec.seed, rec.substeps,
                 rec.status, rec.test_mse)

    records = run_grid(manifest, progress=progress)
    report = aggregate(records)
    for path in emit_report(records, report, manifest.output):
        log.info("wrote %s", path)
    sys.stdout.write(summary_markdown(report, len(records)))
    return 0


def _cmd_aggregate(args) -> int:
    records = read_records(args.records)
    report = aggregate(records)
    out = Path(args.output) if args.output else Path(args.records).parent
    for path in emit_report(records, report, out, write_records=False):
        log.info("wrote %s", path)
    sys.stdout.write(summary_markdown(report, len(records)))
    return 0


def _cmd_probe(args) -> int:
    probes, output = load_probe_manifest(args.manifest)
    if args.seed_list:
        seeds = parse_list(args.seed_list, int)
        probes = [dataclasses.replace(p, seed=s) for p in probes for s in seeds]
    if args.models:
        models = [ModelKind.parse(m) for m in parse_list(args.models, str)]
        probes = [dataclasses.replace(p, model=m) for p in probes for m in models]
    rows = []
    for cfg in probes:
        log.info("probe %s: %s on %s", cfg.name, cfg.model.value, cfg.synthetic.family)
        rows.extend(run_probe(cfg))
    path = write_probe_report(rows, args.output or output)
    log.info("wrote %s", path)
    sys.stdout.write(path.read_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taylornet", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", help="output directory (overrides the manifest)")
        p.add_argument("--workers", type=int, help="worker processes")
        p.add_argument("--seed-list", help="comma-separated seeds, e.g. 0,1,2")
        p.add_argument("--models", help="comma-separated model kinds")

    p = sub.add_parser("run", help="train the full grid and write reports")
    p.add_argument("manifest")
    common(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("aggregate", help="recompute reports from records.csv")
    p.add_argument("records")
    p.add_argument("--output", help="output directory (default: next to records)")
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("probe", help="synthetic-dynamics derivative probe")
    p.add_argument("manifest")
    common(p)
    p.set_defaults(func=_cmd_probe)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (TaylorNetError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
