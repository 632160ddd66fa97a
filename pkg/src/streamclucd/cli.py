"""Command line entry point: ``streamclucd {cluster,squeezer,kmodes,gen,eval,sweep}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import io
from .baselines import Squeezer, chunked_kmodes_stream, kmodes_fit
from .clusterer import (AssignmentOutcome, ClustererConfig, ClusterModel, MissingPolicy, feed, reject,
                        resolve_missing, snapshot)
from .datagen import GenSpec, write_csv
from .evaluation import ContingencyTable, expand_grid, sweep

log = logging.getLogger("streamclucd")


def _input_args(p):
    p.add_argument("input", help="CSV file with a header line, or - for stdin")
    p.add_argument("--schema", help="JSON file: numeric columns, missing token, label column")
    p.add_argument("--labels-col", help="class label column (excluded from clustering)")


def _output_args(p, model=True):
    p.add_argument("--out-assignments")
    p.add_argument("--out-summary", help="summary JSON (default: stdout)")
    if model:
        p.add_argument("--out-model")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streamclucd")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="one-pass lossy histogram clustering")
    _input_args(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--support", type=float, default=0.0)
    p.add_argument("--sim-threshold", type=float, help="default: half the attribute count")
    p.add_argument("--max-clusters", type=int)
    p.add_argument("--bin-width", type=float)
    p.add_argument("--missing-policy", choices=[m.value for m in MissingPolicy], default="value")
    p.add_argument("--balance-beta", type=float, default=0.0)
    _output_args(p)

    p = sub.add_parser("squeezer", help="exact-count Squeezer")
    _input_args(p)
    p.add_argument("--sim-threshold", type=float)
    p.add_argument("--max-clusters", type=int)
    p.add_argument("--missing-policy", choices=[m.value for m in MissingPolicy], default="value")
    _output_args(p)

    p = sub.add_parser("kmodes", help="k-modes, optionally chunked")
    _input_args(p)
    p.add_argument("-k", "--k", type=int, required=True)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--chunk-size", type=int, help="cluster chunks, then their weighted modes")
    _output_args(p, model=False)

    p = sub.add_parser("gen", help="write a synthetic labelled stream")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--attrs", type=int, required=True)
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--domain-size", type=int)
    p.add_argument("--purity", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="score an assignments CSV against labels")
    p.add_argument("assignments")
    _input_args(p)
    p.add_argument("--out-summary")

    p = sub.add_parser("sweep", help="run an algorithm over a parameter grid")
    _input_args(p)
    p.add_argument("--grid", required=True,
                   help='JSON: {"param": [values], ...} or a list of parameter dicts')
    p.add_argument("--algorithm", choices=["streamclucd", "squeezer", "kmodes"],
                   default="streamclucd")
    p.add_argument("--out", help="results table (.csv or .json; default: JSON on stdout)")
    return parser


def _open_input(args):
    schema = io.load_schema_file(args.schema) if args.schema else {}
    return io.read_stream(args.input, schema, args.labels_col)


def _finish(args, snap, k, n, entries, prunings, elapsed, table, config_echo, writer):
    if writer is not None:
        writer.close()
    report = table.report() if table is not None and table.n else None
    summary = io.summary_dict(config_echo, k, n, entries, prunings, elapsed, report)
    io.write_json(summary, args.out_summary or "-")
    if getattr(args, "out_model", None) and snap is not None:
        io.write_model_dump(snap, args.out_model)


def _drive(args, stream, process, on_error):
    """Feed every row, timing only the clustering calls."""
    writer = io.AssignmentWriter(args.out_assignments) if args.out_assignments else None
    table = ContingencyTable() if args.labels_col else None
    elapsed = 0.0
    for row in stream:
        if row.error:
            log.warning("%s", row.error)
            outcome = on_error(row.error)
        else:
            t0 = time.perf_counter()
            outcome = process(row.record)
            elapsed += time.perf_counter() - t0
        if outcome.error is None and table is not None:
            table.add(outcome.cluster_index, row.label)
        if writer is not None:
            writer.write(outcome)
    return writer, table, elapsed


def cmd_cluster(args):
    stream = _open_input(args)
    config = ClustererConfig(
        epsilon=args.epsilon, support=args.support, sim_threshold=args.sim_threshold,
        max_clusters=args.max_clusters, bin_width=args.bin_width,
        missing_policy=args.missing_policy, balance_beta=args.balance_beta,
        schema=stream.schema.kinds,
    )
    model = ClusterModel(config)
    writer, table, elapsed = _drive(args, stream, lambda r: feed(model, r),
                                    lambda msg: reject(model, msg))
    _finish(args, snapshot(model), model.k, model.total_seen, model.entry_count(),
            model.prunings, elapsed, table, config.to_dict(), writer)


def cmd_squeezer(args):
    stream = _open_input(args)
    sq = Squeezer(args.sim_threshold, args.max_clusters)
    policy = args.missing_policy
    writer, table, elapsed = _drive(args, stream,
                                    lambda r: sq.process(resolve_missing(r, policy)), sq.reject)
    model = sq.to_model()
    config = {"algorithm": "squeezer", "sim_threshold": args.sim_threshold,
              "max_clusters": args.max_clusters, "missing_policy": policy}
    _finish(args, snapshot(model), model.k, model.total_seen, model.entry_count(), 0,
            elapsed, table, config, writer)


def cmd_kmodes(args):
    stream = _open_input(args)
    records, labels = [], []
    for row in stream:
        if row.error:
            raise ValueError(row.error)
        records.append(resolve_missing(row.record))
        labels.append(row.label)
    t0 = time.perf_counter()
    if args.chunk_size:
        res = chunked_kmodes_stream(records, args.k, args.chunk_size, args.max_iter)
    else:
        res = kmodes_fit(records, args.k, args.max_iter)
    elapsed = time.perf_counter() - t0
    writer = io.AssignmentWriter(args.out_assignments) if args.out_assignments else None
    table = ContingencyTable() if args.labels_col else None
    for i, c in enumerate(res.assignments):
        if writer is not None:
            writer.write(AssignmentOutcome(i, c, False, float("nan")))
        if table is not None:
            table.add(c, labels[i])
    config = {"algorithm": "kmodes", "k": args.k, "max_iter": args.max_iter,
              "chunk_size": args.chunk_size, "iterations": res.iterations}
    _finish(args, None, len(res.modes), len(records), 0, 0, elapsed, table, config, writer)


def cmd_gen(args):
    spec = GenSpec(args.rows, args.attrs, args.classes, args.domain_size, args.purity, args.seed)
    write_csv(spec, args.out)


def cmd_eval(args):
    if not args.labels_col:
        raise ValueError("eval needs --labels-col")
    assignments = io.read_assignments(args.assignments)
    table = ContingencyTable()
    stream = _open_input(args)
    for row, c in zip(stream, assignments):
        if c >= 0:
            table.add(c, row.label)
    if stream.lines_read != len(assignments):
        raise ValueError(f"{len(assignments)} assignments but {stream.lines_read} input rows")
    rep = table.report()
    io.write_json({"accuracy": rep.accuracy, "error": rep.error,
                   "absolute_error": rep.absolute_error, "k": rep.k, "N": rep.n},
                  args.out_summary or "-")


def cmd_sweep(args):
    if not args.labels_col:
        raise ValueError("sweep needs --labels-col")
    grid = json.loads(Path(args.grid).read_text())
    if not expand_grid(grid):
        raise ValueError("empty parameter grid")
    records, labels = io.read_labelled(args.input, args.labels_col,
                                       **({"schema": io.load_schema_file(args.schema)}
                                          if args.schema else {}))
    rows = [r.row() for r in sweep(args.algorithm, grid, records, labels)]
    if args.out:
        io.write_table(rows, args.out)
    else:
        io.write_json(rows, "-")


COMMANDS = {"cluster": cmd_cluster, "squeezer": cmd_squeezer, "kmodes": cmd_kmodes,
            "gen": cmd_gen, "eval": cmd_eval, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"streamclucd {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
