"""Command-line front door: ingest, summarize, inspect, bench, serve."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    EmptyMatrixError,
    ExplsumError,
    NotFoundError,
    ShapeError,
)
from .formats import dumps_canonical, load_matrix, save_matrix
from .generate import adjusted_rand_index, planted_blocks
from .ingest import discretize_tabular, load_csv_table
from .matrix import ColMeta, RowMeta, normalize
from .pipeline import (
    RunConfig,
    bench_variants,
    build_manifest,
    evaluate_common_loss,
    run_pipeline,
)
from .summary import parse_summary, serialize_summary

log = logging.getLogger("explsum")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse usage problems are config errors
        raise ConfigError(message)


def _onoff(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value == "on"


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta-r", type=float, default=0.05)
    p.add_argument("--beta-c", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--smooth", type=_onoff, default=True, metavar="on|off")
    p.add_argument("--precluster", type=_onoff, default=True, metavar="on|off")
    p.add_argument("--precluster-k-rows", type=int, default=None)
    p.add_argument("--precluster-k-cols", type=int, default=None)
    p.add_argument(
        "--candidate-mode", choices=("exhaustive", "lsh"), default="exhaustive"
    )
    p.add_argument("--k-neighbors", type=int, default=10)
    p.add_argument("--lsh-tables", type=int, default=8)
    p.add_argument("--lsh-hashes", type=int, default=4)
    p.add_argument("--lsh-width", type=float, default=None)
    p.add_argument(
        "--loss", choices=("marginal", "raw", "baseline"), default="marginal"
    )
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--trace", action="store_true")


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        beta_r=args.beta_r,
        beta_c=args.beta_c,
        seed=args.seed,
        smooth=args.smooth,
        precluster=args.precluster,
        precluster_k_rows=args.precluster_k_rows,
        precluster_k_cols=args.precluster_k_cols,
        candidate_mode=args.candidate_mode,
        k_neighbors=args.k_neighbors,
        lsh_tables=args.lsh_tables,
        lsh_hashes=args.lsh_hashes,
        lsh_width=args.lsh_width,
        loss_mode=args.loss,
        max_iterations=args.max_iterations,
        trace=args.trace,
    )


def cmd_summarize(args) -> int:
    t0 = time.perf_counter()
    matrix = load_matrix(args.input, signed=args.signed, per_feature=args.per_feature)
    normalize_seconds = time.perf_counter() - t0
    config = _config_from_args(args)
    run = run_pipeline(matrix, config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize_summary(run.artifact), encoding="utf-8")
    manifest_path = (
        Path(args.manifest)
        if args.manifest
        else out.with_name(out.name + ".manifest.json")
    )
    manifest = build_manifest(
        run, config, str(args.input), str(out), normalize_seconds
    )
    manifest_path.write_text(dumps_canonical(manifest), encoding="utf-8")
    log.info("wrote %s and %s", out, manifest_path)
    print(
        f"{len(run.result.clustering.row_clusters)}"
        f"+{len(run.result.clustering.col_clusters)} clusters, "
        f"total {run.result.cost.total:.6f} bits, "
        f"{run.result.evaluations} candidate evaluations -> {out}"
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.input:
        matrix = load_matrix(args.input)
        labels = None
    else:
        matrix, labels, _ = planted_blocks(
            args.rows, args.cols, args.blocks, noise=args.noise, seed=args.seed
        )
    base = _config_from_args(args)
    rows = []
    for variant, cfg in bench_variants(base):
        t0 = time.perf_counter()
        run = run_pipeline(matrix, cfg)
        wall = time.perf_counter() - t0
        loss = evaluate_common_loss(matrix, run.result.clustering)
        total = (
            cfg.beta_r * len(run.result.clustering.row_clusters)
            + cfg.beta_c * len(run.result.clustering.col_clusters)
            + loss
        )
        ari = ""
        if labels is not None:
            assign = run.result.clustering.assignments("row", matrix.n_rows)
            ari = f"{adjusted_rand_index(assign, labels):.6f}"
        rows.append(
            {
                "variant": variant,
                "loss": f"{loss:.9g}",
                "total_cost": f"{total:.9g}",
                "wall_clock_s": f"{wall:.6f}",
                "evaluations": run.result.evaluations,
                "row_clusters": len(run.result.clustering.row_clusters),
                "col_clusters": len(run.result.clustering.col_clusters),
                "ari": ari,
            }
        )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} bench rows -> {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    artifact = parse_summary(Path(args.summary).read_text(encoding="utf-8"))
    matrix = load_matrix(args.matrix) if args.matrix else None
    app = create_app(artifact, matrix)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_ingest(args) -> int:
    table, types, meta_cols = load_csv_table(args.csv, args.schema)
    logic, columns, edges = discretize_tabular(table, types)
    n_rows = logic.shape[0]
    id_col = meta_cols.get("id")
    label_col = meta_cols.get("label")
    pred_col = meta_cols.get("prediction")
    row_meta = tuple(
        RowMeta(
            str(table[id_col][i]) if id_col else f"r{i + 1}",
            str(table[label_col][i]) if label_col else "all",
            str(table[pred_col][i]) if pred_col else (
                str(table[label_col][i]) if label_col else "all"
            ),
        )
        for i in range(n_rows)
    )
    col_meta = tuple(
        ColMeta(f"l{j + 1}", col.name, col.attribute)
        for j, col in enumerate(columns)
    )
    rows, cols = np.nonzero(logic)
    matrix = normalize(
        logic.shape,
        [(int(r), int(c), float(logic[r, c])) for r, c in zip(rows, cols)],
        row_meta=row_meta,
        col_meta=col_meta,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_matrix(matrix, out)
    edges_path = out.with_name(out.name + ".edges.json")
    edges_path.write_text(dumps_canonical(edges), encoding="utf-8")
    print(
        f"{n_rows} rows, {len(columns)} logic columns -> {out} "
        f"(bin edges in {edges_path})"
    )
    return EXIT_OK


def cmd_inspect(args) -> int:
    artifact = parse_summary(Path(args.summary).read_text(encoding="utf-8"))
    cost = artifact.meta.get("cost", {})
    print(f"instance clusters: {len(artifact.rows)}")
    print(f"feature clusters:  {len(artifact.cols)}")
    print(f"co-cluster blocks: {len(artifact.blocks)}")
    print(
        "cost: model {model:.6f} + loss {loss:.6f} = {total:.6f} bits".format(
            model=cost.get("model", 0.0),
            loss=cost.get("loss", 0.0),
            total=cost.get("total", 0.0),
        )
    )
    for group in artifact.rows:
        sizes = len(group.instances)
        blocks = [b for b in artifact.blocks if b.r == group.cluster]
        top = ", ".join(f"c{b.c}:{b.mass:.3f}" for b in blocks[:4])
        print(f"  row cluster {group.cluster}: {sizes} instances; blocks {top}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="explsum",
        description=(
            "Compress a sparse explanation matrix into a co-cluster summary "
            "and explore it"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "summarize", help="run the full pipeline on an explmat-json file"
    )
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--signed", action="store_true")
    p.add_argument("--per-feature", action="store_true")
    _add_run_flags(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("bench", help="run the heuristics ladder and emit CSV")
    p.add_argument("--input", default=None, help="explmat-json fixture")
    p.add_argument("--rows", type=int, default=400)
    p.add_argument("--cols", type=int, default=60)
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--out", required=True)
    _add_run_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="serve a summary over HTTP")
    p.add_argument("--summary", required=True)
    p.add_argument("--matrix", default=None, help="enables /subset")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ingest", help="CSV + schema -> explmat-json logic matrix")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("inspect", help="print a quick look at a summary file")
    p.add_argument("--summary", required=True)
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("MELODY_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (FileNotFoundError, ShapeError, EmptyMatrixError) as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, NotFoundError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ExplsumError as err:
        print(f"internal error: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
