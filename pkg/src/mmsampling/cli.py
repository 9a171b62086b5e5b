"""Command line entry point: ``mmsampling run`` and ``mmsampling sweep``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .embedding import DEFAULT_MAX_DIM
from .minimax import DENSE_CAP
from .pipeline import SAMPLER_CHOICES, PipelineError, RunConfig, run_pipeline, run_sweep, sweep_configs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmsampling",
        description="Minimax-distance clustering under a linear memory budget.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one sampling + clustering pipeline")
    run.add_argument("--data", required=True, help="CSV/table path, or gen:<name>:<n>[:<seed>]")
    run.add_argument("--sampler", required=True, choices=SAMPLER_CHOICES)
    run.add_argument("--k", required=True, type=int, help="number of clusters")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--label-col", default=None, help="ground-truth column of a headed CSV")
    run.add_argument("--standardize", action="store_true", help="z-score features before anything else")
    run.add_argument("--num-samples", type=int, default=None, help="override ceil(sqrt(N))")
    run.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM, help="upper bound for the elbow search")
    run.add_argument("--restarts", type=int, default=10, help="GMM restarts")
    run.add_argument("--clusterer", choices=("gmm", "kmeans"), default="gmm")
    run.add_argument(
        "--allow-dense",
        type=int,
        metavar="N",
        default=None,
        help=f"raise the cap (default {DENSE_CAP}) on N for the quadratic 'none' baseline",
    )
    run.add_argument("--out", required=True, help="output directory")

    sweep = sub.add_parser("sweep", help="run a grid of configurations from JSON")
    sweep.add_argument("--config", required=True, help="sweep JSON file")
    sweep.add_argument("--out", default=None, help="CSV table path (default: next to the config)")
    sweep.add_argument("--jobs", type=int, default=1)
    return parser


def _run(args) -> int:
    config = RunConfig(
        dataset=args.data,
        sampler=args.sampler,
        k=args.k,
        seed=args.seed,
        num_samples_override=args.num_samples,
        standardize=args.standardize,
        max_dim=args.max_dim,
        restarts=args.restarts,
        output=args.out,
        label_col=args.label_col,
        clusterer=args.clusterer,
        dense_cap=args.allow_dense or DENSE_CAP,
    )
    t0 = time.perf_counter()
    try:
        result = run_pipeline(config)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - t0
    print(f"N={result.n_objects} samples={result.n_samples} d'={result.d_prime} "
          f"peak_aux_entries={result.memory['peak_aux_entries']} ({elapsed:.2f}s)")
    if result.scores is not None:
        pct = result.scores.as_percent()
        print(f"M1={pct['m1_rand']:.2f}%  M2={pct['m2_mutual_info']:.2f}%  M3={pct['m3_v_measure']:.2f}%")
    print(f"wrote {Path(args.out) / 'result.json'}")
    return 0


def _sweep(args) -> int:
    path = Path(args.config)
    spec = json.loads(path.read_text(encoding="utf-8"))
    configs = sweep_configs(spec)
    out = Path(args.out) if args.out else path.with_suffix(".results.csv")
    rows = run_sweep(configs, output=out, jobs=args.jobs)
    for row in rows:
        if row["status"] == "ok":
            print(f"{row['dataset']:<40} {row['sampler']:<7} "
                  f"M1={100 * row['m1']:6.2f}% M2={100 * row['m2']:6.2f}% M3={100 * row['m3']:6.2f}%"
                  if row["m1"] is not None else f"{row['dataset']:<40} {row['sampler']:<7} (no labels)")
        else:
            print(f"{row['dataset']:<40} {row['sampler']:<7} ERROR {row['error']}")
    print(f"wrote {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command == "run":
        return _run(args)
    return _sweep(args)


if __name__ == "__main__":
    sys.exit(main())
