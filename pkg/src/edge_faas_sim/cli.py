"""Experiment front door: expand the configuration grid, run every
(cell, replication) pair, and persist CSV results plus a rerunnable manifest.

Exit codes: 0 success, 1 configuration error, 2 runtime/IO error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import (
    ExperimentConfig,
    GridCell,
    ParseError,
    ValidationError,
    cell_column_values,
    cell_seed,
    load_config,
    materialize_chains,
)
from .engine import ConfigInvalid, run
from .metrics import Aggregate, EmptyAfterWarmup, aggregate, summarize_replications
from .models import InconsistentDirectory
from .scheduler import NoExecutorAvailable
from .topology import TopologyError

RESULT_COLUMNS = [
    "model",
    "scheduler",
    "state_bytes",
    "rate_multiplier",
    "chain_length",
    "replication",
    "seed",
    "count",
    "latency_mean_s",
    "latency_p50_s",
    "latency_p95_s",
    "latency_p99_s",
    "byte_hops_total",
    "byte_hops_per_invocation",
    "max_node_utilization",
    "residual",
]

_SUMMARY_METRICS = {
    "latency_mean_s": "latency_mean",
    "latency_p50_s": "latency_p50",
    "latency_p95_s": "latency_p95",
    "latency_p99_s": "latency_p99",
    "byte_hops_total": "total_byte_hops",
    "byte_hops_per_invocation": "byte_hops_per_invocation",
    "max_node_utilization": "max_node_utilization",
}

SUMMARY_COLUMNS = [
    "model",
    "scheduler",
    "state_bytes",
    "rate_multiplier",
    "chain_length",
    "replications",
] + [f"{column}_{suffix}" for column in _SUMMARY_METRICS for suffix in ("mean", "std", "ci95")]


@dataclass
class ExperimentOutput:
    results_path: Path
    summary_path: Path
    manifest_path: Path
    data_rows: int
    summary_rows: int


def _run_one(args: tuple) -> tuple[int, int, Aggregate, list[dict] | None]:
    """Worker for one (cell, replication): returns the aggregate (plus trace)."""
    config, cell, replication = args
    seed = cell_seed(config.base_seed, cell.index, replication)
    chains = materialize_chains(config, cell)
    result = run(
        config.topology,
        chains,
        cell.model,
        cell.scheduler,
        seed,
        config.horizon,
        state_directory=config.state_directory,
        trace=config.trace,
    )
    agg = aggregate(result, config.effective_warmup(), config.workload_stop)
    return cell.index, replication, agg, result.trace


def run_experiment(config: ExperimentConfig) -> ExperimentOutput:
    """Run the whole grid and write results.csv, summary.csv and manifest.json."""
    cells = config.grid()
    jobs = [(config, cell, rep) for cell in cells for rep in range(config.replications)]
    seeds = {
        (cell.index, rep): cell_seed(config.base_seed, cell.index, rep)
        for cell in cells
        for rep in range(config.replications)
    }
    if len(set(seeds.values())) != len(seeds):
        raise ConfigInvalid("cell seeds collide; choose a different base seed")
    print(
        f"grid: {len(cells)} cells x {config.replications} replications "
        f"= {len(jobs)} runs",
        file=sys.stderr,
    )

    workers = _worker_count(len(jobs))
    outcomes: dict[tuple[int, int], tuple[Aggregate, list[dict] | None]] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, rep, agg, trace in pool.map(_run_one, jobs):
                outcomes[(index, rep)] = (agg, trace)
    else:
        for job in jobs:
            index, rep, agg, trace = _run_one(job)
            outcomes[(index, rep)] = (agg, trace)

    config.output_dir.mkdir(parents=True, exist_ok=True)
    data_rows = []
    summary_rows = []
    for cell in cells:
        state_value, length_value = cell_column_values(config, cell)
        cell_aggregates = []
        for rep in range(config.replications):
            agg, trace = outcomes[(cell.index, rep)]
            cell_aggregates.append(agg)
            data_rows.append(
                {
                    "model": cell.model.value,
                    "scheduler": cell.scheduler,
                    "state_bytes": state_value,
                    "rate_multiplier": cell.rate_multiplier,
                    "chain_length": length_value,
                    "replication": rep,
                    "seed": seeds[(cell.index, rep)],
                    "count": agg.count,
                    "latency_mean_s": agg.latency_mean,
                    "latency_p50_s": agg.latency_p50,
                    "latency_p95_s": agg.latency_p95,
                    "latency_p99_s": agg.latency_p99,
                    "byte_hops_total": agg.total_byte_hops,
                    "byte_hops_per_invocation": agg.byte_hops_per_invocation,
                    "max_node_utilization": agg.max_node_utilization,
                    "residual": agg.residual,
                }
            )
            if trace is not None:
                trace_path = config.output_dir / f"trace-cell{cell.index}-rep{rep}.jsonl"
                with trace_path.open("w") as handle:
                    for row in trace:
                        handle.write(json.dumps(row) + "\n")
        summary_rows.append(
            _summary_row(cell, state_value, length_value, cell_aggregates)
        )

    results_path = config.output_dir / "results.csv"
    _write_csv(results_path, RESULT_COLUMNS, data_rows)
    summary_path = config.output_dir / "summary.csv"
    _write_csv(summary_path, SUMMARY_COLUMNS, summary_rows)
    manifest_path = config.output_dir / "manifest.json"
    _write_manifest(manifest_path, config, cells, seeds)
    return ExperimentOutput(
        results_path=results_path,
        summary_path=summary_path,
        manifest_path=manifest_path,
        data_rows=len(data_rows),
        summary_rows=len(summary_rows),
    )


def _worker_count(jobs: int) -> int:
    raw = os.environ.get("EDGE_FAAS_SIM_THREADS", "1")
    try:
        workers = int(raw)
    except ValueError:
        workers = 1
    return max(1, min(workers, jobs)) if jobs else 1


def _summary_row(
    cell: GridCell, state_value: float, length_value: int, aggregates: list[Aggregate]
) -> dict:
    row = {
        "model": cell.model.value,
        "scheduler": cell.scheduler,
        "state_bytes": state_value,
        "rate_multiplier": cell.rate_multiplier,
        "chain_length": length_value,
        "replications": len(aggregates),
    }
    if len(aggregates) >= 2:
        summary = summarize_replications(aggregates)
        for column, metric in _SUMMARY_METRICS.items():
            stats = summary.metrics[metric]
            row[f"{column}_mean"] = stats.mean
            row[f"{column}_std"] = stats.stddev
            row[f"{column}_ci95"] = stats.ci95_halfwidth
    else:
        for column, metric in _SUMMARY_METRICS.items():
            row[f"{column}_mean"] = float(getattr(aggregates[0], metric))
            row[f"{column}_std"] = ""
            row[f"{column}_ci95"] = ""
    return row


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def _write_manifest(
    path: Path,
    config: ExperimentConfig,
    cells: list[GridCell],
    seeds: dict[tuple[int, int], int],
) -> None:
    manifest = {
        "artifact": "edge-faas-sim",
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "grid_size": len(cells),
        "replications": config.replications,
        "base_seed": config.base_seed,
        "cells": [
            {
                "index": cell.index,
                "model": cell.model.value,
                "scheduler": cell.scheduler,
                "state_bytes": cell.state_bytes,
                "rate_multiplier": cell.rate_multiplier,
                "chain_length": cell.chain_length,
                "seeds": [seeds[(cell.index, rep)] for rep in range(config.replications)],
            }
            for cell in cells
        ],
        "config": config.document,
    }
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    if getattr(args, "out", None):
        config.output_dir = Path(args.out)
        config.document.setdefault("output", {})["dir"] = str(args.out)
    if getattr(args, "seed", None) is not None:
        config.base_seed = args.seed
        config.document.setdefault("seeds", {})["base"] = args.seed
    if getattr(args, "replications", None) is not None:
        if args.replications < 1:
            raise ValidationError("seeds.replications", "must be >= 1")
        config.replications = args.replications
        config.document.setdefault("seeds", {})["replications"] = args.replications
    if getattr(args, "trace", False):
        config.trace = True
        config.document["trace"] = True
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edge-faas-sim",
        description="Compare stateful FaaS execution models in an edge network simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run the experiment grid described by a config")
    run_parser.add_argument("--config", required=True, help="experiment JSON (or manifest.json)")
    run_parser.add_argument("--out", help="output directory (overrides output.dir)")
    run_parser.add_argument("--seed", type=int, help="base seed (overrides seeds.base)")
    run_parser.add_argument(
        "--replications", type=int, help="replications per cell (overrides seeds.replications)"
    )
    run_parser.add_argument("--trace", action="store_true", help="emit per-step trace files")

    validate_parser = sub.add_parser("validate", help="validate a config without running")
    validate_parser.add_argument("--config", required=True)

    sub.add_parser("version", help="print the artifact version")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "version":
        print(f"edge-faas-sim {__version__}")
        return 0

    try:
        config = load_config(args.config)
        if args.command == "run":
            config = _apply_overrides(config, args)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        print(
            f"ok: {len(config.chains)} chain(s), grid {config.grid_size} cell(s) "
            f"x {config.replications} replication(s)"
        )
        return 0

    try:
        output = run_experiment(config)
    except (
        TopologyError,
        ConfigInvalid,
        InconsistentDirectory,
        NoExecutorAvailable,
        EmptyAfterWarmup,
        OSError,
    ) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {output.data_rows} data rows to {output.results_path}, "
        f"{output.summary_rows} summaries to {output.summary_path}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
