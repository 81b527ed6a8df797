"""Aggregation of per-invocation records into comparison statistics: nearest-rank
latency percentiles, byte-hop traffic, node utilization, and Student-t
confidence intervals across independent replications."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import stats

from .engine import InvocationRecord, RunResult


class EmptyAfterWarmup(ValueError):
    """Every record fell inside the warmup window: the warmup is misconfigured.
    A run with no records at all is valid and aggregates to count 0."""


class TooFewReplications(ValueError):
    pass


SUMMARY_METRICS = (
    "count",
    "latency_mean",
    "latency_p50",
    "latency_p95",
    "latency_p99",
    "total_byte_hops",
    "byte_hops_per_invocation",
    "max_node_utilization",
    "residual",
)


@dataclass(frozen=True)
class Aggregate:
    count: int
    latency_mean: float
    latency_p50: float
    latency_p95: float
    latency_p99: float
    total_byte_hops: float
    byte_hops_per_invocation: float
    node_utilization: dict[int, float]
    max_node_utilization: float
    residual: int


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    stddev: float
    ci95_halfwidth: float


@dataclass(frozen=True)
class ReplicationSummary:
    n: int
    metrics: dict[str, MetricSummary]


def nearest_rank(sorted_values: list[float], percent: int) -> float:
    """Value at 1-based indexceil(percent/100 * n) of an ascending list.

    Integer ceil-division keeps the index exact; a float ceil can land one
    element off (e.g. 0.95 * 20 evaluates above 19).
    """
    n = len(sorted_values)
    if n == 0:
        raise ValueError("cannot take a percentile of an empty sample")
    if not 0 < percent <= 100:
        raise ValueError(f"percent must be in (0, 100], got {percent}")
    index = -((-percent * n) // 100)  # ceil(percent * n / 100)
    return sorted_values[index - 1]


def aggregate(result: RunResult, warmup: float, duration: float) -> Aggregate:
    """Aggregate one run, dropping records that arrived before `warmup` and
    measuring utilization over the [warmup, duration] window."""
    if warmup < 0 or duration <= warmup:
        raise ValueError(f"need duration > warmup >= 0, got warmup={warmup} duration={duration}")

    kept = [r for r in result.records if r.arrival_time >= warmup]
    if result.records and not kept:
        raise EmptyAfterWarmup(
            f"all {len(result.records)} records arrived before warmup={warmup}"
        )

    window = duration - warmup
    utilization = {
        node: result.busy_within(node, warmup, duration) / window
        for node in result.busy_intervals
    }
    max_utilization = max(utilization.values(), default=0.0)

    if not kept:
        return Aggregate(
            count=0,
            latency_mean=math.nan,
            latency_p50=math.nan,
            latency_p95=math.nan,
            latency_p99=math.nan,
            total_byte_hops=0.0,
            byte_hops_per_invocation=math.nan,
            node_utilization=utilization,
            max_node_utilization=max_utilization,
            residual=result.residual,
        )

    latencies = sorted(r.latency for r in kept)
    total_byte_hops = sum(r.byte_hops for r in kept)
    return Aggregate(
        count=len(kept),
        latency_mean=sum(latencies) / len(latencies),
        latency_p50=nearest_rank(latencies, 50),
        latency_p95=nearest_rank(latencies, 95),
        latency_p99=nearest_rank(latencies, 99),
        total_byte_hops=total_byte_hops,
        byte_hops_per_invocation=total_byte_hops / len(kept),
        node_utilization=utilization,
        max_node_utilization=max_utilization,
        residual=result.residual,
    )


def summarize_replications(aggregates: list[Aggregate]) -> ReplicationSummary:
    """Cross-replication mean, sample stddev and 95% Student-t half-width for
    each summary metric. Requires at least two replications."""
    n = len(aggregates)
    if n < 2:
        raise TooFewReplications(f"need >= 2 replications for a confidence interval, got {n}")
    t_factor = float(stats.t.ppf(0.975, n - 1))
    summaries = {}
    for name in SUMMARY_METRICS:
        values = [float(getattr(agg, name)) for agg in aggregates]
        mean = sum(values) / n
        variance = sum((v - mean) ** 2 for v in values) / (n - 1)
        stddev = math.sqrt(variance)
        summaries[name] = MetricSummary(
            mean=mean, stddev=stddev, ci95_halfwidth=t_factor * stddev / math.sqrt(n)
        )
    return ReplicationSummary(n=n, metrics=summaries)
