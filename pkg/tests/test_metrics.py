import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edge_faas_sim.engine import InvocationRecord, RunResult
from edge_faas_sim.metrics import (
    Aggregate,
    EmptyAfterWarmup,
    TooFewReplications,
    aggregate,
    nearest_rank,
    summarize_replications,
)
from edge_faas_sim.models import ExecutionModel

from oracles import nearest_rank as nearest_rank_oracle


def make_result(latencies, arrivals=None, byte_hops=0.0, busy=None, residual=0):
    arrivals = arrivals if arrivals is not None else [1.0] * len(latencies)
    records = [
        InvocationRecord(
            invocation_id=i,
            chain_id="app",
            arrival_time=arrivals[i],
            completion_time=arrivals[i] + lat,
            latency=lat,
            byte_hops=byte_hops,
            executors=(1,),
            model=ExecutionModel.CLIENT_STATE,
        )
        for i, lat in enumerate(latencies)
    ]
    return RunResult(
        records=records,
        arrivals=len(records) + residual,
        residual=residual,
        busy_intervals=busy or {},
        workload_stop=10.0,
        horizon=math.inf,
    )


class TestAggregate:
    def test_hand_example(self):
        agg = aggregate(make_result([1.0, 2.0, 3.0]), warmup=0.0, duration=10.0)
        assert agg.count == 3
        assert agg.latency_mean == 2.0
        # nearest-rank: ceil(0.5 * 3) = 2nd smallest
        assert agg.latency_p50 == 2.0
        assert agg.latency_p95 == 3.0 and agg.latency_p99 == 3.0

    def test_single_record_collapses_percentiles(self):
        agg = aggregate(make_result([0.25]), warmup=0.0, duration=10.0)
        assert agg.latency_mean == agg.latency_p50 == agg.latency_p95 == agg.latency_p99 == 0.25

    def test_all_records_in_warmup(self):
        with pytest.raises(EmptyAfterWarmup):
            aggregate(make_result([1.0, 2.0], arrivals=[0.5, 0.6]), warmup=1.0, duration=10.0)

    def test_empty_run_is_valid(self):
        agg = aggregate(make_result([]), warmup=1.0, duration=10.0)
        assert agg.count == 0
        assert math.isnan(agg.latency_mean)
        assert agg.total_byte_hops == 0.0

    def test_warmup_drops_early_records(self):
        result = make_result([1.0, 5.0], arrivals=[0.5, 2.0])
        agg = aggregate(result, warmup=1.0, duration=10.0)
        assert agg.count == 1
        assert agg.latency_mean == 5.0

    def test_utilization_window(self):
        busy = {0: [(0.0, 2.0), (4.0, 6.0)], 1: []}
        agg = aggregate(make_result([1.0], busy=busy), warmup=1.0, duration=5.0)
        # node 0 busy within [1, 5]: (1..2) + (4..5) = 2 of a 4 s window
        assert agg.node_utilization[0] == 0.5
        assert agg.node_utilization[1] == 0.0
        assert agg.max_node_utilization == 0.5

    def test_permutation_invariance(self):
        latencies = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6]
        shuffled = latencies[:]
        random.Random(1).shuffle(shuffled)
        a = aggregate(make_result(latencies), warmup=0.0, duration=10.0)
        b = aggregate(make_result(shuffled), warmup=0.0, duration=10.0)
        assert (a.latency_mean, a.latency_p50, a.latency_p95, a.latency_p99) == (
            b.latency_mean,
            b.latency_p50,
            b.latency_p95,
            b.latency_p99,
        )

    def test_bad_window_rejected(self):
        with pytest.raises(ValueError):
            aggregate(make_result([1.0]), warmup=5.0, duration=5.0)

    def test_byte_hops_total(self):
        agg = aggregate(make_result([1.0, 2.0], byte_hops=700.0), warmup=0.0, duration=10.0)
        assert agg.total_byte_hops == 1400.0
        assert agg.byte_hops_per_invocation == 700.0


class TestNearestRank:
    @given(
        values=st.lists(st.floats(min_value=0, max_value=1e6, allow_nan=False), min_size=1, max_size=1000),
        percent=st.sampled_from([1, 25, 50, 90, 95, 99, 100]),
    )
    @settings(max_examples=300, deadline=None)
    def test_matches_brute_force_oracle(self, values, percent):
        ordered = sorted(values)
        assert nearest_rank(ordered, percent) == nearest_rank_oracle(ordered, percent)

    def test_monotone_across_percentiles(self):
        rng = random.Random(9)
        for _ in range(50):
            ordered = sorted(rng.uniform(0, 100) for _ in range(rng.randint(1, 200)))
            p50 = nearest_rank(ordered, 50)
            p95 = nearest_rank(ordered, 95)
            p99 = nearest_rank(ordered, 99)
            assert p50 <= p95 <= p99

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            nearest_rank([], 50)


def make_aggregate(value: float) -> Aggregate:
    return Aggregate(
        count=10,
        latency_mean=value,
        latency_p50=value,
        latency_p95=value,
        latency_p99=value,
        total_byte_hops=value,
        byte_hops_per_invocation=value,
        node_utilization={},
        max_node_utilization=0.5,
        residual=0,
    )


class TestSummarizeReplications:
    def test_hand_example(self):
        # values [10, 14]: mean 12, stddev 2sqrt(2), half-width t(0.975, 1) * 2.
        summary = summarize_replications([make_aggregate(10.0), make_aggregate(14.0)])
        metric = summary.metrics["latency_mean"]
        assert metric.mean == 12.0
        assert metric.stddev == pytest.approx(2.8284271247461903)
        assert metric.ci95_halfwidth == pytest.approx(12.706204736432095 * 2.0, rel=1e-9)

    def test_identical_replications_zero_width(self):
        summary = summarize_replications([make_aggregate(5.0), make_aggregate(5.0)])
        metric = summary.metrics["latency_mean"]
        assert metric.stddev == 0.0 and metric.ci95_halfwidth == 0.0

    def test_single_replication_rejected(self):
        with pytest.raises(TooFewReplications):
            summarize_replications([make_aggregate(1.0)])

    @given(values=st.lists(st.integers(min_value=0, max_value=2**40), min_size=2, max_size=16))
    @settings(max_examples=100, deadline=None)
    def test_mean_is_exact_for_small_integers(self, values):
        # Integer sums up to 2^44 stay exactly representable, so mean == sum/n.
        summary = summarize_replications([make_aggregate(float(v)) for v in values])
        assert summary.metrics["latency_mean"].mean == sum(values) / len(values)
