import math

import numpy as np
import pytest

from edge_faas_sim.workload import (
    ArrivalProcess,
    ChainSpec,
    FunctionSpec,
    Invocation,
    generate_invocations,
    next_interarrival,
    substream,
)


def make_chain(chain_id="app", kind="poisson", rate=10.0, start=0.0, stop=100.0, n_functions=1):
    functions = tuple(
        FunctionSpec(id=f"f{i + 1}", demand=1e7, input_bytes=1000, output_bytes=1000)
        for i in range(n_functions)
    )
    return ChainSpec(
        id=chain_id,
        functions=functions,
        state_bytes=0,
        client=0,
        arrival=ArrivalProcess(kind=kind, rate=rate, start=start, stop=stop),
    )


class TestNextInterarrival:
    def test_deterministic_is_inverse_rate(self):
        process = ArrivalProcess("deterministic", rate=10.0, start=0.0, stop=1.0)
        rng = substream(0, "x")
        assert next_interarrival(process, rng) == 0.1

    def test_poisson_mean(self):
        # Exponential with mean 1/rate: sample mean over 1e5 draws within 1%.
        process = ArrivalProcess("poisson", rate=10.0, start=0.0, stop=1.0)
        rng = substream(42, "stats")
        draws = [next_interarrival(process, rng) for _ in range(100_000)]
        assert abs(np.mean(draws) - 0.1) / 0.1 < 0.01

    def test_poisson_variance(self):
        # Exponential variance is 1/rate^2 = 0.01; within 3%.
        process = ArrivalProcess("poisson", rate=10.0, start=0.0, stop=1.0)
        rng = substream(42, "stats")
        draws = [next_interarrival(process, rng) for _ in range(100_000)]
        assert abs(np.var(draws) - 0.01) / 0.01 < 0.03


class TestGenerateInvocations:
    def test_first_arrival_convention(self):
        # Deterministic rate 2 on [0, 1): first arrival at start + 1/rate = 0.5,
        # the next lands exactly on stop and is excluded.
        chain = make_chain(kind="deterministic", rate=2.0, start=0.0, stop=1.0)
        stream = generate_invocations([chain], seed=1)
        assert [inv.arrival_time for inv in stream] == [0.5]

    def test_empty_chain_list(self):
        assert generate_invocations([], seed=1) == []

    def test_identical_chains_same_substream(self):
        a = make_chain(chain_id="same")
        b = make_chain(chain_id="same")
        times_a = [i.arrival_time for i in generate_invocations([a], seed=9)]
        times_b = [i.arrival_time for i in generate_invocations([b], seed=9)]
        assert times_a == times_b

    def test_streams_reproducible(self):
        chains = [make_chain(chain_id="a"), make_chain(chain_id="b", rate=3.0)]
        one = generate_invocations(chains, seed=123)
        two = generate_invocations(chains, seed=123)
        assert [(i.arrival_time, i.chain.id, i.demands) for i in one] == [
            (i.arrival_time, i.chain.id, i.demands) for i in two
        ]

    def test_removing_chain_leaves_others_unchanged(self):
        a = make_chain(chain_id="a")
        b = make_chain(chain_id="b", rate=7.0)
        with_both = generate_invocations([a, b], seed=5)
        only_a = generate_invocations([a], seed=5)
        times_a_in_both = [i.arrival_time for i in with_both if i.chain.id == "a"]
        assert times_a_in_both == [i.arrival_time for i in only_a]

    def test_arrivals_within_window(self):
        chain = make_chain(rate=50.0, start=2.0, stop=4.0)
        for inv in generate_invocations([chain], seed=77):
            assert 2.0 <= inv.arrival_time < 4.0

    def test_ids_strictly_increasing_in_arrival_order(self):
        chains = [make_chain(chain_id="a"), make_chain(chain_id="b")]
        stream = generate_invocations(chains, seed=3)
        keys = [(i.arrival_time, i.chain.id) for i in stream]
        assert keys == sorted(keys)
        assert [i.id for i in stream] == list(range(len(stream)))

    def test_poisson_rate_convergence(self):
        # count / window -> rate within 2% once rate * window >= 1e5.
        chain = make_chain(rate=1000.0, start=0.0, stop=100.0)
        stream = generate_invocations([chain], seed=11)
        empirical = len(stream) / 100.0
        assert abs(empirical - 1000.0) / 1000.0 < 0.02

    def test_exponential_demand_realization(self):
        spec = FunctionSpec(
            id="f1", demand=1e7, input_bytes=0, output_bytes=0, demand_kind="exponential"
        )
        chain = ChainSpec(
            id="mm1",
            functions=(spec,),
            state_bytes=0,
            client=0,
            arrival=ArrivalProcess("poisson", rate=100.0, start=0.0, stop=1000.0),
        )
        stream = generate_invocations([chain], seed=21)
        demands = [inv.demands[0] for inv in stream]
        assert all(d > 0 for d in demands)
        assert abs(np.mean(demands) - 1e7) / 1e7 < 0.02
        # Constant-demand chains realize the configured value exactly.
        const_stream = generate_invocations([make_chain()], seed=21)
        assert all(inv.demands == (1e7,) for inv in const_stream)


class TestValidation:
    def test_rate_must_be_positive(self):
        with pytest.raises(ValueError):
            ArrivalProcess("poisson", rate=0.0, start=0.0, stop=1.0)

    def test_window_ordering(self):
        with pytest.raises(ValueError):
            ArrivalProcess("poisson", rate=1.0, start=5.0, stop=5.0)

    def test_chain_needs_functions(self):
        with pytest.raises(ValueError):
            ChainSpec(
                id="x",
                functions=(),
                state_bytes=0,
                client=0,
                arrival=ArrivalProcess("poisson", rate=1.0, start=0.0, stop=1.0),
            )

    def test_demand_positive(self):
        with pytest.raises(ValueError):
            FunctionSpec(id="f", demand=0.0, input_bytes=0, output_bytes=0)
