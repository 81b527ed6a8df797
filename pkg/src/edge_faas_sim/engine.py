"""Deterministic discrete-event executor.

Events are processed in (time, sequence) order with sequence numbers assigned
at creation, so ties resolve identically on every run. A transfer occupies each
link of its route in turn: FIFO wait, then size/capacity of transmission hold,
then propagation latency that does not occupy the link. A compute holds its
node for operations/speed. Plan steps run strictly in order; a whole run is a
pure function of (topology, chains, model, scheduler, seed, horizon).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .models import (
    Compute,
    ExecutionModel,
    Plan,
    StateDirectory,
    Transfer,
    assign_executors,
    compile_plan,
    initial_state_directory,
    on_completion,
)
from .scheduler import Scheduler
from .topology import Topology
from .workload import ChainSpec, Invocation, generate_invocations, substream


class ConfigInvalid(ValueError):
    pass


class HorizonBeforeWorkloadEnd(ConfigInvalid):
    pass


_ARRIVAL, _HOP_END, _COMPUTE_END = 0, 1, 2


@dataclass(frozen=True)
class InvocationRecord:
    invocation_id: int
    chain_id: str
    arrival_time: float
    completion_time: float
    latency: float
    byte_hops: float
    executors: tuple[int, ...]
    model: ExecutionModel


@dataclass
class RunResult:
    records: list[InvocationRecord]
    arrivals: int
    residual: int
    busy_intervals: dict[int, list[tuple[float, float]]]
    workload_stop: float
    horizon: float
    trace: list[dict] | None = None
    final_directory: dict[str, int] = field(default_factory=dict)

    @property
    def completions(self) -> int:
        return len(self.records)

    def node_busy_time(self, node_id: int) -> float:
        return sum(end - start for start, end in self.busy_intervals.get(node_id, []))

    def busy_within(self, node_id: int, lo: float, hi: float) -> float:
        """Busy time of a node clipped to [lo, hi]; intervals never overlap."""
        total = 0.0
        for start, end in self.busy_intervals.get(node_id, []):
            total += max(0.0, min(end, hi) - max(start, lo))
        return total

    def serialize(self) -> str:
        """Canonical text form of the per-invocation records, for byte-level
        determinism comparisons."""
        lines = [
            f"{r.invocation_id},{r.chain_id},{r.arrival_time!r},{r.completion_time!r},"
            f"{r.latency!r},{r.byte_hops!r},{'|'.join(map(str, r.executors))},{r.model.value}"
            for r in self.records
        ]
        lines.append(f"arrivals={self.arrivals},residual={self.residual}")
        return "\n".join(lines)


def drain_check(result: RunResult) -> bool:
    """Conservation audit: every arrival is either completed or still in flight."""
    return result.arrivals == result.completions + result.residual


@dataclass
class _Flight:
    invocation: Invocation
    executors: list[int]
    plan: Plan
    byte_hops: float
    step: int = -1
    route: tuple[int, ...] = ()
    hop: int = 0


def run(
    topology: Topology,
    chains: list[ChainSpec],
    model: ExecutionModel | str,
    scheduler: str,
    seed: int,
    horizon: float = math.inf,
    *,
    state_directory: dict[str, int] | None = None,
    trace: bool = False,
) -> RunResult:
    """Simulate one configuration and return per-invocation completion records."""
    model = ExecutionModel(model)
    _validate(topology, chains, horizon)

    directory: StateDirectory = initial_state_directory(chains, model, topology, state_directory)
    invocations = generate_invocations(chains, seed)
    scheduler_ = Scheduler(scheduler)
    sched_rng = substream(seed, "scheduler")
    workload_stop = max((c.arrival.stop for c in chains), default=0.0)

    pending: dict[int, float] = {}
    node_busy_until: dict[int, float] = {nid: 0.0 for nid in topology.nodes}
    link_busy_until: dict[tuple[int, int], float] = {pair: 0.0 for pair in topology.links}
    busy_intervals: dict[int, list[tuple[float, float]]] = {nid: [] for nid in topology.nodes}
    trace_rows: list[dict] | None = [] if trace else None

    # (time, seq, kind, invocation index) with seq strictly increasing in
    # creation order; all arrivals are created first, in stream order.
    heap: list[tuple[float, int, int, int]] = [
        (invocation.arrival_time, i, _ARRIVAL, i)
        for i, invocation in enumerate(invocations)
    ]
    heapq.heapify(heap)
    seq = len(invocations)
    inflight: dict[int, _Flight] = {}
    records: list[InvocationRecord] = []
    route_cache: dict[tuple[int, int], tuple[int, ...]] = {}

    def route_of(src: int, dst: int) -> tuple[int, ...]:
        key = (src, dst)
        cached = route_cache.get(key)
        if cached is None:
            cached = topology.shortest_path(src, dst).node_ids
            route_cache[key] = cached
        return cached

    def start_hop(flight: _Flight, now: float, idx: int) -> None:
        nonlocal seq
        a, b = flight.route[flight.hop], flight.route[flight.hop + 1]
        pair = (a, b) if a < b else (b, a)
        link = topology.links[pair]
        step = flight.plan.steps[flight.step]
        start = max(now, link_busy_until[pair])
        service = step.size / link.capacity
        end = start + service
        link_busy_until[pair] = end
        delivered = end + link.latency
        if trace_rows is not None:
            trace_rows.append(
                {
                    "time": now,
                    "resource": f"link:{pair[0]}-{pair[1]}",
                    "kind": "transfer",
                    "invocation": flight.invocation.id,
                    "step": flight.step,
                    "hop": flight.hop,
                    "t_ready": now,
                    "t_start": start,
                    "t_end": end,
                    "t_done": delivered,
                    "wait": start - now,
                    "service": service,
                    "propagation": link.latency,
                }
            )
        heapq.heappush(heap, (delivered, seq, _HOP_END, idx))
        seq += 1

    def advance(flight: _Flight, now: float, idx: int) -> None:
        nonlocal seq
        while True:
            flight.step += 1
            if flight.step == len(flight.plan.steps):
                records.append(
                    InvocationRecord(
                        invocation_id=flight.invocation.id,
                        chain_id=flight.invocation.chain.id,
                        arrival_time=flight.invocation.arrival_time,
                        completion_time=now,
                        latency=now - flight.invocation.arrival_time,
                        byte_hops=flight.byte_hops,
                        executors=tuple(flight.executors),
                        model=model,
                    )
                )
                on_completion(flight.invocation, model, directory, flight.executors)
                del inflight[idx]
                return
            step = flight.plan.steps[flight.step]
            if isinstance(step, Transfer):
                if step.src == step.dst:
                    continue  # local hand-off, no network involvement
                flight.route = route_of(step.src, step.dst)
                flight.hop = 0
                start_hop(flight, now, idx)
                return
            node = step.node
            start = max(now, node_busy_until[node])
            service = step.operations / topology.nodes[node].speed
            end = start + service
            node_busy_until[node] = end
            busy_intervals[node].append((start, end))
            if trace_rows is not None:
                trace_rows.append(
                    {
                        "time": now,
                        "resource": f"node:{node}",
                        "kind": "compute",
                        "invocation": flight.invocation.id,
                        "step": flight.step,
                        "hop": 0,
                        "t_ready": now,
                        "t_start": start,
                        "t_end": end,
                        "t_done": end,
                        "wait": start - now,
                        "service": service,
                        "propagation": 0.0,
                    }
                )
            heapq.heappush(heap, (end, seq, _COMPUTE_END, idx))
            seq += 1
            return

    last_time = -math.inf
    while heap:
        now, _, kind, idx = heapq.heappop(heap)
        if now > horizon:
            break
        assert now >= last_time, "event times must be non-decreasing"
        last_time = now

        if kind == _ARRIVAL:
            invocation = invocations[idx]
            executors = assign_executors(
                invocation, model, topology, scheduler_, directory, pending=pending, rng=sched_rng
            )
            plan = compile_plan(invocation, executors, model, directory)
            byte_hops = sum(
                step.size * (len(route_of(step.src, step.dst)) - 1)
                for step in plan.steps
                if isinstance(step, Transfer) and step.src != step.dst
            )
            flight = _Flight(invocation, executors, plan, byte_hops)
            inflight[idx] = flight
            advance(flight, now, idx)
        elif kind == _HOP_END:
            flight = inflight[idx]
            if flight.hop + 1 < len(flight.route) - 1:
                flight.hop += 1
                start_hop(flight, now, idx)
            else:
                advance(flight, now, idx)
        else:  # _COMPUTE_END
            flight = inflight[idx]
            step = flight.plan.steps[flight.step]
            assert isinstance(step, Compute)
            pending[step.node] = pending.get(step.node, 0.0) - step.operations
            advance(flight, now, idx)

    return RunResult(
        records=records,
        arrivals=len(invocations),
        residual=len(inflight),
        busy_intervals=busy_intervals,
        workload_stop=workload_stop,
        horizon=horizon,
        trace=trace_rows,
        final_directory=directory.as_dict(),
    )


def _validate(topology: Topology, chains: list[ChainSpec], horizon: float) -> None:
    stops = [chain.arrival.stop for chain in chains]
    if stops and horizon < max(stops):
        raise HorizonBeforeWorkloadEnd(
            f"horizon {horizon} ends before the workload stop {max(stops)}"
        )
    seen_ids = set()
    for chain in chains:
        if chain.id in seen_ids:
            raise ConfigInvalid(f"duplicate chain id {chain.id!r}")
        seen_ids.add(chain.id)
        if chain.client not in topology.nodes:
            raise ConfigInvalid(f"chain {chain.id!r}: client {chain.client} is not a node")
        if "client" not in topology.nodes[chain.client].roles:
            raise ConfigInvalid(f"chain {chain.id!r}: node {chain.client} lacks role client")
