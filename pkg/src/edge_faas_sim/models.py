"""The four stateful-FaaS execution models, distinguished by where a chain's
state blob lives, compiled into explicit Transfer/Compute step sequences.

Canonical semantics per model (s = state size, a_i/b_i/w_i the i-th function's
input size / output size / demand, c the client, e_i the i-th executor, r the
state holder):

  CLIENT_STATE       state rides inside every message: each chain message
                     carries +s bytes; the response returns state to the client.
  REMOTE_STATE       state lives at a fixed store: synchronous fetch of s before
                     and write-back of s after every compute.
  LOCAL_STATE        compute goes to the state: all functions pinned to the
                     holder node; only a_1 in and b_k out cross the network.
  STATE_PROPAGATION  state travels with the chain and stays at the last
                     executor; the response carries b_k only and the directory
                     holder is updated on completion.

A chain with zero state compiles to the same stateless step sequence under all
four models, so cross-model comparisons are exactly calibrated at s = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .scheduler import Scheduler
from .topology import Topology
from .workload import ChainSpec, Invocation


class ExecutionModel(str, Enum):
    CLIENT_STATE = "client_state"
    REMOTE_STATE = "remote_state"
    LOCAL_STATE = "local_state"
    STATE_PROPAGATION = "state_propagation"


class InconsistentDirectory(ValueError):
    pass


@dataclass(frozen=True)
class Transfer:
    src: int
    dst: int
    size: float  # bytes

    def __post_init__(self) -> None:
        if self.size < 0:
            raise ValueError("transfer size must be >= 0")


@dataclass(frozen=True)
class Compute:
    node: int
    operations: float

    def __post_init__(self) -> None:
        if self.operations <= 0:
            raise ValueError("compute operations must be > 0")


Step = Transfer | Compute


@dataclass(frozen=True)
class Plan:
    invocation_id: int
    steps: tuple[Step, ...]

    @property
    def total_payload_bytes(self) -> float:
        return sum(step.size for step in self.steps if isinstance(step, Transfer))

    def computes(self) -> list[Compute]:
        return [step for step in self.steps if isinstance(step, Compute)]


class StateDirectory:
    """chain id -> node currently holding that chain's state.

    Mutated only by the engine between events (state propagation moves the
    holder); all other models leave it fixed for the whole run.
    """

    def __init__(self, holders: dict[str, int] | None = None):
        self._holders: dict[str, int] = dict(holders or {})

    def holder(self, chain_id: str) -> int:
        try:
            return self._holders[chain_id]
        except KeyError:
            raise InconsistentDirectory(f"no state holder registered for chain {chain_id!r}") from None

    def set_holder(self, chain_id: str, node_id: int) -> None:
        self._holders[chain_id] = node_id

    def as_dict(self) -> dict[str, int]:
        return dict(self._holders)


def initial_state_directory(
    chains: list[ChainSpec],
    model: ExecutionModel,
    topology: Topology,
    overrides: dict[str, int] | None = None,
) -> StateDirectory:
    """Build and validate the run's initial directory.

    Chains without state need no holder. Defaults when not overridden:
    remote_state -> lowest-id state_store node, local_state -> lowest-id
    executor node, client_state / state_propagation -> the chain's client.
    """
    overrides = dict(overrides or {})
    holders: dict[str, int] = {}
    for chain in chains:
        if chain.state_bytes <= 0:
            continue
        if chain.id in overrides:
            holder = overrides[chain.id]
        elif model is ExecutionModel.REMOTE_STATE:
            stores = topology.nodes_with_role("state_store")
            if not stores:
                raise InconsistentDirectory(
                    f"remote_state needs a state_store node for chain {chain.id!r}"
                )
            holder = stores[0]
        elif model is ExecutionModel.LOCAL_STATE:
            holder = topology.nodes_with_role("executor")[0]
        else:
            holder = chain.client
        holders[chain.id] = holder

    directory = StateDirectory(holders)
    validate_directory(directory, chains, model, topology)
    return directory


def validate_directory(
    directory: StateDirectory,
    chains: list[ChainSpec],
    model: ExecutionModel,
    topology: Topology,
) -> None:
    for chain in chains:
        if chain.state_bytes <= 0:
            continue
        holder = directory.holder(chain.id)
        if holder not in topology.nodes:
            raise InconsistentDirectory(
                f"chain {chain.id!r}: holder {holder} is not a topology node"
            )
        roles = topology.nodes[holder].roles
        if model is ExecutionModel.REMOTE_STATE and "state_store" not in roles:
            raise InconsistentDirectory(
                f"chain {chain.id!r}: remote_state holder {holder} lacks role state_store"
            )
        if model is ExecutionModel.LOCAL_STATE and "executor" not in roles:
            raise InconsistentDirectory(
                f"chain {chain.id!r}: local_state holder {holder} lacks role executor"
            )


def assign_executors(
    invocation: Invocation,
    model: ExecutionModel,
    topology: Topology,
    scheduler: Scheduler,
    directory: StateDirectory,
    *,
    pending: dict[int, float],
    rng: np.random.Generator,
) -> list[int]:
    """One executor per chain function.

    local_state pins every function to the holder (state never moves); the
    other models ask the scheduler per function. A stateless chain has no
    holder to pin to, so every model schedules it freely — this keeps the
    scheduler's rng draw sequence identical across models at s = 0.
    """
    chain = invocation.chain
    if model is ExecutionModel.LOCAL_STATE and chain.state_bytes > 0:
        holder = directory.holder(chain.id)
        for demand in invocation.demands:
            pending[holder] = pending.get(holder, 0.0) + demand
        return [holder] * chain.length

    candidates = topology.nodes_with_role("executor")
    executors: list[int] = []
    for i in range(chain.length):
        chosen = scheduler.choose_executor(
            chain.id,
            candidates,
            client=chain.client,
            topology=topology,
            pending=pending,
            rng=rng,
        )
        executors.append(chosen)
        pending[chosen] = pending.get(chosen, 0.0) + invocation.demands[i]
    return executors


def _stateless_steps(invocation: Invocation, executors: list[int]) -> list[Step]:
    chain = invocation.chain
    c = chain.client
    steps: list[Step] = []
    for i, function in enumerate(chain.functions):
        src = c if i == 0 else executors[i - 1]
        steps.append(Transfer(src, executors[i], function.input_bytes))
        steps.append(Compute(executors[i], invocation.demands[i]))
    steps.append(Transfer(executors[-1], c, chain.functions[-1].output_bytes))
    return steps


def compile_plan(
    invocation: Invocation,
    executors: list[int],
    model: ExecutionModel,
    directory: StateDirectory,
) -> Plan:
    """Compile one invocation into the model's canonical step sequence."""
    chain = invocation.chain
    if len(executors) != chain.length:
        raise ValueError(
            f"chain {chain.id!r}: got {len(executors)} executors for {chain.length} functions"
        )
    s = chain.state_bytes
    if s <= 0:
        # All state-only transfers vanish: the four models coincide exactly.
        return Plan(invocation.id, tuple(_stateless_steps(invocation, executors)))

    c = chain.client
    steps: list[Step] = []

    if model in (ExecutionModel.CLIENT_STATE, ExecutionModel.STATE_PROPAGATION):
        for i, function in enumerate(chain.functions):
            src = c if i == 0 else executors[i - 1]
            steps.append(Transfer(src, executors[i], function.input_bytes + s))
            steps.append(Compute(executors[i], invocation.demands[i]))
        response = chain.functions[-1].output_bytes
        if model is ExecutionModel.CLIENT_STATE:
            response += s  # state returns to the client
        steps.append(Transfer(executors[-1], c, response))

    elif model is ExecutionModel.REMOTE_STATE:
        holder = directory.holder(chain.id)
        steps.append(Transfer(c, executors[0], chain.functions[0].input_bytes))
        for i, function in enumerate(chain.functions):
            steps.append(Transfer(holder, executors[i], s))
            steps.append(Compute(executors[i], invocation.demands[i]))
            steps.append(Transfer(executors[i], holder, s))
            if i + 1 < chain.length:
                steps.append(
                    Transfer(executors[i], executors[i + 1], chain.functions[i + 1].input_bytes)
                )
        steps.append(Transfer(executors[-1], c, chain.functions[-1].output_bytes))

    else:  # LOCAL_STATE
        holder = directory.holder(chain.id)
        if any(e != holder for e in executors):
            raise InconsistentDirectory(
                f"chain {chain.id!r}: local_state executors {executors} differ from holder {holder}"
            )
        steps.append(Transfer(c, holder, chain.functions[0].input_bytes))
        for i in range(chain.length):
            steps.append(Compute(holder, invocation.demands[i]))
        steps.append(Transfer(holder, c, chain.functions[-1].output_bytes))

    return Plan(invocation.id, tuple(steps))


def plan_byte_hops(plan: Plan, topology: Topology) -> float:
    """Traffic cost of a plan: each transfer's bytes counted once per link its
    route traverses. Local hand-offs (src == dst) cost nothing."""
    return sum(
        step.size * topology.shortest_path(step.src, step.dst).hop_count
        for step in plan.steps
        if isinstance(step, Transfer)
    )


def on_completion(
    invocation: Invocation,
    model: ExecutionModel,
    directory: StateDirectory,
    executors: list[int],
) -> None:
    """State propagation leaves the state at the last executor; every other
    model keeps its directory fixed."""
    if model is ExecutionModel.STATE_PROPAGATION and invocation.chain.state_bytes > 0:
        directory.set_holder(invocation.chain.id, executors[-1])


def validate_plan(plan: Plan, invocation: Invocation) -> None:
    """Check structural invariants: exactly one Compute per chain function in
    chain order, and causal chaining — each Compute at node n immediately
    follows a Transfer whose dst is n, or another Compute at n (data already
    resident), or is the first step with n the client."""
    chain = invocation.chain
    computes = plan.computes()
    if len(computes) != chain.length:
        raise AssertionError(f"expected {chain.length} computes, found {len(computes)}")
    for compute, demand in zip(computes, invocation.demands):
        if compute.operations != demand:
            raise AssertionError("compute demands out of chain order")

    for j, step in enumerate(plan.steps):
        if not isinstance(step, Compute):
            continue
        if j == 0:
            if step.node != chain.client:
                raise AssertionError(f"first step computes at {step.node}, not the client")
            continue
        previous = plan.steps[j - 1]
        if isinstance(previous, Transfer):
            if previous.dst != step.node:
                raise AssertionError(
                    f"compute at {step.node} follows a transfer into {previous.dst}"
                )
        elif previous.node != step.node:
            raise AssertionError(
                f"compute at {step.node} follows a compute at {previous.node}"
            )
