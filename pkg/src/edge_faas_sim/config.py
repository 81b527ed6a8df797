"""Experiment configuration: one JSON document describing topology, workload,
the execution-model/scheduler/state/load/chain-length grid, seeds and output.

A manifest written by a previous run embeds the effective document under a
top-level "config" key; loading a manifest therefore reruns it exactly.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .models import ExecutionModel
from .scheduler import POLICY_KINDS
from .topology import Topology, TopologyError, build_topology
from .workload import ArrivalProcess, ChainSpec, FunctionSpec


class ParseError(ValueError):
    """The document is not valid JSON."""


class ValidationError(ValueError):
    """The document violates the schema; `key` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass(frozen=True)
class GridCell:
    index: int
    model: ExecutionModel
    scheduler: str
    state_bytes: float | None  # None: keep each chain's configured value
    rate_multiplier: float
    chain_length: int | None  # None: keep each chain's configured length


@dataclass
class ExperimentConfig:
    topology: Topology
    chains: list[ChainSpec]
    models: list[ExecutionModel]
    schedulers: list[str]
    state_bytes_axis: list[float | None]
    rate_multipliers: list[float]
    chain_lengths: list[int | None]
    base_seed: int
    replications: int
    output_dir: Path
    output_formats: list[str]
    horizon: float
    warmup: float | None
    trace: bool
    state_directory: dict[str, int]
    document: dict = field(repr=False)  # effective JSON echo for the manifest

    @property
    def grid_size(self) -> int:
        return (
            len(self.models)
            * len(self.schedulers)
            * len(self.state_bytes_axis)
            * len(self.rate_multipliers)
            * len(self.chain_lengths)
        )

    def grid(self) -> list[GridCell]:
        cells = []
        index = 0
        for model in self.models:
            for scheduler in self.schedulers:
                for state in self.state_bytes_axis:
                    for multiplier in self.rate_multipliers:
                        for length in self.chain_lengths:
                            cells.append(
                                GridCell(index, model, scheduler, state, multiplier, length)
                            )
                            index += 1
        return cells

    @property
    def workload_start(self) -> float:
        return min(c.arrival.start for c in self.chains)

    @property
    def workload_stop(self) -> float:
        return max(c.arrival.stop for c in self.chains)

    def effective_warmup(self) -> float:
        if self.warmup is not None:
            return self.warmup
        # Default: drop the first 10% of the workload window.
        return self.workload_start + 0.1 * (self.workload_stop - self.workload_start)


def cell_seed(base_seed: int, cell_index: int, replication: int) -> int:
    """Stable per-run seed: base plus a hash of (cell, replication)."""
    digest = hashlib.sha256(f"{cell_index}:{replication}".encode()).digest()
    return base_seed + int.from_bytes(digest[:8], "big")


def materialize_chains(config: ExperimentConfig, cell: GridCell) -> list[ChainSpec]:
    """Apply one grid cell's overrides to every chain."""
    chains = []
    for chain in config.chains:
        functions = chain.functions
        if cell.chain_length is not None and cell.chain_length != len(functions):
            template = chain.functions
            functions = tuple(
                FunctionSpec(
                    id=f"{chain.id}.f{i + 1}",
                    demand=template[i % len(template)].demand,
                    input_bytes=template[i % len(template)].input_bytes,
                    output_bytes=template[i % len(template)].output_bytes,
                    demand_kind=template[i % len(template)].demand_kind,
                )
                for i in range(cell.chain_length)
            )
        arrival = chain.arrival
        if cell.rate_multiplier != 1.0:
            arrival = ArrivalProcess(
                kind=arrival.kind,
                rate=arrival.rate * cell.rate_multiplier,
                start=arrival.start,
                stop=arrival.stop,
            )
        chains.append(
            ChainSpec(
                id=chain.id,
                functions=functions,
                state_bytes=chain.state_bytes if cell.state_bytes is None else cell.state_bytes,
                client=chain.client,
                arrival=arrival,
            )
        )
    return chains


def cell_column_values(config: ExperimentConfig, cell: GridCell) -> tuple[float, int]:
    """(state_bytes, chain_length) recorded in CSV rows for this cell. When an
    axis is not swept the first chain's configured value stands in."""
    state = cell.state_bytes if cell.state_bytes is not None else config.chains[0].state_bytes
    length = cell.chain_length if cell.chain_length is not None else config.chains[0].length
    return state, length


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and fully validate an experiment document (or a run manifest)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise ValidationError("<root>", "document must be a JSON object")
    if "config" in document and "topology" not in document:
        document = document["config"]  # manifest round-trip
        if not isinstance(document, dict):
            raise ValidationError("config", "manifest 'config' must be a JSON object")
    return config_from_document(document)


def config_from_document(document: dict) -> ExperimentConfig:
    document = copy.deepcopy(document)

    if "topology" not in document:
        raise ValidationError("topology", "missing key")
    try:
        topology = build_topology(document["topology"])
    except TopologyError as exc:
        raise ValidationError("topology", str(exc)) from exc

    chains = _parse_chains(document, topology)
    models = _parse_models(document)
    schedulers = _parse_schedulers(document)

    sweep = document.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ValidationError("sweep", "must be an object")
    state_axis = _parse_axis(
        sweep, "state_bytes", default=[None], minimum=0.0, cast=float, name="state size"
    )
    rate_axis = _parse_axis(
        sweep, "rate_multipliers", default=[1.0], minimum=1e-12, cast=float, name="rate multiplier"
    )
    length_axis = _parse_axis(
        sweep, "chain_lengths", default=[None], minimum=1, cast=int, name="chain length"
    )

    seeds = document.get("seeds", {})
    if not isinstance(seeds, dict):
        raise ValidationError("seeds", "must be an object")
    base_seed = seeds.get("base", 0)
    replications = seeds.get("replications", 1)
    if not isinstance(base_seed, int):
        raise ValidationError("seeds.base", f"must be an integer, got {base_seed!r}")
    if not isinstance(replications, int) or replications < 1:
        raise ValidationError("seeds.replications", f"must be an integer >= 1, got {replications!r}")

    output = document.get("output", {})
    if not isinstance(output, dict):
        raise ValidationError("output", "must be an object")
    output_dir = Path(output.get("dir", "results"))
    formats = output.get("formats", ["csv"])
    if not isinstance(formats, list) or not formats:
        raise ValidationError("output.formats", "must be a non-empty list")
    for fmt in formats:
        if fmt != "csv":
            raise ValidationError("output.formats", f"unsupported format {fmt!r} (only 'csv')")

    horizon = document.get("horizon", None)
    if horizon is None:
        horizon = math.inf
    elif not isinstance(horizon, (int, float)) or horizon <= 0:
        raise ValidationError("horizon", f"must be a positive number, got {horizon!r}")
    stops = [c.arrival.stop for c in chains]
    if stops and horizon < max(stops):
        raise ValidationError("horizon", f"horizon {horizon} ends before workload stop {max(stops)}")

    warmup = document.get("warmup", None)
    if warmup is not None and (not isinstance(warmup, (int, float)) or warmup < 0):
        raise ValidationError("warmup", f"must be a number >= 0, got {warmup!r}")
    if warmup is not None and stops and warmup >= max(stops):
        raise ValidationError("warmup", f"warmup {warmup} must end before workload stop {max(stops)}")

    trace = document.get("trace", False)
    if not isinstance(trace, bool):
        raise ValidationError("trace", "must be a boolean")

    state_directory = document.get("state_directory", {})
    if not isinstance(state_directory, dict):
        raise ValidationError("state_directory", "must map chain ids to node ids")
    chain_ids = {c.id for c in chains}
    for chain_id, holder in state_directory.items():
        if chain_id not in chain_ids:
            raise ValidationError("state_directory", f"unknown chain id {chain_id!r}")
        if not isinstance(holder, int) or holder not in topology.nodes:
            raise ValidationError("state_directory", f"holder {holder!r} is not a topology node")

    return ExperimentConfig(
        topology=topology,
        chains=chains,
        models=models,
        schedulers=schedulers,
        state_bytes_axis=state_axis,
        rate_multipliers=rate_axis,
        chain_lengths=length_axis,
        base_seed=base_seed,
        replications=replications,
        output_dir=output_dir,
        output_formats=list(formats),
        horizon=float(horizon),
        warmup=None if warmup is None else float(warmup),
        trace=trace,
        state_directory=dict(state_directory),
        document=document,
    )


def _parse_chains(document: dict, topology: Topology) -> list[ChainSpec]:
    workload = document.get("workload")
    if workload is None:
        raise ValidationError("workload", "missing key")
    chain_specs = workload.get("chains") if isinstance(workload, dict) else None
    if not chain_specs:
        raise ValidationError("workload.chains", "must be a non-empty list")

    chains = []
    seen = set()
    for i, spec in enumerate(chain_specs):
        key = f"workload.chains[{i}]"
        try:
            functions = tuple(
                FunctionSpec(
                    id=f["id"],
                    demand=float(f["demand"]),
                    input_bytes=float(f["input_bytes"]),
                    output_bytes=float(f["output_bytes"]),
                    demand_kind=f.get("demand_kind", "constant"),
                )
                for f in spec["functions"]
            )
            arrival_spec = spec["arrival"]
            chain = ChainSpec(
                id=spec["id"],
                functions=functions,
                state_bytes=float(spec.get("state_bytes", 0.0)),
                client=spec["client"],
                arrival=ArrivalProcess(
                    kind=arrival_spec["kind"],
                    rate=float(arrival_spec["rate"]),
                    start=float(arrival_spec["start"]),
                    stop=float(arrival_spec["stop"]),
                ),
            )
        except KeyError as exc:
            raise ValidationError(key, f"missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ValidationError(key, str(exc)) from None
        if chain.id in seen:
            raise ValidationError(key, f"duplicate chain id {chain.id!r}")
        seen.add(chain.id)
        if chain.client not in topology.nodes:
            raise ValidationError(key, f"client {chain.client} is not a topology node")
        if "client" not in topology.nodes[chain.client].roles:
            raise ValidationError(key, f"node {chain.client} lacks role 'client'")
        chains.append(chain)
    return chains


def _parse_models(document: dict) -> list[ExecutionModel]:
    if "model" not in document:
        raise ValidationError("model", "missing key")
    raw = document["model"]
    names = [raw] if isinstance(raw, str) else raw
    if not isinstance(names, list) or not names:
        raise ValidationError("model", "must be a model name or non-empty list of names")
    models = []
    for name in names:
        try:
            models.append(ExecutionModel(name))
        except ValueError:
            valid = ", ".join(m.value for m in ExecutionModel)
            raise ValidationError("model", f"unknown model {name!r} (valid: {valid})") from None
    return models


def _parse_schedulers(document: dict) -> list[str]:
    raw = document.get("scheduler", {"kind": "least_loaded"})
    entries = [raw] if isinstance(raw, dict) else raw
    if not isinstance(entries, list) or not entries:
        raise ValidationError("scheduler", "must be an object or non-empty list of objects")
    kinds = []
    for entry in entries:
        kind = entry.get("kind") if isinstance(entry, dict) else None
        if kind not in POLICY_KINDS:
            raise ValidationError("scheduler", f"unknown policy {kind!r} (valid: {', '.join(POLICY_KINDS)})")
        kinds.append(kind)
    return kinds


def _parse_axis(sweep: dict, key: str, *, default, minimum, cast, name: str):
    if key not in sweep:
        return list(default)
    raw = sweep[key]
    if not isinstance(raw, list) or not raw:
        raise ValidationError(f"sweep.{key}", "must be a non-empty list")
    values = []
    for v in raw:
        try:
            value = cast(v)
        except (TypeError, ValueError):
            raise ValidationError(f"sweep.{key}", f"invalid {name} {v!r}") from None
        if value < minimum:
            raise ValidationError(f"sweep.{key}", f"{name} must be >= {minimum}, got {v!r}")
        values.append(value)
    return values
