"""Executor selection policies for models that leave placement free.

The dispatcher is omniscient: the pending-work snapshot it sees is the exact
sum of not-yet-completed compute operations committed to each node at decision
time. Deterministic policies never touch the random stream.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .topology import Topology

POLICY_KINDS = ("random", "round_robin", "least_loaded", "closest")


class NoExecutorAvailable(RuntimeError):
    pass


class Scheduler:
    """One policy instance per simulation run; round_robin keeps a per-chain cursor."""

    def __init__(self, kind: str):
        if kind not in POLICY_KINDS:
            raise ValueError(f"unknown scheduler policy {kind!r}")
        self.kind = kind
        self._cursors: dict[str, int] = {}

    def choose_executor(
        self,
        chain_id: str,
        candidates: list[int],
        *,
        client: int,
        topology: Topology,
        pending: Mapping[int, float],
        rng: np.random.Generator,
    ) -> int:
        """Pick one executor from candidates (sorted by id internally).

        random: uniform draw; round_robin: cycles candidates in id order per
        chain; least_loaded: minimum pending operations, ties to lowest id;
        closest: minimum route latency from the client, ties to lowest id.
        """
        if not candidates:
            raise NoExecutorAvailable("no executor candidates")
        ordered = sorted(candidates)
        if self.kind == "random":
            return ordered[int(rng.integers(len(ordered)))]
        if self.kind == "round_robin":
            cursor = self._cursors.get(chain_id, 0)
            self._cursors[chain_id] = cursor + 1
            return ordered[cursor % len(ordered)]
        if self.kind == "least_loaded":
            return min(ordered, key=lambda nid: (pending.get(nid, 0.0), nid))
        return min(ordered, key=lambda nid: (topology.route_latency(client, nid), nid))
