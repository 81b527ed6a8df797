"""Edge network as a weighted graph: nodes with processing speed, bidirectional
links with capacity and propagation latency, plus cached shortest-path routing."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

ROLES = frozenset({"client", "executor", "state_store"})


class TopologyError(ValueError):
    """Invalid topology description or query."""


class DuplicateNodeId(TopologyError):
    pass


class DanglingLinkEndpoint(TopologyError):
    pass


class DisconnectedGraph(TopologyError):
    pass


class NonPositiveCapacityOrSpeed(TopologyError):
    pass


class UnknownNode(TopologyError):
    pass


class NoPath(TopologyError):
    """Unreachable destination. Cannot occur after connectivity validation,
    kept for robustness against hand-built instances."""


@dataclass(frozen=True)
class Node:
    id: int
    speed: float  # operations per second
    roles: frozenset[str]

    def __post_init__(self) -> None:
        if not isinstance(self.id, int) or self.id < 0:
            raise TopologyError(f"node id must be a non-negative integer, got {self.id!r}")
        if self.speed <= 0:
            raise NonPositiveCapacityOrSpeed(f"node {self.id}: speed must be > 0, got {self.speed}")
        if not self.roles:
            raise TopologyError(f"node {self.id}: roles must be non-empty")
        unknown = set(self.roles) - ROLES
        if unknown:
            raise TopologyError(f"node {self.id}: unknown roles {sorted(unknown)}")


@dataclass(frozen=True)
class Link:
    a: int
    b: int
    capacity: float  # bytes per second
    latency: float  # seconds, propagation

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise TopologyError(f"link {self.a}-{self.b}: endpoints must differ")
        if self.capacity <= 0:
            raise NonPositiveCapacityOrSpeed(
                f"link {self.a}-{self.b}: capacity must be > 0, got {self.capacity}"
            )
        if self.latency < 0:
            raise TopologyError(f"link {self.a}-{self.b}: latency must be >= 0, got {self.latency}")

    @property
    def pair(self) -> tuple[int, int]:
        """Unordered endpoint pair as a sorted tuple; identifies the link."""
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


@dataclass(frozen=True)
class Path:
    node_ids: tuple[int, ...]

    @property
    def hop_count(self) -> int:
        return len(self.node_ids) - 1


class Topology:
    """Validated immutable graph with all-pairs shortest routes cached at construction.

    Routing minimizes total link latency; ties are broken by the lexicographically
    smallest node-id sequence so replay is deterministic.
    """

    def __init__(self, nodes: Iterable[Node], links: Iterable[Link]):
        self.nodes: dict[int, Node] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise DuplicateNodeId(f"duplicate node id {node.id}")
            self.nodes[node.id] = node

        self.links: dict[tuple[int, int], Link] = {}
        for link in links:
            for endpoint in (link.a, link.b):
                if endpoint not in self.nodes:
                    raise DanglingLinkEndpoint(f"link {link.a}-{link.b} references unknown node {endpoint}")
            if link.pair in self.links:
                raise TopologyError(f"more than one link between nodes {link.pair[0]} and {link.pair[1]}")
            self.links[link.pair] = link

        self._adjacency: dict[int, list[int]] = {nid: [] for nid in self.nodes}
        for pair in self.links:
            self._adjacency[pair[0]].append(pair[1])
            self._adjacency[pair[1]].append(pair[0])
        for neighbours in self._adjacency.values():
            neighbours.sort()

        self._check_connected()
        if not self.nodes_with_role("client"):
            raise TopologyError("topology needs at least one node with role 'client'")
        if not self.nodes_with_role("executor"):
            raise TopologyError("topology needs at least one node with role 'executor'")

        # Static routing: all-pairs (latency, path) computed once, immutable afterwards.
        self._routes: dict[int, dict[int, tuple[float, tuple[int, ...]]]] = {
            src: self._dijkstra(src) for src in sorted(self.nodes)
        }

    def _check_connected(self) -> None:
        start = next(iter(self.nodes))
        seen = {start}
        frontier = [start]
        while frontier:
            current = frontier.pop()
            for neighbour in self._adjacency[current]:
                if neighbour not in seen:
                    seen.add(neighbour)
                    frontier.append(neighbour)
        if len(seen) != len(self.nodes):
            missing = sorted(set(self.nodes) - seen)
            raise DisconnectedGraph(f"nodes unreachable from node {start}: {missing}")

    def _dijkstra(self, src: int) -> dict[int, tuple[float, tuple[int, ...]]]:
        # Heap keys are (latency, path): the path tuple both breaks ties
        # lexicographically and guarantees a total order on entries. Latencies
        # accumulate as exact rationals (floats are dyadic) so ties are genuine
        # and the total is independent of summation order, which keeps
        # route_latency(a, b) == route_latency(b, a) exact in floats.
        best: dict[int, tuple[float, tuple[int, ...]]] = {}
        heap: list[tuple[Fraction, tuple[int, ...]]] = [(Fraction(0), (src,))]
        while heap:
            dist, path = heapq.heappop(heap)
            node = path[-1]
            if node in best:
                continue
            best[node] = (float(dist), path)
            for neighbour in self._adjacency[node]:
                if neighbour in best:
                    continue
                link = self.links[(node, neighbour) if node < neighbour else (neighbour, node)]
                heapq.heappush(heap, (dist + Fraction(link.latency), path + (neighbour,)))
        return best

    def nodes_with_role(self, role: str) -> list[int]:
        return sorted(nid for nid, node in self.nodes.items() if role in node.roles)

    def link_between(self, a: int, b: int) -> Link:
        pair = (a, b) if a < b else (b, a)
        try:
            return self.links[pair]
        except KeyError:
            raise TopologyError(f"no link between nodes {a} and {b}") from None

    def shortest_path(self, src: int, dst: int) -> Path:
        """Minimum-latency path from src to dst (cached)."""
        for nid in (src, dst):
            if nid not in self.nodes:
                raise UnknownNode(f"unknown node {nid}")
        try:
            return Path(self._routes[src][dst][1])
        except KeyError:
            raise NoPath(f"no path from {src} to {dst}") from None

    def route_latency(self, src: int, dst: int) -> float:
        if src not in self.nodes or dst not in self.nodes:
            raise UnknownNode(f"unknown node in query {src}->{dst}")
        try:
            return self._routes[src][dst][0]
        except KeyError:
            raise NoPath(f"no path from {src} to {dst}") from None

    def transfer_delay(self, path: Path, message_bytes: float) -> float:
        """Uncontended transfer time along a path: sum over hops of
        message_bytes / capacity + latency. Zero for a 0-hop path."""
        if message_bytes < 0:
            raise ValueError(f"message_bytes must be >= 0, got {message_bytes}")
        total = 0.0
        for a, b in zip(path.node_ids, path.node_ids[1:]):
            link = self.link_between(a, b)
            total += message_bytes / link.capacity + link.latency
        return total


def build_topology(spec: Mapping) -> Topology:
    """Build and validate a Topology from its configuration mapping.

    Expected shape: {"nodes": [{"id", "speed", "roles"}, ...],
                     "links": [{"a", "b", "capacity", "latency"}, ...]}.
    """
    try:
        node_specs = spec["nodes"]
    except KeyError:
        raise TopologyError("topology spec missing 'nodes'") from None
    link_specs = spec.get("links", [])

    nodes = []
    for ns in node_specs:
        try:
            nodes.append(Node(id=ns["id"], speed=float(ns["speed"]), roles=frozenset(ns["roles"])))
        except KeyError as exc:
            raise TopologyError(f"node spec {ns!r} missing key {exc}") from None
    links = []
    for ls in link_specs:
        try:
            links.append(
                Link(a=ls["a"], b=ls["b"], capacity=float(ls["capacity"]), latency=float(ls["latency"]))
            )
        except KeyError as exc:
            raise TopologyError(f"link spec {ls!r} missing key {exc}") from None
    return Topology(nodes, links)
