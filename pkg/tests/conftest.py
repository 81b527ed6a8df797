import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from edge_faas_sim.topology import Link, Node, Topology, build_topology


@pytest.fixture
def line3() -> Topology:
    """0(client) - 1(executor+store) - 2(executor), 1 Mbit-ish links."""
    return build_topology(
        {
            "nodes": [
                {"id": 0, "speed": 1e9, "roles": ["client"]},
                {"id": 1, "speed": 1e9, "roles": ["executor", "state_store"]},
                {"id": 2, "speed": 1e9, "roles": ["executor"]},
            ],
            "links": [
                {"a": 0, "b": 1, "capacity": 1e6, "latency": 1e-3},
                {"a": 1, "b": 2, "capacity": 1e6, "latency": 1e-3},
            ],
        }
    )


@pytest.fixture
def single_node() -> Topology:
    return build_topology(
        {"nodes": [{"id": 0, "speed": 1e9, "roles": ["client", "executor"]}], "links": []}
    )


def random_connected_topology(rng: random.Random, max_nodes: int = 8) -> Topology:
    """Random connected graph: a random spanning tree plus random extra edges.

    Node 0 is always a client; every node is an executor; the last node is a
    state store. Latencies and capacities are drawn from small grids so tests
    stay readable when they fail.
    """
    n = rng.randint(1, max_nodes)
    nodes = []
    for i in range(n):
        roles = {"executor"}
        if i == 0:
            roles.add("client")
        if i == n - 1:
            roles.add("state_store")
        nodes.append(Node(id=i, speed=rng.choice([5e8, 1e9, 2e9]), roles=frozenset(roles)))

    links = []
    taken = set()
    for i in range(1, n):
        j = rng.randrange(i)
        taken.add((j, i))
    extra = rng.randint(0, n)
    for _ in range(extra):
        a, b = rng.sample(range(n), 2) if n >= 2 else (0, 0)
        if a == b:
            continue
        pair = (min(a, b), max(a, b))
        taken.add(pair)
    for a, b in sorted(taken):
        links.append(
            Link(
                a=a,
                b=b,
                capacity=rng.choice([1e6, 1e7, 1e8]),
                latency=rng.choice([0.0, 1e-4, 1e-3, 5e-3]),
            )
        )
    return Topology(nodes, links)
