import csv
import random

import pytest

MODELS = ["client_state", "remote_state", "local_state", "state_propagation"]

COLUMNS = [
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


def write_rows(path, rows, columns=COLUMNS):
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
    return path


def sweep_rows(loads=(0.5, 0.75, 1.0, 1.25, 1.5), states=(10000.0,), lengths=(2,), replications=2):
    """Synthetic but schema-exact rows for a model x load x state x length grid."""
    rng = random.Random(7)
    rows = []
    for model_index, model in enumerate(MODELS):
        for load in loads:
            for state in states:
                for length in lengths:
                    for rep in range(replications):
                        base_latency = 0.01 * (1 + model_index) * load + state * 1e-9
                        noise = rng.uniform(-5e-4, 5e-4)
                        rows.append(
                            {
                                "model": model,
                                "scheduler": "least_loaded",
                                "state_bytes": state,
                                "rate_multiplier": load,
                                "chain_length": length,
                                "replication": rep,
                                "seed": 1000 + rep,
                                "count": 500,
                                "latency_mean_s": base_latency + noise,
                                "latency_p50_s": base_latency,
                                "latency_p95_s": base_latency * 1.6,
                                "latency_p99_s": base_latency * 2.1,
                                "byte_hops_total": 1e6 * length + state,
                                "byte_hops_per_invocation": 2e3 * length + state,
                                "max_node_utilization": min(0.95, 0.2 * load * (1 + model_index)),
                                "residual": 0,
                            }
                        )
    return rows


@pytest.fixture
def load_sweep_csv(tmp_path):
    return write_rows(tmp_path / "results.csv", sweep_rows())
