"""Parsing of the simulator's fixed-schema results.csv into typed rows."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

REQUIRED_COLUMNS = [
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

NUMERIC_COLUMNS = REQUIRED_COLUMNS[2:]  # everything after model and scheduler


class SchemaError(ValueError):
    """The CSV does not match the documented result schema."""


@dataclass(frozen=True)
class ResultRow:
    model: str
    scheduler: str
    values: dict[str, float]

    def __getitem__(self, column: str) -> float:
        return self.values[column]


class ResultTable:
    def __init__(self, rows: list[ResultRow]):
        self.rows = rows

    def __len__(self) -> int:
        return len(self.rows)

    def models(self) -> list[str]:
        seen = []
        for row in self.rows:
            if row.model not in seen:
                seen.append(row.model)
        return seen

    def distinct(self, column: str) -> list[float]:
        return sorted({row[column] for row in self.rows})

    @classmethod
    def load(cls, path: str | Path) -> "ResultTable":
        path = Path(path)
        with path.open(newline="") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            for column in REQUIRED_COLUMNS:
                if column not in header:
                    raise SchemaError(f"missing column {column!r}")
            rows = []
            for line_number, raw in enumerate(reader, start=2):
                values = {}
                for column in NUMERIC_COLUMNS:
                    text = raw[column]
                    try:
                        value = float(text)
                    except (TypeError, ValueError):
                        raise SchemaError(
                            f"column {column!r} line {line_number}: {text!r} is not a number"
                        ) from None
                    if not math.isfinite(value):
                        raise SchemaError(
                            f"column {column!r} line {line_number}: value {text!r} is not finite"
                        )
                    values[column] = value
                rows.append(ResultRow(model=raw["model"], scheduler=raw["scheduler"], values=values))
        return cls(rows)
