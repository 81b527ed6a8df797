"""Figure rendering: one series per execution model, 95% confidence bands
across replications."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from scipy import stats

from .table import ResultTable


class EmptySelection(ValueError):
    """The requested x axis is not swept in this table."""


@dataclass(frozen=True)
class FigureKind:
    x_column: str
    y_column: str
    x_label: str
    y_label: str
    style: str  # "lines" or "bars"


FIGURE_KINDS = {
    "latency_vs_load": FigureKind(
        x_column="rate_multiplier",
        y_column="latency_mean_s",
        x_label="offered load multiplier",
        y_label="mean latency [s]",
        style="lines",
    ),
    "traffic_vs_state": FigureKind(
        x_column="state_bytes",
        y_column="byte_hops_per_invocation",
        x_label="state size [B]",
        y_label="traffic [byte-hops / invocation]",
        style="bars",
    ),
    "traffic_vs_chain": FigureKind(
        x_column="chain_length",
        y_column="byte_hops_per_invocation",
        x_label="chain length [functions]",
        y_label="traffic [byte-hops / invocation]",
        style="bars",
    ),
}


@dataclass(frozen=True)
class SeriesPoint:
    x: float
    mean: float
    ci95: float
    n: int


def summarize_series(table: ResultTable, kind: FigureKind) -> dict[str, list[SeriesPoint]]:
    """Group rows by (model, x) and reduce each group to mean and 95% t-interval.

    Every row lands in exactly one group; replications (and any other swept
    axes) collapse into the group statistics.
    """
    xs = table.distinct(kind.x_column)
    if len(xs) < 2:
        raise EmptySelection(
            f"axis {kind.x_column!r} has {len(xs)} distinct value(s); need a sweep of >= 2"
        )
    groups: dict[str, dict[float, list[float]]] = {}
    for row in table.rows:
        groups.setdefault(row.model, {}).setdefault(row[kind.x_column], []).append(
            row[kind.y_column]
        )
    series = {}
    covered = 0
    for model, by_x in groups.items():
        points = []
        for x in sorted(by_x):
            values = by_x[x]
            covered += len(values)
            mean = sum(values) / len(values)
            if len(values) >= 2:
                stddev = math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))
                ci = float(stats.t.ppf(0.975, len(values) - 1)) * stddev / math.sqrt(len(values))
            else:
                ci = 0.0
            points.append(SeriesPoint(x=x, mean=mean, ci95=ci, n=len(values)))
        series[model] = points
    assert covered == len(table), "series grouping must cover every row exactly once"
    return series


def render(csv_path: str | Path, figure_kind: str, out_path: str | Path):
    """Render one figure from a results CSV and save it to out_path.

    The output format follows the file extension; extensionless paths get
    .svg. Returns the matplotlib Figure.
    """
    if figure_kind not in FIGURE_KINDS:
        raise ValueError(
            f"unknown figure kind {figure_kind!r} (valid: {', '.join(sorted(FIGURE_KINDS))})"
        )
    kind = FIGURE_KINDS[figure_kind]
    table = ResultTable.load(csv_path)
    series = summarize_series(table, kind)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    models = list(series)
    if kind.style == "lines":
        for model in models:
            points = series[model]
            xs = [p.x for p in points]
            means = [p.mean for p in points]
            (line,) = ax.plot(xs, means, marker="o", label=model)
            lower = [p.mean - p.ci95 for p in points]
            upper = [p.mean + p.ci95 for p in points]
            ax.fill_between(xs, lower, upper, alpha=0.2, color=line.get_color())
    else:
        xs = sorted({p.x for points in series.values() for p in points})
        slot = 0.8 / len(models)
        for position, model in enumerate(models):
            by_x = {p.x: p for p in series[model]}
            offsets = [i - 0.4 + slot * (position + 0.5) for i in range(len(xs))]
            heights = [by_x[x].mean if x in by_x else 0.0 for x in xs]
            errors = [by_x[x].ci95 if x in by_x else 0.0 for x in xs]
            ax.bar(offsets, heights, width=slot, yerr=errors, capsize=3, label=model)
        ax.set_xticks(range(len(xs)))
        ax.set_xticklabels([_format_tick(x) for x in xs])

    ax.set_xlabel(kind.x_label)
    ax.set_ylabel(kind.y_label)
    ax.legend(title="execution model")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()

    out_path = Path(out_path)
    if not out_path.suffix:
        out_path = out_path.with_suffix(".svg")
    fig.savefig(out_path)
    plt.close(fig)
    return fig


def _format_tick(value: float) -> str:
    if value == int(value):
        return f"{int(value):g}" if abs(value) < 1e6 else f"{value:.0e}"
    return f"{value:g}"
