"""Time-resolved analyses: triadic closure series, evolution snapshots, and
parameter-robustness sweeps.

Triangles live on the undirected projection.  A triangle closes at the
latest first-seen time of its three edges, and closures are bucketed into
fixed-length intervals (default 182 days, a six-month cadence).  The series
is computed twice: over all maybe+forsure edges and over the forsure-only
subgraph, which by construction is always pointwise below the full series.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import ConfigError
from . import graph as graphmod
from . import metrics as metricsmod
from .graph import EdgeClass, InteractionGraph
from .inference import (
    DEFAULT_FORSURE_MIN,
    DEFAULT_MAYBE_MIN,
    FollowEdge,
    FollowStatus,
    InteractionEvent,
    WindowGrid,
    infer_all,
)

SECONDS_PER_DAY = 86400
DEFAULT_INTERVAL_SECONDS = 182 * SECONDS_PER_DAY

TRIADS_CSV_FIELDS = [
    "interval_start",
    "interval_end",
    "cum_all",
    "new_all",
    "cum_forsure",
    "new_forsure",
]

SWEEP_CSV_FIELDS = [
    "window_days",
    "maybe_min",
    "forsure_min",
    "coverage",
    "nodes",
    "edges",
    "clustering",
    "reciprocity",
    "modularity",
]


@dataclass(frozen=True)
class TriadSeries:
    interval_len: int
    intervals: tuple[tuple[int, int], ...]
    cumulative_all: tuple[int, ...]
    new_all: tuple[int, ...]
    cumulative_forsure: tuple[int, ...]
    new_forsure: tuple[int, ...]

    @property
    def n_intervals(self) -> int:
        return len(self.intervals)


def _pair_first_seen(edges: Sequence[FollowEdge]) -> dict[tuple[str, str], int]:
    """Undirected pair -> earliest first_seen among its directed edges."""
    seen: dict[tuple[str, str], int] = {}
    for edge in edges:
        if edge.first_seen is None:
            continue
        key = (edge.source, edge.target) if edge.source <= edge.target else (edge.target, edge.source)
        if key not in seen or edge.first_seen < seen[key]:
            seen[key] = edge.first_seen
    return seen


def triangle_closures(pair_times: dict[tuple[str, str], int]) -> list[int]:
    """Closure time (max edge time) of every triangle in the projection."""
    adj: dict[str, set[str]] = {}
    for u, v in pair_times:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    closures: list[int] = []
    nodes = sorted(adj)
    for u in nodes:
        higher_u = sorted(w for w in adj[u] if w > u)
        for i, v in enumerate(higher_u):
            for w in higher_u[i + 1:]:
                if w in adj[v]:
                    closures.append(
                        max(
                            pair_times[(u, v)],
                            pair_times[(u, w)],
                            pair_times[(v, w)],
                        )
                    )
    return closures


def triad_series(
    edges: Sequence[FollowEdge],
    interval_len: int = DEFAULT_INTERVAL_SECONDS,
    use_status_time: bool = False,
) -> TriadSeries:
    """Triadic-closure counts per interval, for all edges and forsure-only.

    Edge time is first_seen by default; ``use_status_time`` switches to the
    time the edge reached its status.
    """
    if interval_len <= 0:
        raise ConfigError("interval length must be positive")

    def timestamp(edge: FollowEdge) -> int | None:
        return edge.status_time if use_status_time else edge.first_seen

    considered = [
        e for e in edges if e.status is not FollowStatus.NONE and timestamp(e) is not None
    ]
    if not considered:
        return TriadSeries(interval_len, (), (), (), (), ())

    def pair_times(subset: Sequence[FollowEdge]) -> dict[tuple[str, str], int]:
        table: dict[tuple[str, str], int] = {}
        for edge in subset:
            key = (edge.source, edge.target) if edge.source <= edge.target else (edge.target, edge.source)
            t = timestamp(edge)
            if key not in table or t < table[key]:
                table[key] = t
        return table

    all_pairs = pair_times(considered)
    forsure_pairs = pair_times(
        [e for e in considered if e.status is FollowStatus.FORSURE]
    )

    origin = min(all_pairs.values())
    # The forsure-only projection can date a pair later than the full one
    # (its earliest forsure edge), so the horizon must cover both.
    horizon = max(max(all_pairs.values()), max(forsure_pairs.values(), default=origin))
    n = (horizon - origin) // interval_len + 1
    intervals = tuple(
        (origin + i * interval_len, origin + (i + 1) * interval_len) for i in range(n)
    )

    def count_series(pairs: dict[tuple[str, str], int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
        new = [0] * n
        for closure in triangle_closures(pairs):
            new[(closure - origin) // interval_len] += 1
        cumulative = []
        running = 0
        for value in new:
            running += value
            cumulative.append(running)
        return tuple(cumulative), tuple(new)

    cum_all, new_all = count_series(all_pairs)
    cum_fs, new_fs = count_series(forsure_pairs)
    return TriadSeries(
        interval_len=interval_len,
        intervals=intervals,
        cumulative_all=cum_all,
        new_all=new_all,
        cumulative_forsure=cum_fs,
        new_forsure=new_fs,
    )


def write_triads_csv(series: TriadSeries, path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRIADS_CSV_FIELDS)
        for i, (start, end) in enumerate(series.intervals):
            writer.writerow(
                [
                    start,
                    end,
                    series.cumulative_all[i],
                    series.new_all[i],
                    series.cumulative_forsure[i],
                    series.new_forsure[i],
                ]
            )


# ---------------------------------------------------------------------------
# Evolution snapshots
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SnapshotConfig:
    maybe_min: int = DEFAULT_MAYBE_MIN
    forsure_min: int = DEFAULT_FORSURE_MIN
    include: EdgeClass = EdgeClass.ALL
    coverage: float = 0.0
    seed: int = 0
    known_agents: tuple[str, ...] = ()


def build_graph_at(
    events: Sequence[InteractionEvent],
    grid: WindowGrid,
    config: SnapshotConfig,
    cutoff: int | None = None,
) -> InteractionGraph:
    subset = events if cutoff is None else [e for e in events if e.time <= cutoff]
    edges = infer_all(subset, grid, config.maybe_min, config.forsure_min)
    built = graphmod.build(edges, config.include, known_agents=config.known_agents)
    return graphmod.apply_coverage(built, config.coverage)


def snapshot_series(
    events: Sequence[InteractionEvent],
    grid: WindowGrid,
    config: SnapshotConfig,
    checkpoints: Sequence[int],
) -> list[metricsmod.MetricsReport]:
    """Inference plus a full metric report at each cutoff time."""
    if list(checkpoints) != sorted(checkpoints):
        raise ConfigError("checkpoints must be ascending")
    reports = []
    for cutoff in checkpoints:
        g = build_graph_at(events, grid, config, cutoff)
        reports.append(
            metricsmod.full_report(
                g, seed=config.seed, config={"checkpoint": cutoff}
            )
        )
    return reports


# ---------------------------------------------------------------------------
# Parameter sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepCell:
    window_days: float
    maybe_min: int
    forsure_min: int
    coverage: float
    nodes: int
    edges: int
    clustering: float | None
    reciprocity: float | None
    modularity: float | None


@dataclass(frozen=True)
class SweepReport:
    cells: tuple[SweepCell, ...] = field(default_factory=tuple)


def sweep(
    events: Sequence[InteractionEvent],
    window_days_list: Sequence[float],
    maybe_min_list: Sequence[int] = (DEFAULT_MAYBE_MIN,),
    forsure_min_list: Sequence[int] = (DEFAULT_FORSURE_MIN,),
    coverage_list: Sequence[float] = (0.0,),
    include: EdgeClass = EdgeClass.ALL,
    known_agents: Sequence[str] = (),
) -> SweepReport:
    """Cross-product robustness sweep over grid and threshold parameters.

    Cells run in deterministic parameter order; per-cell metrics that are
    undefined on the resulting graph are left as None.
    """
    if not (window_days_list and maybe_min_list and forsure_min_list and coverage_list):
        raise ConfigError("sweep parameter lists must be non-empty")
    cells = []
    for window_days in window_days_list:
        window_len = max(1, int(round(window_days * SECONDS_PER_DAY)))
        grid = WindowGrid.from_events(events, window_len)
        for maybe_min in maybe_min_list:
            for forsure_min in forsure_min_list:
                edges = infer_all(events, grid, maybe_min, forsure_min)
                for coverage in coverage_list:
                    built = graphmod.build(edges, include, known_agents=known_agents)
                    covered = graphmod.apply_coverage(built, coverage)

                    def try_metric(fn):
                        try:
                            return fn(covered)
                        except metricsmod.UndefinedMetricError:
                            return None

                    mod_value: float | None
                    if covered.node_count:
                        _, mod_value = metricsmod.communities(covered)
                    else:
                        mod_value = None
                    cells.append(
                        SweepCell(
                            window_days=window_days,
                            maybe_min=maybe_min,
                            forsure_min=forsure_min,
                            coverage=coverage,
                            nodes=covered.node_count,
                            edges=covered.edge_count,
                            clustering=try_metric(metricsmod.clustering),
                            reciprocity=try_metric(metricsmod.reciprocity),
                            modularity=mod_value,
                        )
                    )
    return SweepReport(cells=tuple(cells))


def write_sweep_csv(report: SweepReport, path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)

    def fmt(value: float | None) -> str:
        return "" if value is None else repr(value)

    with open(target, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_CSV_FIELDS)
        for cell in report.cells:
            writer.writerow(
                [
                    cell.window_days,
                    cell.maybe_min,
                    cell.forsure_min,
                    cell.coverage,
                    cell.nodes,
                    cell.edges,
                    fmt(cell.clustering),
                    fmt(cell.reciprocity),
                    fmt(cell.modularity),
                ]
            )
