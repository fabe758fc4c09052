"""Structural metrics of the interaction graph.

Conventions (also echoed into every metrics.json):

* density and reciprocity are computed on the directed graph;
* clustering, path lengths, triangles, assortativity, and communities use
  the undirected projection (an undirected edge exists when either directed
  edge does; its weight is the sum of both directions);
* average path length is the mean over ordered reachable node pairs,
  excluding self-pairs; unreachable pairs are ignored, not penalized;
* undefined metrics surface as ``UndefinedMetricError`` and are serialized
  as null plus a ``<name>_reason`` string.

Community detection is greedy agglomerative modularity maximization with a
fixed tie rule (merge the pair whose sorted community ids are smallest), so
results are identical across runs and platforms.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import UndefinedMetricError
from .graph import InteractionGraph

DEFAULT_DEGREE_TOP_K = 10

CONVENTIONS = {
    "density": "directed",
    "reciprocity": "directed",
    "clustering": "undirected projection, degree<2 contributes 0",
    "avg_path_length": "undirected projection, mean over reachable ordered pairs",
    "assortativity": "degree Pearson over undirected projection edges, both orientations",
    "communities": "greedy agglomerative modularity maximization, weighted undirected projection",
    "fb_definition": "internal-minus-expected",
}


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------

def directed_edge_set(graph: InteractionGraph) -> set[tuple[str, str]]:
    return {(e.source, e.target) for e in graph.edges}


def undirected_adjacency(graph: InteractionGraph) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {node: set() for node in graph.nodes}
    for edge in graph.edges:
        adj[edge.source].add(edge.target)
        adj[edge.target].add(edge.source)
    return adj


def undirected_weights(graph: InteractionGraph) -> dict[tuple[str, str], float]:
    """Projection weights keyed by sorted node pair (both directions summed)."""
    weights: dict[tuple[str, str], float] = {}
    for edge in graph.edges:
        key = (edge.source, edge.target) if edge.source <= edge.target else (edge.target, edge.source)
        weights[key] = weights.get(key, 0.0) + float(edge.weight)
    return weights


# ---------------------------------------------------------------------------
# Scalar metrics
# ---------------------------------------------------------------------------

def density(graph: InteractionGraph) -> float:
    n = graph.node_count
    if n < 2:
        raise UndefinedMetricError(f"density needs >= 2 nodes, graph has {n}")
    return graph.edge_count / (n * (n - 1))


def reciprocity(graph: InteractionGraph) -> float:
    if graph.edge_count == 0:
        raise UndefinedMetricError("reciprocity is undefined without edges")
    edges = directed_edge_set(graph)
    mutual = sum(1 for (u, v) in edges if (v, u) in edges)
    return mutual / len(edges)


def local_clustering(adj: Mapping[str, set[str]], node: str) -> float:
    neighbors = sorted(adj[node])
    d = len(neighbors)
    if d < 2:
        return 0.0
    links = 0
    for i in range(d):
        for j in range(i + 1, d):
            if neighbors[j] in adj[neighbors[i]]:
                links += 1
    return 2.0 * links / (d * (d - 1))


def clustering(graph: InteractionGraph) -> float:
    if graph.node_count == 0:
        raise UndefinedMetricError("clustering is undefined on an empty graph")
    adj = undirected_adjacency(graph)
    return sum(local_clustering(adj, node) for node in graph.nodes) / graph.node_count


def _bfs_distances(adj: Mapping[str, set[str]], start: str) -> dict[str, int]:
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for node in frontier:
            for neighbor in adj[node]:
                if neighbor not in dist:
                    dist[neighbor] = dist[node] + 1
                    nxt.append(neighbor)
        frontier = nxt
    return dist


def avg_path_length(graph: InteractionGraph) -> float:
    adj = undirected_adjacency(graph)
    total = 0
    pairs = 0
    for node in graph.nodes:
        for other, d in _bfs_distances(adj, node).items():
            if other != node:
                total += d
                pairs += 1
    if pairs == 0:
        raise UndefinedMetricError("no connected node pairs")
    return total / pairs


def degree_ranking(
    graph: InteractionGraph, direction: str, k: int
) -> list[tuple[str, int]]:
    """Top-k nodes by unique-neighbor in- or out-degree, ties by id."""
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if direction not in ("in", "out"):
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    counts = {node: 0 for node in graph.nodes}
    for edge in graph.edges:
        key = edge.target if direction == "in" else edge.source
        counts[key] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


def assortativity(graph: InteractionGraph) -> float:
    """Degree correlation across undirected-projection edges.

    Every edge contributes both endpoint orderings.  Raises when degree
    variance is zero (the correlation is undefined, not zero).
    """
    adj = undirected_adjacency(graph)
    degree = {node: len(adj[node]) for node in graph.nodes}
    xs: list[float] = []
    ys: list[float] = []
    for u, v in sorted(undirected_weights(graph)):
        xs.extend((degree[u], degree[v]))
        ys.extend((degree[v], degree[u]))
    if not xs:
        raise UndefinedMetricError("assortativity needs at least one edge")
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    if var_x <= 0.0 or var_y <= 0.0:
        raise UndefinedMetricError("assortativity is undefined with zero degree variance")
    return cov / (var_x * var_y) ** 0.5


# ---------------------------------------------------------------------------
# Communities
# ---------------------------------------------------------------------------

def modularity(graph: InteractionGraph, partition: Sequence[set[str]]) -> float:
    """Newman modularity Q of a node partition on the weighted projection."""
    weights = undirected_weights(graph)
    m = sum(weights.values())
    if m == 0.0:
        return 0.0
    community_of: dict[str, int] = {}
    for idx, group in enumerate(partition):
        for node in group:
            community_of[node] = idx
    degree: dict[str, float] = {node: 0.0 for node in graph.nodes}
    for (u, v), w in weights.items():
        degree[u] += w
        degree[v] += w
    internal = [0.0] * len(partition)
    degree_sum = [0.0] * len(partition)
    for (u, v), w in weights.items():
        if community_of[u] == community_of[v]:
            internal[community_of[u]] += w
    for node in graph.nodes:
        degree_sum[community_of[node]] += degree[node]
    return sum(
        internal[c] / m - (degree_sum[c] / (2.0 * m)) ** 2
        for c in range(len(partition))
    )


_GAIN_EPS = 1e-12


class _CommunityState:
    """Partition bookkeeping for the greedy optimizer.

    Communities are keyed by their smallest member id, which is also the
    deterministic tie-break order for merges and moves.
    """

    def __init__(self, graph: InteractionGraph, weights: Mapping[tuple[str, str], float]):
        self.adj: dict[str, dict[str, float]] = {node: {} for node in graph.nodes}
        self.k: dict[str, float] = {node: 0.0 for node in graph.nodes}
        for (u, v), w in weights.items():
            self.adj[u][v] = self.adj[u].get(v, 0.0) + w
            self.adj[v][u] = self.adj[v].get(u, 0.0) + w
            self.k[u] += w
            self.k[v] += w
        self.com_of: dict[str, str] = {node: node for node in graph.nodes}
        self.members: dict[str, set[str]] = {node: {node} for node in graph.nodes}
        self.deg: dict[str, float] = {node: self.k[node] for node in graph.nodes}

    def between(self) -> dict[tuple[str, str], float]:
        table: dict[tuple[str, str], float] = {}
        for u, nbrs in self.adj.items():
            cu = self.com_of[u]
            for v, w in nbrs.items():
                if u >= v:
                    continue
                cv = self.com_of[v]
                if cu == cv:
                    continue
                key = (cu, cv) if cu <= cv else (cv, cu)
                table[key] = table.get(key, 0.0) + w
        return table

    def merge(self, a: str, b: str) -> None:
        keep, gone = (a, b) if a <= b else (b, a)
        for node in self.members[gone]:
            self.com_of[node] = keep
        self.members[keep] |= self.members.pop(gone)
        self.deg[keep] += self.deg.pop(gone)

    def move(self, node: str, dest: str | None) -> None:
        src = self.com_of[node]
        self.members[src].discard(node)
        self.deg[src] -= self.k[node]
        if not self.members[src]:
            del self.members[src], self.deg[src]
        elif src == node:
            new_key = min(self.members[src])
            self.members[new_key] = self.members.pop(src)
            self.deg[new_key] = self.deg.pop(src)
            for other in self.members[new_key]:
                self.com_of[other] = new_key
        if dest is None:
            self.com_of[node] = node
            self.members[node] = {node}
            self.deg[node] = self.k[node]
            return
        self.com_of[node] = dest
        self.members[dest].add(node)
        self.deg[dest] += self.k[node]
        if node < dest:
            self.members[node] = self.members.pop(dest)
            self.deg[node] = self.deg.pop(dest)
            for other in self.members[node]:
                self.com_of[other] = node


def _optimize_partition(
    graph: InteractionGraph,
    weights: Mapping[tuple[str, str], float],
    m: float,
    rng: random.Random | None,
    greedy_width: int = 3,
) -> list[set[str]]:
    """One greedy run: agglomerative merges plus node-move refinement.

    With ``rng`` set, merge choices are perturbed (picked among the top
    ``greedy_width`` gains, or uniformly over all improving pairs when the
    width is 0) to diversify restarts; without it the single best pair
    wins, ties toward the smallest id pair.
    """
    state = _CommunityState(graph, weights)

    def merge_phase() -> bool:
        changed = False
        while True:
            between = state.between()
            scored = []
            for a, b in sorted(between):
                gain = between[(a, b)] / m - (state.deg[a] * state.deg[b]) / (2.0 * m * m)
                if gain > _GAIN_EPS:
                    scored.append((gain, (a, b)))
            if not scored:
                return changed
            scored.sort(key=lambda item: (-item[0], item[1]))
            if rng is None:
                pair = scored[0][1]
            elif greedy_width == 0:
                pair = rng.choice(scored)[1]
            else:
                pair = rng.choice(scored[: min(greedy_width, len(scored))])[1]
            state.merge(*pair)
            changed = True

    def move_phase() -> bool:
        changed = False
        while True:
            moved = False
            for node in sorted(state.com_of):
                src = state.com_of[node]
                w_to: dict[str, float] = {}
                for neighbor, w in state.adj[node].items():
                    c = state.com_of[neighbor]
                    w_to[c] = w_to.get(c, 0.0) + w
                w_src = w_to.get(src, 0.0)
                d_src = state.deg[src]
                k_node = state.k[node]
                best_dq = _GAIN_EPS
                best_dest: str | None = None
                found = False
                candidates: list[str | None] = sorted(c for c in w_to if c != src)
                if len(state.members[src]) > 1:
                    candidates.append(None)  # break out into a fresh singleton
                for dest in candidates:
                    w_dest = w_to.get(dest, 0.0) if dest is not None else 0.0
                    d_dest = state.deg[dest] if dest is not None else 0.0
                    dq = (w_dest - w_src) / m - k_node * (
                        d_dest - d_src + k_node
                    ) / (2.0 * m * m)
                    if dq > best_dq:
                        best_dq = dq
                        best_dest = dest
                        found = True
                if found:
                    state.move(node, best_dest)
                    moved = True
                    changed = True
            if not moved:
                return changed

    while True:
        any_change = merge_phase()
        any_change |= move_phase()
        if not any_change:
            break
    return [state.members[key] for key in sorted(state.members)]


def communities(
    graph: InteractionGraph, seed: int = 0
) -> tuple[list[set[str]], float]:
    """Greedy agglomerative modularity maximization, seeded restarts.

    The first run is fully deterministic greedy (best merge gain, ties to
    the smallest id pair) followed by single-node relocation until no move
    helps.  Further seeded restarts perturb the merge order to escape local
    maxima on small graphs; the best-Q partition wins, so results are
    reproducible for a fixed (graph, seed).
    """
    weights = undirected_weights(graph)
    m = sum(weights.values())
    if m == 0.0:
        return [{node} for node in sorted(graph.nodes)], 0.0

    best = _optimize_partition(graph, weights, m, rng=None)
    best_q = modularity(graph, best)
    restarts = 24 if graph.node_count <= 256 else 4
    for r in range(1, restarts):
        rng = random.Random(seed * 1_000_003 + r)
        width = 3 if r % 2 else 0
        candidate = _optimize_partition(graph, weights, m, rng, greedy_width=width)
        q = modularity(graph, candidate)
        if q > best_q + _GAIN_EPS:
            best, best_q = candidate, q
    return best, best_q


def filter_bubble(graph: InteractionGraph, partition: Sequence[set[str]]) -> float:
    """Within-community interaction concentration minus its random baseline.

    Internal directed edge weight fraction, minus the sum of squared
    community size fractions.  Zero for the one-community partition; near
    zero when interactions mix freely across communities.
    """
    total = graph.total_weight()
    if total == 0:
        raise UndefinedMetricError("filter bubble needs at least one weighted edge")
    community_of: dict[str, int] = {}
    for idx, group in enumerate(partition):
        for node in group:
            community_of[node] = idx
    missing = [node for node in graph.nodes if node not in community_of]
    if missing:
        raise ValueError(f"partition does not cover nodes: {missing[:5]}")
    internal = 0
    for edge in graph.edges:
        if community_of[edge.source] == community_of[edge.target]:
            internal += edge.weight
    n = graph.node_count
    expected = sum((len(group) / n) ** 2 for group in partition)
    return internal / total - expected


# ---------------------------------------------------------------------------
# Full report
# ---------------------------------------------------------------------------

@dataclass
class MetricsReport:
    nodes: int
    edges: int
    density: float | None = None
    clustering: float | None = None
    reciprocity: float | None = None
    avg_path_length: float | None = None
    in_degree_top: list[tuple[str, int]] = field(default_factory=list)
    out_degree_top: list[tuple[str, int]] = field(default_factory=list)
    assortativity: float | None = None
    modularity: float | None = None
    communities: list[list[str]] = field(default_factory=list)
    largest_community: int = 0
    filter_bubble: float | None = None
    reasons: dict[str, str] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {
            "nodes": self.nodes,
            "edges": self.edges,
            "density": self.density,
            "clustering": self.clustering,
            "reciprocity": self.reciprocity,
            "avg_path_length": self.avg_path_length,
            "in_degree_top": [[n, c] for n, c in self.in_degree_top],
            "out_degree_top": [[n, c] for n, c in self.out_degree_top],
            "assortativity": self.assortativity,
            "modularity": self.modularity,
            "communities": self.communities,
            "largest_community": self.largest_community,
            "filter_bubble": self.filter_bubble,
        }
        for name in sorted(self.reasons):
            out[f"{name}_reason"] = self.reasons[name]
        out["conventions"] = dict(CONVENTIONS)
        out["config"] = dict(self.config)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def full_report(
    graph: InteractionGraph,
    seed: int = 0,
    degree_top_k: int = DEFAULT_DEGREE_TOP_K,
    config: dict | None = None,
) -> MetricsReport:
    """Run every metric, null-ing the undefined ones with a reason string."""
    report = MetricsReport(
        nodes=graph.node_count,
        edges=graph.edge_count,
        config=dict(config or {}),
    )

    def attempt(name: str, fn):
        try:
            return fn()
        except UndefinedMetricError as exc:
            report.reasons[name] = str(exc)
            return None

    report.density = attempt("density", lambda: density(graph))
    report.clustering = attempt("clustering", lambda: clustering(graph))
    report.reciprocity = attempt("reciprocity", lambda: reciprocity(graph))
    report.avg_path_length = attempt("avg_path_length", lambda: avg_path_length(graph))
    if graph.node_count:
        report.in_degree_top = degree_ranking(graph, "in", degree_top_k)
        report.out_degree_top = degree_ranking(graph, "out", degree_top_k)
    report.assortativity = attempt("assortativity", lambda: assortativity(graph))
    if graph.node_count:
        partition, q = communities(graph, seed)
        report.communities = [sorted(group) for group in partition]
        report.modularity = q
        report.largest_community = max(len(group) for group in partition)
        report.filter_bubble = attempt(
            "filter_bubble", lambda: filter_bubble(graph, partition)
        )
    else:
        report.reasons["modularity"] = "empty graph"
        report.reasons["filter_bubble"] = "empty graph"
    return report


def write_report(report: MetricsReport, path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(report.to_json(), encoding="utf-8")
