"""Linear interaction-chain extraction from post/comment threads.

Within one thread every pair of records is compared by cosine similarity of
their hashed term vectors; a similarity strictly above the threshold links
the earlier record to the later one (the default threshold is 0.1, and a
similarity of exactly 0.1 does not connect).  The resulting DAG is unrolled
into all maximal source-to-sink paths, so branching conversations duplicate
into separate linear chains, each node having one predecessor and one
successor inside its chain.
"""

from __future__ import annotations

import json
import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .ingest import RawRecord, RecordKind
from .profiles import DEFAULT_DIM, vectorize_user

DEFAULT_SIM_THRESHOLD = 0.1
DEFAULT_TOP_K = 35
DEFAULT_MAX_CHAINS_PER_POST = 200
DEFAULT_MAX_DEPTH = 64

CENSUS_CSV_FIELDS = ["threshold", "no_chain", "len_eq_1", "len_gt_1"]


@dataclass(frozen=True)
class Thread:
    post: RawRecord
    comments: tuple[RawRecord, ...]

    @property
    def records(self) -> tuple[RawRecord, ...]:
        return (self.post, *self.comments)


def group_threads(records: Sequence[RawRecord]) -> list[Thread]:
    """Group records into (post, its comments) threads, ordered by post id.

    Comments whose post is absent from the record set are skipped; chains
    are a within-thread construct.
    """
    posts = {r.id: r for r in records if r.kind is RecordKind.POST}
    comments: dict[str, list[RawRecord]] = defaultdict(list)
    for rec in records:
        if rec.kind is RecordKind.COMMENT and rec.link_id in posts:
            comments[rec.link_id].append(rec)
    threads = []
    for post_id in sorted(posts):
        replies = sorted(comments.get(post_id, []), key=lambda r: (r.created_utc, r.id))
        threads.append(Thread(post=posts[post_id], comments=tuple(replies)))
    return threads


@dataclass(frozen=True)
class ChainNode:
    record_id: str
    author_agent: str
    time: int
    topic_vector: np.ndarray


@dataclass(frozen=True)
class SemanticGraph:
    """Similarity DAG of one thread; edges run earlier -> later."""

    post_id: str
    nodes: tuple[ChainNode, ...]
    children: tuple[tuple[int, ...], ...]  # successor indices per node

    @property
    def edge_count(self) -> int:
        return sum(len(c) for c in self.children)


@dataclass(frozen=True)
class InteractionChain:
    post_id: str
    nodes: tuple[ChainNode, ...]

    @property
    def length(self) -> int:
        return len(self.nodes) - 1

    @property
    def start_time(self) -> int:
        return self.nodes[0].time


def connect(
    thread: Thread,
    sim_threshold: float = DEFAULT_SIM_THRESHOLD,
    dim: int = DEFAULT_DIM,
    agent_of: Mapping[str, str] | None = None,
    vectors: Mapping[str, np.ndarray] | None = None,
) -> SemanticGraph:
    """Build the semantic DAG of one thread.

    Records are ordered by (time, id); i links to j when i precedes j and
    cosine(v_i, v_j) exceeds the threshold (strictly).  Precomputed vectors
    win over hashed-term vectorization when supplied.
    """
    ordered = sorted(thread.records, key=lambda r: (r.created_utc, r.id))
    nodes = []
    for rec in ordered:
        if vectors is not None and rec.id in vectors:
            vec = np.asarray(vectors[rec.id], dtype=np.float64)
            norm = float(np.linalg.norm(vec))
            if norm > 0:
                vec = vec / norm
        else:
            vec = vectorize_user([rec.text], dim)
        agent = agent_of.get(rec.author, rec.author) if agent_of is not None else rec.author
        nodes.append(
            ChainNode(
                record_id=rec.id,
                author_agent=agent,
                time=rec.created_utc,
                topic_vector=vec,
            )
        )
    children: list[tuple[int, ...]] = []
    for i, node in enumerate(nodes):
        succ = []
        for j in range(i + 1, len(nodes)):
            if float(node.topic_vector @ nodes[j].topic_vector) > sim_threshold:
                succ.append(j)
        # Children are visited in record-id order during linearization.
        succ.sort(key=lambda j: nodes[j].record_id)
        children.append(tuple(succ))
    return SemanticGraph(post_id=thread.post.id, nodes=tuple(nodes), children=tuple(children))


@dataclass
class LinearizeStats:
    chains: int = 0
    truncated_chains: bool = False
    truncated_depth: bool = False


def linearize(
    graph: SemanticGraph,
    max_chains: int = DEFAULT_MAX_CHAINS_PER_POST,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> tuple[list[InteractionChain], LinearizeStats]:
    """Enumerate maximal source-to-sink paths as linear chains.

    A chain needs at least one edge; isolated records produce nothing.
    Enumeration is depth-first with children in id order, bounded by the
    caps; hitting a cap marks the stats rather than failing.
    """
    n = len(graph.nodes)
    indegree = [0] * n
    for succ in graph.children:
        for j in succ:
            indegree[j] += 1
    sources = [i for i in range(n) if indegree[i] == 0 and graph.children[i]]

    stats = LinearizeStats()
    chains: list[InteractionChain] = []
    path: list[int] = []

    def visit(node: int) -> None:
        if stats.truncated_chains:
            return
        path.append(node)
        try:
            if len(path) - 1 >= max_depth and graph.children[node]:
                stats.truncated_depth = True
                return
            if not graph.children[node]:
                if len(path) > 1:
                    if len(chains) >= max_chains:
                        stats.truncated_chains = True
                        return
                    chains.append(
                        InteractionChain(
                            post_id=graph.post_id,
                            nodes=tuple(graph.nodes[i] for i in path),
                        )
                    )
                return
            for child in graph.children[node]:
                visit(child)
        finally:
            path.pop()

    for source in sources:
        visit(source)
    stats.chains = len(chains)
    return chains, stats


def rank_and_select(
    chains: Sequence[InteractionChain], k: int = DEFAULT_TOP_K
) -> list[InteractionChain]:
    """Longest chains first; ties go to the earlier chain, then first id."""
    ordered = sorted(
        chains,
        key=lambda c: (-c.length, c.start_time, c.nodes[0].record_id),
    )
    return ordered[:k]


def extract_chains(
    records: Sequence[RawRecord],
    sim_threshold: float = DEFAULT_SIM_THRESHOLD,
    top_k: int = DEFAULT_TOP_K,
    dim: int = DEFAULT_DIM,
    agent_of: Mapping[str, str] | None = None,
    max_chains: int = DEFAULT_MAX_CHAINS_PER_POST,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> tuple[list[InteractionChain], dict]:
    """Full pass: thread grouping, semantic DAGs, linearization, ranking."""
    all_chains: list[InteractionChain] = []
    truncated_posts = 0
    threads = group_threads(records)
    for thread in threads:
        dag = connect(thread, sim_threshold, dim, agent_of)
        chains, stats = linearize(dag, max_chains, max_depth)
        if stats.truncated_chains or stats.truncated_depth:
            truncated_posts += 1
        all_chains.extend(chains)
    manifest = {
        "threads": len(threads),
        "chains_total": len(all_chains),
        "truncated_posts": truncated_posts,
        "sim_threshold": sim_threshold,
        "top_k": top_k,
    }
    return rank_and_select(all_chains, top_k), manifest


# ---------------------------------------------------------------------------
# Census
# ---------------------------------------------------------------------------

def chain_census(
    threads: Sequence[Thread],
    thresholds: Sequence[float],
    dim: int = DEFAULT_DIM,
    max_chains: int = DEFAULT_MAX_CHAINS_PER_POST,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> list[dict]:
    """Post counts per chain-complexity category at each threshold.

    Categories: no chains at all, only single-edge chains, or at least one
    longer chain.  Counts per threshold always sum to the thread count.
    """
    for threshold in thresholds:
        if not 0.0 < threshold < 1.0:
            raise ConfigError(f"census thresholds must lie in (0, 1), got {threshold}")
    rows = []
    for threshold in thresholds:
        no_chain = 0
        len_eq_1 = 0
        len_gt_1 = 0
        for thread in threads:
            dag = connect(thread, threshold, dim)
            chains, _ = linearize(dag, max_chains, max_depth)
            if not chains:
                no_chain += 1
            elif max(c.length for c in chains) == 1:
                len_eq_1 += 1
            else:
                len_gt_1 += 1
        rows.append(
            {
                "threshold": threshold,
                "no_chain": no_chain,
                "len_eq_1": len_eq_1,
                "len_gt_1": len_gt_1,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def write_chains_jsonl(chains: Sequence[InteractionChain], path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as fh:
        for chain in chains:
            fh.write(
                json.dumps(
                    {
                        "post_id": chain.post_id,
                        "length": chain.length,
                        "nodes": [
                            {
                                "record_id": node.record_id,
                                "agent": node.author_agent,
                                "time": node.time,
                            }
                            for node in chain.nodes
                        ],
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )


def write_census_csv(rows: Sequence[dict], path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CENSUS_CSV_FIELDS)
        for row in rows:
            writer.writerow([row["threshold"], row["no_chain"], row["len_eq_1"], row["len_gt_1"]])
