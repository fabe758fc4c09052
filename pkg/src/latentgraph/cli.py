"""``latent-graph`` command line front-end.

Subcommands mirror the pipeline stages (ingest, preprocess, agents, infer,
graph, metrics, triads, chains, sweep) plus ``run-all`` which chains them
end to end from one JSON config.  Exit codes: 0 success, 1 usage or config
error, 2 data error, 3 internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from . import chains as chainsmod
from . import graph as graphmod
from . import ingest as ingestmod
from . import inference as infermod
from . import metrics as metricsmod
from . import profiles as profilesmod
from . import temporal as temporalmod
from .config import (
    REFERENCE_METRICS,
    RunConfig,
    config_digest,
    default_config,
    file_digest,
    load_config,
    require_valid,
    validate,
)
from .errors import ConfigError, DataError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


def _write_sidecar(out_path: Path, config: RunConfig, extra: dict | None = None) -> None:
    """Companion manifest declaring which config produced an artifact."""
    payload = {"tool": f"latent-graph {__version__}", "config_digest": config_digest(config)}
    if extra:
        payload.update(extra)
    sidecar = out_path.with_suffix(out_path.suffix + ".manifest.json")
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _merge_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if getattr(args, "config", None) else default_config(
        getattr(args, "domain", None) or "generic"
    )
    overrides = {}
    for key in (
        "domain",
        "window_days",
        "maybe_min",
        "forsure_min",
        "coverage",
        "sim_threshold",
        "k_agents",
        "seed",
        "max_comments_per_post",
        "min_interactions",
        "level",
        "interval_days",
    ):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if overrides:
        config = replace(config, **overrides)
    return config


def _pipeline_settings(config: RunConfig) -> ingestmod.PipelineSettings:
    return ingestmod.PipelineSettings(
        max_comments_per_post=config.max_comments_per_post,
        min_interactions=config.min_interactions,
    )


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_ingest(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    out = Path(args.out)
    posts, skipped_posts = ingestmod.load_dump(args.posts, ingestmod.RecordKind.POST)
    comments, skipped_comments = ingestmod.load_dump(args.comments, ingestmod.RecordKind.COMMENT)
    stage0 = ingestmod.snapshot(0, posts + comments, {})
    ingestmod.write_snapshot(stage0, out, {"config_digest": config_digest(config)})
    summary = {
        "posts": stage0.post_count,
        "comments": stage0.comment_count,
        "skipped_lines": skipped_posts + skipped_comments,
    }
    print(json.dumps(summary))
    return EXIT_OK


def cmd_preprocess(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    require_valid(config)
    records = ingestmod.load_records(ingestmod.records_path(Path(args.indir), 0))
    stages = ingestmod.run_pipeline(records, _pipeline_settings(config))
    ingestmod.write_stages(stages, args.out, {"config_digest": config_digest(config)})
    for snap in stages:
        print(
            f"stage {snap.stage_id}: posts={snap.post_count} "
            f"comments={snap.comment_count} removed={snap.manifest}"
        )
    return EXIT_OK


def _build_profiles(records, config: RunConfig):
    user_texts = profilesmod.user_texts_from_records(records)
    vectors, vocab = profilesmod.build_user_vectors(user_texts)
    if config.embeddings_path:
        vectors = profilesmod.load_embeddings(config.embeddings_path, sorted(user_texts))
    profiles = profilesmod.cluster_users(vectors, config.k_agents, config.seed)
    lexicon: dict[str, str] = {}
    if config.lexicon_path:
        lexicon = profilesmod.load_lexicon(config.lexicon_path)
    enriched = []
    for profile in profiles:
        member_texts = [t for user in profile.members for t in user_texts[user]]
        enriched.append(profilesmod.enrich(profile, member_texts, lexicon, vocab))
    return enriched


def cmd_agents(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    if args.k is not None:
        config = replace(config, k_agents=args.k)
    if args.embeddings:
        config = replace(config, embeddings_path=args.embeddings)
    if args.lexicon:
        config = replace(config, lexicon_path=args.lexicon)
    require_valid(config)
    stage_id, records = ingestmod.latest_stage_records(args.indir)
    profiles = _build_profiles(records, config)
    out = Path(args.out)
    profilesmod.save_profiles(profiles, out)
    _write_sidecar(out, config, {"source_stage": stage_id, "agents": len(profiles)})
    print(f"wrote {len(profiles)} agent profiles to {out}")
    return EXIT_OK


def cmd_infer(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    require_valid(config)
    events = infermod.load_events_jsonl(args.events)
    grid = infermod.WindowGrid.from_events(
        events, config.window_days * infermod.SECONDS_PER_DAY
    )
    edges = infermod.infer_all(events, grid, config.maybe_min, config.forsure_min)
    out = Path(args.out)
    infermod.write_edges_csv(edges, out)
    _write_sidecar(out, config, {"events": len(events), "pairs": len(edges)})
    timeline_out = args.timeline or str(out.parent / "timeline.csv")
    infermod.write_timeline_csv(infermod.event_timeline(edges), timeline_out)
    positive = sum(1 for e in edges if e.status is not infermod.FollowStatus.NONE)
    print(f"classified {len(edges)} pairs ({positive} with follow relations)")
    return EXIT_OK


def cmd_graph(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    if args.coverage is not None:
        config = replace(config, coverage=args.coverage)
    require_valid(config)
    edges = infermod.load_edges_csv(args.edges)
    known: list[str] = []
    if args.agents:
        known = [p.agent_id for p in profilesmod.load_profiles(args.agents)]
    built = graphmod.build(edges, graphmod.EdgeClass(args.edge_class), known_agents=known)
    covered = graphmod.apply_coverage(built, config.coverage)
    out = Path(args.out)
    fmt = {
        ".csv": graphmod.ExportFormat.EDGES_CSV,
        ".graphml": graphmod.ExportFormat.GRAPHML,
        ".dot": graphmod.ExportFormat.DOT,
    }.get(out.suffix)
    if fmt is None:
        raise ConfigError(f"cannot infer export format from {out.name!r} "
                          "(use .csv, .graphml, or .dot)")
    graphmod.export(covered, fmt, out)
    _write_sidecar(out, config, {"nodes": covered.node_count, "edges": covered.edge_count})
    print(f"graph: {covered.node_count} nodes, {covered.edge_count} edges -> {out}")
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    require_valid(config)
    graph_path = Path(args.graph)
    if graph_path.suffix == ".csv":
        graph = graphmod.load_graph_edges_csv(graph_path)
    else:
        graph = graphmod.load_graphml(graph_path)
    report = metricsmod.full_report(
        graph,
        seed=config.seed,
        degree_top_k=config.degree_top_k,
        config={"config_digest": config_digest(config), "seed": config.seed},
    )
    metricsmod.write_report(report, args.out)
    print(report.to_json(), end="")
    return EXIT_OK


def cmd_triads(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    require_valid(config)
    edges = infermod.load_edges_csv(args.edges)
    series = temporalmod.triad_series(
        edges,
        args.interval_days * temporalmod.SECONDS_PER_DAY,
        use_status_time=args.use_status_time,
    )
    out = Path(args.out)
    temporalmod.write_triads_csv(series, out)
    _write_sidecar(out, config, {"intervals": series.n_intervals})
    total = series.cumulative_all[-1] if series.n_intervals else 0
    print(f"{series.n_intervals} intervals, {total} closed triads -> {out}")
    return EXIT_OK


def cmd_chains(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    if args.threshold is not None:
        config = replace(config, sim_threshold=args.threshold)
    require_valid(config)
    _, records = ingestmod.latest_stage_records(args.indir)
    agent_of = None
    if args.agents:
        agent_of = profilesmod.build_member_index(profilesmod.load_profiles(args.agents))
    selected, manifest = chainsmod.extract_chains(
        records,
        sim_threshold=config.sim_threshold,
        top_k=args.top,
        agent_of=agent_of,
    )
    out = Path(args.out)
    chainsmod.write_chains_jsonl(selected, out)
    _write_sidecar(out, config, manifest)
    thresholds = [float(t) for t in args.census_thresholds.split(",") if t]
    census = chainsmod.chain_census(chainsmod.group_threads(records), thresholds)
    chainsmod.write_census_csv(census, out.parent / "census.csv")
    print(f"{manifest['chains_total']} chains extracted, kept top {len(selected)} -> {out}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    require_valid(config)
    events = infermod.load_events_jsonl(args.events)

    def int_list(text: str) -> list[int]:
        return [int(v) for v in text.split(",") if v]

    def float_list(text: str) -> list[float]:
        return [float(v) for v in text.split(",") if v]

    report = temporalmod.sweep(
        events,
        window_days_list=float_list(args.windows),
        maybe_min_list=int_list(args.maybe),
        forsure_min_list=int_list(args.forsure),
        coverage_list=float_list(args.coverage_list),
    )
    out = Path(args.out)
    temporalmod.write_sweep_csv(report, out)
    _write_sidecar(out, config, {"cells": len(report.cells)})
    print(f"{len(report.cells)} sweep cells -> {out}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    problems = validate(config)
    for problem in problems:
        print(problem)
    if problems:
        return EXIT_CONFIG
    print("config ok")
    return EXIT_OK


# ---------------------------------------------------------------------------
# run-all orchestration
# ---------------------------------------------------------------------------

def run_all(config: RunConfig, replicate: bool = False) -> int:
    require_valid(config)
    if not config.posts_path or not config.comments_path or not config.out_dir:
        raise ConfigError("run-all needs posts_path, comments_path, and out_dir")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}
    digest = config_digest(config)

    def timed(name: str):
        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timings[name] = round(time.perf_counter() - self.t0, 3)
                return False

        return _Timer()

    input_digests = {
        "posts": file_digest(config.posts_path),
        "comments": file_digest(config.comments_path),
    }
    if config.lexicon_path:
        input_digests["lexicon"] = file_digest(config.lexicon_path)
    if config.embeddings_path:
        input_digests["embeddings"] = file_digest(config.embeddings_path)

    with timed("ingest"):
        posts, skipped_p = ingestmod.load_dump(config.posts_path, ingestmod.RecordKind.POST)
        comments, skipped_c = ingestmod.load_dump(
            config.comments_path, ingestmod.RecordKind.COMMENT
        )

    with timed("preprocess"):
        stages = ingestmod.run_pipeline(posts + comments, _pipeline_settings(config))
        ingestmod.write_stages(stages, out, {"config_digest": digest})
    final_records = list(stages[-1].records)

    with timed("agents"):
        profiles = _build_profiles(final_records, config)
        profilesmod.save_profiles(profiles, out / "agents.json")
        _write_sidecar(out / "agents.json", config, {"agents": len(profiles)})

    with timed("infer"):
        id_map = None
        if config.level == "agent":
            id_map = profilesmod.build_member_index(profiles)
        clean_posts = [r for r in final_records if r.kind is ingestmod.RecordKind.POST]
        clean_comments = [r for r in final_records if r.kind is ingestmod.RecordKind.COMMENT]
        events, stats = infermod.extract_events(clean_posts, clean_comments, id_map)
        infermod.write_events_jsonl(events, out / "events.jsonl")
        grid = infermod.WindowGrid.from_events(
            events, config.window_days * infermod.SECONDS_PER_DAY
        )
        edges = infermod.infer_all(events, grid, config.maybe_min, config.forsure_min)
        infermod.write_edges_csv(edges, out / "edges.csv")
        infermod.write_timeline_csv(infermod.event_timeline(edges), out / "timeline.csv")

    with timed("graph"):
        known = [p.agent_id for p in profiles] if config.level == "agent" else []
        built = graphmod.build(edges, graphmod.EdgeClass.ALL, known_agents=known)
        covered = graphmod.apply_coverage(built, config.coverage)
        graphmod.write_graphml(covered, out / "graph.graphml")
        graphmod.write_graph_edges_csv(covered, out / "graph.edges.csv")

    with timed("metrics"):
        report = metricsmod.full_report(
            covered,
            seed=config.seed,
            degree_top_k=config.degree_top_k,
            config={"config_digest": digest, "seed": config.seed},
        )
        metricsmod.write_report(report, out / "metrics.json")

    with timed("triads"):
        series = temporalmod.triad_series(
            edges, config.interval_days * temporalmod.SECONDS_PER_DAY
        )
        temporalmod.write_triads_csv(series, out / "triads.csv")

    with timed("chains"):
        agent_of = id_map if config.level == "agent" else None
        selected, chain_manifest = chainsmod.extract_chains(
            final_records, sim_threshold=config.sim_threshold, agent_of=agent_of
        )
        chainsmod.write_chains_jsonl(selected, out / "chains.jsonl")
        census = chainsmod.chain_census(
            chainsmod.group_threads(final_records), [config.sim_threshold]
        )
        chainsmod.write_census_csv(census, out / "census.csv")

    manifest = {
        "config": config.to_dict(),
        "config_digest": digest,
        "input_digests": input_digests,
        "skipped_lines": {"posts": skipped_p, "comments": skipped_c},
        "extraction": stats.to_dict(),
        "chains": chain_manifest,
        "stage_counts": [
            {"stage": s.stage_id, "posts": s.post_count, "comments": s.comment_count}
            for s in stages
        ],
        "timings_seconds": timings,
    }
    with open(out / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

    if replicate:
        _write_replication_report(config, report, out)
    return EXIT_OK


def _write_replication_report(config: RunConfig, report, out: Path) -> None:
    """Side-by-side comparison against the published reference metrics."""
    reference = REFERENCE_METRICS.get(config.domain)
    computed = {
        "nodes": report.nodes,
        "edges": report.edges,
        "density": report.density,
        "clustering": report.clustering,
        "reciprocity": report.reciprocity,
        "avg_path_length": report.avg_path_length,
        "modularity": report.modularity,
        "n_communities": len(report.communities),
        "largest_community": report.largest_community,
    }
    rows = {}
    for name, value in computed.items():
        ref = reference.get(name) if reference else None
        delta = None
        if isinstance(ref, (int, float)) and isinstance(value, (int, float)):
            delta = round(value - ref, 6)
        rows[name] = {"computed": value, "reference": ref, "delta": delta}
    payload = {
        "domain": config.domain,
        "reference_available": reference is not None,
        "note": (
            "reference values describe the published datasets; matching them "
            "requires that data and its exact preprocessing conventions"
        ),
        "metrics": rows,
    }
    with open(out / "replication_report.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def cmd_run_all(args: argparse.Namespace) -> int:
    config = _merge_config(args)
    overrides = {}
    if args.posts:
        overrides["posts_path"] = args.posts
    if args.comments:
        overrides["comments_path"] = args.comments
    if args.out:
        overrides["out_dir"] = args.out
    if args.lexicon:
        overrides["lexicon_path"] = args.lexicon
    if args.embeddings:
        overrides["embeddings_path"] = args.embeddings
    if overrides:
        config = replace(config, **overrides)
    return run_all(config, replicate=args.replicate)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--domain", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latent-graph",
        description="Interaction-graph pipeline for post/comment dumps",
    )
    parser.add_argument(
        "--version", action="version", version=f"latent-graph {__version__} (python {sys.version.split()[0]})"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse raw dumps into a stage-0 snapshot")
    _add_common(p)
    p.add_argument("--posts", required=True)
    p.add_argument("--comments", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("preprocess", help="run filter stages 0..6")
    _add_common(p)
    p.add_argument("--in", dest="indir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-comments-per-post", dest="max_comments_per_post", type=int)
    p.add_argument("--min-interactions", dest="min_interactions", type=int)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("agents", help="cluster users into agent profiles")
    _add_common(p)
    p.add_argument("--in", dest="indir", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--lexicon", default=None)
    p.set_defaults(func=cmd_agents)

    p = sub.add_parser("infer", help="classify follow relations from events")
    _add_common(p)
    p.add_argument("--events", required=True)
    p.add_argument("--window-days", dest="window_days", type=int, default=None)
    p.add_argument("--maybe-min", dest="maybe_min", type=int, default=None)
    p.add_argument("--forsure-min", dest="forsure_min", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--timeline", default=None)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("graph", help="graph operations")
    graph_sub = p.add_subparsers(dest="graph_command", required=True)
    g = graph_sub.add_parser("build", help="build and export the graph")
    _add_common(g)
    g.add_argument("--edges", required=True)
    g.add_argument("--class", dest="edge_class", choices=["all", "forsure", "maybe"], default="all")
    g.add_argument("--coverage", type=float, default=None)
    g.add_argument("--agents", default=None, help="agents.json for isolated nodes")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_graph)

    p = sub.add_parser("metrics", help="full structural metric report")
    _add_common(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("triads", help="triadic closure time series")
    _add_common(p)
    p.add_argument("--edges", required=True)
    p.add_argument("--interval-days", dest="interval_days", type=int, default=182)
    p.add_argument("--use-status-time", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_triads)

    p = sub.add_parser("chains", help="extract linear interaction chains")
    _add_common(p)
    p.add_argument("--in", dest="indir", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--top", type=int, default=chainsmod.DEFAULT_TOP_K)
    p.add_argument("--agents", default=None)
    p.add_argument("--census-thresholds", default="0.1,0.2,0.3,0.4,0.5")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_chains)

    p = sub.add_parser("sweep", help="parameter robustness sweep")
    _add_common(p)
    p.add_argument("--events", required=True)
    p.add_argument("--windows", default="7,30,90")
    p.add_argument("--maybe", default="2")
    p.add_argument("--forsure", default="2,3,4")
    p.add_argument("--coverage", dest="coverage_list", default="0.0")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check a config and list violations")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run-all", help="full pipeline from one config")
    _add_common(p)
    p.add_argument("--posts", default=None)
    p.add_argument("--comments", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--window-days", dest="window_days", type=int, default=None)
    p.add_argument("--maybe-min", dest="maybe_min", type=int, default=None)
    p.add_argument("--forsure-min", dest="forsure_min", type=int, default=None)
    p.add_argument("--coverage", type=float, default=None)
    p.add_argument("--sim-threshold", dest="sim_threshold", type=float, default=None)
    p.add_argument("--k-agents", dest="k_agents", type=int, default=None)
    p.add_argument("--level", choices=["agent", "user"], default=None)
    p.add_argument("--threads", type=int, default=1,
                   help="upper bound on worker threads for stage internals "
                        "(stages currently execute serially, always within the cap)")
    p.add_argument("--replicate", action="store_true",
                   help="emit a side-by-side report against published reference metrics")
    p.set_defaults(func=cmd_run_all)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold into the config/usage code.
        code = exc.code if isinstance(exc.code, int) else 0
        return EXIT_CONFIG if code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
