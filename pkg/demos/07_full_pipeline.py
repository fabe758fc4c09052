#!/usr/bin/env python3
"""One-shot pipeline run via the same entry point the CLI uses.

Writes the full artifact directory: stage snapshots, agents.json,
events/edges/timeline, graph exports, metrics.json, triads.csv, chains,
and the run manifest with config digest and input digests.
"""

import json
import tempfile
from dataclasses import replace
from pathlib import Path

from latentgraph.cli import run_all
from latentgraph.config import default_config
from latentgraph.synthetic import make_synthetic_dump, write_lexicon_csv

workdir = Path(tempfile.mkdtemp(prefix="latentgraph-demo-"))
dump = make_synthetic_dump(500, 3000, seed=23)
posts, comments = dump.write_dumps(workdir)
lexicon = write_lexicon_csv(workdir / "lexicon.csv")

config = replace(
    default_config(),
    k_agents=6,
    posts_path=str(posts),
    comments_path=str(comments),
    lexicon_path=str(lexicon),
    out_dir=str(workdir / "out"),
)
rc = run_all(config)
print(f"run_all exit status: {rc}")

out = workdir / "out"
print("\nartifacts:")
for path in sorted(out.iterdir()):
    print(f"  {path.name:28} {path.stat().st_size:>9} bytes")

manifest = json.loads((out / "run_manifest.json").read_text())
print("\nstage counts:", manifest["stage_counts"])
print("timings:", manifest["timings_seconds"])
print("config digest:", manifest["config_digest"][:16], "...")
print(f"\neverything under {workdir}")
