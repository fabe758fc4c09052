#!/usr/bin/env python3
"""Aggregate users into agents: hashed term vectors, seeded spherical
k-means, then keyword/emotion/style enrichment."""

from latentgraph.ingest import PipelineSettings, run_pipeline
from latentgraph.profiles import (
    build_user_vectors,
    cluster_users,
    enrich,
    user_texts_from_records,
)
from latentgraph.synthetic import DEMO_LEXICON, make_synthetic_dump

dump = make_synthetic_dump(200, 1200, seed=7)
clean = run_pipeline(dump.records, PipelineSettings())[-1].records

user_texts = user_texts_from_records(clean)
print(f"{len(user_texts)} surviving users")

vectors, vocab = build_user_vectors(user_texts)
profiles = cluster_users(vectors, k=4, seed=42)
profiles = [
    enrich(p, [t for u in p.members for t in user_texts[u]], DEMO_LEXICON, vocab)
    for p in profiles
]

for p in profiles:
    top_emotions = sorted(p.emotion.items(), key=lambda kv: -kv[1])[:2]
    print(f"\n{p.agent_id}  {p.label}")
    print(f"  members:  {len(p.members)}")
    print(f"  keywords: {', '.join(p.keywords[:6])}")
    print(f"  emotions: {', '.join(f'{e}={v:.3f}' for e, v in top_emotions)}")
    print(f"  style:    {p.style}")
