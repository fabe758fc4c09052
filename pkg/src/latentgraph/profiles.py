"""User-to-agent aggregation.

Users are represented by hashed term-frequency vectors over their combined
post/comment text, grouped with seeded spherical k-means, and each cluster
becomes one agent profile carrying keywords, emotion frequencies, and style
features.  Everything is deterministic for a fixed (input, dim, seed):
the token hash is FNV-1a 64-bit modulo the vector dimension, numpy's RNG is
seeded, and all tie-breaks go through sorted ids.

Precomputed per-user embeddings can be injected instead of the hashed
vectors (``load_embeddings``); clustering and enrichment are unchanged.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError, UnmappedAuthorError
from .ingest import RawRecord

DEFAULT_DIM = 4096
RESIDUAL_LABEL = "GeneralChat"

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 1 << 64


def fnv1a_64(data: bytes) -> int:
    """FNV-1a 64-bit hash; the fixed token hash of the vector space."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) % _U64
    return h


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens."""
    return _TOKEN_RE.findall(text.lower())


@lru_cache(maxsize=1 << 20)
def token_bucket(token: str, dim: int) -> int:
    return fnv1a_64(token.encode("utf-8")) % dim


@dataclass(frozen=True)
class UserVector:
    user: str
    vector: np.ndarray
    record_count: int


def vectorize_user(texts: Sequence[str], dim: int = DEFAULT_DIM) -> np.ndarray:
    """Hashed term-frequency vector over all texts, L2-normalized.

    No usable tokens gives the zero vector.
    """
    if dim < 16:
        raise ConfigError(f"vector dimension must be >= 16, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    for text in texts:
        for token in tokenize(text):
            vec[token_bucket(token, dim)] += 1.0
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec


def build_user_vectors(
    user_texts: Mapping[str, Sequence[str]], dim: int = DEFAULT_DIM
) -> tuple[list[UserVector], dict[int, Counter]]:
    """Vectorize each user and keep a bucket -> original-token dictionary.

    The dictionary is what lets keywords come back out of the hashed space.
    Users are processed in sorted order so the result is reproducible.
    """
    if dim < 16:
        raise ConfigError(f"vector dimension must be >= 16, got {dim}")
    vocab: dict[int, Counter] = {}
    vectors: list[UserVector] = []
    for user in sorted(user_texts):
        texts = user_texts[user]
        vec = np.zeros(dim, dtype=np.float64)
        for text in texts:
            for token in tokenize(text):
                bucket = token_bucket(token, dim)
                vec[bucket] += 1.0
                vocab.setdefault(bucket, Counter())[token] += 1
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        vectors.append(UserVector(user=user, vector=vec, record_count=len(texts)))
    return vectors, vocab


def user_texts_from_records(records: Iterable[RawRecord]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for rec in records:
        out.setdefault(rec.author, []).append(rec.text)
    return out


def load_embeddings(path: str | Path, users: Sequence[str]) -> list[UserVector]:
    """Load per-user embedding vectors from JSONL lines {"user", "vector"}.

    Vectors are L2-normalized on load; users missing from the file get the
    zero vector and end up in the residual agent.
    """
    source = Path(path)
    if not source.exists():
        raise ConfigError(f"embeddings file not found: {source}")
    table: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(source, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                vec = np.asarray(obj["vector"], dtype=np.float64)
                user = str(obj["user"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{source}:{n}: bad embedding row: {exc}") from exc
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise DataError(f"{source}:{n}: inconsistent embedding dimension")
            norm = float(np.linalg.norm(vec))
            table[user] = vec / norm if norm > 0 else vec
    dim = dim or DEFAULT_DIM
    out = []
    for user in sorted(users):
        vec = table.get(user)
        if vec is None:
            vec = np.zeros(dim, dtype=np.float64)
        out.append(UserVector(user=user, vector=vec, record_count=1))
    return out


# ---------------------------------------------------------------------------
# Clustering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AgentProfile:
    """One aggregated agent: a disjoint set of users plus derived features."""

    agent_id: str
    label: str
    members: tuple[str, ...]
    centroid: np.ndarray
    keywords: tuple[str, ...] = ()
    emotion: dict[str, float] | None = None
    style: dict[str, float] | None = None

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "label": self.label,
            "members": list(self.members),
            "centroid": [float(x) for x in self.centroid],
            "keywords": list(self.keywords),
            "emotion": dict(self.emotion or {}),
            "style": dict(self.style or {}),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "AgentProfile":
        return cls(
            agent_id=str(obj["agent_id"]),
            label=str(obj["label"]),
            members=tuple(obj["members"]),
            centroid=np.asarray(obj["centroid"], dtype=np.float64),
            keywords=tuple(obj.get("keywords") or ()),
            emotion=dict(obj.get("emotion") or {}),
            style=dict(obj.get("style") or {}),
        )


def _normalized_mean(rows: np.ndarray) -> np.ndarray:
    centroid = rows.mean(axis=0)
    norm = float(np.linalg.norm(centroid))
    return centroid / norm if norm > 0 else centroid


def _kmeans_pp_init(matrix: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding in cosine space (squared distance = 2 - 2*sim)."""
    n = matrix.shape[0]
    centers = [int(rng.integers(n))]
    dist = 2.0 - 2.0 * (matrix @ matrix[centers[0]])
    dist = np.maximum(dist, 0.0)
    for _ in range(1, k):
        total = float(dist.sum())
        if total <= 0.0:
            # All remaining points coincide with a center; pick the first
            # index not already chosen to keep things deterministic.
            taken = set(centers)
            nxt = next(i for i in range(n) if i not in taken)
        else:
            nxt = int(rng.choice(n, p=dist / total))
        centers.append(nxt)
        dist = np.minimum(dist, np.maximum(2.0 - 2.0 * (matrix @ matrix[nxt]), 0.0))
    return matrix[centers].copy()


def cluster_users(
    vectors: Sequence[UserVector],
    k: int,
    seed: int,
    max_iter: int = 100,
    residual_label: str = RESIDUAL_LABEL,
) -> list[AgentProfile]:
    """Spherical k-means over the nonzero user vectors.

    Zero-vector users (no usable text) go to a dedicated residual agent
    appended after the k clusters.  Raises ConfigError when k exceeds the
    usable user count.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    ordered = sorted(vectors, key=lambda uv: uv.user)
    usable = [uv for uv in ordered if np.any(uv.vector != 0.0)]
    idle = [uv for uv in ordered if not np.any(uv.vector != 0.0)]
    if len(usable) < k:
        raise ConfigError(
            f"k={k} exceeds the {len(usable)} users with nonzero vectors"
        )

    matrix = np.stack([uv.vector for uv in usable])
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(matrix, k, rng)

    assign = np.full(len(usable), -1, dtype=np.int64)
    for _ in range(max_iter):
        sims = matrix @ centroids.T
        new_assign = np.argmax(sims, axis=1)
        # Revive empty clusters with the point that fits its own cluster
        # worst; pinning its sims high keeps it from being grabbed again
        # when several clusters empty in the same iteration.
        for cluster in range(k):
            if not np.any(new_assign == cluster):
                fit = sims[np.arange(len(usable)), new_assign]
                loner = int(np.argmin(fit))
                new_assign[loner] = cluster
                sims[loner, :] = 2.0
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for cluster in range(k):
            rows = matrix[assign == cluster]
            if len(rows):
                centroids[cluster] = _normalized_mean(rows)

    groups: list[list[UserVector]] = [[] for _ in range(k)]
    for uv, cluster in zip(usable, assign):
        groups[int(cluster)].append(uv)
    # Stable agent numbering: clusters ordered by their smallest member id.
    order = sorted(range(k), key=lambda c: groups[c][0].user)

    profiles = []
    for rank, cluster in enumerate(order):
        members = tuple(uv.user for uv in groups[cluster])
        centroid = _normalized_mean(np.stack([uv.vector for uv in groups[cluster]]))
        profiles.append(
            AgentProfile(
                agent_id=f"A{rank:03d}",
                label=f"Agent{rank:03d}",
                members=members,
                centroid=centroid,
            )
        )
    if idle:
        dim = matrix.shape[1]
        profiles.append(
            AgentProfile(
                agent_id=f"A{k:03d}",
                label=residual_label,
                members=tuple(uv.user for uv in idle),
                centroid=np.zeros(dim, dtype=np.float64),
            )
        )
    return profiles


# ---------------------------------------------------------------------------
# Enrichment
# ---------------------------------------------------------------------------

def _camel(token: str) -> str:
    return token[:1].upper() + token[1:]


def top_terms(
    centroid: np.ndarray, vocab: Mapping[int, Counter], top_k: int = 10
) -> list[str]:
    """Highest-weight centroid buckets mapped back to their dominant token."""
    nonzero = [(float(-centroid[b]), b) for b in np.flatnonzero(centroid)]
    nonzero.sort()
    terms = []
    for _, bucket in nonzero[:top_k]:
        counter = vocab.get(int(bucket))
        if not counter:
            continue
        # Most frequent original token for the bucket, ties by spelling.
        token = min(counter.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        terms.append(token)
    return terms


def style_features(texts: Sequence[str]) -> dict[str, float]:
    """Average sentence length plus question/exclamation rates.

    A sentence is a segment ending in '.', '!' or '?' (or the text's end);
    rates are fractions of sentences by their terminal mark.
    """
    sentences = 0
    questions = 0
    exclaims = 0
    token_total = 0
    for text in texts:
        stripped = text.strip()
        if not stripped:
            continue
        for segment in _SENTENCE_RE.split(stripped):
            segment = segment.strip()
            if not segment:
                continue
            sentences += 1
            token_total += len(tokenize(segment))
            if segment.endswith("?"):
                questions += 1
            elif segment.endswith("!"):
                exclaims += 1
    if sentences == 0:
        return {"avg_sentence_length": 0.0, "question_rate": 0.0, "exclamation_rate": 0.0}
    return {
        "avg_sentence_length": token_total / sentences,
        "question_rate": questions / sentences,
        "exclamation_rate": exclaims / sentences,
    }


def emotion_frequencies(
    texts: Sequence[str], lexicon: Mapping[str, str]
) -> dict[str, float]:
    """Lexicon hits per emotion divided by the total token count."""
    emotions = sorted(set(lexicon.values()))
    counts = {emotion: 0 for emotion in emotions}
    total = 0
    for text in texts:
        for token in tokenize(text):
            total += 1
            emotion = lexicon.get(token)
            if emotion is not None:
                counts[emotion] += 1
    if total == 0:
        return {emotion: 0.0 for emotion in emotions}
    return {emotion: counts[emotion] / total for emotion in emotions}


def enrich(
    agent: AgentProfile,
    member_texts: Sequence[str],
    lexicon: Mapping[str, str],
    vocab: Mapping[int, Counter],
    top_k: int = 10,
) -> AgentProfile:
    """Fill keywords, emotion frequencies, and style features for one agent."""
    keywords = tuple(top_terms(agent.centroid, vocab, top_k))
    label = agent.label
    if keywords:
        label = "".join(_camel(t) for t in keywords[:2])
    return replace(
        agent,
        label=label,
        keywords=keywords,
        emotion=emotion_frequencies(member_texts, lexicon),
        style=style_features(member_texts),
    )


def load_lexicon(path: str | Path) -> dict[str, str]:
    """Read a term,emotion CSV into a lowercase term -> emotion map."""
    source = Path(path)
    if not source.exists():
        raise ConfigError(f"emotion lexicon not found: {source}")
    table: dict[str, str] = {}
    with open(source, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if n == 1 and line.lower().replace(" ", "") == "term,emotion":
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise DataError(f"{source}:{n}: expected 'term,emotion'")
            table[parts[0].strip().lower()] = parts[1].strip().lower()
    return table


# ---------------------------------------------------------------------------
# Lookup and persistence
# ---------------------------------------------------------------------------

def build_member_index(profiles: Sequence[AgentProfile]) -> dict[str, str]:
    index: dict[str, str] = {}
    for profile in profiles:
        for user in profile.members:
            index[user] = profile.agent_id
    return index


def residual_agent_id(profiles: Sequence[AgentProfile]) -> str | None:
    # The residual agent is the one with the zero centroid (no usable text).
    for profile in profiles:
        if not np.any(profile.centroid != 0.0):
            return profile.agent_id
    return None


def assign_agent(
    record: RawRecord,
    profiles: Sequence[AgentProfile],
    index: Mapping[str, str] | None = None,
    strict: bool = True,
) -> str:
    """Agent id owning the record's author.

    In strict mode unknown authors raise; otherwise they fall back to the
    residual agent when one exists.
    """
    index = index if index is not None else build_member_index(profiles)
    agent = index.get(record.author)
    if agent is not None:
        return agent
    if not strict:
        residual = residual_agent_id(profiles)
        if residual is not None:
            return residual
    raise UnmappedAuthorError(f"author {record.author!r} is not in any agent profile")


def save_profiles(profiles: Sequence[AgentProfile], path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as fh:
        json.dump([p.to_dict() for p in profiles], fh, indent=2)
        fh.write("\n")


def load_profiles(path: str | Path) -> list[AgentProfile]:
    source = Path(path)
    if not source.exists():
        raise DataError(f"agents file not found: {source}")
    with open(source, encoding="utf-8") as fh:
        data = json.load(fh)
    return [AgentProfile.from_dict(obj) for obj in data]
