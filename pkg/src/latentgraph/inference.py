"""Directed follow-relation inference from temporally consistent commenting.

A comment by ``u`` on content authored by ``v`` is a directed interaction
event u -> v.  The observation span is cut into fixed-length windows and a
pair is scored by how many distinct windows contain at least one event:
fewer than ``maybe_min`` windows means no relation, at least ``maybe_min``
but fewer than ``forsure_min`` a tentative ("maybe") follow, and
``forsure_min`` or more a confirmed ("forsure") follow.  Defaults are 2 and
3, so exactly two active windows is a maybe and three or more a forsure.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, DataError
from .ingest import RawRecord, RecordKind

SECONDS_PER_DAY = 86400
DEFAULT_WINDOW_SECONDS = 30 * SECONDS_PER_DAY
DEFAULT_MAYBE_MIN = 2
DEFAULT_FORSURE_MIN = 3

EDGES_CSV_FIELDS = [
    "source",
    "target",
    "status",
    "windows_hit",
    "total_comments",
    "first_seen",
    "last_seen",
    "status_time",
]

TIMELINE_CSV_FIELDS = ["time", "source", "target", "status"]


class FollowStatus(str, Enum):
    NONE = "none"
    MAYBE = "maybe"
    FORSURE = "forsure"

    @property
    def rank(self) -> int:
        return {"none": 0, "maybe": 1, "forsure": 2}[self.value]


@dataclass(frozen=True)
class InteractionEvent:
    """One reply interaction: source commented on target's content."""

    source: str
    target: str
    time: int
    post_id: str
    comment_id: str

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "time": self.time,
            "post_id": self.post_id,
            "comment_id": self.comment_id,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "InteractionEvent":
        return cls(
            source=str(obj["source"]),
            target=str(obj["target"]),
            time=int(obj["time"]),
            post_id=str(obj["post_id"]),
            comment_id=str(obj["comment_id"]),
        )


@dataclass(frozen=True)
class WindowGrid:
    """Fixed-length observation windows spanning the event data."""

    origin: int
    window_len: int
    n: int

    def __post_init__(self):
        if self.window_len <= 0:
            raise ConfigError("window length must be positive")
        if self.n < 0:
            raise ConfigError("window count must be non-negative")

    @classmethod
    def from_events(cls, events: Sequence[InteractionEvent], window_len: int) -> "WindowGrid":
        if not events:
            return cls(origin=0, window_len=window_len, n=0)
        times = [e.time for e in events]
        origin = min(times)
        n = (max(times) - origin) // window_len + 1
        return cls(origin=origin, window_len=window_len, n=n)

    def index(self, time: int) -> int:
        idx = (time - self.origin) // self.window_len
        if idx < 0 or idx >= self.n:
            raise ValueError(f"time {time} is outside the window grid")
        return idx


@dataclass(frozen=True)
class FollowEdge:
    """Classified directed relation for one ordered pair.

    ``windows_hit`` counts distinct active windows, ``status_time`` is the
    time of the event whose window pushed the pair over the threshold of
    its final status.  ``maybe_time``/``forsure_time`` keep both milestones
    so the follow-event timeline can show the progression.
    """

    source: str
    target: str
    windows_hit: int
    total_comments: int
    status: FollowStatus
    first_seen: int | None = None
    last_seen: int | None = None
    status_time: int | None = None
    maybe_time: int | None = None
    forsure_time: int | None = None


@dataclass
class ExtractionStats:
    events: int = 0
    self_replies: int = 0
    orphans: int = 0

    def to_dict(self) -> dict:
        return {"events": self.events, "self_replies": self.self_replies, "orphans": self.orphans}


def extract_events(
    posts: Sequence[RawRecord],
    comments: Sequence[RawRecord],
    id_map: Mapping[str, str] | None = None,
) -> tuple[list[InteractionEvent], ExtractionStats]:
    """Turn comments into directed interaction events.

    The target is the author of the parent post or comment; both endpoints
    are translated through ``id_map`` when given (author -> agent id).
    Comments whose parent is unknown are dropped and counted as orphans;
    events whose endpoints coincide after mapping are dropped as
    self-replies.  Output is ordered by (time, comment_id).
    """
    author_of: dict[str, str] = {}
    for rec in posts:
        author_of[rec.id] = rec.author
    for rec in comments:
        author_of[rec.id] = rec.author

    def mapped(author: str) -> str:
        return id_map.get(author, author) if id_map is not None else author

    stats = ExtractionStats()
    events: list[InteractionEvent] = []
    for rec in comments:
        if rec.kind is not RecordKind.COMMENT or rec.parent_id is None:
            continue
        parent_author = author_of.get(rec.parent_id)
        if parent_author is None:
            stats.orphans += 1
            continue
        source = mapped(rec.author)
        target = mapped(parent_author)
        if source == target:
            stats.self_replies += 1
            continue
        events.append(
            InteractionEvent(
                source=source,
                target=target,
                time=rec.created_utc,
                post_id=rec.link_id or rec.parent_id,
                comment_id=rec.id,
            )
        )
    events.sort(key=lambda e: (e.time, e.comment_id))
    stats.events = len(events)
    return events, stats


def _status_for(windows_hit: int, maybe_min: int, forsure_min: int) -> FollowStatus:
    if windows_hit >= forsure_min:
        return FollowStatus.FORSURE
    if windows_hit >= maybe_min:
        return FollowStatus.MAYBE
    return FollowStatus.NONE


def _check_thresholds(maybe_min: int, forsure_min: int) -> None:
    if maybe_min < 1:
        raise ConfigError(f"maybe_min must be >= 1, got {maybe_min}")
    if forsure_min < maybe_min:
        raise ConfigError(
            f"forsure_min ({forsure_min}) must be >= maybe_min ({maybe_min})"
        )


def classify(
    events: Sequence[InteractionEvent],
    grid: WindowGrid,
    maybe_min: int = DEFAULT_MAYBE_MIN,
    forsure_min: int = DEFAULT_FORSURE_MIN,
) -> FollowEdge:
    """Score one ordered pair by its distinct active windows.

    All events must share the same (source, target).  An empty event list
    yields a NONE edge with zero counts.
    """
    _check_thresholds(maybe_min, forsure_min)
    if not events:
        return FollowEdge(
            source="", target="", windows_hit=0, total_comments=0, status=FollowStatus.NONE
        )
    source, target = events[0].source, events[0].target
    for event in events:
        if event.source != source or event.target != target:
            raise ValueError("classify expects events of a single ordered pair")

    ordered = sorted(events, key=lambda e: (e.time, e.comment_id))
    seen: set[int] = set()
    maybe_time: int | None = None
    forsure_time: int | None = None
    for event in ordered:
        idx = grid.index(event.time)
        if idx in seen:
            continue
        seen.add(idx)
        if len(seen) == maybe_min and maybe_time is None:
            maybe_time = event.time
        if len(seen) == forsure_min and forsure_time is None:
            forsure_time = event.time

    windows_hit = len(seen)
    status = _status_for(windows_hit, maybe_min, forsure_min)
    first_seen = ordered[0].time
    last_seen = ordered[-1].time
    if status is FollowStatus.FORSURE:
        status_time = forsure_time
    elif status is FollowStatus.MAYBE:
        status_time = maybe_time
    else:
        status_time = first_seen
    return FollowEdge(
        source=source,
        target=target,
        windows_hit=windows_hit,
        total_comments=len(ordered),
        status=status,
        first_seen=first_seen,
        last_seen=last_seen,
        status_time=status_time,
        maybe_time=maybe_time,
        forsure_time=forsure_time,
    )


def infer_all(
    events: Sequence[InteractionEvent],
    grid: WindowGrid,
    maybe_min: int = DEFAULT_MAYBE_MIN,
    forsure_min: int = DEFAULT_FORSURE_MIN,
) -> list[FollowEdge]:
    """Classify every ordered pair; output sorted by (source, target)."""
    _check_thresholds(maybe_min, forsure_min)
    pairs: dict[tuple[str, str], list[InteractionEvent]] = defaultdict(list)
    for event in events:
        pairs[(event.source, event.target)].append(event)
    return [
        classify(pairs[key], grid, maybe_min, forsure_min)
        for key in sorted(pairs)
    ]


@dataclass(frozen=True)
class TimelineRow:
    time: int
    source: str
    target: str
    status: FollowStatus


def event_timeline(edges: Iterable[FollowEdge]) -> list[TimelineRow]:
    """Milestone rows behind follow-event plots, sorted by time.

    A maybe edge contributes its maybe milestone; a forsure edge contributes
    both milestones (when they are distinct thresholds), showing the
    progression from tentative to confirmed.
    """
    rows: list[TimelineRow] = []
    for edge in edges:
        if edge.status is FollowStatus.NONE:
            continue
        if edge.maybe_time is not None and (
            edge.status is FollowStatus.MAYBE or edge.maybe_time != edge.forsure_time
        ):
            rows.append(
                TimelineRow(edge.maybe_time, edge.source, edge.target, FollowStatus.MAYBE)
            )
        if edge.status is FollowStatus.FORSURE and edge.forsure_time is not None:
            rows.append(
                TimelineRow(edge.forsure_time, edge.source, edge.target, FollowStatus.FORSURE)
            )
    rows.sort(key=lambda r: (r.time, r.source, r.target, r.status.rank))
    return rows


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _opt(value: int | None) -> str:
    return "" if value is None else str(value)


def write_edges_csv(edges: Sequence[FollowEdge], path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EDGES_CSV_FIELDS)
        for edge in edges:
            writer.writerow(
                [
                    edge.source,
                    edge.target,
                    edge.status.value,
                    edge.windows_hit,
                    edge.total_comments,
                    _opt(edge.first_seen),
                    _opt(edge.last_seen),
                    _opt(edge.status_time),
                ]
            )


def load_edges_csv(path: str | Path) -> list[FollowEdge]:
    source = Path(path)
    if not source.exists():
        raise DataError(f"edges file not found: {source}")
    edges = []
    with open(source, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(EDGES_CSV_FIELDS) - set(reader.fieldnames or [])
        if missing:
            raise DataError(f"{source}: missing edge columns {sorted(missing)}")
        for row in reader:
            edges.append(
                FollowEdge(
                    source=row["source"],
                    target=row["target"],
                    status=FollowStatus(row["status"]),
                    windows_hit=int(row["windows_hit"]),
                    total_comments=int(row["total_comments"]),
                    first_seen=int(row["first_seen"]) if row["first_seen"] else None,
                    last_seen=int(row["last_seen"]) if row["last_seen"] else None,
                    status_time=int(row["status_time"]) if row["status_time"] else None,
                )
            )
    return edges


def write_timeline_csv(rows: Sequence[TimelineRow], path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMELINE_CSV_FIELDS)
        for row in rows:
            writer.writerow([row.time, row.source, row.target, row.status.value])


def write_events_jsonl(events: Sequence[InteractionEvent], path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event.to_dict(), separators=(",", ":")) + "\n")


def load_events_jsonl(path: str | Path) -> list[InteractionEvent]:
    source = Path(path)
    if not source.exists():
        raise DataError(f"events file not found: {source}")
    events = []
    with open(source, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(InteractionEvent.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DataError(f"{source}:{n}: bad event row: {exc}") from exc
    return events
