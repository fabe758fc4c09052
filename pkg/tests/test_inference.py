import random

import pytest
from hypothesis import given, settings, strategies as st

from latentgraph.errors import ConfigError
from latentgraph.ingest import RawRecord, RecordKind
from latentgraph.inference import (
    FollowStatus,
    InteractionEvent,
    WindowGrid,
    classify,
    event_timeline,
    extract_events,
    infer_all,
    load_edges_csv,
    load_events_jsonl,
    write_edges_csv,
    write_events_jsonl,
    write_timeline_csv,
)
from oracles import oracle_classify


def ev(source="u", target="v", time=0, cid="c0"):
    return InteractionEvent(source=source, target=target, time=time,
                            post_id="p0", comment_id=cid)


def events_at(times, source="u", target="v"):
    return [ev(source, target, t, f"c{i:03d}") for i, t in enumerate(times)]


DAY = 86400


class TestWindowGrid:
    def test_from_events_spans_data(self):
        grid = WindowGrid.from_events(events_at([100, 100 + 3 * DAY]), DAY)
        assert grid.origin == 100
        assert grid.n == 4
        assert grid.index(100) == 0
        assert grid.index(100 + 3 * DAY) == 3

    def test_empty_events(self):
        grid = WindowGrid.from_events([], DAY)
        assert grid.n == 0

    def test_out_of_range_time(self):
        grid = WindowGrid.from_events(events_at([0, DAY]), DAY)
        with pytest.raises(ValueError):
            grid.index(5 * DAY)


class TestClassify:
    def test_single_window_is_none(self):
        evs = events_at([10, 20, 30, 40, 50])
        grid = WindowGrid.from_events(evs, DAY)
        edge = classify(evs, grid)
        assert edge.windows_hit == 1
        assert edge.total_comments == 5
        assert edge.status is FollowStatus.NONE

    def test_two_windows_is_maybe(self):
        evs = events_at([10, DAY + 10])
        grid = WindowGrid.from_events(evs, DAY)
        assert classify(evs, grid).status is FollowStatus.MAYBE

    def test_three_windows_is_forsure(self):
        evs = events_at([10, DAY + 10, 2 * DAY + 10])
        grid = WindowGrid.from_events(evs, DAY)
        assert classify(evs, grid).status is FollowStatus.FORSURE

    def test_empty_events(self):
        edge = classify([], WindowGrid(0, DAY, 0))
        assert edge.status is FollowStatus.NONE
        assert edge.windows_hit == 0 and edge.total_comments == 0

    def test_mixed_pair_rejected(self):
        evs = [ev("a", "b", 10), ev("a", "c", 20, "c1")]
        with pytest.raises(ValueError):
            classify(evs, WindowGrid.from_events(evs, DAY))

    def test_status_time_at_threshold_crossing(self):
        # Grid origin is 100; windows activate at 100, DAY+105, 3*DAY+107.
        times = [100, 140, DAY + 105, DAY + 109, 3 * DAY + 107]
        evs = events_at(times)
        grid = WindowGrid.from_events(evs, DAY)
        edge = classify(evs, grid)
        assert edge.status is FollowStatus.FORSURE
        assert edge.maybe_time == DAY + 105
        assert edge.forsure_time == 3 * DAY + 107
        assert edge.status_time == 3 * DAY + 107
        assert edge.first_seen == 100 and edge.last_seen == 3 * DAY + 107
        assert edge.first_seen <= edge.status_time <= edge.last_seen

    def test_threshold_validation(self):
        evs = events_at([1])
        grid = WindowGrid.from_events(evs, DAY)
        with pytest.raises(ConfigError):
            classify(evs, grid, maybe_min=0)
        with pytest.raises(ConfigError):
            classify(evs, grid, maybe_min=3, forsure_min=2)


def random_stream(rng: random.Random):
    n_ids = rng.randint(2, 10)
    ids = [f"u{i}" for i in range(n_ids)]
    window_len = rng.choice([3600, DAY, 7 * DAY, 30 * DAY, 100, 17])
    n_events = rng.randint(1, 200)
    # Span bounded in window units so the materializing oracle stays cheap.
    span = window_len * rng.randint(1, 60)
    events = []
    for i in range(n_events):
        src, tgt = rng.sample(ids, 2)
        events.append(
            InteractionEvent(source=src, target=tgt, time=rng.randint(0, span),
                             post_id="p", comment_id=f"c{i:04d}")
        )
    return events, window_len


class TestOracleEquivalence:
    def test_thousand_random_streams(self):
        rng = random.Random(20260809)
        mismatches = 0
        for _ in range(1000):
            events, window_len = random_stream(rng)
            grid = WindowGrid.from_events(events, window_len)
            maybe_min = rng.randint(1, 4)
            forsure_min = maybe_min + rng.randint(0, 3)
            pairs = {}
            for event in events:
                pairs.setdefault((event.source, event.target), []).append(event)
            for pair_events in pairs.values():
                got = classify(pair_events, grid, maybe_min, forsure_min)
                want = oracle_classify(pair_events, grid, maybe_min, forsure_min)
                if got != want:
                    mismatches += 1
        assert mismatches == 0


class TestInferAll:
    def test_empty(self):
        assert infer_all([], WindowGrid(0, DAY, 0)) == []

    def test_planted_statuses(self):
        evs = []
        evs += events_at([10, 20], "a", "b")                       # one window
        evs += events_at([30], "b", "a")                           # one window
        evs += events_at([5, DAY + 5], "c", "d")                   # two windows
        evs += events_at([5, DAY + 5, 2 * DAY + 5], "d", "c")      # three windows
        grid = WindowGrid.from_events(evs, DAY)
        edges = {(e.source, e.target): e.status for e in infer_all(evs, grid)}
        assert edges == {
            ("a", "b"): FollowStatus.NONE,
            ("b", "a"): FollowStatus.NONE,
            ("c", "d"): FollowStatus.MAYBE,
            ("d", "c"): FollowStatus.FORSURE,
        }

    def test_order_invariance(self):
        rng = random.Random(5)
        events, window_len = random_stream(rng)
        grid = WindowGrid.from_events(events, window_len)
        shuffled = list(events)
        rng.shuffle(shuffled)
        assert infer_all(events, grid) == infer_all(shuffled, grid)

    def test_output_sorted_by_pair(self):
        evs = events_at([10], "z", "a") + events_at([20], "a", "z")
        grid = WindowGrid.from_events(evs, DAY)
        edges = infer_all(evs, grid)
        assert [(e.source, e.target) for e in edges] == [("a", "z"), ("z", "a")]


class TestThresholdSemantics:
    def test_infinite_forsure_never_confirms(self):
        rng = random.Random(6)
        events, window_len = random_stream(rng)
        grid = WindowGrid.from_events(events, window_len)
        edges = infer_all(events, grid, maybe_min=2, forsure_min=10**9)
        assert all(e.status is not FollowStatus.FORSURE for e in edges)

    def test_maybe_min_one_promotes_everyone(self):
        rng = random.Random(7)
        events, window_len = random_stream(rng)
        grid = WindowGrid.from_events(events, window_len)
        edges = infer_all(events, grid, maybe_min=1, forsure_min=3)
        assert all(e.status is not FollowStatus.NONE for e in edges)

    def test_forsure_nested_in_maybe_candidates(self):
        rng = random.Random(8)
        events, window_len = random_stream(rng)
        grid = WindowGrid.from_events(events, window_len)
        edges = infer_all(events, grid)
        for edge in edges:
            if edge.status is FollowStatus.FORSURE:
                assert edge.windows_hit >= 2


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=10**7), min_size=1, max_size=40),
    st.integers(min_value=0, max_value=10**7),
    st.integers(min_value=1, max_value=10**6),
)
def test_monotonicity_new_window_never_demotes(times, extra_time, window_len):
    evs = events_at(times)
    all_times = times + [extra_time]
    grid = WindowGrid.from_events(events_at(all_times), window_len)
    before = classify(evs, grid)
    after = classify(events_at(all_times), grid)
    assert after.status.rank >= before.status.rank


class TestExtractEvents:
    def post(self, pid, author, t):
        return RawRecord(id=pid, kind=RecordKind.POST, author=author,
                         created_utc=t, text="t", subreddit="s")

    def com(self, cid, author, t, link, parent):
        return RawRecord(id=cid, kind=RecordKind.COMMENT, author=author,
                         created_utc=t, text="c", subreddit="s",
                         link_id=link, parent_id=parent)

    def test_comment_on_post(self):
        posts = [self.post("p1", "B", 100)]
        comments = [self.com("c1", "A", 150, "p1", "p1")]
        events, stats = extract_events(posts, comments)
        assert len(events) == 1
        event = events[0]
        assert (event.source, event.target, event.time) == ("A", "B", 150)

    def test_self_reply_dropped(self):
        posts = [self.post("p1", "A", 100)]
        comments = [self.com("c1", "A", 150, "p1", "p1")]
        events, stats = extract_events(posts, comments)
        assert events == []
        assert stats.self_replies == 1

    def test_reply_chain_both_directions(self):
        posts = [self.post("p1", "B", 100)]
        comments = [
            self.com("c1", "A", 150, "p1", "p1"),
            self.com("c2", "B", 200, "p1", "c1"),
        ]
        events, _ = extract_events(posts, comments)
        assert [(e.source, e.target) for e in events] == [("A", "B"), ("B", "A")]

    def test_orphan_counted(self):
        events, stats = extract_events([], [self.com("c1", "A", 9, "p9", "p9")])
        assert events == [] and stats.orphans == 1

    def test_id_map_to_agents(self):
        posts = [self.post("p1", "B", 100)]
        comments = [self.com("c1", "A", 150, "p1", "p1")]
        events, _ = extract_events(posts, comments, {"A": "AG1", "B": "AG2"})
        assert (events[0].source, events[0].target) == ("AG1", "AG2")

    def test_same_agent_reply_is_self_reply(self):
        posts = [self.post("p1", "B", 100)]
        comments = [self.com("c1", "A", 150, "p1", "p1")]
        events, stats = extract_events(posts, comments, {"A": "AG", "B": "AG"})
        assert events == [] and stats.self_replies == 1


class TestTimeline:
    def test_single_maybe_edge(self):
        evs = events_at([10, DAY + 10])
        grid = WindowGrid.from_events(evs, DAY)
        rows = event_timeline(infer_all(evs, grid))
        assert len(rows) == 1
        assert rows[0].time == DAY + 10
        assert rows[0].status is FollowStatus.MAYBE

    def test_maybe_then_forsure_two_rows(self):
        evs = events_at([10, DAY + 10, 2 * DAY + 10])
        grid = WindowGrid.from_events(evs, DAY)
        rows = event_timeline(infer_all(evs, grid))
        assert [r.status for r in rows] == [FollowStatus.MAYBE, FollowStatus.FORSURE]
        assert rows[0].time < rows[1].time

    def test_none_edges_excluded(self):
        evs = events_at([10, 20])
        grid = WindowGrid.from_events(evs, DAY)
        assert event_timeline(infer_all(evs, grid)) == []

    def test_header_only_csv(self, tmp_path):
        path = tmp_path / "timeline.csv"
        write_timeline_csv([], path)
        assert path.read_text() == "time,source,target,status\n"


class TestPersistence:
    def test_edges_csv_round_trip(self, tmp_path):
        rng = random.Random(30)
        events, window_len = random_stream(rng)
        grid = WindowGrid.from_events(events, window_len)
        edges = infer_all(events, grid)
        path = tmp_path / "edges.csv"
        write_edges_csv(edges, path)
        loaded = load_edges_csv(path)
        for got, want in zip(loaded, edges):
            assert (got.source, got.target, got.status) == (want.source, want.target, want.status)
            assert got.windows_hit == want.windows_hit
            assert got.total_comments == want.total_comments
            assert got.first_seen == want.first_seen
            assert got.status_time == want.status_time
        assert path.read_text().splitlines()[0] == (
            "source,target,status,windows_hit,total_comments,first_seen,last_seen,status_time"
        )

    def test_events_jsonl_round_trip(self, tmp_path):
        events = events_at([5, 10, 15], "x", "y")
        path = tmp_path / "events.jsonl"
        write_events_jsonl(events, path)
        assert load_events_jsonl(path) == events
