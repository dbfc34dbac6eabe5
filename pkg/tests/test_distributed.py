import random
from collections import Counter
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from idbg import (
    CallSiteFrame,
    CurriedStack,
    DebugLog,
    FormatError,
    Registry,
    StackSegment,
    capture_stack,
    curried_dump,
    dump_stack,
    export_envelope,
    export_log,
    import_envelope,
    import_log,
    log,
    make_default_semantics,
    make_recording_channel,
    merge_logs,
    new_context,
    replay_log,
)
from idbg.distributed import encode_envelope, merge_key

from conftest import counter_clock
from gen import events as event_strategy, frames, ident, rand_curried, rand_log, text

A_M = CallSiteFrame("A", "m", "a.py:7")


# -- envelopes ---------------------------------------------------------------


def test_envelope_empty_stack():
    stack = import_envelope(export_envelope(capture_stack([]), "A", "T", captured_at=1))
    assert len(stack.segments) == 1
    assert stack.segments[0].frames == ()


def test_envelope_single_frame():
    stack = import_envelope(export_envelope(capture_stack([A_M]), "A", "T", captured_at=1))
    (seg,) = stack.segments
    assert (seg.origin_id, seg.thread_id, seg.frames) == ("A", "T", (A_M,))


def test_envelope_wire_format():
    data = export_envelope(capture_stack([A_M, CallSiteFrame("A b", "op")]), "A", "main thread", captured_at=5)
    assert data.decode().split("\n") == [
        "IDBGCURRY/1",
        "SEG A main\\sthread 5 2",
        "FRM A m a.py:7",
        "FRM A\\sb op -",
        "",
    ]


def test_envelope_appends_hops_in_order():
    hop1 = import_envelope(export_envelope(capture_stack([A_M]), "A", "T1", captured_at=1))
    data = export_envelope(capture_stack([CallSiteFrame("B", "m")]), "B", "T2", prior=hop1, captured_at=2)
    stack = import_envelope(data)
    assert [s.origin_id for s in stack.segments] == ["A", "B"]
    assert stack.frame_count == 2


def test_currying_three_hops_matches_hop_by_hop():
    s1 = capture_stack([A_M])
    s2 = capture_stack([CallSiteFrame("B", "m"), CallSiteFrame("B", "n")])
    hop1 = export_envelope(s1, "A", "T1", captured_at=1)
    hop2 = export_envelope(s2, "B", "T2", prior=import_envelope(hop1), captured_at=2)
    at3 = import_envelope(hop2)
    expected = CurriedStack((
        StackSegment("A", "T1", s1.frames, 1),
        StackSegment("B", "T2", s2.frames, 2),
    ))
    assert at3 == expected
    assert at3.frame_count == 3


@pytest.mark.parametrize("seed", range(25))
def test_envelope_round_trip_randomized(seed):
    stack = rand_curried(random.Random(seed))
    assert import_envelope(encode_envelope(stack)) == stack


segments = st.builds(StackSegment, ident, text, st.lists(frames, max_size=8).map(tuple), st.integers(0, 10**16))


@settings(max_examples=150)
@given(st.lists(segments, min_size=1, max_size=4))
def test_envelope_round_trip_property(segs):
    stack = CurriedStack(tuple(segs))
    assert import_envelope(encode_envelope(stack)) == stack


def test_envelope_truncated_reports_position():
    data = export_envelope(capture_stack([A_M, A_M]), "A", "T", captured_at=1)
    with pytest.raises(FormatError, match="unexpected end") as info:
        import_envelope(data[: data.rindex(b"FRM")])
    assert info.value.line == 4


@pytest.mark.parametrize(
    "data, line",
    [
        (b"", 1),
        (b"IDBGCURRY/2\n", 1),
        (b"IDBGCURRY/1\nSEG A T x 0\n", 2),
        (b"IDBGCURRY/1\nSEG A T 1 1\nFRM A\n", 3),
        (b"IDBGCURRY/1\nSEG A T 1 0\nJUNK\n", 3),
        (b"IDBGCURRY/1\nSEG A T 1 -1\n", 2),
        (b"IDBGCURRY/1\nSEG A T 1 1\nFRM A m a\\qb\n", 3),
    ],
)
def test_envelope_malformed(data, line):
    with pytest.raises(FormatError) as info:
        import_envelope(data)
    assert info.value.line == line


# -- curried dumps ------------------------------------------------------------


def test_curried_dump_without_remote_is_plain_dump():
    local = capture_stack([A_M, CallSiteFrame("B", "m")])
    assert curried_dump(local, None) == dump_stack(local)
    assert curried_dump(local, CurriedStack()) == dump_stack(local)


def test_curried_dump_empty_local():
    remote = CurriedStack((StackSegment("A", "T", (A_M,), 1),))
    assert curried_dump(capture_stack([]), remote).split("\n") == [
        "--- curried from A/T ---",
        "at A.m (a.py:7)",
    ]


def test_curried_dump_fig2_topology():
    a_frames = [CallSiteFrame("A", "run"), A_M]
    remote = import_envelope(export_envelope(capture_stack(a_frames), "A", "TA", captured_at=1))
    local = capture_stack([CallSiteFrame("B", "dispatch"), CallSiteFrame("B", "m")])
    assert curried_dump(local, remote).split("\n") == [
        "at B.m (unknown)",
        "at B.dispatch (unknown)",
        "--- curried from A/TA ---",
        "at A.m (a.py:7)",
        "at A.run (unknown)",
    ]


def test_curried_dump_newest_hop_first():
    remote = CurriedStack((
        StackSegment("A", "T", (CallSiteFrame("A", "x"),), 1),
        StackSegment("B", "T", (CallSiteFrame("B", "y"),), 2),
    ))
    lines = curried_dump(capture_stack([CallSiteFrame("C", "z")]), remote).split("\n")
    assert lines == [
        "at C.z (unknown)",
        "--- curried from B/T ---",
        "at B.y (unknown)",
        "--- curried from A/T ---",
        "at A.x (unknown)",
    ]


# -- recording channel ----------------------------------------------------------


def _recording_registry(origin="mobile"):
    ch = make_recording_channel("trip", origin, clock=counter_clock())
    r = Registry(new_context(make_default_semantics(), ch.channel_id), enabled=True)
    r.add_channel(ch)
    return r, ch


def test_recording_channel():
    r, ch = _recording_registry()
    assert ch.log.events == []
    for i in range(3):
        log(r, "T", [], "C", "NETWORK", 5, f"m{i}")
    rec = ch.log
    assert (rec.log_id, rec.origin_id) == ("trip", "mobile")
    assert [e.message for e in rec.events] == ["m0", "m1", "m2"]
    assert all(e.origin_id == "mobile" for e in rec.events)
    assert rec.is_ordered()


def test_replay_matches_live_run():
    live_r, live_ch = _recording_registry()
    rec_r, rec_ch = _recording_registry()
    rng = random.Random(7)
    calls = [
        (rng.choice(["T1", "T2"]), rng.choice("CDE"), rng.choice(["NETWORK", "ASSERTION"]), rng.randint(1, 9))
        for _ in range(200)
    ]
    # Live side runs with a tuned filter; the disconnected side records everything.
    live_ctx = live_r.global_context
    live_ctx.set_threshold(4)
    live_ctx.class_filter_remove("D")
    live_ctx.disable_category("ASSERTION")
    for t, site, cat, lvl in calls:
        log(live_r, t, [], site, cat, lvl, "x")
        log(rec_r, t, [], site, cat, lvl, "x")
    carried = import_log(export_log(rec_ch.log))
    replay_r = Registry(live_ctx.clone(), enabled=True)
    replayed = replay_log(carried, replay_r)
    key = lambda e: (e.thread_id, e.call_site, e.category, e.level, e.message)  # noqa: E731
    assert [key(e) for e in replayed] == [key(e) for e in live_ch.log.events]


# -- log files ---------------------------------------------------------------


def test_log_round_trip_empty():
    empty = DebugLog("l", "o", [])
    assert import_log(export_log(empty)) == empty


def test_log_round_trip_with_escapes(rng):
    events = [replace(e, message="tab\there\nnewline\\ end") for e in rand_log(rng, max_events=5).events]
    log_ = DebugLog("trip\t1", "node\nA", events)
    assert import_log(export_log(log_)) == log_


@settings(max_examples=100)
@given(st.lists(event_strategy, max_size=6), text, text)
def test_log_round_trip_property(events, log_id, origin):
    log_ = DebugLog(log_id, origin, events)
    assert import_log(export_log(log_)) == log_


def test_import_bare_header():
    assert import_log(b"IDBGLOG/1\n") == DebugLog("", "", [])


@pytest.mark.parametrize("data", [b"", b"IDBGLOG/9\n", b"NOTALOG\n", b"IDBGLOG/1\nbad line\n", b"IDBGLOG/1\tonly-one\n"])
def test_import_log_malformed(data):
    with pytest.raises(FormatError):
        import_log(data)


# -- merge ---------------------------------------------------------------


def test_merge_with_empty_is_identity(rng):
    x = rand_log(rng)
    assert merge_logs(x, DebugLog("e", x.origin_id, [])).events == x.events
    assert merge_logs(DebugLog("e", x.origin_id, []), x).events == x.events


def test_merge_log_id():
    assert merge_logs(DebugLog("a", "o"), DebugLog("b", "o")).log_id == "a+b"


@pytest.mark.parametrize("seed", range(30))
def test_merge_sorted_and_permutation(seed):
    rng = random.Random(seed)
    a, b = rand_log(rng, "A"), rand_log(rng, "B")
    ab, ba = merge_logs(a, b), merge_logs(b, a)
    keys = [merge_key(e) for e in ab.events]
    assert keys == sorted(keys)
    assert Counter(ab.events) == Counter(ba.events) == Counter(a.events + b.events)


def test_merge_ties_keep_a_first():
    a = rand_log(random.Random(1), "same", 6)
    b = DebugLog("b", "same", [replace(e, message="from-b") for e in a.events])
    merged = merge_logs(a, b)
    assert [e.message == "from-b" for e in merged.events] == [False, True] * len(a.events)
