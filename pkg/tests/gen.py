"""Random generators and hypothesis strategies shared by the tests."""

import string

from hypothesis import strategies as st

from idbg import (
    CallSiteFrame,
    CurriedStack,
    DebugLog,
    MonitorContext,
    MonitorEvent,
    StackSegment,
    make_default_semantics,
    make_wide_semantics,
    new_context,
)

# Includes the characters the escaping has to handle.
NASTY = string.ascii_letters + string.digits + " \t\n\\-._:/é漢"


# -- plain random generators (used by fixed-count acceptance loops) ----------


def rand_text(rng, max_len=12, alphabet=NASTY):
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_len)))


def rand_ident(rng, max_len=8):
    return "".join(rng.choice(string.ascii_letters + "_.$") for _ in range(rng.randint(1, max_len)))


def rand_frame(rng):
    return CallSiteFrame(
        rand_ident(rng) + rand_text(rng, 3),
        rand_text(rng, 8),
        rng.choice([None, rand_text(rng, 10), f"f.py:{rng.randint(1, 999)}"]),
    )


def rand_context(rng) -> MonitorContext:
    sem = rng.choice([make_default_semantics(), make_wide_semantics()])
    ctx = new_context(sem, rng.choice(["console", "buffer", "file", "rec-1"]))
    for i in range(rng.randint(0, 3)):
        ctx.add_category(f"X{i}_{rng.randint(0, 99)}", rng.randint(sem.min_level, sem.max_level))
    for name in ctx.category_states:
        if rng.random() < 0.5:
            ctx.disable_category(name)
    ctx.set_threshold(rng.randint(sem.min_level, sem.max_level))
    if rng.random() < 0.5:
        ctx.class_filter_remove_all()
    for _ in range(rng.randint(0, 5)):
        site = rand_ident(rng) + rand_text(rng, 4)
        (ctx.class_filter_add if rng.random() < 0.5 else ctx.class_filter_remove)(site)
    if rng.random() < 0.3:
        ctx.set_enabled(False)
    return ctx


def rand_event(rng, origin="n1", seq=1, ts=None):
    return MonitorEvent(
        sequence=seq,
        timestamp=ts if ts is not None else rng.randint(0, 10**12),
        thread_id=rand_text(rng, 6) or "t",
        origin_id=origin,
        category=rng.choice(["NETWORK", "ASSERTION", "GC", rand_ident(rng)]),
        level=rng.randint(1, 9),
        level_name=rng.choice(["NOTICE", "ERROR", "L4"]),
        call_site=rand_frame(rng),
        message=rand_text(rng, 20),
    )


def rand_log(rng, origin=None, max_events=12):
    origin = origin or rand_ident(rng)
    ts = rng.randint(0, 1000)
    events = []
    for seq in range(1, rng.randint(0, max_events) + 1):
        ts += rng.randint(0, 3)
        events.append(rand_event(rng, origin, seq, ts))
    return DebugLog(rand_ident(rng), origin, events)


def rand_curried(rng, max_segments=4, max_frames=8):
    return CurriedStack(
        tuple(
            StackSegment(
                rand_ident(rng) + rand_text(rng, 3),
                rand_text(rng, 6),
                tuple(rand_frame(rng) for _ in range(rng.randint(0, max_frames))),
                rng.randint(0, 10**15),
            )
            for _ in range(rng.randint(1, max_segments))
        )
    )


# -- hypothesis strategies ----------------------------------------------------

text = st.text(alphabet=st.sampled_from(NASTY), max_size=12)
ident = st.text(alphabet=st.sampled_from(string.ascii_letters + "_."), min_size=1, max_size=8)

frames = st.builds(CallSiteFrame, ident, text, st.one_of(st.none(), text))

events = st.builds(
    MonitorEvent,
    sequence=st.integers(0, 10**9),
    timestamp=st.integers(0, 10**16),
    thread_id=text,
    origin_id=text,
    category=text,
    level=st.integers(-5, 200),
    level_name=text,
    call_site=frames,
    message=st.text(st.characters(blacklist_categories=("Cs",)), max_size=40),
)
