"""Emission path: filtering, output channels, logging, assertions, stacks.

Event lines are tab separated::

    timestamp origin thread level level-name category class operation message sequence location

The first nine fields are the human-facing record; ``sequence`` and
``location`` trail so that a recorded log reloads exactly.
"""

from __future__ import annotations

import enum
import os
import sys
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .context import Registry
from .textcodec import FormatError, join_fields, parse_int, split_fields, unescape, unescape_str

ASSERTION_CATEGORY = "ASSERTION"
ASSERTION_EXIT_STATUS = 70
EVENT_FIELD_COUNT = 11


def now_micros() -> int:
    return time.time_ns() // 1000


def current_thread_id() -> str:
    return threading.current_thread().name


# ---------------------------------------------------------------------------
# Call sites and stacks


@dataclass(frozen=True)
class CallSiteFrame:
    class_id: str
    operation: str = ""
    location: str | None = None

    def __post_init__(self):
        if not self.class_id:
            raise ValueError("class_id must be non-empty")


def _as_frame(site) -> CallSiteFrame:
    if isinstance(site, CallSiteFrame):
        return site
    return CallSiteFrame(str(site))


@dataclass(frozen=True)
class StackView:
    """Immutable snapshot of frames, outermost first."""

    frames: tuple = ()

    @property
    def depth(self) -> int:
        return len(self.frames)

    @property
    def innermost(self) -> CallSiteFrame | None:
        return self.frames[-1] if self.frames else None


def capture_stack(frames: Sequence[CallSiteFrame]) -> StackView:
    return StackView(tuple(frames))


def capture_here(skip: int = 0, limit: int | None = None) -> StackView:
    """Best-effort capture of the live Python stack (module as class id)."""
    frame = sys._getframe(1 + skip)
    collected = []
    while frame is not None and (limit is None or len(collected) < limit):
        code = frame.f_code
        module = frame.f_globals.get("__name__", "?")
        owner = frame.f_locals.get("self")
        class_id = f"{module}.{type(owner).__name__}" if owner is not None else module
        collected.append(
            CallSiteFrame(class_id, code.co_name, f"{code.co_filename}:{frame.f_lineno}")
        )
        frame = frame.f_back
    collected.reverse()
    return StackView(tuple(collected))


def format_frame(frame: CallSiteFrame) -> str:
    return f"at {frame.class_id}.{frame.operation} ({frame.location or 'unknown'})"


def dump_stack(view: StackView) -> str:
    """One line per frame, innermost first."""
    return "\n".join(format_frame(f) for f in reversed(view.frames))


# ---------------------------------------------------------------------------
# Events


@dataclass(frozen=True)
class MonitorEvent:
    sequence: int
    timestamp: int
    thread_id: str
    origin_id: str
    category: str
    level: int
    level_name: str
    call_site: CallSiteFrame
    message: str


def format_event(e: MonitorEvent) -> str:
    return join_fields(
        [
            str(e.timestamp),
            e.origin_id,
            e.thread_id,
            str(e.level),
            e.level_name,
            e.category,
            e.call_site.class_id,
            e.call_site.operation,
            e.message,
            str(e.sequence),
            e.call_site.location,
        ]
    )


def parse_event(line: str, lineno: int | None = None) -> MonitorEvent:
    raw = split_fields(line)
    if len(raw) != EVENT_FIELD_COUNT:
        raise FormatError(
            f"event line has {len(raw)} fields, expected {EVENT_FIELD_COUNT}", lineno
        )
    try:
        ts, origin, thread, level, level_name, category, class_id, op, msg, seq = (
            unescape_str(f) for f in raw[:10]
        )
        location = unescape(raw[10])
    except FormatError as exc:
        raise FormatError(str(exc), lineno) from None
    if not class_id:
        raise FormatError("empty class id", lineno)
    return MonitorEvent(
        sequence=parse_int(seq, "sequence", lineno),
        timestamp=parse_int(ts, "timestamp", lineno),
        thread_id=thread,
        origin_id=origin,
        category=category,
        level=parse_int(level, "level", lineno),
        level_name=level_name,
        call_site=CallSiteFrame(class_id, op, location),
        message=msg,
    )


# ---------------------------------------------------------------------------
# Output channels


class ChannelError(RuntimeError):
    """An output channel could not be found or written."""


class ChannelKind(enum.Enum):
    CONSOLE = "console"
    BUFFER = "buffer"
    FILE = "file"
    RECORDING = "recording"


class OutputChannel:
    """Base channel: stamps sequence, time and origin, then writes.

    Stamping and writing happen under one lock, so concurrent emitters
    never see duplicate or out-of-order sequence numbers.
    """

    kind: ChannelKind

    def __init__(
        self,
        channel_id: str,
        origin_id: str | None = None,
        clock: Callable[[], int] = now_micros,
    ):
        from .context import default_origin_id

        self.channel_id = channel_id
        self.origin_id = origin_id or default_origin_id()
        self.clock = clock
        self._lock = threading.Lock()
        self._sequence = 0

    def emit(
        self,
        *,
        thread_id: str,
        category: str,
        level: int,
        level_name: str,
        call_site: CallSiteFrame,
        message: str,
    ) -> MonitorEvent:
        with self._lock:
            self._sequence += 1
            event = MonitorEvent(
                sequence=self._sequence,
                timestamp=int(self.clock()),
                thread_id=thread_id,
                origin_id=self.origin_id,
                category=category,
                level=int(level),
                level_name=level_name,
                call_site=call_site,
                message=message,
            )
            try:
                self._write(event)
            except OSError as exc:
                raise ChannelError(f"channel {self.channel_id!r}: {exc}") from exc
            return event

    def _write(self, event: MonitorEvent) -> None:
        raise NotImplementedError


class ConsoleChannel(OutputChannel):
    kind = ChannelKind.CONSOLE

    def __init__(self, channel_id: str = "console", stream=None, **kwargs):
        super().__init__(channel_id, **kwargs)
        self._stream = stream

    def _write(self, event):
        stream = self._stream or sys.stderr
        stream.write(format_event(event) + "\n")
        stream.flush()


class BufferChannel(OutputChannel):
    kind = ChannelKind.BUFFER

    def __init__(self, channel_id: str = "buffer", **kwargs):
        super().__init__(channel_id, **kwargs)
        self._events: list[MonitorEvent] = []

    def _write(self, event):
        self._events.append(event)

    @property
    def events(self) -> list[MonitorEvent]:
        with self._lock:
            return list(self._events)

    def clear(self) -> None:
        with self._lock:
            self._events.clear()


class FileChannel(OutputChannel):
    """Appends event lines to a log file, writing the header to new files."""

    kind = ChannelKind.FILE

    def __init__(self, path, channel_id: str = "file", **kwargs):
        super().__init__(channel_id, **kwargs)
        self.path = Path(path)
        from .distributed import LOG_MAGIC

        try:
            with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                if fh.tell() == 0:
                    fh.write(LOG_MAGIC + "\n")
        except OSError as exc:
            raise ChannelError(f"cannot open {self.path}: {exc}") from exc

    def _write(self, event):
        with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(format_event(event) + "\n")


def make_console_channel(channel_id: str = "console", **kwargs) -> ConsoleChannel:
    return ConsoleChannel(channel_id, **kwargs)


def make_buffer_channel(channel_id: str = "buffer", **kwargs) -> BufferChannel:
    return BufferChannel(channel_id, **kwargs)


def make_file_channel(path, channel_id: str = "file", **kwargs) -> FileChannel:
    return FileChannel(path, channel_id, **kwargs)


# ---------------------------------------------------------------------------
# Filtering and logging


def should_emit(
    r: Registry,
    thread_id: str,
    group_path: Sequence[str] | None,
    site,
    category: str,
    level,
) -> bool:
    if not r.global_enabled:
        return False
    snap = r.resolve(thread_id, group_path).snapshot()
    return _admits(snap, _as_frame(site).class_id, category, int(level))


def _admits(snap, class_id: str, category: str, level: int) -> bool:
    if not snap.enabled or not snap.class_filter.admits(class_id):
        return False
    if not snap.category_states.get(category, False):
        return False
    return level >= max(snap.threshold, snap.category_levels[category])


def log(
    r: Registry,
    thread_id: str,
    group_path: Sequence[str] | None,
    site,
    category: str,
    level,
    message: str,
) -> bool:
    """Emit one event if the resolved context admits it; return whether it did."""
    if not r.global_enabled:
        return False
    ctx = r.resolve(thread_id, group_path)
    frame = _as_frame(site)
    level = int(level)
    if not _admits(ctx.snapshot(), frame.class_id, category, level):
        return False
    r.channel(ctx.channel_id).emit(
        thread_id=thread_id,
        category=category,
        level=level,
        level_name=ctx.semantics.level_name(level),
        call_site=frame,
        message=message,
    )
    return True


# ---------------------------------------------------------------------------
# Assertions


class FailurePolicy(enum.Enum):
    RAISE_TO_CALLER = "raise"
    STOP_CURRENT_TASK = "stop-task"
    HALT_SCOPE = "halt-scope"
    HALT_PROCESS = "halt-process"


class CheckOutcome(enum.Enum):
    PASSED = "passed"
    INACTIVE = "inactive"  # predicate failed but checking is switched off here
    SCOPE_HALTED = "scope-halted"


class MonitorAssertionError(AssertionError):
    """Raised to the caller by a failed assertion under RAISE_TO_CALLER."""

    def __init__(self, message: str, event: MonitorEvent | None = None):
        super().__init__(message)
        self.event = event


class TaskStopped(BaseException):
    """Unwinds the calling task after a failed STOP_CURRENT_TASK assertion.

    Derives from BaseException so ordinary ``except Exception`` handlers in
    the task body do not swallow it. :func:`run_task` absorbs it.
    """

    def __init__(self, message: str, event: MonitorEvent | None = None):
        super().__init__(message)
        self.event = event


def run_task(fn: Callable, *args, **kwargs):
    """Call ``fn``; a TaskStopped ends it quietly and is returned instead."""
    try:
        return fn(*args, **kwargs)
    except TaskStopped as stop:
        return stop


def check(
    r: Registry,
    thread_id: str,
    group_path: Sequence[str] | None,
    site,
    predicate: bool,
    message: str,
    policy: FailurePolicy = FailurePolicy.RAISE_TO_CALLER,
) -> CheckOutcome:
    if predicate:
        return CheckOutcome.PASSED
    if not r.global_enabled:
        return CheckOutcome.INACTIVE
    ctx = r.resolve(thread_id, group_path)
    frame = _as_frame(site)
    snap = ctx.snapshot()
    if not snap.enabled or not snap.class_filter.admits(frame.class_id):
        return CheckOutcome.INACTIVE

    # Threshold and category switches are deliberately bypassed here.
    semantics = ctx.semantics
    failure = semantics.named_levels["FAILURE"]
    text = semantics.message("assertion.failed", message)
    event = r.channel(ctx.channel_id).emit(
        thread_id=thread_id,
        category=ASSERTION_CATEGORY,
        level=failure,
        level_name=semantics.level_name(failure),
        call_site=frame,
        message=text,
    )
    if policy is FailurePolicy.RAISE_TO_CALLER:
        raise MonitorAssertionError(text, event)
    if policy is FailurePolicy.STOP_CURRENT_TASK:
        raise TaskStopped(text, event)
    if policy is FailurePolicy.HALT_SCOPE:
        ctx.set_enabled(False)
        return CheckOutcome.SCOPE_HALTED
    if policy is FailurePolicy.HALT_PROCESS:
        for stream in (sys.stdout, sys.stderr):
            try:
                stream.flush()
            except (OSError, ValueError):
                pass
        os._exit(ASSERTION_EXIT_STATUS)
    raise ValueError(f"unknown failure policy {policy!r}")
