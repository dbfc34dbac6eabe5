"""Call-stack currying across process boundaries and portable debug logs.

Envelope wire format (space separated, spaces in fields escaped ``\\s``)::

    IDBGCURRY/1
    SEG <origin> <thread> <captured_at> <frame_count>
    FRM <class_id> <operation> <location or ->
    ...

Segments are stored earliest hop first; dumps print the newest hop first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .events import (
    CallSiteFrame,
    ChannelKind,
    MonitorEvent,
    OutputChannel,
    StackView,
    dump_stack,
    format_event,
    format_frame,
    now_micros,
    parse_event,
    should_emit,
)
from .textcodec import FormatError, join_fields, parse_int, split_fields, split_lines, unescape, unescape_str

ENVELOPE_MAGIC = "IDBGCURRY/1"
LOG_MAGIC = "IDBGLOG/1"


@dataclass(frozen=True)
class StackSegment:
    origin_id: str
    thread_id: str
    frames: tuple = ()
    captured_at: int = 0

    def __post_init__(self):
        if not self.origin_id:
            raise ValueError("origin_id must be non-empty")
        object.__setattr__(self, "frames", tuple(self.frames))


@dataclass(frozen=True)
class CurriedStack:
    segments: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def frame_count(self) -> int:
        return sum(len(s.frames) for s in self.segments)


def export_envelope(
    local: StackView,
    origin_id: str,
    thread_id: str,
    prior: CurriedStack | None = None,
    captured_at: int | None = None,
) -> bytes:
    segment = StackSegment(
        origin_id,
        thread_id,
        local.frames,
        now_micros() if captured_at is None else captured_at,
    )
    segments = (prior.segments if prior else ()) + (segment,)
    return encode_envelope(CurriedStack(segments))


def encode_envelope(stack: CurriedStack) -> bytes:
    lines = [ENVELOPE_MAGIC]
    for seg in stack.segments:
        lines.append(
            "SEG "
            + join_fields(
                [seg.origin_id, seg.thread_id, str(seg.captured_at), str(len(seg.frames))],
                spaces=True,
            )
        )
        for fr in seg.frames:
            lines.append("FRM " + join_fields([fr.class_id, fr.operation, fr.location], spaces=True))
    return ("\n".join(lines) + "\n").encode("utf-8")


def import_envelope(data: bytes | str) -> CurriedStack:
    """Decode an envelope; errors carry the line number of the first problem."""
    lines = split_lines(data)
    if not lines:
        raise FormatError("unexpected end of envelope: empty input", 1)
    if lines[0] != ENVELOPE_MAGIC:
        if lines[0].startswith("IDBGCURRY/"):
            raise FormatError(f"unsupported envelope version {lines[0]!r}", 1)
        raise FormatError(f"missing {ENVELOPE_MAGIC} header", 1)
    segments = []
    i = 1
    while i < len(lines):
        lineno = i + 1
        parts = split_fields(lines[i], spaces=True)
        if parts[0] != "SEG" or len(parts) != 5:
            raise FormatError("expected 'SEG <origin> <thread> <captured_at> <count>'", lineno)
        try:
            origin, thread = unescape_str(parts[1]), unescape_str(parts[2])
        except FormatError as exc:
            raise FormatError(str(exc), lineno) from None
        if not origin:
            raise FormatError("empty origin id", lineno)
        captured = parse_int(parts[3], "captured_at", lineno)
        count = parse_int(parts[4], "frame count", lineno)
        if count < 0:
            raise FormatError("negative frame count", lineno)
        frames = []
        for k in range(count):
            j = i + 1 + k
            if j >= len(lines):
                raise FormatError(
                    f"unexpected end of envelope: segment promised {count} frames, got {k}",
                    j + 1,
                )
            fparts = split_fields(lines[j], spaces=True)
            if fparts[0] != "FRM" or len(fparts) != 4:
                raise FormatError("expected 'FRM <class> <operation> <location>'", j + 1)
            try:
                class_id = unescape_str(fparts[1])
                operation = unescape_str(fparts[2])
                location = unescape(fparts[3])
            except FormatError as exc:
                raise FormatError(str(exc), j + 1) from None
            if not class_id:
                raise FormatError("empty class id", j + 1)
            frames.append(CallSiteFrame(class_id, operation, location))
        segments.append(StackSegment(origin, thread, tuple(frames), captured))
        i += 1 + count
    return CurriedStack(tuple(segments))


def boundary_line(segment: StackSegment) -> str:
    return f"--- curried from {segment.origin_id}/{segment.thread_id} ---"


def curried_dump(local: StackView, remote: CurriedStack | None) -> str:
    lines = []
    text = dump_stack(local)
    if text:
        lines.append(text)
    for seg in reversed(remote.segments if remote else ()):
        lines.append(boundary_line(seg))
        lines.extend(format_frame(f) for f in reversed(seg.frames))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Debug logs


@dataclass
class DebugLog:
    log_id: str = ""
    origin_id: str = ""
    events: list = field(default_factory=list)

    def is_ordered(self) -> bool:
        keys = [(e.timestamp, e.sequence) for e in self.events]
        return all(a <= b for a, b in zip(keys, keys[1:]))


class RecordingChannel(OutputChannel):
    """Channel that keeps every delivered event in an in-memory DebugLog."""

    kind = ChannelKind.RECORDING

    def __init__(self, log_id: str, origin_id: str, channel_id: str | None = None, **kwargs):
        super().__init__(channel_id or log_id, origin_id=origin_id, **kwargs)
        self._log = DebugLog(log_id, origin_id)

    def _write(self, event):
        self._log.events.append(event)

    @property
    def log(self) -> DebugLog:
        with self._lock:
            return DebugLog(self._log.log_id, self._log.origin_id, list(self._log.events))


def make_recording_channel(log_id: str, origin_id: str, **kwargs) -> RecordingChannel:
    return RecordingChannel(log_id, origin_id, **kwargs)


def export_log(log: DebugLog) -> bytes:
    header = LOG_MAGIC
    if log.log_id or log.origin_id:
        header += "\t" + join_fields([log.log_id, log.origin_id])
    lines = [header] + [format_event(e) for e in log.events]
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_log_header(line: str) -> tuple[str, str]:
    parts = split_fields(line)
    if parts[0] != LOG_MAGIC:
        if parts[0].startswith("IDBGLOG/"):
            raise FormatError(f"unsupported log version {parts[0]!r}", 1)
        raise FormatError(f"missing {LOG_MAGIC} header", 1)
    if len(parts) == 1:
        return "", ""
    if len(parts) != 3:
        raise FormatError("log header takes either no fields or log id and origin", 1)
    return unescape_str(parts[1]), unescape_str(parts[2])


def import_log(data: bytes | str) -> DebugLog:
    lines = split_lines(data)
    if not lines:
        raise FormatError("unexpected end of log: empty input", 1)
    log_id, origin_id = parse_log_header(lines[0])
    events = [parse_event(line, lineno) for lineno, line in enumerate(lines[1:], start=2)]
    return DebugLog(log_id, origin_id, events)


def merge_key(e: MonitorEvent):
    return (e.timestamp, e.origin_id, e.sequence)


def merge_logs(a: DebugLog, b: DebugLog) -> DebugLog:
    """All events of both logs, ordered by (timestamp, origin, sequence).

    Ties keep ``a``'s events ahead of ``b``'s. No clock-skew correction.
    """
    events = sorted(list(a.events) + list(b.events), key=merge_key)
    origin = a.origin_id if a.origin_id == b.origin_id else f"{a.origin_id}+{b.origin_id}"
    return DebugLog(f"{a.log_id}+{b.log_id}", origin, events)


def replay_log(log: DebugLog, registry, group_path: Sequence[str] | None = None) -> list[MonitorEvent]:
    """Events of ``log`` that the registry's current tuning would emit.

    Events are not re-stamped; each is judged under the context its own
    thread id resolves to.
    """
    return [
        e
        for e in log.events
        if should_emit(registry, e.thread_id, group_path, e.call_site, e.category, e.level)
    ]
