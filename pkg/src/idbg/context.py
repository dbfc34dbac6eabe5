"""Monitoring contexts, their bindings to threads and groups, and persistence.

A :class:`MonitorContext` holds one execution scope's complete tuning
state. Bindings in a :class:`Registry` keep references, so tuning a shared
context is seen at once by every thread bound to it; use
:meth:`MonitorContext.clone` for independent copies.
"""

from __future__ import annotations

import enum
import os
import threading
import uuid
from dataclasses import dataclass
from typing import Sequence

from .semantics import Semantics, SemanticsError, validate_semantics, valid_category_name
from .textcodec import (
    FormatError,
    join_fields,
    parse_int,
    split_fields,
    split_lines,
    unescape_str,
)

CONTEXT_MAGIC = "IDBGCTX/1"


class ContextError(ValueError):
    """Invalid tuning request (bad level, unknown or duplicate category)."""


class FilterMode(enum.Enum):
    INCLUDE_LISTED = "include"
    EXCLUDE_LISTED = "exclude"


@dataclass(frozen=True)
class ClassFilter:
    mode: FilterMode = FilterMode.EXCLUDE_LISTED
    names: frozenset = frozenset()

    def admits(self, site: str) -> bool:
        if self.mode is FilterMode.INCLUDE_LISTED:
            return site in self.names
        return site not in self.names

    def with_added(self, site: str) -> ClassFilter:
        if self.mode is FilterMode.INCLUDE_LISTED:
            return ClassFilter(self.mode, self.names | {site})
        return ClassFilter(self.mode, self.names - {site})

    def with_removed(self, site: str) -> ClassFilter:
        if self.mode is FilterMode.INCLUDE_LISTED:
            return ClassFilter(self.mode, self.names - {site})
        return ClassFilter(self.mode, self.names | {site})


ADMIT_ALL = ClassFilter(FilterMode.EXCLUDE_LISTED, frozenset())
ADMIT_NONE = ClassFilter(FilterMode.INCLUDE_LISTED, frozenset())


@dataclass(frozen=True)
class ContextSnapshot:
    """Consistent read-only view of a context's mutable state."""

    enabled: bool
    threshold: int
    category_states: dict
    category_levels: dict
    class_filter: ClassFilter
    version: int


def _new_id() -> str:
    return uuid.uuid4().hex


class MonitorContext:
    """Tuning state for one execution scope.

    ``semantics`` and ``channel_id`` are fixed at construction. Every other
    attribute is changed only through the mutator methods, each of which is
    atomic and bumps :attr:`version`.
    """

    def __init__(self, semantics: Semantics, channel_id: str = "console"):
        problems = validate_semantics(semantics)
        if problems:
            raise SemanticsError("; ".join(problems))
        if not channel_id or not valid_category_name(channel_id):
            raise ContextError(f"invalid channel id {channel_id!r}")
        self._semantics = semantics
        self._channel_id = channel_id
        self._lock = threading.RLock()
        self.context_id = _new_id()
        self._enabled = True
        self._threshold = semantics.named_levels["NOTICE"]
        self._extra_categories: dict[str, int] = {}
        self._category_states = {name: True for name in semantics.categories}
        self._class_filter = ADMIT_ALL
        self._version = 0

    # -- fixed ---------------------------------------------------------------

    @property
    def semantics(self) -> Semantics:
        return self._semantics

    @property
    def channel_id(self) -> str:
        return self._channel_id

    # -- reads ---------------------------------------------------------------

    @property
    def enabled(self) -> bool:
        return self._enabled

    @property
    def threshold(self) -> int:
        return self._threshold

    @property
    def class_filter(self) -> ClassFilter:
        return self._class_filter

    @property
    def version(self) -> int:
        return self._version

    @property
    def category_states(self) -> dict[str, bool]:
        with self._lock:
            return dict(self._category_states)

    @property
    def extra_categories(self) -> dict[str, int]:
        with self._lock:
            return dict(self._extra_categories)

    def category_level(self, name: str) -> int | None:
        with self._lock:
            if name in self._extra_categories:
                return self._extra_categories[name]
            return self._semantics.categories.get(name)

    def snapshot(self) -> ContextSnapshot:
        with self._lock:
            levels = dict(self._semantics.categories)
            levels.update(self._extra_categories)
            return ContextSnapshot(
                enabled=self._enabled,
                threshold=self._threshold,
                category_states=dict(self._category_states),
                category_levels=levels,
                class_filter=self._class_filter,
                version=self._version,
            )

    # -- mutators ------------------------------------------------------------

    def _check_level(self, level) -> int:
        value = int(level)
        if not self._semantics.in_range(value):
            raise ContextError(
                f"level {value} outside [{self._semantics.min_level}, "
                f"{self._semantics.max_level}]"
            )
        return value

    def set_enabled(self, on: bool) -> None:
        with self._lock:
            self._enabled = bool(on)
            self._version += 1

    def set_threshold(self, level) -> None:
        value = self._check_level(level)
        with self._lock:
            self._threshold = value
            self._version += 1

    def enable_category(self, name: str) -> None:
        self._set_category(name, True)

    def disable_category(self, name: str) -> None:
        self._set_category(name, False)

    def _set_category(self, name: str, on: bool) -> None:
        with self._lock:
            if name not in self._category_states:
                raise ContextError(f"unknown category {name!r}")
            self._category_states[name] = on
            self._version += 1

    def add_category(self, name: str, level) -> None:
        if not valid_category_name(name):
            raise ContextError(f"invalid category name {name!r}")
        value = self._check_level(level)
        with self._lock:
            if name in self._category_states:
                raise ContextError(f"duplicate category {name!r}")
            self._extra_categories[name] = value
            self._category_states[name] = True
            self._version += 1

    def class_filter_add(self, site: str) -> None:
        with self._lock:
            self._class_filter = self._class_filter.with_added(site)
            self._version += 1

    def class_filter_remove(self, site: str) -> None:
        with self._lock:
            self._class_filter = self._class_filter.with_removed(site)
            self._version += 1

    def class_filter_add_all(self) -> None:
        with self._lock:
            self._class_filter = ADMIT_ALL
            self._version += 1

    def class_filter_remove_all(self) -> None:
        with self._lock:
            self._class_filter = ADMIT_NONE
            self._version += 1

    # -- copies --------------------------------------------------------------

    def clone(self) -> MonitorContext:
        """Independent deep copy with a fresh ``context_id``."""
        with self._lock:
            copy = MonitorContext(self._semantics, self._channel_id)
            copy._enabled = self._enabled
            copy._threshold = self._threshold
            copy._extra_categories = dict(self._extra_categories)
            copy._category_states = dict(self._category_states)
            copy._class_filter = self._class_filter
        return copy

    def same_settings(self, other: MonitorContext) -> bool:
        """Field equality ignoring ``context_id`` and ``version``."""
        a, b = self.snapshot(), other.snapshot()
        return (
            self.semantics == other.semantics
            and self.channel_id == other.channel_id
            and a.enabled == b.enabled
            and a.threshold == b.threshold
            and a.category_states == b.category_states
            and a.category_levels == b.category_levels
            and a.class_filter == b.class_filter
        )

    def __repr__(self):
        return (
            f"MonitorContext(id={self.context_id[:8]}, semantics={self._semantics.name}, "
            f"channel={self._channel_id}, enabled={self._enabled}, "
            f"threshold={self._threshold})"
        )


def new_context(semantics: Semantics, channel_id: str = "console") -> MonitorContext:
    return MonitorContext(semantics, channel_id)


def clone_context(ctx: MonitorContext) -> MonitorContext:
    return ctx.clone()


# ---------------------------------------------------------------------------
# Registry


def _env_enabled() -> bool:
    return os.environ.get("IDBG_ENABLE", "1").strip() != "0"


class Registry:
    """Global enable flag plus thread and thread-group context bindings.

    ``enabled=None`` reads the ``IDBG_ENABLE`` environment variable
    (``0`` disables, anything else enables; unset means enabled).
    """

    def __init__(
        self,
        global_context: MonitorContext | None = None,
        enabled: bool | None = None,
        origin_id: str | None = None,
    ):
        from .events import make_console_channel  # channels live downstream

        if global_context is None:
            from .semantics import make_default_semantics

            global_context = MonitorContext(make_default_semantics(), "console")
        self._lock = threading.RLock()
        self._global_enabled = _env_enabled() if enabled is None else bool(enabled)
        self._global_context = global_context
        self._thread_bindings: dict[str, MonitorContext] = {}
        self._group_bindings: dict[str, MonitorContext] = {}
        self._group_parents: dict[str, str] = {}
        self._thread_groups: dict[str, str] = {}
        self._channels: dict = {}
        self.origin_id = origin_id or default_origin_id()
        self.add_channel(make_console_channel(origin_id=self.origin_id))

    # -- global --------------------------------------------------------------

    @property
    def global_enabled(self) -> bool:
        return self._global_enabled

    @property
    def global_context(self) -> MonitorContext:
        return self._global_context

    def set_global_enable(self, on: bool) -> None:
        with self._lock:
            self._global_enabled = bool(on)

    def set_global_context(self, ctx: MonitorContext) -> None:
        with self._lock:
            self._global_context = ctx

    # -- channels ------------------------------------------------------------

    def add_channel(self, channel) -> None:
        with self._lock:
            self._channels[channel.channel_id] = channel

    def channel(self, channel_id: str):
        with self._lock:
            try:
                return self._channels[channel_id]
            except KeyError:
                from .events import ChannelError

                raise ChannelError(f"no output channel named {channel_id!r}") from None

    # -- bindings ------------------------------------------------------------

    def bind_thread(self, thread_id: str, ctx: MonitorContext) -> None:
        with self._lock:
            self._thread_bindings[thread_id] = ctx

    def unbind_thread(self, thread_id: str) -> None:
        with self._lock:
            self._thread_bindings.pop(thread_id, None)

    def bind_group(self, group_id: str, ctx: MonitorContext) -> None:
        with self._lock:
            self._group_bindings[group_id] = ctx

    def unbind_group(self, group_id: str) -> None:
        with self._lock:
            self._group_bindings.pop(group_id, None)

    def set_group_parent(self, group_id: str, parent_id: str | None) -> None:
        """Place ``group_id`` under ``parent_id``; cycles are rejected."""
        with self._lock:
            if parent_id is None:
                self._group_parents.pop(group_id, None)
                return
            node = parent_id
            while node is not None:
                if node == group_id:
                    raise ContextError(
                        f"making {parent_id!r} the parent of {group_id!r} creates a cycle"
                    )
                node = self._group_parents.get(node)
            self._group_parents[group_id] = parent_id

    def join_group(self, thread_id: str, group_id: str | None) -> None:
        """Record the innermost group a thread belongs to."""
        with self._lock:
            if group_id is None:
                self._thread_groups.pop(thread_id, None)
            else:
                self._thread_groups[thread_id] = group_id

    def group_path(self, thread_id: str) -> list[str]:
        """Innermost-to-outermost group ids for a thread, from recorded membership."""
        with self._lock:
            path = []
            node = self._thread_groups.get(thread_id)
            while node is not None:
                path.append(node)
                node = self._group_parents.get(node)
            return path

    def resolve(self, thread_id: str, group_path: Sequence[str] | None = None) -> MonitorContext:
        """Thread binding, else innermost bound group, else the global context.

        ``group_path=None`` derives the path from :meth:`join_group` and
        :meth:`set_group_parent`.
        """
        with self._lock:
            ctx = self._thread_bindings.get(thread_id)
            if ctx is not None:
                return ctx
            if group_path is None:
                group_path = self.group_path(thread_id)
            for group in group_path:
                ctx = self._group_bindings.get(group)
                if ctx is not None:
                    return ctx
            return self._global_context


def default_origin_id() -> str:
    import socket

    return f"{socket.gethostname() or 'localhost'}:{os.getpid()}"


# ---------------------------------------------------------------------------
# Persistence


def save_context(ctx: MonitorContext) -> bytes:
    s = ctx.semantics
    snap = ctx.snapshot()
    lines = [CONTEXT_MAGIC, "[semantics]"]
    lines.append(join_fields(["name", s.name]))
    lines.append(join_fields(["locale", s.locale_tag]))
    lines.append(join_fields(["min", str(s.min_level)]))
    lines.append(join_fields(["max", str(s.max_level)]))
    for name, value in s.named_levels.items():
        lines.append(join_fields(["level", name, str(value)]))
    for name, value in s.categories.items():
        lines.append(join_fields(["category", name, str(value)]))
    for key, text in s.message_templates.items():
        lines.append(join_fields(["template", key, text]))
    lines.append("[context]")
    lines.append(join_fields(["enabled", "1" if snap.enabled else "0"]))
    lines.append(join_fields(["threshold", str(snap.threshold)]))
    lines.append(join_fields(["channel", ctx.channel_id]))
    for name, value in ctx.extra_categories.items():
        lines.append(join_fields(["addcategory", name, str(value)]))
    for name, on in snap.category_states.items():
        lines.append(join_fields(["catstate", name, "1" if on else "0"]))
    lines.append(join_fields(["classmode", snap.class_filter.mode.value]))
    for site in sorted(snap.class_filter.names):
        lines.append(join_fields(["class", site]))
    lines.append("end")
    return ("\n".join(lines) + "\n").encode("utf-8")


_SEM_KEYS = {"name": 2, "locale": 2, "min": 2, "max": 2, "level": 3, "category": 3, "template": 3}
_CTX_KEYS = {
    "enabled": 2,
    "threshold": 2,
    "channel": 2,
    "addcategory": 3,
    "catstate": 3,
    "classmode": 2,
    "class": 2,
}


def _parse_bool(field: str, what: str, lineno: int) -> bool:
    if field not in ("0", "1"):
        raise FormatError(f"bad {what}: {field!r} (expected 0 or 1)", lineno)
    return field == "1"


def load_context(data: bytes | str) -> MonitorContext:
    """Parse context-file bytes; the result gets a fresh ``context_id``."""
    lines = split_lines(data)
    if not lines:
        raise FormatError("unexpected end of input: empty file", 1)
    if lines[0] != CONTEXT_MAGIC:
        if lines[0].startswith("IDBGCTX/"):
            raise FormatError(f"unsupported version {lines[0]!r}", 1)
        raise FormatError(f"missing {CONTEXT_MAGIC} header", 1)

    sem: dict = {"level": {}, "category": {}, "template": {}}
    ctx_fields: dict = {"addcategory": {}, "catstate": {}, "class": []}
    section = None
    ended = False
    for lineno, line in enumerate(lines[1:], start=2):
        if ended:
            raise FormatError("content after 'end'", lineno)
        if line == "[semantics]":
            if section is not None:
                raise FormatError("[semantics] must come first", lineno)
            section = "semantics"
            continue
        if line == "[context]":
            if section != "semantics":
                raise FormatError("[context] must follow [semantics]", lineno)
            section = "context"
            continue
        if line == "end":
            if section != "context":
                raise FormatError("'end' before [context] section", lineno)
            ended = True
            continue
        if section is None:
            raise FormatError("expected [semantics]", lineno)
        raw = split_fields(line)
        try:
            fields = [unescape_str(f) for f in raw]
        except FormatError as exc:
            raise FormatError(str(exc), lineno) from None
        key = fields[0]
        arity = (_SEM_KEYS if section == "semantics" else _CTX_KEYS).get(key)
        if arity is None:
            raise FormatError(f"unknown key {key!r} in [{section}]", lineno)
        if len(fields) != arity:
            raise FormatError(f"{key!r} expects {arity - 1} value(s)", lineno)
        if section == "semantics":
            if key in ("level", "category"):
                sem[key][fields[1]] = parse_int(fields[2], f"{key} value", lineno)
            elif key == "template":
                sem[key][fields[1]] = fields[2]
            elif key in ("min", "max"):
                sem[key] = parse_int(fields[1], key, lineno)
            else:
                sem[key] = fields[1]
        else:
            if key == "addcategory":
                ctx_fields[key][fields[1]] = parse_int(fields[2], "category level", lineno)
            elif key == "catstate":
                ctx_fields[key][fields[1]] = _parse_bool(fields[2], "category state", lineno)
            elif key == "class":
                ctx_fields[key].append(fields[1])
            elif key == "enabled":
                ctx_fields[key] = _parse_bool(fields[1], "enabled flag", lineno)
            elif key == "threshold":
                ctx_fields[key] = parse_int(fields[1], "threshold", lineno)
            elif key == "classmode":
                try:
                    ctx_fields[key] = FilterMode(fields[1])
                except ValueError:
                    raise FormatError(f"bad class mode {fields[1]!r}", lineno) from None
            else:
                ctx_fields[key] = fields[1]
    if not ended:
        raise FormatError("unexpected end of input: missing 'end'", len(lines) + 1)

    for required in ("name", "min", "max"):
        if required not in sem:
            raise FormatError(f"[semantics] lacks {required!r}")
    for required in ("enabled", "threshold", "channel", "classmode"):
        if required not in ctx_fields:
            raise FormatError(f"[context] lacks {required!r}")

    try:
        semantics = Semantics(
            name=sem["name"],
            min_level=sem["min"],
            max_level=sem["max"],
            named_levels=sem["level"],
            categories=sem["category"],
            message_templates=sem["template"],
            locale_tag=sem.get("locale", "en"),
        )
        ctx = MonitorContext(semantics, ctx_fields["channel"])
        for name, level in ctx_fields["addcategory"].items():
            ctx.add_category(name, level)
        for name, on in ctx_fields["catstate"].items():
            ctx._set_category(name, on)
        ctx.set_threshold(ctx_fields["threshold"])
        ctx.set_enabled(ctx_fields["enabled"])
    except (SemanticsError, ContextError) as exc:
        raise FormatError(f"invariant violation: {exc}") from None
    ctx._class_filter = ClassFilter(ctx_fields["classmode"], frozenset(ctx_fields["class"]))
    ctx._version = 0
    return ctx
