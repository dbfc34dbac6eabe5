"""Structured monitoring for concurrent and distributed programs.

Levels and categories come from a replaceable :class:`Semantics`; tuning
lives in :class:`MonitorContext` objects bound to threads and thread
groups through a :class:`Registry`.
"""

from .context import (
    ClassFilter,
    ContextError,
    FilterMode,
    MonitorContext,
    Registry,
    clone_context,
    load_context,
    new_context,
    save_context,
)
from .debug import Debug
from .distributed import (
    CurriedStack,
    DebugLog,
    RecordingChannel,
    StackSegment,
    curried_dump,
    export_envelope,
    export_log,
    import_envelope,
    import_log,
    make_recording_channel,
    merge_logs,
    replay_log,
)
from .events import (
    CallSiteFrame,
    ChannelError,
    CheckOutcome,
    FailurePolicy,
    MonitorAssertionError,
    MonitorEvent,
    StackView,
    TaskStopped,
    capture_stack,
    check,
    dump_stack,
    format_event,
    log,
    make_buffer_channel,
    make_console_channel,
    make_file_channel,
    parse_event,
    run_task,
    should_emit,
)
from .semantics import (
    Level,
    Ordering,
    Semantics,
    SemanticsError,
    compare_levels,
    make_default_semantics,
    make_wide_semantics,
    validate_semantics,
)
from .statistics import StatisticDescriptor, StatisticError, StatisticsRegistry
from .textcodec import FormatError

__version__ = "0.1.0"
