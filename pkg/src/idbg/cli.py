"""``idbg`` command line: context files, log filtering and merging, stats, demo.

Exit status is 0 on success, 1 for invalid values or malformed input, and
2 for I/O failures.
"""

from __future__ import annotations

import argparse
import queue
import sys
import threading
from pathlib import Path

from .context import ContextError, Registry, load_context, new_context, save_context
from .distributed import (
    curried_dump,
    export_envelope,
    import_envelope,
    import_log,
    merge_logs,
    export_log,
    parse_log_header,
)
from .events import (
    CallSiteFrame,
    FailurePolicy,
    MonitorAssertionError,
    capture_stack,
    check,
    make_buffer_channel,
    parse_event,
    should_emit,
)
from .semantics import make_default_semantics, make_wide_semantics
from .statistics import load_statistics
from .textcodec import FormatError, split_lines

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2

SEMANTICS = {"default": make_default_semantics, "wide": make_wide_semantics}


class CommandError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None


def _write(path, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


def _load_ctx(path):
    try:
        return load_context(_read(path))
    except FormatError as exc:
        raise CommandError(f"{path}: {exc}", EXIT_INVALID) from None


def _load_log(path):
    try:
        return import_log(_read(path))
    except FormatError as exc:
        raise CommandError(f"{path}: {exc}", EXIT_INVALID) from None


# -- ctx ----------------------------------------------------------------------


def cmd_ctx_init(args) -> int:
    ctx = new_context(SEMANTICS[args.semantics](), args.channel)
    _write(args.out, save_context(ctx))
    return EXIT_OK


class _OrderedOp(argparse.Action):
    """Collect tuning flags in command-line order."""

    def __call__(self, parser, namespace, values, option_string=None):
        ops = getattr(namespace, "ops", None) or []
        ops.append((self.dest, values))
        namespace.ops = ops


def _apply_op(ctx, op: str, value) -> None:
    if op == "threshold":
        ctx.set_threshold(value)
    elif op == "enable_cat":
        ctx.enable_category(value)
    elif op == "disable_cat":
        ctx.disable_category(value)
    elif op == "add_cat":
        name, _, level = value.partition("=")
        try:
            ctx.add_category(name, int(level))
        except ValueError as exc:
            if isinstance(exc, ContextError):
                raise
            raise ContextError(f"--add-cat expects NAME=LEVEL, got {value!r}") from None
    elif op == "include_class":
        ctx.class_filter_add(value)
    elif op == "exclude_class":
        ctx.class_filter_remove(value)
    elif op == "all_classes":
        ctx.class_filter_add_all()
    elif op == "no_classes":
        ctx.class_filter_remove_all()
    elif op == "enable":
        ctx.set_enabled(True)
    elif op == "disable":
        ctx.set_enabled(False)
    else:  # pragma: no cover
        raise AssertionError(op)


def cmd_ctx_set(args) -> int:
    ctx = _load_ctx(args.path)
    try:
        for op, value in getattr(args, "ops", None) or []:
            _apply_op(ctx, op, value)
    except ContextError as exc:
        raise CommandError(str(exc), EXIT_INVALID) from None
    _write(args.path, save_context(ctx))
    return EXIT_OK


def cmd_ctx_show(args) -> int:
    ctx = _load_ctx(args.path)
    s = ctx.semantics
    snap = ctx.snapshot()
    out = sys.stdout
    out.write(f"semantics  {s.name} [{s.min_level}..{s.max_level}] locale={s.locale_tag}\n")
    levels = ", ".join(f"{k}={v}" for k, v in sorted(s.named_levels.items(), key=lambda kv: kv[1]))
    out.write(f"levels     {levels}\n")
    out.write(f"channel    {ctx.channel_id}\n")
    out.write(f"enabled    {'yes' if snap.enabled else 'no'}\n")
    out.write(f"threshold  {snap.threshold} ({s.level_name(snap.threshold)})\n")
    for name in sorted(snap.category_states):
        state = "on" if snap.category_states[name] else "off"
        out.write(f"category   {name} level={snap.category_levels[name]} {state}\n")
    names = ", ".join(sorted(snap.class_filter.names)) or "(none)"
    out.write(f"classes    {snap.class_filter.mode.value}: {names}\n")
    return EXIT_OK


# -- log ----------------------------------------------------------------------


def cmd_log_filter(args) -> int:
    ctx = _load_ctx(args.context)
    lines = split_lines(_read(args.logfile))
    try:
        if not lines:
            raise FormatError("unexpected end of log: empty input", 1)
        parse_log_header(lines[0])
        events = [(line, parse_event(line, n)) for n, line in enumerate(lines[1:], start=2)]
    except FormatError as exc:
        raise CommandError(f"{args.logfile}: {exc}", EXIT_INVALID) from None
    registry = Registry(global_context=ctx, enabled=True)
    out = [lines[0]]
    for line, e in events:
        if should_emit(registry, e.thread_id, (), e.call_site, e.category, e.level):
            out.append(line)
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_log_merge(args) -> int:
    merged = merge_logs(_load_log(args.a), _load_log(args.b))
    _write(args.out, export_log(merged))
    return EXIT_OK


# -- stats --------------------------------------------------------------------


def cmd_stats_report(args) -> int:
    try:
        reg = load_statistics(_read(args.statsfile))
    except FormatError as exc:
        raise CommandError(f"{args.statsfile}: {exc}", EXIT_INVALID) from None
    text = reg.report_all()
    if text:
        sys.stdout.write(text + "\n")
    if args.plot:
        from .plotting import plot_statistics

        try:
            plot_statistics(reg.states(), args.plot)
        except OSError as exc:
            raise CommandError(f"cannot write {args.plot}: {exc}", EXIT_IO) from None
    return EXIT_OK


# -- demo ---------------------------------------------------------------------

A_FRAMES = [CallSiteFrame("A", "run", "a.py:3"), CallSiteFrame("A", "m", "a.py:7")]
B_FRAMES = [CallSiteFrame("B", "dispatch", "b.py:12"), CallSiteFrame("B", "m", "b.py:21")]


def run_curry_demo() -> str:
    """Node A calls m on node B through a byte pipe; B's assertion fails.

    Returns B's diagnostic: the failure line followed by the curried dump.
    """
    pipe: queue.Queue = queue.Queue()
    result: dict = {}

    def node_a():
        envelope = export_envelope(capture_stack(A_FRAMES), "A", "A-main")
        pipe.put(envelope)

    def node_b():
        registry = Registry(enabled=True, origin_id="B")
        registry.add_channel(make_buffer_channel("buffer", origin_id="B"))
        registry.set_global_context(new_context(make_default_semantics(), "buffer"))
        remote = import_envelope(pipe.get(timeout=10))
        local = capture_stack(B_FRAMES)
        try:
            check(registry, "B-worker", (), local.innermost, False,
                  "request from A violates B.m precondition", FailurePolicy.RAISE_TO_CALLER)
        except MonitorAssertionError as exc:
            result["text"] = f"B/B-worker: {exc}\n{curried_dump(local, remote)}"

    threads = [threading.Thread(target=node_a, name="A-main"),
               threading.Thread(target=node_b, name="B-worker")]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if "text" not in result:
        raise RuntimeError("demo assertion did not fire")
    return result["text"]


def cmd_demo_curry(args) -> int:
    sys.stdout.write(run_curry_demo() + "\n")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idbg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="group", required=True)

    ctx = sub.add_parser("ctx", help="author and inspect context files").add_subparsers(
        dest="command", required=True
    )
    p = ctx.add_parser("init", help="write a fresh context file")
    p.add_argument("--out", required=True)
    p.add_argument("--semantics", choices=sorted(SEMANTICS), default="default")
    p.add_argument("--channel", default="console")
    p.set_defaults(func=cmd_ctx_init)

    p = ctx.add_parser("set", help="tune a context file in place (flags apply in order)")
    p.add_argument("path")
    p.add_argument("--threshold", type=int, action=_OrderedOp)
    p.add_argument("--enable-cat", action=_OrderedOp, metavar="CAT")
    p.add_argument("--disable-cat", action=_OrderedOp, metavar="CAT")
    p.add_argument("--add-cat", action=_OrderedOp, metavar="CAT=LEVEL")
    p.add_argument("--include-class", action=_OrderedOp, metavar="SITE")
    p.add_argument("--exclude-class", action=_OrderedOp, metavar="SITE")
    p.add_argument("--all-classes", action=_OrderedOp, nargs=0)
    p.add_argument("--no-classes", action=_OrderedOp, nargs=0)
    p.add_argument("--enable", action=_OrderedOp, nargs=0)
    p.add_argument("--disable", action=_OrderedOp, nargs=0)
    p.set_defaults(func=cmd_ctx_set)

    p = ctx.add_parser("show", help="print a context file's settings")
    p.add_argument("path")
    p.set_defaults(func=cmd_ctx_show)

    log = sub.add_parser("log", help="filter and merge log files").add_subparsers(
        dest="command", required=True
    )
    p = log.add_parser("filter", help="print events a context would emit")
    p.add_argument("logfile")
    p.add_argument("--context", required=True)
    p.set_defaults(func=cmd_log_filter)

    p = log.add_parser("merge", help="merge two logs by timestamp")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_log_merge)

    stats = sub.add_parser("stats", help="statistics snapshots").add_subparsers(
        dest="command", required=True
    )
    p = stats.add_parser("report", help="print a statistics report")
    p.add_argument("statsfile")
    p.add_argument("--plot", metavar="PNG", help="also render a bar chart to this file")
    p.set_defaults(func=cmd_stats_report)

    demo = sub.add_parser("demo", help="demonstrations").add_subparsers(
        dest="command", required=True
    )
    p = demo.add_parser("curry", help="two-node call-stack currying demo")
    p.set_defaults(func=cmd_demo_curry)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"idbg: {exc}", file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
