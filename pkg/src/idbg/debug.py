"""Convenience front end bound to the calling thread.

    debug = Debug()
    debug.log("Dispatcher", "NETWORK", "ERROR", "GET failed")
    debug.check("Dispatcher", req is not None, "request must be non-null")

Thread identity is the current thread's name; the group path comes from
:meth:`Registry.join_group`.
"""

from __future__ import annotations

from .context import MonitorContext, Registry
from .events import (
    CheckOutcome,
    FailurePolicy,
    capture_here,
    check,
    current_thread_id,
    dump_stack,
    log,
    should_emit,
)
from .semantics import Semantics, make_default_semantics


class Debug:
    def __init__(
        self,
        semantics: Semantics | None = None,
        registry: Registry | None = None,
        policy: FailurePolicy = FailurePolicy.RAISE_TO_CALLER,
    ):
        if registry is None:
            registry = Registry(MonitorContext(semantics or make_default_semantics()))
        self.registry = registry
        self.policy = policy

    @property
    def semantics(self) -> Semantics:
        return self.context().semantics

    def context(self) -> MonitorContext:
        return self.registry.resolve(current_thread_id())

    def _level(self, level) -> int:
        if isinstance(level, str):
            return self.semantics.named_levels[level]
        return int(level)

    def enabled_for(self, site, category: str, level) -> bool:
        return should_emit(self.registry, current_thread_id(), None, site, category, self._level(level))

    def log(self, site, category: str, level, message: str) -> bool:
        return log(self.registry, current_thread_id(), None, site, category, self._level(level), message)

    def check(self, site, predicate: bool, message: str, policy: FailurePolicy | None = None) -> CheckOutcome:
        return check(self.registry, current_thread_id(), None, site, predicate, message, policy or self.policy)

    def stack_dump(self) -> str:
        return dump_stack(capture_here(skip=1))
