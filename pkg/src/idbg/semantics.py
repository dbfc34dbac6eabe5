"""Monitoring semantics: level range, named levels, categories, messages.

A :class:`Semantics` value is the replaceable bundle a context is built
on. It is immutable; build a new one (``dataclasses.replace`` works) to
change anything.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

REQUIRED_LEVEL_NAMES = ("NOTICE", "WARNING", "ERROR", "CRITICAL", "FAILURE")
BASE_CATEGORIES = ("NETWORK", "GARBAGE_COLLECTOR", "ASSERTION")

# Whitespace would break every file format; backslash and the '-' token are
# reserved by the field escaping.
_CATEGORY_NAME = re.compile(r"^[^\s\\]+$")


class SemanticsError(ValueError):
    """Invalid semantics, or levels from two different semantics mixed."""


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class Level:
    """An integer priority tagged with the name of the semantics it belongs to.

    Plain ints are accepted everywhere a level is expected; the tag only
    matters to :func:`compare_levels`.
    """

    value: int
    semantics: str = ""

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value


@dataclass(frozen=True)
class Category:
    name: str
    level: int


def _freeze(mapping) -> Mapping:
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True)
class Semantics:
    name: str
    min_level: int
    max_level: int
    named_levels: Mapping[str, int]
    categories: Mapping[str, int]
    message_templates: Mapping[str, str] = field(default_factory=dict)
    locale_tag: str = "en"

    def __post_init__(self):
        for attr in ("named_levels", "categories", "message_templates"):
            object.__setattr__(self, attr, _freeze(getattr(self, attr)))

    def __deepcopy__(self, memo):
        return self

    def __reduce__(self):
        return (
            Semantics,
            (
                self.name,
                self.min_level,
                self.max_level,
                dict(self.named_levels),
                dict(self.categories),
                dict(self.message_templates),
                self.locale_tag,
            ),
        )

    def __eq__(self, other):
        if not isinstance(other, Semantics):
            return NotImplemented
        return (
            self.name == other.name
            and self.min_level == other.min_level
            and self.max_level == other.max_level
            and dict(self.named_levels) == dict(other.named_levels)
            and dict(self.categories) == dict(other.categories)
            and dict(self.message_templates) == dict(other.message_templates)
            and self.locale_tag == other.locale_tag
        )

    def __hash__(self):
        return hash((self.name, self.min_level, self.max_level))

    def level(self, name_or_value: str | int) -> Level:
        """Look up a named level, or wrap an integer, checking the range."""
        if isinstance(name_or_value, str):
            try:
                value = self.named_levels[name_or_value]
            except KeyError:
                raise SemanticsError(f"unknown level name {name_or_value!r}") from None
        else:
            value = int(name_or_value)
        if not self.in_range(value):
            raise SemanticsError(
                f"level {value} outside [{self.min_level}, {self.max_level}]"
            )
        return Level(value, self.name)

    def in_range(self, value: int) -> bool:
        return self.min_level <= value <= self.max_level

    def level_name(self, value: int) -> str:
        """Name of the level, or ``L<value>`` for unnamed ones."""
        for name, v in self.named_levels.items():
            if v == value:
                return name
        return f"L{value}"

    def message(self, key: str, *args) -> str:
        """Render a message template; ``{0}``..``{9}`` are positional slots.

        Unknown keys fall back to the key itself so a swapped semantics set
        never turns a log call into a crash.
        """
        template = self.message_templates.get(key, key)
        try:
            return template.format(*args)
        except (IndexError, KeyError, ValueError):
            return template


def make_default_semantics() -> Semantics:
    return Semantics(
        name="default",
        min_level=1,
        max_level=9,
        named_levels={"NOTICE": 1, "WARNING": 3, "ERROR": 5, "CRITICAL": 7, "FAILURE": 9},
        categories={name: 1 for name in BASE_CATEGORIES},
        message_templates={
            "assertion.failed": "Assertion failed: {0}",
            "level.NOTICE": "Notice",
            "level.WARNING": "Warning",
            "level.ERROR": "Error",
            "level.CRITICAL": "Critical",
            "level.FAILURE": "Failure",
        },
        locale_tag="en",
    )


def make_wide_semantics() -> Semantics:
    """Alternative 1..100 semantics with French messages.

    Named levels keep their relative spacing from the 1..9 set, rounded to
    quarter points: NOTICE=1, WARNING=25, ERROR=50, CRITICAL=75,
    FAILURE=100.
    """
    return Semantics(
        name="wide",
        min_level=1,
        max_level=100,
        named_levels={"NOTICE": 1, "WARNING": 25, "ERROR": 50, "CRITICAL": 75, "FAILURE": 100},
        categories={name: 1 for name in BASE_CATEGORIES},
        message_templates={
            "assertion.failed": "Assertion violée : {0}",
            "level.NOTICE": "Avis",
            "level.WARNING": "Avertissement",
            "level.ERROR": "Erreur",
            "level.CRITICAL": "Critique",
            "level.FAILURE": "Échec",
        },
        locale_tag="fr",
    )


def valid_category_name(name: str) -> bool:
    return bool(_CATEGORY_NAME.match(name)) and name != "-"


def validate_semantics(s: Semantics) -> list[str]:
    """Return every invariant violation; an empty list means valid."""
    problems = []
    if not s.name or not valid_category_name(s.name):
        problems.append(f"invalid semantics name {s.name!r}")
    if not s.min_level < s.max_level:
        problems.append(f"empty level range: min {s.min_level} >= max {s.max_level}")
    for req in REQUIRED_LEVEL_NAMES:
        if req not in s.named_levels:
            problems.append(f"required name absent: {req}")
    for name, value in s.named_levels.items():
        if not valid_category_name(name):
            problems.append(f"invalid level name {name!r}")
        if not s.in_range(value):
            problems.append(
                f"named level out of range: {name}={value} not in [{s.min_level}, {s.max_level}]"
            )
    for name, value in s.categories.items():
        if not valid_category_name(name):
            problems.append(f"invalid category name {name!r}")
        if not s.in_range(value):
            problems.append(
                f"category level out of range: {name}={value} not in [{s.min_level}, {s.max_level}]"
            )
    return problems


def compare_levels(a: Level | int, b: Level | int) -> Ordering:
    tags = {x.semantics for x in (a, b) if isinstance(x, Level) and x.semantics}
    if len(tags) > 1:
        raise SemanticsError(
            f"cannot compare levels from different semantics: {sorted(tags)}"
        )
    x, y = int(a), int(b)
    if x < y:
        return Ordering.LESS
    if x > y:
        return Ordering.GREATER
    return Ordering.EQUAL
