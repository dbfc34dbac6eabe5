"""Field escaping shared by every line-oriented file format.

Tab-separated formats escape backslash, tab and newline. Space-separated
formats (the call-stack envelope) additionally escape space as ``\\s``.
``None`` is written as a bare ``-``; a literal dash is written ``\\-`` and
an empty string ``\\e`` so that no field is ever zero-length.
"""

from __future__ import annotations

NONE_TOKEN = "-"

_BASE = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}
_SPACE = dict(_BASE, **{" ": "\\s"})
_UNESCAPE = {"\\": "\\", "t": "\t", "n": "\n", "s": " "}


class FormatError(ValueError):
    """Malformed serialized input.

    ``line`` is the 1-based line number of the first offending line, when
    known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def escape(value: str | None, spaces: bool = False) -> str:
    if value is None:
        return NONE_TOKEN
    if value == "":
        return "\\e"
    if value == NONE_TOKEN:
        return "\\-"
    table = _SPACE if spaces else _BASE
    return "".join(table.get(ch, ch) for ch in value)


def unescape(field: str) -> str | None:
    if field == NONE_TOKEN:
        return None
    if field == "\\e":
        return ""
    if field == "\\-":
        return NONE_TOKEN
    out = []
    i = 0
    n = len(field)
    while i < n:
        ch = field[i]
        if ch == "\\":
            if i + 1 >= n:
                raise FormatError("dangling escape at end of field")
            repl = _UNESCAPE.get(field[i + 1])
            if repl is None:
                raise FormatError(f"unknown escape \\{field[i + 1]}")
            out.append(repl)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def unescape_str(field: str) -> str:
    """Like :func:`unescape` but rejects the ``None`` token."""
    value = unescape(field)
    if value is None:
        raise FormatError("unexpected '-' where a value is required")
    return value


def join_fields(values, spaces: bool = False) -> str:
    sep = " " if spaces else "\t"
    return sep.join(escape(v, spaces) for v in values)


def split_fields(line: str, spaces: bool = False) -> list[str]:
    return line.split(" " if spaces else "\t")


def split_lines(data: bytes | str) -> list[str]:
    """Decode and split into lines; a single trailing newline is allowed."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"not valid UTF-8: {exc}") from None
    if data.endswith("\n"):
        data = data[:-1]
    if data == "":
        return []
    return data.split("\n")


def parse_int(field: str, what: str, line: int | None = None) -> int:
    try:
        return int(field)
    except ValueError:
        raise FormatError(f"bad {what}: {field!r}", line) from None


def parse_float(field: str, what: str, line: int | None = None) -> float:
    try:
        return float(field)
    except ValueError:
        raise FormatError(f"bad {what}: {field!r}", line) from None
