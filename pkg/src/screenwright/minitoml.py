"""Minimal TOML-subset reader/writer for config files.

Supported subset (documented in the README):
    - comments starting with ``#`` and blank lines
    - table headers ``[section]`` and ``[section.sub]``
    - ``key = value`` with value one of:
        basic string  "..." (escapes: \\" \\\\ \\n \\t)
        integer, float, boolean (true/false)
        single-line array of the above, e.g. ["a", "b"]

The standard library gained a TOML parser only in 3.11 and the full format is
far more than the config needs, so this stays self-contained.
"""

from __future__ import annotations

import re

_BARE_KEY = re.compile(r"^[A-Za-z0-9_-]+$")
_INT = re.compile(r"^[+-]?\d+$")
_FLOAT = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")


class MiniTomlError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


def loads(text: str) -> dict:
    """Parse the TOML subset into nested dicts."""
    root: dict = {}
    current = root
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise MiniTomlError("unterminated table header", lineno)
            path = line[1:-1].strip()
            if not path:
                raise MiniTomlError("empty table header", lineno)
            current = root
            for part in path.split("."):
                part = part.strip()
                if not _BARE_KEY.match(part):
                    raise MiniTomlError(f"invalid table name {part!r}", lineno)
                nxt = current.setdefault(part, {})
                if not isinstance(nxt, dict):
                    raise MiniTomlError(f"{part!r} is already a value", lineno)
                current = nxt
            continue
        if "=" not in line:
            raise MiniTomlError("expected 'key = value'", lineno)
        key, _, rest = line.partition("=")
        key = key.strip()
        if not _BARE_KEY.match(key):
            raise MiniTomlError(f"invalid key {key!r}", lineno)
        value, trailing = _parse_value(rest.strip(), lineno)
        trailing = trailing.strip()
        if trailing and not trailing.startswith("#"):
            raise MiniTomlError(f"trailing characters {trailing!r}", lineno)
        if key in current and isinstance(current[key], dict):
            raise MiniTomlError(f"{key!r} is already a table", lineno)
        current[key] = value
    return root


def _parse_value(text: str, lineno: int):
    """Parse one value; return (value, remaining text)."""
    if not text:
        raise MiniTomlError("missing value", lineno)
    if text.startswith('"'):
        return _parse_string(text, lineno)
    if text.startswith("["):
        return _parse_array(text, lineno)
    # bare scalar runs to first whitespace/comma/bracket
    match = re.match(r"[^\s,\]#]+", text)
    token = match.group(0) if match else ""
    rest = text[len(token):]
    if token in ("true", "false"):
        return token == "true", rest
    if _INT.match(token):
        return int(token), rest
    if _FLOAT.match(token):
        return float(token), rest
    raise MiniTomlError(f"cannot parse value {token!r}", lineno)


def _parse_string(text: str, lineno: int):
    out: list[str] = []
    i = 1
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text):
                raise MiniTomlError("dangling escape", lineno)
            esc = text[i + 1]
            mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc)
            if mapped is None:
                raise MiniTomlError(f"unknown escape \\{esc}", lineno)
            out.append(mapped)
            i += 2
            continue
        if ch == '"':
            return "".join(out), text[i + 1:]
        out.append(ch)
        i += 1
    raise MiniTomlError("unterminated string", lineno)


def _parse_array(text: str, lineno: int):
    items: list = []
    rest = text[1:].lstrip()
    while True:
        if not rest:
            raise MiniTomlError("unterminated array", lineno)
        if rest.startswith("]"):
            return items, rest[1:]
        value, rest = _parse_value(rest, lineno)
        items.append(value)
        rest = rest.lstrip()
        if rest.startswith(","):
            rest = rest[1:].lstrip()


def dumps(data: dict) -> str:
    """Render nested dicts back to the TOML subset (round-trips loads)."""
    lines: list[str] = []
    _dump_table(data, (), lines)
    return "\n".join(lines) + "\n"


def _dump_table(table: dict, path: tuple[str, ...], lines: list[str]) -> None:
    scalars = {k: v for k, v in table.items() if not isinstance(v, dict)}
    subtables = {k: v for k, v in table.items() if isinstance(v, dict)}
    if path and (scalars or not subtables):
        if lines:
            lines.append("")
        lines.append(f"[{'.'.join(path)}]")
    for key, value in scalars.items():
        lines.append(f"{key} = {_format_value(value)}")
    for key, value in subtables.items():
        _dump_table(value, path + (key,), lines)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        escaped = escaped.replace("\n", "\\n").replace("\t", "\\t")
        return f'"{escaped}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__} to TOML subset")
