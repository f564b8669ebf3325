"""Deterministic artifact serialisation shared by the service and the CLI.

Every file the toolkit emits carries a config echo and the artifact
version; JSON is rendered canonically (sorted keys, fixed float format) so
identical run configurations produce byte-identical files.
"""

from __future__ import annotations

import math

from . import __version__

ARTIFACT_VERSION = __version__


def _render(value, out: list) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite float {value!r} in artifact")
        out.append(format(value, ".17g"))
    elif isinstance(value, str):
        out.append(_escape(value))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _render(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if i:
                out.append(",")
            if not isinstance(key, str):
                raise TypeError(f"non-string key {key!r} in artifact")
            out.append(_escape(key))
            out.append(":")
            _render(value[key], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialise {type(value).__name__} in artifact")


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(s: str) -> str:
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


def canonical_json(value) -> str:
    out: list = []
    _render(value, out)
    return "".join(out)


def config_header(config: dict) -> str:
    """The comment line placed at the top of every CSV artifact."""
    return "# " + canonical_json(
        {"artifact_version": ARTIFACT_VERSION, "config": config}
    )


def json_artifact(config: dict, body: dict) -> str:
    return canonical_json(
        {"artifact_version": ARTIFACT_VERSION, "config": config, **body}
    )


def fmt(x: float) -> str:
    return format(float(x), ".17g")
