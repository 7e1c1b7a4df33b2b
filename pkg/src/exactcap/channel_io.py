"""Channel files.

A channel file is a one-line version header followed by a JSON object::

    exactcap-channel 1
    {
      "kind": "classical",
      "rows": [
        [0.9, 0.1],
        [0.1, 0.9]
      ],
      "units": "bits"
    }

``kind`` is ``classical`` (``rows``, optional ``input_labels`` and
``output_labels``) or ``cq`` (``states``: a list of square matrices whose
entries are ``[re, im]`` pairs or plain reals). ``units`` is an optional
presentation preference, ``nats`` or ``bits``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ChannelFileError, CapacityError
from .prob import ClassicalChannel
from .quantum import CqChannel

HEADER = "exactcap-channel 1"


@dataclass
class ChannelFile:
    channel: Union[ClassicalChannel, CqChannel]
    units: Optional[str] = None

    @property
    def kind(self) -> str:
        return "cq" if isinstance(self.channel, CqChannel) else "classical"


def _line_col(text: str, offset: int):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _locate_item(text: str, key: str, index: int):
    """Offset of element ``index`` of the top-level array under ``key``.

    Only scans for array brackets, which is enough because channel arrays
    hold numbers only.
    """
    start = text.find(f'"{key}"')
    if start < 0:
        return None
    pos = text.find("[", start)
    if pos < 0:
        return None
    depth = 0
    count = -1
    for i in range(pos, len(text)):
        ch = text[i]
        if ch == "[":
            depth += 1
            if depth == 2:
                count += 1
                if count == index:
                    return i
        elif ch == "]":
            depth -= 1
            if depth == 0:
                return None
    return None


def _fail(text, key, index, message):
    off = _locate_item(text, key, index)
    if off is None:
        raise ChannelFileError(message)
    line, col = _line_col(text, off)
    raise ChannelFileError(message, line=line, column=col)


def _complex_matrix(raw, text, index):
    try:
        rows = []
        for r in raw:
            row = []
            for entry in r:
                if isinstance(entry, (list, tuple)):
                    if len(entry) != 2:
                        raise ValueError("complex entries must be [re, im] pairs")
                    row.append(complex(float(entry[0]), float(entry[1])))
                else:
                    row.append(complex(float(entry), 0.0))
            rows.append(row)
        return np.array(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        _fail(text, "states", index, f"state {index}: {exc}")


def parse_channel(text: str) -> ChannelFile:
    """Parse channel-file text; raises :class:`ChannelFileError` with positions."""
    first, _, body = text.partition("\n")
    if first.strip() != HEADER:
        raise ChannelFileError(f"expected header {HEADER!r}", line=1, column=1)
    try:
        doc = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ChannelFileError(exc.msg, line=exc.lineno + 1, column=exc.colno) from None
    if not isinstance(doc, dict):
        raise ChannelFileError("top level must be a JSON object", line=2)
    units = doc.get("units")
    if units not in (None, "nats", "bits"):
        raise ChannelFileError(f"unknown units {units!r}")
    kind = doc.get("kind", "classical")
    if kind == "classical":
        rows = doc.get("rows")
        if not isinstance(rows, list) or not rows:
            raise ChannelFileError("'rows' must be a non-empty array")
        width = None
        for i, row in enumerate(rows):
            if not isinstance(row, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in row
            ):
                _fail(text, "rows", i, f"row {i} must be an array of numbers")
            if width is None:
                width = len(row)
            elif len(row) != width:
                _fail(text, "rows", i, f"row {i} has {len(row)} entries, expected {width}")
        for i, row in enumerate(rows):
            try:
                ClassicalChannel([row])
            except CapacityError as exc:
                _fail(text, "rows", i, f"row {i}: {exc}")
        try:
            channel = ClassicalChannel(
                rows, doc.get("input_labels"), doc.get("output_labels")
            )
        except CapacityError as exc:
            raise ChannelFileError(str(exc)) from None
        return ChannelFile(channel, units)
    if kind == "cq":
        states = doc.get("states")
        if not isinstance(states, list) or not states:
            raise ChannelFileError("'states' must be a non-empty array")
        mats = [_complex_matrix(s, text, i) for i, s in enumerate(states)]
        for i, m in enumerate(mats):
            try:
                CqChannel((m,))
            except CapacityError as exc:
                _fail(text, "states", i, f"state {i}: {exc}")
        try:
            channel = CqChannel(tuple(mats))
        except CapacityError as exc:
            raise ChannelFileError(str(exc)) from None
        return ChannelFile(channel, units)
    raise ChannelFileError(f"unknown channel kind {kind!r}")


def read_channel(path) -> ChannelFile:
    with open(path, encoding="utf-8") as fh:
        return parse_channel(fh.read())


def _num(x: float) -> str:
    return json.dumps(float(x))


def format_channel(channel, units: Optional[str] = None) -> str:
    """Canonical text for a channel; ``parse_channel(format_channel(c))`` round-trips."""
    if isinstance(channel, ChannelFile):
        channel, units = channel.channel, channel.units
    lines = [HEADER, "{"]
    if isinstance(channel, CqChannel):
        lines.append('  "kind": "cq",')
        lines.append('  "states": [')
        blocks = []
        for s in channel.states:
            rows = [
                "[" + ", ".join(f"[{_num(z.real)}, {_num(z.imag)}]" for z in row) + "]"
                for row in s
            ]
            blocks.append("    [" + ", ".join(rows) + "]")
        lines.append(",\n".join(blocks))
        lines.append("  ]" + ("," if units else ""))
    else:
        if not isinstance(channel, ClassicalChannel):
            channel = ClassicalChannel(channel)
        lines.append('  "kind": "classical",')
        lines.append('  "input_labels": ' + json.dumps(list(channel.input_labels)) + ",")
        lines.append('  "output_labels": ' + json.dumps(list(channel.output_labels)) + ",")
        lines.append('  "rows": [')
        lines.append(",\n".join(
            "    [" + ", ".join(_num(v) for v in row) + "]" for row in channel.matrix
        ))
        lines.append("  ]" + ("," if units else ""))
    if units:
        lines.append(f'  "units": {json.dumps(units)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_channel(path, channel, units: Optional[str] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_channel(channel, units))
