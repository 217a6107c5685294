"""Electrode label parsing.

A label such as ``MST1`` splits into a leading alphabetic prefix (``MST``),
the first character of that prefix (``M``, used as a hemisphere proxy by the
index matcher) and a trailing electrode number (``1``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

_TRAILING_DIGITS = re.compile(r"[0-9]+$")


def normalize_label(raw: str) -> str:
    """Uppercase and strip surrounding whitespace."""
    return raw.strip().upper()


@dataclass(frozen=True)
class ChannelId:
    raw: str
    prefix: str
    first_char: str | None
    number: int | None

    def __str__(self) -> str:
        return self.raw

    def __lt__(self, other: ChannelId) -> bool:
        return self.raw < other.raw


def parse_channel(raw: str) -> ChannelId:
    """Parse an electrode label.

    ``LAT07`` yields number 7; ``LAT2b`` and ``EKG`` yield no number.
    """
    label = normalize_label(raw)
    if not label:
        raise ValueError("empty channel label")

    end = 0
    while end < len(label) and label[end].isalpha():
        end += 1
    prefix = label[:end]

    m = _TRAILING_DIGITS.search(label)
    number = int(m.group()) if m else None

    return ChannelId(
        raw=label,
        prefix=prefix,
        first_char=prefix[0] if prefix else None,
        number=number,
    )
