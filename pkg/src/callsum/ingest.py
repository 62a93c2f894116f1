"""Transcript ingestion and channel separation.

Calls arrive as JSON-Lines, one object per line::

    {"call_id": "c-001", "turns": [{"channel": "0", "text": "hello"}, ...]}

Each call involves exactly two channels.  A role map (channel id ->
:class:`Role`) decides which side is the customer and which the agent;
the map is configuration, never inferred from the text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

from .errors import ChannelError


class Role(Enum):
    CUSTOMER = "customer"
    AGENT = "agent"


@dataclass(frozen=True)
class Turn:
    channel_id: str
    text: str


@dataclass(frozen=True)
class RawCall:
    call_id: str
    turns: tuple[Turn, ...]


@dataclass(frozen=True)
class ChannelTranscript:
    """One speaker's half of a call, turns joined in order with single spaces."""

    call_id: str
    role: Role
    raw_text: str


@dataclass(frozen=True)
class LoadError:
    line_no: int
    message: str


@dataclass
class LoadReport:
    """Parsed calls plus per-record errors; malformed records are skipped."""

    calls: list[RawCall] = field(default_factory=list)
    errors: list[LoadError] = field(default_factory=list)


def load_calls(path: str | Path, role_map: Mapping[str, Role] | None = None) -> LoadReport:
    """Read a JSON-Lines call file.

    Malformed records (bad JSON, missing/empty call_id, missing turns,
    duplicate call_id, and, when ``role_map`` is given, unmapped or >2
    channels) are reported in the result and skipped; parsing continues.
    An unreadable file raises OSError.
    """
    report = LoadReport()
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                report.errors.append(LoadError(line_no, f"invalid JSON: {exc.msg}"))
                continue
            try:
                call = _parse_record(record)
            except ValueError as exc:
                report.errors.append(LoadError(line_no, str(exc)))
                continue
            if call.call_id in seen:
                report.errors.append(LoadError(line_no, f"duplicate call_id {call.call_id!r}"))
                continue
            if role_map is not None:
                try:
                    _check_channels(call, role_map)
                except ChannelError as exc:
                    report.errors.append(LoadError(line_no, str(exc)))
                    continue
            seen.add(call.call_id)
            report.calls.append(call)
    return report


def _parse_record(record: object) -> RawCall:
    if not isinstance(record, dict):
        raise ValueError("record is not a JSON object")
    call_id = record.get("call_id")
    if not isinstance(call_id, str) or not call_id:
        raise ValueError("missing or empty call_id")
    turns_raw = record.get("turns")
    if not isinstance(turns_raw, list):
        raise ValueError(f"call {call_id!r}: missing turns list")
    turns = []
    for i, t in enumerate(turns_raw):
        if not isinstance(t, dict) or not isinstance(t.get("channel"), str) or not isinstance(t.get("text"), str):
            raise ValueError(f"call {call_id!r}: turn {i} needs string 'channel' and 'text'")
        turns.append(Turn(channel_id=t["channel"], text=t["text"]))
    return RawCall(call_id=call_id, turns=tuple(turns))


def _check_channels(call: RawCall, role_map: Mapping[str, Role]) -> None:
    channels = {t.channel_id for t in call.turns}
    if len(channels) > 2:
        raise ChannelError(f"call {call.call_id!r}: {len(channels)} distinct channels, expected at most 2")
    unmapped = sorted(c for c in channels if c not in role_map)
    if unmapped:
        raise ChannelError(f"call {call.call_id!r}: unmapped channel id(s) {unmapped}")


def separate_channels(call: RawCall, role_map: Mapping[str, Role]) -> tuple[ChannelTranscript, ChannelTranscript]:
    """Split a call into (customer, agent) transcripts by channel identifier.

    Turn order is preserved within each role and no text is lost: the
    two transcripts together contain exactly the tokens of the call.
    Either transcript may be empty when one party never speaks.
    """
    _check_channels(call, role_map)
    parts: dict[Role, list[str]] = {Role.CUSTOMER: [], Role.AGENT: []}
    for turn in call.turns:
        parts[role_map[turn.channel_id]].append(turn.text)
    customer = ChannelTranscript(call.call_id, Role.CUSTOMER, " ".join(parts[Role.CUSTOMER]))
    agent = ChannelTranscript(call.call_id, Role.AGENT, " ".join(parts[Role.AGENT]))
    return customer, agent
