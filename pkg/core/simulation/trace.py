"""Trace events and the trace file format.

A trace file holds one event per line: the hex encoding of
kind, virtual time, source, destination, note and the canonical encoding
of the payload (a protocol message, a Transition or a CommitRecord).
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Any

from core.consensus.codec import decode, encode
from core.consensus.wire import Reader, Writer
from core.domain.errors import MalformedMessage, TraceFormatError


class EventKind(IntEnum):
    SEND = 1
    DELIVER = 2
    DROP = 3
    TIMER_FIRE = 4
    STATE_TRANSITION = 5
    CLIENT_COMMIT = 6


@dataclass(frozen=True, slots=True)
class TraceEvent:
    time: float
    kind: EventKind
    src: str
    dst: str = ""
    payload: Any = None
    note: str = ""


def encode_event(event: TraceEvent) -> bytes:
    w = Writer().u8(int(event.kind)).f64(event.time)
    w.text(event.src).text(event.dst).text(event.note)
    if event.payload is None:
        w.u8(0)
    else:
        w.u8(1).blob(encode(event.payload))
    return w.getvalue()


def decode_event(data: bytes) -> TraceEvent:
    try:
        r = Reader(data)
        kind = EventKind(r.u8())
        time = r.f64()
        src, dst, note = r.text(), r.text(), r.text()
        flag = r.u8()
        if flag not in (0, 1):
            raise MalformedMessage(f"invalid payload flag {flag}")
        payload = decode(r.blob()) if flag else None
        r.finish()
    except (MalformedMessage, ValueError) as exc:
        raise TraceFormatError(f"undecodable trace event: {exc}") from exc
    return TraceEvent(time=time, kind=kind, src=src, dst=dst, payload=payload, note=note)


def format_lines(events: Iterable[TraceEvent]) -> Iterator[str]:
    for event in events:
        yield encode_event(event).hex()


def write_trace(path: Path, events: Iterable[TraceEvent]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="ascii", newline="\n") as handle:
        for line in format_lines(events):
            handle.write(line)
            handle.write("\n")
    return path


def parse_lines(lines: Iterable[str]) -> list[TraceEvent]:
    events: list[TraceEvent] = []
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            data = bytes.fromhex(line)
        except ValueError as exc:
            raise TraceFormatError(f"line {number}: not hex ({exc})") from exc
        try:
            events.append(decode_event(data))
        except TraceFormatError as exc:
            raise TraceFormatError(f"line {number}: {exc}") from exc
    return events


def read_trace(path: Path) -> list[TraceEvent]:
    """Load a trace file.

    Raises:
        FileNotFoundError: missing file.
        TraceFormatError: a line is not a valid event.
    """
    with path.open("r", encoding="ascii", errors="replace") as handle:
        return parse_lines(handle)
