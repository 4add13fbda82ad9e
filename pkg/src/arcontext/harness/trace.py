"""Adaptation-log CSV format.

Header: ``timestamp_ms,participant,context,app,dimension,value``. One row per
logged adaptation. Values are encoded per dimension:

- ``visibility``: ``Visible`` | ``Minimized``
- ``frame_of_reference``: ``HeadFixed`` | ``BodyFixed`` | ``WorldFixed``
- ``position_sector``: one of the head/body sector names (``TopLeft`` ... ``FarRight``)
- ``scale``: decimal in [0.25, 1.5]
- ``opacity``: decimal in [0.15, 1.0]

Lines starting with ``#`` are provenance comments and are skipped on read.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from arcontext.errors import SchemaError, ValueOutOfDomain
from arcontext.rules import STUDY_DIMENSIONS
from arcontext.study import APPS, CONTEXTS
from arcontext.values import Domain, Value

HEADER = ("timestamp_ms", "participant", "context", "app", "dimension", "value")


@dataclass(frozen=True, order=True)
class TraceEvent:
    timestamp: int
    participant: str
    context: str
    app: str
    dimension: str
    value: Value


def format_value(value: Value) -> str:
    if isinstance(value, float):
        return repr(round(value, 6))
    return str(value)


def parse_rows(lines: Iterable[str], dimensions: Mapping[str, Domain] = STUDY_DIMENSIONS,
               contexts: Iterable[str] = tuple(CONTEXTS), apps: Iterable[str] = APPS) -> list[TraceEvent]:
    contexts, apps = set(contexts), set(apps)
    reader = csv.reader(line for line in lines if not line.lstrip().startswith("#"))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("missing header", row=0) from None
    header = [h.strip() for h in header]
    if tuple(header) != HEADER:
        raise SchemaError(f"expected header {','.join(HEADER)}, got {','.join(header)}", row=0)
    events = []
    for n, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(HEADER):
            raise SchemaError(f"expected {len(HEADER)} fields, got {len(row)}", row=n)
        ts, participant, ctx, app, dim, raw = (c.strip() for c in row)
        try:
            timestamp = int(ts)
        except ValueError:
            raise SchemaError(f"timestamp {ts!r} is not an integer", n, "timestamp_ms") from None
        if timestamp < 0:
            raise SchemaError("timestamp must be non-negative", n, "timestamp_ms")
        if not participant:
            raise SchemaError("empty participant id", n, "participant")
        if ctx not in contexts:
            raise SchemaError(f"unknown context {ctx!r}", n, "context")
        if app not in apps:
            raise SchemaError(f"unknown app {app!r}", n, "app")
        if dim not in dimensions:
            raise SchemaError(f"unknown dimension {dim!r}", n, "dimension")
        try:
            value = dimensions[dim].coerce(raw)
        except ValueOutOfDomain as exc:
            raise SchemaError(f"{dim} value {raw!r} outside {dimensions[dim].describe()}", n, "value") from exc
        events.append((timestamp, n, TraceEvent(timestamp, participant, ctx, app, dim, value)))
    events.sort(key=lambda e: (e[0], e[1]))
    return [e for _, _, e in events]


def ingest_trace(source, **kwargs) -> list[TraceEvent]:
    """Read and validate a trace file (path or text stream); events come back timestamp-sorted."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return parse_rows(fh, **kwargs)
    return parse_rows(source, **kwargs)


def serialize_trace(events: Iterable[TraceEvent], comments: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for e in events:
        writer.writerow((e.timestamp, e.participant, e.context, e.app, e.dimension, format_value(e.value)))
    return buf.getvalue()


def write_trace(events: Iterable[TraceEvent], path, comments: Iterable[str] = ()) -> None:
    Path(path).write_text(serialize_trace(events, comments), encoding="utf-8")
