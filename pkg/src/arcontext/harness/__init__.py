"""Study replay harness: trace I/O, synthetic fixtures, descriptive analysis, replay."""

from arcontext.harness.analysis import analyze, final_choices, roles_for
from arcontext.harness.replay import ReplayConfig, ReplayReport, replay
from arcontext.harness.synth import Marginals, synth_trace
from arcontext.harness.trace import TraceEvent, ingest_trace, parse_rows, serialize_trace, write_trace

__all__ = [
    "Marginals",
    "ReplayConfig",
    "ReplayReport",
    "TraceEvent",
    "analyze",
    "final_choices",
    "ingest_trace",
    "parse_rows",
    "replay",
    "roles_for",
    "serialize_trace",
    "synth_trace",
    "write_trace",
]
