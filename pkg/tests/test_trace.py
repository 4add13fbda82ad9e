import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcontext.errors import SchemaError
from arcontext.harness import TraceEvent, ingest_trace, serialize_trace, write_trace
from arcontext.study import APPS, CONTEXTS

HEAD = "timestamp_ms,participant,context,app,dimension,value\n"


def parse(text):
    return ingest_trace(io.StringIO(text))


def test_header_only():
    assert parse(HEAD) == []


def test_missing_header():
    with pytest.raises(SchemaError):
        parse("")


def test_comments_skipped():
    (e,) = parse("# synthetic\n" + HEAD + "5,P01,C1,Map,scale,0.5\n")
    assert e == TraceEvent(5, "P01", "C1", "Map", "scale", 0.5)


@pytest.mark.parametrize("row,column", [
    ("x,P01,C1,Map,scale,0.5", "timestamp_ms"),
    ("-1,P01,C1,Map,scale,0.5", "timestamp_ms"),
    ("1,,C1,Map,scale,0.5", "participant"),
    ("1,P01,C9,Map,scale,0.5", "context"),
    ("1,P01,C1,Clock,scale,0.5", "app"),
    ("1,P01,C1,Map,glow,0.5", "dimension"),
    ("1,P01,C1,Map,opacity,0.05", "value"),
    ("1,P01,C1,Map,scale,2.0", "value"),
    ("1,P01,C1,Map,visibility,Hidden", "value"),
])
def test_bad_rows(row, column):
    with pytest.raises(SchemaError) as err:
        parse(HEAD + "0,P01,C1,Map,scale,1.0\n" + row + "\n")
    assert err.value.row == 2 and err.value.column == column


def test_wrong_field_count():
    with pytest.raises(SchemaError) as err:
        parse(HEAD + "1,P01,C1,Map,scale\n")
    assert err.value.row == 1


def test_sorted_stably():
    events = parse(HEAD + "9,P01,C1,Map,scale,0.5\n3,P01,C1,Map,scale,0.6\n3,P01,C1,Map,opacity,0.7\n")
    assert [(e.timestamp, e.dimension) for e in events] == [(3, "scale"), (3, "opacity"), (9, "scale")]


def test_file_round_trip(tmp_path, bundled_trace):
    path = tmp_path / "t.csv"
    write_trace(bundled_trace, path, ["note"])
    assert ingest_trace(path) == bundled_trace


EVENT = st.builds(
    TraceEvent,
    st.integers(0, 10**9),
    st.sampled_from(["P01", "P02"]),
    st.sampled_from(list(CONTEXTS)),
    st.sampled_from(APPS),
    st.just("scale"),
    st.floats(0.25, 1.5).map(lambda v: round(v, 4)),
)


@given(st.lists(EVENT, max_size=30))
@settings(max_examples=100)
def test_round_trip_property(events):
    events = sorted(events, key=lambda e: e.timestamp)
    assert parse(serialize_trace(events)) == events
