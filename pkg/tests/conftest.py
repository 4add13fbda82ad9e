import pytest

from arcontext.context import load_registry
from arcontext.harness import ingest_trace, synth_trace
from arcontext.rules import load_rulepack
from arcontext.study import data_path

# criterion number -> (title, passed)
ACCEPTANCE: dict[int, list] = {}


def record(n: int, title: str, passed: bool) -> None:
    entry = ACCEPTANCE.setdefault(n, [title, True])
    entry[1] = entry[1] and passed


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    n, title = marker.args
    record(n, title, call.excinfo is None)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion check")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {n}. {title}")


@pytest.fixture(scope="session")
def study_registry():
    return load_registry(data_path("study_registry_v1.json"))[0]


@pytest.fixture(scope="session")
def study_pack(study_registry):
    return load_rulepack(data_path("study_library_v1.json"), study_registry)


@pytest.fixture(scope="session")
def weather_registry():
    return load_registry(data_path("social_weather_registry_v1.json"))[0]


@pytest.fixture(scope="session")
def weather_pack(weather_registry):
    return load_rulepack(data_path("social_weather_rules_v1.json"), weather_registry)


@pytest.fixture(scope="session")
def seed1_trace():
    return synth_trace(1)


@pytest.fixture(scope="session")
def bundled_trace():
    return ingest_trace(data_path("synthetic_seed1.csv"))
