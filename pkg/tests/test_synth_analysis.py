import pytest

from arcontext.harness import TraceEvent, analyze, final_choices, serialize_trace, synth_trace
from arcontext.harness.analysis import rates_valid, roles_for
from arcontext.harness.synth import Marginals, body_sector
from arcontext.study import APPS, CONTEXTS, STUDY


def ev(ts, ctx, app, dim, value, p="P01"):
    return TraceEvent(ts, p, ctx, app, dim, value)


class TestFinalChoices:
    def test_last_write_wins(self):
        choices = final_choices([ev(1, "C1", "Map", "scale", 0.5), ev(2, "C1", "Map", "scale", 0.7)])
        assert choices[("P01", "C1", "Map")]["scale"] == 0.7

    def test_carry_over(self):
        choices = final_choices([ev(1, "C1", "Map", "scale", 0.5)])
        assert choices[("P01", "C8", "Map")]["scale"] == 0.5
        assert choices[("P01", "C8", "Stock")] == STUDY.default_design

    def test_minimized_keeps_other_dimensions(self):
        choices = final_choices([ev(1, "C1", "Map", "opacity", 0.4), ev(2, "C2", "Map", "visibility", "Minimized")])
        assert choices[("P01", "C2", "Map")]["opacity"] == 0.4
        assert choices[("P01", "C3", "Map")]["visibility"] == "Minimized"

    def test_covers_every_cell(self):
        assert len(final_choices([ev(1, "C4", "Stock", "scale", 0.5)])) == len(CONTEXTS) * len(APPS)


class TestAnalyze:
    def test_all_minimized(self):
        events = [ev(1, "C1", a, "visibility", "Minimized") for a in APPS]
        report = analyze(events)
        assert report["visible_rate"] == 0.0 and report["for_shares"]["BodyFixed"] == 0.0
        assert rates_valid(report)

    def test_untouched(self):
        report = analyze([ev(1, "C1", "Map", "scale", 1.0)])
        assert report["visible_rate"] == 1.0 and report["for_shares"]["BodyFixed"] == 1.0

    def test_empty(self):
        report = analyze([])
        assert report["choices"] == 0 and rates_valid(report)

    def test_bundled(self, bundled_trace):
        report = analyze(bundled_trace)
        assert report["choices"] == 800 and report["participants"] == 20
        assert report["domain_violations"] == {}


class TestSynth:
    def test_seed_determinism(self, seed1_trace):
        assert serialize_trace(synth_trace(1)) == serialize_trace(seed1_trace)
        assert synth_trace(2) != seed1_trace

    def test_bundled_fixture_matches_generator(self, seed1_trace, bundled_trace):
        assert bundled_trace == seed1_trace

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_body_fixed_share(self, seed):
        assert analyze(synth_trace(seed))["for_shares"]["BodyFixed"] == pytest.approx(0.90, abs=0.03)

    def test_full_visibility(self):
        m = Marginals.load().override(visible_rate={c: 1.0 for c in CONTEXTS})
        events = synth_trace(1, m)
        assert not any(e.value == "Minimized" for e in events)
        assert analyze(events)["visible_rate"] == 1.0

    def test_assistive_and_stock_never_minimized(self, seed1_trace):
        choices = final_choices(seed1_trace)
        for (p, ctx, app), d in choices.items():
            if app == "Stock" or roles_for(ctx)[app] != "Irrelevant":
                assert d["visibility"] == "Visible"

    def test_events_stay_inside_their_context(self, seed1_trace):
        order = list(CONTEXTS)
        for e in seed1_trace:
            slot, offset = divmod(e.timestamp, 600_000)
            assert order[slot % 8] == e.context and offset >= 1_000

    def test_provenance_comments(self):
        from arcontext.study import data_path
        with open(data_path("synthetic_seed1.csv")) as fh:
            assert fh.readline().startswith("# synthetic")


def test_body_sector_names():
    assert body_sector("Center", "Left") == "LeftCenter"
    assert body_sector("Top", "Right") == "TopRight"
    assert body_sector("Center", "Center") == "Center"
