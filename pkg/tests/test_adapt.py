import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcontext.adapt import (
    AdaptationPlan,
    ConsolidatedInference,
    InterfaceState,
    adaptation_cycle,
    apply_plan,
    churn,
    conflicts,
    consolidate,
    optimize,
)
from arcontext.errors import UnknownEntity
from arcontext.rules import Adaptation, Inference


def bundle(impact, *adaptations):
    return ConsolidatedInference(tuple(Adaptation(d, v, tuple(t)) for d, v, t in adaptations), impact)


def brute_force(cands):
    """Best total over every conflict-free subset (the empty set scores 0)."""
    best = 0.0
    for r in range(1, len(cands) + 1):
        for subset in itertools.combinations(cands, r):
            if all(not conflicts(a, b) for a, b in itertools.combinations(subset, 2)):
                best = max(best, math.fsum(c.impact for c in subset))
    return best


def random_instance(rng, n):
    """n bundles over a handful of (dimension, target) slots so conflicts are common."""
    cands = []
    for _ in range(n):
        k = rng.randint(1, 2)
        slots = rng.sample([("opacity", "A"), ("opacity", "B"), ("scale", "A"), ("scale", "C"), ("visibility", "B")], k)
        ads = [(d, rng.choice([0.25, 0.5, 1.0]) if d != "visibility" else rng.choice(["Visible", "Minimized"]), [t])
               for d, t in slots]
        cands.append(bundle(round(rng.uniform(-1, 1), 3), *ads))
    return cands


def weather(joint=0.7, opaque=-0.2, transparent=0.1):
    return [
        bundle(joint, ("opacity", 1.0, ["WeatherApp"]), ("position_offset", (0.0, 0.25, 0.0), ["WeatherApp"])),
        bundle(opaque, ("opacity", 1.0, ["WeatherApp"])),
        bundle(transparent, ("opacity", 0.0, ["WeatherApp", "Notes", "Clock"])),
    ]


class TestConsolidate:
    def test_singleton(self):
        (c,) = consolidate([Inference((Adaptation("opacity", 1.0, ("A",)),), 0.3)])
        assert c.impact == 0.3

    def test_mean(self):
        a = Adaptation("opacity", 1.0, ("A",))
        (c,) = consolidate([Inference((a,), 0.8), Inference((a,), -0.4, "personalized")])
        assert c.impact == pytest.approx(0.2)
        assert [p.source for p in c.provenance] == ["personalized", "rule"]

    def test_weights(self):
        a = Adaptation("opacity", 1.0, ("A",))
        (c,) = consolidate([Inference((a,), 0.8), Inference((a,), -0.4, "universal")])
        assert c.impact == pytest.approx((0.8 - 0.2) / 1.5)

    def test_zero_weight_dropped(self):
        a = Adaptation("opacity", 1.0, ("A",))
        assert consolidate([Inference((a,), 0.8, "universal")], {"universal": 0.0}) == []

    def test_joint_and_single_stay_apart(self, weather_pack):
        from arcontext.rules import infer_rules
        from arcontext.context import Context

        ctx = Context(1, 0, {"setting.social.in_conversation": True,
                             "sui.occlusion.interlocutor_face": "WeatherApp",
                             "sui.relation.conversation_topic": "Weather"})
        cands = consolidate(infer_rules(weather_pack, ctx))
        by_size = {len(c.adaptations): c for c in cands if "WeatherApp" in c.adaptations[0].targets}
        assert by_size[1].impact == pytest.approx(-0.2)
        assert by_size[2].impact == pytest.approx(0.7)

    @given(st.randoms(use_true_random=False))
    @settings(max_examples=50)
    def test_permutation_invariant(self, rnd):
        ads = [Adaptation("opacity", v, (t,)) for v in (0.5, 1.0) for t in ("A", "B")]
        infs = [Inference((rnd.choice(ads),), round(rnd.uniform(-1, 1), 6), rnd.choice(["rule", "personalized", "universal"]))
                for _ in range(12)]
        shuffled = infs[:]
        rnd.shuffle(shuffled)
        assert consolidate(infs) == consolidate(shuffled)


class TestConflicts:
    def test_examples(self):
        opaque = bundle(0.5, ("opacity", 1.0, ["WeatherApp"]))
        assert conflicts(opaque, bundle(0.1, ("opacity", 0.0, ["*"])))
        assert not conflicts(opaque, bundle(0.1, ("scale", 0.5, ["WeatherApp"])))
        assert not conflicts(opaque, opaque)


class TestOptimize:
    def test_weather(self):
        plan = optimize(weather())
        assert len(plan.selected) == 1 and len(plan.selected[0].adaptations) == 2
        assert plan.total_impact == pytest.approx(0.7)

    def test_weather_subsets_by_hand(self):
        cands = weather()
        assert brute_force(cands) == pytest.approx(0.7)

    def test_empty(self):
        assert optimize([]) == AdaptationPlan()

    def test_two_positives(self):
        plan = optimize([bundle(0.3, ("opacity", 1.0, ["A"])), bundle(0.2, ("scale", 0.5, ["A"]))])
        assert len(plan.selected) == 2 and plan.total_impact == pytest.approx(0.5)

    def test_negative_never_selected(self):
        assert optimize([bundle(-0.1, ("opacity", 1.0, ["A"]))]).selected == ()

    def test_exact_beats_greedy(self):
        # greedy would take 0.6 and block both 0.5s
        cands = [bundle(0.6, ("opacity", 1.0, ["A"]), ("scale", 1.0, ["B"])),
                 bundle(0.5, ("opacity", 0.5, ["A"])), bundle(0.5, ("scale", 0.5, ["B"]))]
        assert optimize(cands).total_impact == pytest.approx(1.0)
        assert optimize(cands, exact_limit=0).total_impact == pytest.approx(0.6)

    def test_greedy_flag(self):
        cands = [bundle(0.1, ("opacity", 1.0, [f"E{i}"])) for i in range(25)]
        plan = optimize(cands)
        assert not plan.exact and len(plan.selected) == 25

    @pytest.mark.parametrize("seed", range(30))
    def test_oracle(self, seed):
        rng = random.Random(seed)
        cands = random_instance(rng, rng.randint(0, 10))
        plan = optimize(cands)
        assert plan.total_impact == brute_force(cands)
        assert all(c.impact > 0 for c in plan.selected)
        assert all(not conflicts(a, b) for a, b in itertools.combinations(plan.selected, 2))

    def test_deterministic_tie_break(self):
        a = bundle(0.5, ("opacity", 1.0, ["A"]))
        b = bundle(0.5, ("opacity", 0.5, ["A"]))
        assert optimize([a, b]) == optimize([b, a])


class TestState:
    state = InterfaceState({"Map": {"visibility": "Visible", "opacity": 1.0}, "Stock": {"visibility": "Visible"}})

    def test_apply(self):
        plan = optimize([bundle(0.4, ("visibility", "Minimized", ["Map"]))])
        new = apply_plan(plan, self.state)
        assert new.get("Map", "visibility") == "Minimized" and new.get("Stock", "visibility") == "Visible"
        assert self.state.get("Map", "visibility") == "Visible"
        assert churn(self.state, new) == 1

    def test_empty_plan_identity(self):
        assert apply_plan(AdaptationPlan(), self.state) == self.state

    def test_unknown_entity(self):
        with pytest.raises(UnknownEntity):
            apply_plan(optimize([bundle(0.4, ("visibility", "Minimized", ["Clock"]))]), self.state)

    def test_wildcard(self):
        new = apply_plan(optimize([bundle(0.4, ("opacity", 0.5, ["*"]))]), self.state)
        assert new.get("Stock", "opacity") == 0.5 and new.get("Map", "opacity") == 0.5

    def test_cycle_expands_wildcards(self):
        infs = [Inference((Adaptation("opacity", 0.5, ("*",)),), 0.3),
                Inference((Adaptation("opacity", 1.0, ("Map",)),), 0.9)]
        cands, plan, new = adaptation_cycle(infs, self.state)
        assert plan.total_impact == pytest.approx(0.9)
        assert new.get("Map", "opacity") == 1.0
