"""Replay adaptation logs through the engine and score agreement with the users' final designs."""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from arcontext.adapt import DEFAULT_WEIGHTS, EXACT_LIMIT, InterfaceState
from arcontext.context import ContextStore, Registry, load_registry
from arcontext.engine import Engine
from arcontext.harness.analysis import analyze, final_choices
from arcontext.harness.trace import TraceEvent
from arcontext.learner import FeedbackEvent, PersonalModel
from arcontext.rules import Adaptation, RuleBase
from arcontext.study import StudyScenario, data_path
from arcontext.values import value_key, value_to_json


@dataclass(frozen=True)
class ReplayConfig:
    agreement_tolerance: float = 0.1
    learn: bool = True
    weights: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    exact_limit: int = EXACT_LIMIT
    include_decisions: bool = False
    # "state": every displayed value counts as an automatic adaptation; "plan": only the plan's writes
    automatic: str = "state"

    def __post_init__(self):
        if self.automatic not in ("state", "plan"):
            raise ValueError("automatic must be 'state' or 'plan'")


def agree(a, b, tolerance: float) -> bool:
    if isinstance(a, float) and isinstance(b, float):
        return abs(a - b) <= tolerance + 1e-9
    return value_key(a) == value_key(b)


@dataclass
class ReplayReport:
    agreement: float
    agreement_by_dimension: dict
    agreement_by_context: dict
    cells: dict
    churn: int
    churn_by_context: dict
    feedback_events: int
    descriptive: dict
    decisions: list = field(default_factory=list)

    def engine_values(self, context: str, app: str, dimension: str) -> dict:
        return self.cells[context][app][dimension]["engine"]

    def to_json(self) -> dict:
        out = {
            "agreement": round(self.agreement, 6),
            "agreement_by_dimension": {k: round(v, 6) for k, v in self.agreement_by_dimension.items()},
            "agreement_by_context": {k: round(v, 6) for k, v in self.agreement_by_context.items()},
            "cells": self.cells,
            "churn": self.churn,
            "churn_by_context": self.churn_by_context,
            "feedback_events": self.feedback_events,
            "descriptive": self.descriptive,
        }
        if self.decisions:
            out["decisions"] = self.decisions
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"


def _summary(values: list) -> dict:
    if values and all(isinstance(v, float) for v in values):
        return {"mean": round(sum(values) / len(values), 6)}
    return dict(sorted(Counter(str(value_to_json(v)) for v in values).items()))


def replay(scenario: StudyScenario, rulebase: RuleBase, model: PersonalModel | None,
           events: Iterable[TraceEvent], config: ReplayConfig = ReplayConfig(),
           registry: Registry | None = None) -> tuple[ReplayReport, PersonalModel | None]:
    """Run every participant through C1..C8 in order.

    The engine state starts at the default design and evolves only through the
    engine's own plans. After each context the learner (if any) receives the
    displayed design (or just the plan, per ``config.automatic``) as automatic
    adaptations and, as manual ones, every value where the user's final design
    differs from the engine's. ``model`` is copied; the trained copy is
    returned alongside the report.
    """
    events = list(events)
    if registry is None:
        registry, _ = load_registry(data_path("study_registry_v1.json"))
    model = model.copy() if model is not None else None
    engine = Engine(rulebase, registry, model, config.weights, exact_limit=config.exact_limit)
    choices = final_choices(events, scenario)
    participants = sorted({k[0] for k in choices})
    dims = [d for d in rulebase.dimensions if d in scenario.default_design]

    hits: Counter = Counter()
    totals: Counter = Counter()
    engine_vals: dict = defaultdict(list)
    trace_vals: dict = defaultdict(list)
    cell_hits: Counter = Counter()
    churn_by_context: Counter = Counter()
    decisions = []
    feedback = 0
    span = 600_000

    for pi, p in enumerate(participants):
        engine.store = ContextStore(registry)
        state = InterfaceState(scenario.default_state())
        for ci, label in enumerate(scenario.contexts):
            ts = (pi * len(scenario.contexts) + ci) * span
            context = engine.observe_context(scenario.assignments(label), ts)
            result = engine.step(context, state)
            state = result.state
            churn_by_context[label] += result.churn
            manual = []
            for app in scenario.apps:
                user = choices[(p, label, app)]
                for dim in dims:
                    mine, theirs = state.get(app, dim), user[dim]
                    ok = agree(mine, theirs, config.agreement_tolerance)
                    for key in ("all", f"dim:{dim}", f"ctx:{label}"):
                        totals[key] += 1
                        hits[key] += ok
                    cell = (label, app, dim)
                    engine_vals[cell].append(mine)
                    trace_vals[cell].append(theirs)
                    cell_hits[cell] += ok
                    if not ok:
                        manual.append(Adaptation(dim, theirs, (app,)))
                    if config.include_decisions:
                        decisions.append({
                            "participant": p, "context": label, "app": app, "dimension": dim,
                            "engine": value_to_json(mine), "trace": value_to_json(theirs), "agree": ok,
                        })
            if model is not None and config.learn:
                if config.automatic == "plan":
                    shown = result.plan.adaptations()
                else:
                    shown = [Adaptation(d, state.get(a, d), (a,)) for a in scenario.apps for d in dims]
                model.observe(FeedbackEvent(context, shown, manual, ts + span - 1))
                feedback += 1

    cells: dict = {}
    for (label, app, dim), vals in sorted(engine_vals.items()):
        n = len(vals)
        cells.setdefault(label, {}).setdefault(app, {})[dim] = {
            "n": n,
            "agreement": round(cell_hits[(label, app, dim)] / n, 6),
            "engine": _summary(vals),
            "trace": _summary(trace_vals[(label, app, dim)]),
        }

    def rate(key):
        return hits[key] / totals[key] if totals[key] else 0.0

    report = ReplayReport(
        agreement=rate("all"),
        agreement_by_dimension={d: rate(f"dim:{d}") for d in dims},
        agreement_by_context={c: rate(f"ctx:{c}") for c in scenario.contexts},
        cells=cells,
        churn=sum(churn_by_context.values()),
        churn_by_context={c: churn_by_context[c] for c in scenario.contexts},
        feedback_events=feedback,
        descriptive=_descriptive(events, scenario),
        decisions=decisions,
    )
    return report, model


def _descriptive(events: list[TraceEvent], scenario: StudyScenario) -> dict:
    full = analyze(events, scenario)
    keys = ("choices", "visible_rate", "visible_rate_by_context", "for_shares", "scale_opacity_by_for")
    return {k: full[k] for k in keys}
