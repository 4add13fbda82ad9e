"""Final-design reconstruction and descriptive statistics over adaptation logs."""

from __future__ import annotations

import math
import statistics
from collections import Counter, defaultdict
from typing import Iterable, Mapping

from arcontext.context import Context
from arcontext.rules import STUDY_DIMENSIONS, derive_app_roles
from arcontext.study import STUDY, StudyScenario
from arcontext.harness.trace import TraceEvent
from arcontext.values import Domain

ChoiceKey = tuple[str, str, str]  # (participant, context, app)


def roles_for(label: str, scenario: StudyScenario = STUDY) -> dict[str, str]:
    """app -> role in the given study context."""
    ctx = Context(0, 0, scenario.assignments(label))
    return {cid.rsplit(".", 1)[1]: role for cid, role in derive_app_roles(ctx)}


def final_choices(events: Iterable[TraceEvent], scenario: StudyScenario = STUDY) -> dict[ChoiceKey, dict]:
    """Last write wins inside a context; untouched apps carry their previous design forward.

    Every participant seen in the log gets an entry for every (context, app),
    starting from the scenario's default design.
    """
    writes: dict[str, dict[str, list[TraceEvent]]] = defaultdict(lambda: defaultdict(list))
    for e in sorted(events, key=lambda e: e.timestamp):
        writes[e.participant][e.context].append(e)
    out: dict[ChoiceKey, dict] = {}
    for p in sorted(writes):
        state = scenario.default_state()
        for ctx in scenario.contexts:
            for e in writes[p].get(ctx, ()):
                state.setdefault(e.app, dict(scenario.default_design))[e.dimension] = e.value
            for app in scenario.apps:
                out[(p, ctx, app)] = dict(state[app])
    return out


def _rate(num: int, den: int) -> float:
    return num / den if den else 0.0


def _stats(xs: list[float]) -> dict:
    if not xs:
        return {"n": 0, "mean": None, "sd": None}
    return {
        "n": len(xs),
        "mean": round(statistics.fmean(xs), 6),
        "sd": round(statistics.stdev(xs), 6) if len(xs) > 1 else 0.0,
    }


def analyze(events: Iterable[TraceEvent], scenario: StudyScenario = STUDY,
            dimensions: Mapping[str, Domain] = STUDY_DIMENSIONS) -> dict:
    """Descriptive rates over the final design choices; every rate lies in [0, 1]."""
    events = list(events)
    choices = final_choices(events, scenario)
    roles = {c: roles_for(c, scenario) for c in scenario.contexts}
    n = len(choices)
    visible = {k: v for k, v in choices.items() if v["visibility"] == "Visible"}

    per_context = {}
    for ctx in scenario.contexts:
        keys = [k for k in choices if k[1] == ctx]
        per_context[ctx] = _rate(sum(1 for k in keys if k in visible), len(keys))

    for_counts = Counter(v["frame_of_reference"] for v in visible.values())
    for_shares = {f: _rate(for_counts.get(f, 0), len(visible)) for f in ("BodyFixed", "HeadFixed", "WorldFixed")}

    by_for: dict[str, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    by_sector: dict[str, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    by_role: dict[str, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for (p, ctx, app), d in sorted(visible.items()):
        fr = d["frame_of_reference"]
        for dim in ("scale", "opacity"):
            by_for[fr][dim].append(d[dim])
            by_sector[f"{fr}/{d['position_sector']}"][dim].append(d[dim])
            by_role[f"{fr}/{roles[ctx][app]}"][dim].append(d[dim])

    def table(groups):
        return {g: {dim: _stats(groups[g][dim]) for dim in ("scale", "opacity")} for g in sorted(groups)}

    role_vis: dict[str, Counter] = defaultdict(Counter)
    role_for: dict[str, Counter] = defaultdict(Counter)
    for (p, ctx, app), d in choices.items():
        role = roles[ctx][app]
        role_vis[role][d["visibility"]] += 1
        if d["visibility"] == "Visible":
            role_for[role][d["frame_of_reference"]] += 1

    vis_values = list(visible.values())
    body = [d for d in vis_values if d["frame_of_reference"] == "BodyFixed"]
    head = [d for d in vis_values if d["frame_of_reference"] == "HeadFixed"]
    irrelevant_total = sum(role_vis["Irrelevant"].values())
    thresholds = {
        "opacity_ge_0.9_visible": _rate(sum(d["opacity"] >= 0.9 for d in vis_values), len(vis_values)),
        "opacity_ge_0.8_body": _rate(sum(d["opacity"] >= 0.8 for d in body), len(body)),
        "scale_ge_1_body": _rate(sum(d["scale"] >= 1.0 for d in body), len(body)),
        "scale_le_0.5_head": _rate(sum(d["scale"] <= 0.5 for d in head), len(head)),
        "minimized_irrelevant": _rate(role_vis["Irrelevant"]["Minimized"], irrelevant_total),
    }

    violations = Counter()
    for e in events:
        dom = dimensions.get(e.dimension)
        if dom is None or not dom.contains(e.value):
            violations[e.dimension] += 1
    for d in choices.values():
        for dim, value in d.items():
            if dim in dimensions and not dimensions[dim].contains(value):
                violations[f"final.{dim}"] += 1

    scales = [d["scale"] for d in vis_values]
    opacities = [d["opacity"] for d in vis_values]
    return {
        "choices": n,
        "participants": len({k[0] for k in choices}),
        "events": len(events),
        "visible_rate": _rate(len(visible), n),
        "visible_rate_by_context": per_context,
        "for_shares": for_shares,
        "for_counts": dict(sorted(for_counts.items())),
        "scale_opacity_by_for": table(by_for),
        "scale_opacity_by_sector": table(by_sector),
        "scale_opacity_by_role": table(by_role),
        "role_visibility": {r: dict(sorted(c.items())) for r, c in sorted(role_vis.items())},
        "role_for": {r: dict(sorted(c.items())) for r, c in sorted(role_for.items())},
        "thresholds": thresholds,
        "ranges": {
            "scale": [min(scales), max(scales)] if scales else None,
            "opacity": [min(opacities), max(opacities)] if opacities else None,
        },
        "domain_violations": dict(sorted(violations.items())),
    }


def rates_valid(report: Mapping) -> bool:
    """All rate fields lie in [0, 1]."""
    vals = [report["visible_rate"], *report["visible_rate_by_context"].values(),
            *report["for_shares"].values(), *report["thresholds"].values()]
    return all(math.isfinite(v) and 0.0 <= v <= 1.0 for v in vals)
