"""Seeded synthetic adaptation logs shaped by the study marginals.

Final designs are allocated by quota so per-context visibility and the FoR
mix land on the configured rates; positions, scale and opacity are sampled
per app role. Events are written only where a final design differs from the
one carried over from the previous context.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from arcontext.harness.analysis import roles_for
from arcontext.harness.trace import TraceEvent
from arcontext.study import STUDY, StudyScenario, data_path

CONTEXT_SPAN_MS = 600_000
SEARCH_CONTEXTS = ("C1", "C2", "C3")


def _strip(doc):
    """Drop the {value, source} wrappers, keeping values."""
    if isinstance(doc, dict):
        if set(doc) == {"value", "source"}:
            return _strip(doc["value"])
        return {k: _strip(v) for k, v in doc.items() if k not in ("note", "name")}
    return doc


@dataclass(frozen=True)
class Marginals:
    values: Mapping
    name: str = "study_marginals_v1"

    @classmethod
    def load(cls, source=None) -> "Marginals":
        if source is None:
            source = data_path("study_marginals_v1.json")
        if isinstance(source, Mapping):
            doc = dict(source)
        else:
            with open(source, encoding="utf-8") as fh:
                doc = json.load(fh)
        return cls(_strip(doc), doc.get("name", Path(str(source)).stem))

    def __getitem__(self, key):
        return self.values[key]

    def override(self, **changes) -> "Marginals":
        return Marginals({**self.values, **changes}, self.name)


def body_sector(vertical: str, horizontal: str) -> str:
    if vertical == "Center":
        return {"Left": "LeftCenter", "Center": "Center", "Right": "RightCenter"}[horizontal]
    return vertical + horizontal


class _Gen:
    def __init__(self, seed: int, m: Marginals, scenario: StudyScenario):
        self.rng = np.random.default_rng(seed)
        self.m = m
        self.scenario = scenario
        self.participants = [f"P{i:02d}" for i in range(1, int(m["participants"]) + 1)]

    def pick(self, slots: list, k: int) -> set:
        k = max(0, min(k, len(slots)))
        if k == 0:
            return set()
        idx = self.rng.choice(len(slots), size=k, replace=False)
        return {slots[i] for i in sorted(idx)}

    def categorical(self, dist: Mapping[str, float]) -> str:
        labels = sorted(dist)
        p = np.array([dist[k] for k in labels], dtype=float)
        return labels[int(self.rng.choice(len(labels), p=p / p.sum()))]

    def opacity(self, mean_opacity: float) -> float:
        t = self.m["translucent_opacity"]
        p_opaque = min(1.0, max(0.0, (mean_opacity - t["mean"]) / (1.0 - t["mean"])))
        if self.rng.random() < p_opaque:
            return 1.0
        return round(float(np.clip(self.rng.normal(t["mean"], t["sd"]), 0.15, 0.99)), 2)

    def scale(self, params: Mapping[str, float], hi: float) -> float:
        return round(float(np.clip(self.rng.normal(params["mean"], params["sd"]), 0.25, hi)), 2)

    # -- allocation ----------------------------------------------------------

    def minimized(self) -> set:
        out = set()
        n_p = len(self.participants)
        for ctx in self.scenario.contexts:
            roles = roles_for(ctx, self.scenario)
            quota = round((1.0 - self.m["visible_rate"][ctx]) * n_p * len(self.scenario.apps))
            chosen: set = set()
            if ctx not in SEARCH_CONTEXTS and roles.get("Book1") == "Irrelevant":
                k = min(quota, round(self.m["book1_minimized_after_search"] * n_p))
                chosen |= self.pick([(p, ctx, "Book1") for p in self.participants], k)
            eligible = [
                (p, ctx, app)
                for app in self.scenario.apps
                for p in self.participants
                if roles[app] == "Irrelevant" and app not in ("Stock", "Book1") and (app != "Map" or ctx == "C8")
            ]
            chosen |= self.pick(eligible, quota - len(chosen))
            out |= chosen
        return out

    def frames(self, visible: list) -> dict:
        """(participant, context, app) -> FoR for every visible slot."""
        total_hf = round(self.m["head_fixed_share_of_visible"] * len(visible))
        stock = [s for s in visible if s[2] == "Stock"]
        search_book1 = [s for s in visible if s[2] == "Book1" and s[1] in SEARCH_CONTEXTS]
        head = self.pick(stock, round(self.m["stock_share_of_head_fixed"] * total_hf))
        head |= self.pick(search_book1, round(self.m["book1_head_fixed_during_search"] * len(search_book1)))
        # Stock and search-phase Book1 have their own quotas; Map and later Book1 stay body-fixed
        rest = [s for s in visible if s[2] not in ("Map", "Stock", "Book1")]
        head |= self.pick(rest, total_hf - len(head))
        body_only = lambda s: s[2] == "Map" or (s[2] == "Book1" and s[1] not in SEARCH_CONTEXTS)  # noqa: E731
        world_pool = [s for s in visible if s not in head and not body_only(s)]
        world = self.pick(world_pool, int(self.m["world_fixed_count"]))
        return {s: "HeadFixed" if s in head else "WorldFixed" if s in world else "BodyFixed" for s in visible}

    def design(self, fr: str, role: str) -> dict:
        m = self.m
        if fr == "HeadFixed":
            sector = self.categorical(m["head_sectors"][role])
            return {
                "frame_of_reference": fr,
                "position_sector": sector,
                "scale": self.scale(m["head_scale"][role], m["head_scale_max"]),
                "opacity": self.opacity(m["head_opacity"][role]),
            }
        u = self.rng.random()
        far_left = m["body_far_left"][role]
        if u < far_left:
            sector, band = "FarLeft", "Center"
        elif u < far_left + m["body_far_right"]:
            sector, band = "FarRight", "Center"
        else:
            band = self.categorical(m["body_vertical"][role])
            sector = body_sector(band, self.categorical(m["body_horizontal"]))
        return {
            "frame_of_reference": fr,
            "position_sector": sector,
            "scale": self.scale(m["body_scale"][role], 1.5),
            "opacity": self.opacity(m["body_opacity_by_band"][band]),
        }

    def final_designs(self) -> dict:
        minimized = self.minimized()
        slots = [(p, c, a) for p in self.participants for c in self.scenario.contexts for a in self.scenario.apps]
        visible = [s for s in slots if s not in minimized]
        frames = self.frames(visible)
        roles = {c: roles_for(c, self.scenario) for c in self.scenario.contexts}
        out = {}
        for s in slots:
            if s in minimized:
                out[s] = {"visibility": "Minimized"}
            else:
                out[s] = {"visibility": "Visible", **self.design(frames[s], roles[s[1]][s[2]])}
        return out

    # -- event emission ------------------------------------------------------

    def trial_value(self, dim: str, final):
        if dim == "scale":
            return round(float(np.clip(final + self.rng.choice([-0.2, 0.2]), 0.25, 1.5)), 2)
        if dim == "opacity":
            return round(float(np.clip(final - 0.2, 0.15, 1.0)), 2)
        return None

    def events(self) -> list[TraceEvent]:
        designs = self.final_designs()
        rate = self.m["intermediate_write_rate"]
        events = []
        for pi, p in enumerate(self.participants):
            state = self.scenario.default_state()
            for ci, ctx in enumerate(self.scenario.contexts):
                changes = []
                for app in self.scenario.apps:
                    for dim, value in designs[(p, ctx, app)].items():
                        if state[app].get(dim) != value:
                            trial = self.trial_value(dim, value) if self.rng.random() < rate else None
                            if trial is not None and trial != value:
                                changes.append((app, dim, trial))
                            changes.append((app, dim, value))
                            state[app][dim] = value
                base = (pi * len(self.scenario.contexts) + ci) * CONTEXT_SPAN_MS
                offsets = np.sort(self.rng.choice(np.arange(1_000, CONTEXT_SPAN_MS, 10), size=len(changes), replace=False))
                events.extend(
                    TraceEvent(base + int(t), p, ctx, app, dim, value)
                    for t, (app, dim, value) in zip(offsets, changes)
                )
        return events


def synth_trace(seed: int = 1, marginals: Marginals | Mapping | str | Path | None = None,
                scenario: StudyScenario = STUDY) -> list[TraceEvent]:
    if not isinstance(marginals, Marginals):
        marginals = Marginals.load(marginals)
    return _Gen(seed, marginals, scenario).events()


def provenance(seed: int, marginals: Marginals | None = None) -> list[str]:
    name = marginals.name if marginals is not None else "study_marginals_v1"
    return [
        "synthetic adaptation log (not participant data)",
        f"generator=arcontext.harness.synth seed={seed} marginals={name}",
    ]
