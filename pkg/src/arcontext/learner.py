"""Personalized inference: per-dimension online estimators trained on accept/override feedback.

Each design dimension owns a table keyed by (context signature, target, value).
A cell holds an exponential moving average of rewards in [-1, 1] and a count;
its impact is the EMA shrunk toward zero by ``count / (count + k)``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from arcontext.context import Context, ScenarioSpec, matches
from arcontext.errors import ParseError, ValidationError
from arcontext.rules import (
    SOURCE_PERSONALIZED,
    SOURCE_UNIVERSAL,
    WILDCARD,
    Adaptation,
    Inference,
    RuleBase,
    inference_from_json,
)
from arcontext.study import STUDY_COMPONENTS
from arcontext.values import Domain, Value, value_from_key, value_key, value_to_json

Signature = tuple[tuple[str, Value], ...]


@dataclass(frozen=True)
class LearnerConfig:
    alpha: float = 0.2
    k: float = 1.0
    min_support: int = 3
    signature: tuple[str, ...] = STUDY_COMPONENTS
    signature_bins: Mapping[str, float] = field(default_factory=dict)
    # numeric adaptation values are snapped to these steps before keying
    value_steps: Mapping[str, float] = field(default_factory=lambda: {"scale": 0.05, "opacity": 0.05})
    paper_literal_feedback: bool = False

    def __post_init__(self):
        object.__setattr__(self, "signature", tuple(self.signature))
        object.__setattr__(self, "signature_bins", dict(self.signature_bins))
        object.__setattr__(self, "value_steps", dict(self.value_steps))
        if not 0 < self.alpha <= 1:
            raise ValidationError("alpha must lie in (0, 1]", "learner.alpha")
        if self.k < 0:
            raise ValidationError("k must be non-negative", "learner.k")
        if self.min_support < 1:
            raise ValidationError("min_support must be at least 1", "learner.min_support")
        for cid, width in self.signature_bins.items():
            if not width > 0:
                raise ValidationError("bin width must be positive", f"learner.signature_bins.{cid}")
        for dim, step in self.value_steps.items():
            if not step > 0:
                raise ValidationError("value step must be positive", f"learner.value_steps.{dim}")

    def __hash__(self):
        return hash((self.alpha, self.k, self.min_support, self.signature, self.paper_literal_feedback))

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "k": self.k,
            "min_support": self.min_support,
            "signature": list(self.signature),
            "signature_bins": dict(sorted(self.signature_bins.items())),
            "value_steps": dict(sorted(self.value_steps.items())),
            "paper_literal_feedback": self.paper_literal_feedback,
        }

    @classmethod
    def from_json(cls, doc: Mapping | None) -> "LearnerConfig":
        doc = dict(doc or {})
        if "signature" in doc:
            doc["signature"] = tuple(doc["signature"])
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ValidationError(str(exc), "learner") from None


def signature(context: Context, config: LearnerConfig = LearnerConfig()) -> Signature:
    """Project the context onto the configured components; numbers are binned."""
    out = []
    for cid in config.signature:
        if cid not in context:
            continue
        value = context.entries[cid]
        width = config.signature_bins.get(cid)
        if width and isinstance(value, (int, float)) and not isinstance(value, bool):
            value = math.floor(value / width) * width
        out.append((cid, value))
    return tuple(out)


@dataclass
class FeedbackEvent:
    context: Context
    automatic: Sequence[Adaptation]
    manual: Sequence[Adaptation] = ()
    timestamp: int = 0


def _per_target(adaptations: Iterable[Adaptation]) -> list[tuple[str, str, Value]]:
    return [(a.dimension, t, a.value) for a in adaptations for t in a.targets]


def _targets_meet(a: str, b: str) -> bool:
    return a == b or WILDCARD in (a, b)


class PersonalModel:
    """One estimator table per design dimension."""

    def __init__(self, config: LearnerConfig = LearnerConfig()):
        self.config = config
        # dimension -> {(signature, target, value_key): [ema, count]}
        self.estimators: dict[str, dict[tuple, list]] = {}

    def copy(self) -> "PersonalModel":
        return copy.deepcopy(self)

    def __eq__(self, other):
        if not isinstance(other, PersonalModel):
            return NotImplemented
        return self.config == other.config and self.estimators == other.estimators

    def snap(self, dimension: str, value: Value) -> Value:
        step = self.config.value_steps.get(dimension)
        if step and isinstance(value, float):
            return round(round(value / step) * step, 6)
        return value

    def _update(self, sig: Signature, dimension: str, target: str, value: Value, reward: float) -> None:
        value = self.snap(dimension, value)
        table = self.estimators.setdefault(dimension, {})
        cell = table.setdefault((sig, target, value_key(value)), [0.0, 0])
        a = self.config.alpha
        cell[0] = min(1.0, max(-1.0, (1.0 - a) * cell[0] + a * reward))
        cell[1] += 1

    def rewards(self, event: FeedbackEvent) -> list[tuple[str, str, Value, float]]:
        """(dimension, target, value, reward) updates implied by one feedback event."""
        auto = [(d, t, self.snap(d, v)) for d, t, v in _per_target(event.automatic)]
        manual = [(d, t, self.snap(d, v)) for d, t, v in _per_target(event.manual)]
        updates = []
        for dim, target, value in auto:
            overridden = any(
                md == dim and _targets_meet(mt, target) and value_key(mv) != value_key(value)
                for md, mt, mv in manual
            )
            if self.config.paper_literal_feedback:
                reward = 1.0
            else:
                reward = -1.0 if overridden else 1.0
            updates.append((dim, target, value, reward))
        manual_reward = -1.0 if self.config.paper_literal_feedback else 1.0
        updates.extend((dim, target, value, manual_reward) for dim, target, value in manual)
        return sorted(updates, key=lambda u: (u[0], u[1], value_key(u[2]), u[3]))

    def observe(self, event: FeedbackEvent, dimensions: Mapping[str, Domain] | None = None) -> "PersonalModel":
        if dimensions is not None:
            for a in event.manual:
                if a.dimension not in dimensions:
                    raise ValidationError(f"unknown dimension {a.dimension!r}", "manual")
                dimensions[a.dimension].coerce(a.value, f"manual.{a.dimension}")
        sig = signature(event.context, self.config)
        for dim, target, value, reward in self.rewards(event):
            self._update(sig, dim, target, value, reward)
        return self

    def impact(self, ema: float, count: int) -> float:
        return ema * count / (count + self.config.k) if count else 0.0

    def infer(self, context: Context) -> list[Inference]:
        sig = signature(context, self.config)
        out = []
        for dim in sorted(self.estimators):
            for (s, target, vkey), (ema, count) in sorted(self.estimators[dim].items(), key=lambda kv: kv[0][1:]):
                if s != sig or count < self.config.min_support:
                    continue
                impact = min(1.0, max(-1.0, self.impact(ema, count)))
                out.append(Inference((Adaptation(dim, value_from_key(vkey), (target,)),), impact, SOURCE_PERSONALIZED))
        return out

    def lookup(self, context: Context, dimension: str, target: str, value: Value) -> tuple[float, int]:
        key = (signature(context, self.config), target, value_key(self.snap(dimension, value)))
        cell = self.estimators.get(dimension, {}).get(key)
        return (cell[0], cell[1]) if cell else (0.0, 0)

    # -- checkpoints ----------------------------------------------------------

    def to_json(self) -> dict:
        estimators = {}
        for dim in sorted(self.estimators):
            rows = []
            for (sig, target, vkey), (ema, count) in sorted(
                self.estimators[dim].items(), key=lambda kv: (json.dumps(_sig_json(kv[0][0])), kv[0][1], kv[0][2])
            ):
                rows.append({
                    "signature": _sig_json(sig),
                    "target": target,
                    "value": value_to_json(value_from_key(vkey)),
                    "ema": ema,
                    "count": count,
                })
            estimators[dim] = rows
        return {"model_version": 1, "config": self.config.to_json(), "estimators": estimators}

    @classmethod
    def from_json(cls, doc: Mapping) -> "PersonalModel":
        if doc.get("model_version") != 1:
            raise ParseError("expected model_version 1", "model_version")
        model = cls(LearnerConfig.from_json(doc.get("config")))
        for dim, rows in doc.get("estimators", {}).items():
            table = model.estimators.setdefault(dim, {})
            for i, row in enumerate(rows):
                try:
                    sig = tuple((cid, tuple(v) if isinstance(v, list) else v) for cid, v in row["signature"])
                    value = tuple(row["value"]) if isinstance(row["value"], list) else row["value"]
                    ema, count = float(row["ema"]), int(row["count"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise ParseError(f"bad estimator row: {exc}", f"estimators.{dim}[{i}]") from None
                if not -1.0 <= ema <= 1.0 or count < 0:
                    raise ParseError("ema must lie in [-1, 1] and count be non-negative", f"estimators.{dim}[{i}]")
                table[(sig, row["target"], value_key(value))] = [ema, count]
        return model

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "PersonalModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _sig_json(sig: Signature) -> list:
    return [[cid, value_to_json(v)] for cid, v in sig]


def observe(model: PersonalModel, event: FeedbackEvent, config: LearnerConfig | None = None) -> PersonalModel:
    if config is not None and config != model.config:
        model.config = config
    return model.observe(event)


def infer_personal(model: PersonalModel, context: Context, config: LearnerConfig | None = None) -> list[Inference]:
    if config is not None and config != model.config:
        model = model.copy()
        model.config = config
    return model.infer(context)


# -- universal inferences -----------------------------------------------------
# No batch training ships; a precomputed table can be loaded and matched.


@dataclass(frozen=True)
class UniversalEntry:
    scenario: ScenarioSpec
    inferences: tuple[Inference, ...]


def load_universal_table(doc: Mapping, rulebase: RuleBase | None = None) -> list[UniversalEntry]:
    """``{"universal_version": 1, "entries": [{"scenario": ..., "inferences": [...]}]}``"""
    if doc.get("universal_version") != 1:
        raise ParseError("expected universal_version 1", "universal_version")
    rulebase = rulebase or RuleBase()
    out = []
    for i, entry in enumerate(doc.get("entries", [])):
        path = f"entries[{i}]"
        scenario = ScenarioSpec.from_json(entry["scenario"], f"{path}.scenario", default_id=f"universal_{i}")
        infs = tuple(
            inference_from_json(inf, rulebase, SOURCE_UNIVERSAL, f"{path}.inferences[{j}]")
            for j, inf in enumerate(entry.get("inferences", []))
        )
        out.append(UniversalEntry(scenario, infs))
    return out


def infer_universal(table: Iterable[UniversalEntry], context: Context) -> list[Inference]:
    return [inf for entry in table if matches(entry.scenario, context) for inf in entry.inferences]
