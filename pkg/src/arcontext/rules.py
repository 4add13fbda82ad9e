"""Design principles and rule-based inference.

A rulepack is a versioned JSON document (``"rulepack_version": 1``)::

    {
      "rulepack_version": 1,
      "name": "...",
      "dimensions": {"opacity": {"kind": "number", "lo": 0.0, "hi": 1.0}},   # optional
      "principles": [
        {"id": "walking_body_fixed",
         "description": "...", "basis": "...",
         "scenario": {"constraints": [{"component": "user.state.mobility", "equals": "Mobile"}]},
         "inferences": [
           {"impact": 0.85,
            "adaptations": [{"dimension": "frame_of_reference", "value": "BodyFixed", "targets": ["*"]}]}
         ]}
      ]
    }

``dimensions`` entries are merged over :data:`STUDY_DIMENSIONS`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import jsonschema

from arcontext.context import Context, Equals, InSet, Registry, ScenarioSpec, matches
from arcontext.errors import (
    DuplicatePrincipleId,
    ImpactOutOfRange,
    MissingComponent,
    ParseError,
    UnknownComponent,
    UnknownDimension,
    ValidationError,
)
from arcontext.spatial import ALL_SECTOR_LABELS
from arcontext.study import APPS, CONFINEMENT, MOBILITY, OBJECTIVE, app_role_id
from arcontext.values import Domain, Value, value_key, value_to_json

WILDCARD = "*"

SOURCE_RULE = "rule"
SOURCE_PERSONALIZED = "personalized"
SOURCE_UNIVERSAL = "universal"
SOURCES = (SOURCE_RULE, SOURCE_PERSONALIZED, SOURCE_UNIVERSAL)

STUDY_DIMENSIONS: dict[str, Domain] = {
    "visibility": Domain("categorical", labels=("Visible", "Minimized")),
    "frame_of_reference": Domain("categorical", labels=("HeadFixed", "BodyFixed", "WorldFixed")),
    "position_sector": Domain("categorical", labels=ALL_SECTOR_LABELS),
    "scale": Domain("number", lo=0.25, hi=1.5),
    "opacity": Domain("number", lo=0.15, hi=1.0),
}


@dataclass(frozen=True)
class Adaptation:
    dimension: str
    value: Value
    targets: tuple[str, ...]

    def __post_init__(self):
        targets = tuple(self.targets)
        if not targets:
            raise ValidationError("adaptation needs at least one target", self.dimension)
        if WILDCARD in targets:
            targets = (WILDCARD,)
        object.__setattr__(self, "targets", tuple(sorted(set(targets))))

    @property
    def key(self) -> tuple[str, tuple[str, ...], str]:
        return self.dimension, self.targets, value_key(self.value)

    def overlaps(self, other: "Adaptation") -> bool:
        if self.dimension != other.dimension:
            return False
        if WILDCARD in self.targets or WILDCARD in other.targets:
            return True
        return not set(self.targets).isdisjoint(other.targets)

    def clashes(self, other: "Adaptation") -> bool:
        return self.overlaps(other) and value_key(self.value) != value_key(other.value)

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "value": value_to_json(self.value), "targets": list(self.targets)}


BundleKey = tuple


def bundle_key(adaptations: Iterable[Adaptation]) -> BundleKey:
    return tuple(sorted(a.key for a in adaptations))


@dataclass(frozen=True)
class Inference:
    adaptations: tuple[Adaptation, ...]
    impact: float
    source: str = SOURCE_RULE
    principle: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "adaptations", tuple(self.adaptations))
        if not self.adaptations:
            raise ValidationError("inference needs at least one adaptation")
        if not (math.isfinite(self.impact) and -1.0 <= self.impact <= 1.0):
            raise ImpactOutOfRange(f"impact {self.impact} outside [-1, 1]")
        if self.source not in SOURCES:
            raise ValidationError(f"unknown source {self.source!r}")
        for i, a in enumerate(self.adaptations):
            for b in self.adaptations[i + 1:]:
                if a.clashes(b):
                    raise ValidationError(f"bundle contradicts itself on {a.dimension}")

    @property
    def key(self) -> BundleKey:
        return bundle_key(self.adaptations)

    def to_json(self) -> dict:
        return {"impact": self.impact, "adaptations": [a.to_json() for a in self.adaptations]}


@dataclass(frozen=True)
class DesignPrinciple:
    id: str
    scenario: ScenarioSpec
    inferences: tuple[Inference, ...]
    description: str = ""
    basis: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inferences", tuple(self.inferences))
        if not self.inferences:
            raise ValidationError("principle needs at least one inference", self.id)
        for inf in self.inferences:
            if inf.source != SOURCE_RULE or inf.principle != self.id:
                raise ValidationError("inference source must reference its principle", self.id)

    def to_json(self) -> dict:
        out = {"id": self.id}
        if self.description:
            out["description"] = self.description
        if self.basis:
            out["basis"] = self.basis
        scenario = self.scenario.to_json()
        if scenario["id"] == self.id:
            del scenario["id"]
        out["scenario"] = scenario
        out["inferences"] = [inf.to_json() for inf in self.inferences]
        return out


@dataclass(frozen=True)
class RuleBase:
    principles: tuple[DesignPrinciple, ...] = ()
    dimensions: Mapping[str, Domain] = field(default_factory=lambda: dict(STUDY_DIMENSIONS))
    name: str = ""
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "principles", tuple(sorted(self.principles, key=lambda p: p.id)))
        object.__setattr__(self, "dimensions", dict(self.dimensions))

    def __hash__(self):
        return hash((self.name, self.principles))

    def principle(self, principle_id: str) -> DesignPrinciple:
        for p in self.principles:
            if p.id == principle_id:
                return p
        raise KeyError(principle_id)

    def check_adaptation(self, adaptation: Adaptation, path: str = "") -> Adaptation:
        domain = self.dimensions.get(adaptation.dimension)
        if domain is None:
            raise UnknownDimension(f"unknown dimension {adaptation.dimension!r}", path)
        value = domain.coerce(adaptation.value, path)
        if value is adaptation.value:
            return adaptation
        return Adaptation(adaptation.dimension, value, adaptation.targets)


# -- rulepack documents -------------------------------------------------------

_ADAPTATION_SCHEMA = {
    "type": "object",
    "required": ["dimension", "value", "targets"],
    "properties": {
        "dimension": {"type": "string"},
        "value": {},
        "targets": {"type": "array", "items": {"type": "string"}, "minItems": 1},
    },
    "additionalProperties": False,
}

RULEPACK_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["rulepack_version", "principles"],
    "properties": {
        "rulepack_version": {"const": 1},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "dimensions": {"type": "object"},
        "principles": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "scenario", "inferences"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "description": {"type": "string"},
                    "basis": {"type": "string"},
                    "scenario": {
                        "type": "object",
                        "required": ["constraints"],
                        "properties": {
                            "id": {"type": "string"},
                            "constraints": {"type": "array", "minItems": 1, "items": {"type": "object"}},
                        },
                    },
                    "inferences": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["impact", "adaptations"],
                            "properties": {
                                "impact": {"type": "number"},
                                "adaptations": {"type": "array", "minItems": 1, "items": _ADAPTATION_SCHEMA},
                            },
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


def _json_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def load_rulepack(document, registry: Registry | None = None) -> RuleBase:
    """Parse and fully validate a rulepack (dict, JSON text or path).

    With a ``registry`` the scenario components are checked as well.
    """
    if isinstance(document, Path) or (isinstance(document, str) and not document.lstrip().startswith("{")):
        with open(document, encoding="utf-8") as fh:
            text = fh.read()
        document = text
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    try:
        jsonschema.validate(document, RULEPACK_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ParseError(exc.message, _json_path(exc.absolute_path)) from None

    dimensions = dict(STUDY_DIMENSIONS)
    for name, dom in document.get("dimensions", {}).items():
        dimensions[name] = Domain.from_json(dom, f"dimensions.{name}")
    shell = RuleBase((), dimensions)

    seen: set[str] = set()
    principles = []
    for i, p in enumerate(document["principles"]):
        ppath = f"principles[{i}]"
        if p["id"] in seen:
            raise DuplicatePrincipleId(f"duplicate principle id {p['id']!r}", f"{ppath}.id")
        seen.add(p["id"])
        scenario = ScenarioSpec.from_json(p["scenario"], f"{ppath}.scenario", default_id=p["id"])
        if registry is not None:
            try:
                scenario.validate(registry)
            except UnknownComponent as exc:
                raise UnknownComponent(f"unknown component {exc.path!r}", f"{ppath}.scenario") from None
        inferences = []
        for j, inf in enumerate(p["inferences"]):
            ipath = f"{ppath}.inferences[{j}]"
            impact = float(inf["impact"])
            if not (math.isfinite(impact) and -1.0 <= impact <= 1.0):
                raise ImpactOutOfRange(f"impact {inf['impact']} outside [-1, 1]", f"{ipath}.impact")
            adaptations = []
            for k, a in enumerate(inf["adaptations"]):
                apath = f"{ipath}.adaptations[{k}]"
                raw = a["value"]
                raw = tuple(raw) if isinstance(raw, list) else raw
                adaptations.append(shell.check_adaptation(Adaptation(a["dimension"], raw, tuple(a["targets"])), apath))
            try:
                inferences.append(Inference(tuple(adaptations), impact, SOURCE_RULE, p["id"]))
            except ValidationError as exc:
                raise ValidationError(str(exc), ipath) from None
        principles.append(
            DesignPrinciple(p["id"], scenario, tuple(inferences), p.get("description", ""), p.get("basis", ""))
        )
    return RuleBase(tuple(principles), dimensions, document.get("name", ""), document.get("description", ""))


def dump_rulepack(rulebase: RuleBase) -> dict:
    out: dict = {"rulepack_version": 1}
    if rulebase.name:
        out["name"] = rulebase.name
    if rulebase.description:
        out["description"] = rulebase.description
    extra = {k: d.to_json() for k, d in sorted(rulebase.dimensions.items()) if STUDY_DIMENSIONS.get(k) != d}
    if extra:
        out["dimensions"] = extra
    out["principles"] = [p.to_json() for p in rulebase.principles]
    return out


# -- inference ---------------------------------------------------------------


def applicable(rulebase: RuleBase, context: Context) -> list[DesignPrinciple]:
    """Principles whose scenario matches, ordered by id."""
    return [p for p in rulebase.principles if matches(p.scenario, context)]


def infer_rules(rulebase: RuleBase, context: Context) -> list[Inference]:
    out: list[Inference] = []
    for p in applicable(rulebase, context):
        out.extend(p.inferences)
    return out


def expand_wildcards(inferences: Iterable[Inference], entities: Iterable[str]) -> list[Inference]:
    """Replace ``*`` targets with the current entity list."""
    entities = tuple(sorted(entities))
    out = []
    for inf in inferences:
        if not any(WILDCARD in a.targets for a in inf.adaptations):
            out.append(inf)
            continue
        adaptations = tuple(
            Adaptation(a.dimension, a.value, entities) if WILDCARD in a.targets else a for a in inf.adaptations
        )
        out.append(Inference(adaptations, inf.impact, inf.source, inf.principle))
    return out


# -- app roles ---------------------------------------------------------------


@dataclass(frozen=True)
class RoleRule:
    app: str
    role: str
    when: ScenarioSpec | None = None


def _when(rule_id: str, **constraints) -> ScenarioSpec:
    preds = []
    for key, val in constraints.items():
        cid = {"objective": OBJECTIVE, "mobility": MOBILITY, "confinement": CONFINEMENT}[key]
        preds.append((cid, InSet(tuple(val)) if isinstance(val, (list, tuple)) else Equals(val)))
    return ScenarioSpec(rule_id, tuple(preds))


# First matching row per app wins; a row without ``when`` is the default.
STUDY_ROLE_TABLE: tuple[RoleRule, ...] = (
    RoleRule("Stock", "Primary"),
    RoleRule("Messaging", "Assistive", _when("messaging_friend", objective="LocateFriend")),
    RoleRule("Messaging", "Irrelevant"),
    RoleRule("Book1", "Assistive", _when("book1_search", objective="LocateBook1")),
    RoleRule("Book1", "Irrelevant"),
    RoleRule("Book2", "Assistive", _when("book2_search", objective="LocateBook2")),
    RoleRule("Book2", "Irrelevant"),
    RoleRule(
        "Map",
        "Assistive",
        _when(
            "map_navigation",
            objective=("LocateBook1", "LocateBook2", "LocateFriend"),
            confinement="Unconfined",
            mobility="Mobile",
        ),
    ),
    RoleRule("Map", "Irrelevant"),
)


def derive_app_roles(context: Context, role_table: Iterable[RoleRule] = STUDY_ROLE_TABLE) -> list[tuple[str, str]]:
    """App-role upserts (``sui.app_role.<app>``, role) implied by the context."""
    for cid in (OBJECTIVE, CONFINEMENT, MOBILITY):
        if cid not in context:
            raise MissingComponent("required for app-role derivation", cid)
    roles: dict[str, str] = {}
    for row in role_table:
        if row.app in roles:
            continue
        if row.when is None or matches(row.when, context):
            roles[row.app] = row.role
    ordered = [a for a in APPS if a in roles] + sorted(a for a in roles if a not in APPS)
    return [(app_role_id(app), roles[app]) for app in ordered]


def inference_from_json(doc: dict, rulebase: RuleBase, source: str, path: str = "") -> Inference:
    """Helper for tables of non-rule inferences (e.g. precomputed universal ones)."""
    impact = float(doc["impact"])
    if not (math.isfinite(impact) and -1.0 <= impact <= 1.0):
        raise ImpactOutOfRange(f"impact {impact} outside [-1, 1]", f"{path}.impact")
    adaptations = []
    for k, a in enumerate(doc["adaptations"]):
        raw = a["value"]
        raw = tuple(raw) if isinstance(raw, list) else raw
        adaptations.append(
            rulebase.check_adaptation(Adaptation(a["dimension"], raw, tuple(a["targets"])), f"{path}.adaptations[{k}]")
        )
    return Inference(tuple(adaptations), impact, source)


__all__ = [
    "Adaptation",
    "DesignPrinciple",
    "Inference",
    "RoleRule",
    "RuleBase",
    "STUDY_DIMENSIONS",
    "STUDY_ROLE_TABLE",
    "WILDCARD",
    "applicable",
    "bundle_key",
    "derive_app_roles",
    "dump_rulepack",
    "expand_wildcards",
    "infer_rules",
    "load_rulepack",
]
