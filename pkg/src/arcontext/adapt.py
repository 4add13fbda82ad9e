"""Adaptation Unit: inference consolidation, conflict-free plan selection, state update."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from arcontext.errors import UnknownEntity, ValidationError
from arcontext.rules import (
    SOURCE_PERSONALIZED,
    SOURCE_RULE,
    SOURCE_UNIVERSAL,
    WILDCARD,
    Adaptation,
    BundleKey,
    Inference,
    bundle_key,
    expand_wildcards,
)
from arcontext.values import Domain, Value, value_key, value_to_json

DEFAULT_WEIGHTS = {SOURCE_RULE: 1.0, SOURCE_PERSONALIZED: 1.0, SOURCE_UNIVERSAL: 0.5}

# Above this many positive candidates the optimizer switches to greedy.
EXACT_LIMIT = 20


@dataclass(frozen=True)
class Provenance:
    source: str
    principle: str | None
    impact: float
    weight: float

    def to_json(self) -> dict:
        out = {"source": self.source, "impact": self.impact, "weight": self.weight}
        if self.principle:
            out["principle"] = self.principle
        return out


@dataclass(frozen=True)
class ConsolidatedInference:
    adaptations: tuple[Adaptation, ...]
    impact: float
    provenance: tuple[Provenance, ...] = ()

    @property
    def key(self) -> BundleKey:
        return bundle_key(self.adaptations)

    def to_json(self) -> dict:
        return {
            "adaptations": [a.to_json() for a in self.adaptations],
            "impact": self.impact,
            "provenance": [p.to_json() for p in self.provenance],
        }


def _canonical(adaptations: Iterable[Adaptation]) -> tuple[Adaptation, ...]:
    return tuple(sorted(adaptations, key=lambda a: a.key))


def consolidate(inferences: Iterable[Inference], weights: Mapping[str, float] | None = None) -> list[ConsolidatedInference]:
    """Merge inferences on the same bundle into a weighted-mean consensus.

    Sources with zero weight are ignored. Output is sorted by bundle key, so the
    result does not depend on input order.
    """
    weights = DEFAULT_WEIGHTS if weights is None else weights
    groups: dict[BundleKey, list[Inference]] = {}
    for inf in inferences:
        groups.setdefault(inf.key, []).append(inf)
    out = []
    for key in sorted(groups):
        members = groups[key]
        prov = sorted(
            (Provenance(m.source, m.principle, m.impact, float(weights.get(m.source, 0.0))) for m in members),
            key=lambda p: (p.source, p.principle or "", p.impact, p.weight),
        )
        prov = [p for p in prov if p.weight > 0]
        if not prov:
            continue
        total_w = math.fsum(p.weight for p in prov)
        impact = math.fsum(p.weight * p.impact for p in prov) / total_w
        impact = min(1.0, max(-1.0, impact))
        out.append(ConsolidatedInference(_canonical(members[0].adaptations), impact, tuple(prov)))
    return out


def conflicts(a: ConsolidatedInference, b: ConsolidatedInference) -> bool:
    """Two bundles conflict when they set one (dimension, target) to different values."""
    return any(x.clashes(y) for x in a.adaptations for y in b.adaptations)


@dataclass(frozen=True)
class AdaptationPlan:
    selected: tuple[ConsolidatedInference, ...] = ()
    total_impact: float = 0.0
    exact: bool = True

    def adaptations(self) -> list[Adaptation]:
        return [a for c in self.selected for a in c.adaptations]

    def to_json(self) -> dict:
        return {
            "selected": [c.to_json() for c in self.selected],
            "total_impact": self.total_impact,
            "exact": self.exact,
        }


def _plan(chosen: list[ConsolidatedInference], exact: bool) -> AdaptationPlan:
    chosen = sorted(chosen, key=lambda c: c.key)
    return AdaptationPlan(tuple(chosen), math.fsum(c.impact for c in chosen), exact)


def optimize(candidates: Iterable[ConsolidatedInference], state: "InterfaceState | None" = None,
             exact_limit: int = EXACT_LIMIT) -> AdaptationPlan:
    """Highest-total conflict-free subset of the positive-impact candidates.

    Exact branch-and-bound over the conflict graph up to ``exact_limit``
    candidates, greedy (best impact first, skipping conflicts) beyond.
    Wildcard targets are expanded against ``state`` when one is given.
    """
    cands = list(candidates)
    if state is not None:
        cands = [_expand(c, state.entity_ids()) for c in cands]
    pos = sorted((c for c in cands if c.impact > 0), key=lambda c: (-c.impact, c.key))
    n = len(pos)
    if n == 0:
        return AdaptationPlan()

    if n > exact_limit:
        chosen: list[ConsolidatedInference] = []
        for c in pos:
            if not any(conflicts(c, s) for s in chosen):
                chosen.append(c)
        return _plan(chosen, exact=False)

    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if conflicts(pos[i], pos[j]):
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    impacts = [c.impact for c in pos]
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + impacts[i]

    best_mask = 0
    best_val = 0.0

    def mask_value(mask: int) -> float:
        return math.fsum(impacts[i] for i in range(n) if mask >> i & 1)

    def search(i: int, mask: int, blocked: int, val: float) -> None:
        nonlocal best_mask, best_val
        if val > best_val - 1e-12:
            exact_val = mask_value(mask)
            if exact_val > best_val:
                best_val, best_mask = exact_val, mask
        if i == n or val + suffix[i] < best_val - 1e-9:
            return
        if not blocked >> i & 1:
            search(i + 1, mask | 1 << i, blocked | adj[i], val + impacts[i])
        search(i + 1, mask, blocked, val)

    search(0, 0, 0, 0.0)
    return _plan([pos[i] for i in range(n) if best_mask >> i & 1], exact=True)


def _expand(c: ConsolidatedInference, entities: Iterable[str]) -> ConsolidatedInference:
    if not any(WILDCARD in a.targets for a in c.adaptations):
        return c
    entities = tuple(entities)
    adaptations = tuple(Adaptation(a.dimension, a.value, entities) if WILDCARD in a.targets else a for a in c.adaptations)
    return ConsolidatedInference(_canonical(adaptations), c.impact, c.provenance)


# -- interface state ---------------------------------------------------------


@dataclass(frozen=True)
class InterfaceState:
    """Per-entity design-dimension values."""

    entities: Mapping[str, Mapping[str, Value]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entities", {e: dict(d) for e, d in self.entities.items()})

    __hash__ = None  # type: ignore[assignment]

    def entity_ids(self) -> list[str]:
        return sorted(self.entities)

    def get(self, entity: str, dimension: str, default=None):
        return self.entities.get(entity, {}).get(dimension, default)

    def validate(self, dimensions: Mapping[str, Domain]) -> None:
        for entity, dims in self.entities.items():
            for dim, value in dims.items():
                if dim not in dimensions:
                    raise ValidationError(f"unknown dimension {dim!r}", entity)
                dimensions[dim].coerce(value, f"{entity}.{dim}")

    def to_json(self) -> dict:
        return {e: {d: value_to_json(v) for d, v in sorted(dims.items())} for e, dims in sorted(self.entities.items())}


def apply_plan(plan: AdaptationPlan, state: InterfaceState) -> InterfaceState:
    """Write every selected adaptation onto its targets; other entries are kept."""
    entities = {e: dict(d) for e, d in state.entities.items()}
    for a in plan.adaptations():
        targets = sorted(entities) if WILDCARD in a.targets else a.targets
        for t in targets:
            if t not in entities:
                raise UnknownEntity(f"no entity {t!r} in interface state", a.dimension)
            entities[t][a.dimension] = a.value
    return InterfaceState(entities)


def churn(before: InterfaceState, after: InterfaceState) -> int:
    """Number of (entity, dimension) entries whose value changed."""
    count = 0
    for e in set(before.entities) | set(after.entities):
        b, a = before.entities.get(e, {}), after.entities.get(e, {})
        for d in set(b) | set(a):
            if d not in b or d not in a or value_key(b[d]) != value_key(a[d]):
                count += 1
    return count


def adaptation_cycle(inferences: Iterable[Inference], state: InterfaceState,
                     weights: Mapping[str, float] | None = None,
                     exact_limit: int = EXACT_LIMIT) -> tuple[list[ConsolidatedInference], AdaptationPlan, InterfaceState]:
    """consolidate -> optimize -> apply for one context snapshot."""
    expanded = expand_wildcards(inferences, state.entity_ids())
    candidates = consolidate(expanded, weights)
    plan = optimize(candidates, exact_limit=exact_limit)
    return candidates, plan, apply_plan(plan, state)
