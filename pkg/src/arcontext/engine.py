"""Engine configuration and one-shot composition of the inference/adaptation pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from arcontext.adapt import (
    DEFAULT_WEIGHTS,
    EXACT_LIMIT,
    AdaptationPlan,
    ConsolidatedInference,
    InterfaceState,
    adaptation_cycle,
    churn,
)
from arcontext.context import Context, ContextStore, Registry, load_registry
from arcontext.errors import ConfigError
from arcontext.learner import LearnerConfig, PersonalModel, UniversalEntry, infer_universal
from arcontext.rules import STUDY_ROLE_TABLE, Inference, RoleRule, RuleBase, derive_app_roles, infer_rules, load_rulepack
from arcontext.spatial import SpatialConfig
from arcontext.study import STUDY_COMPONENTS, data_path

_CONFIG_KEYS = {"rulepack", "registry", "model", "learner", "weights", "spatial", "seed",
                "agreement_tolerance", "exact_limit", "marginals"}


@dataclass(frozen=True)
class EngineConfig:
    rulepack: str | None = None
    registry: str | None = None
    model: str | None = None
    marginals: str | None = None
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    weights: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    spatial: SpatialConfig = field(default_factory=SpatialConfig)
    seed: int = 1
    agreement_tolerance: float = 0.1
    exact_limit: int = EXACT_LIMIT

    def __post_init__(self):
        for name, w in self.weights.items():
            if not w >= 0:
                raise ConfigError("weights must be non-negative", f"weights.{name}")
        if not self.agreement_tolerance >= 0:
            raise ConfigError("agreement_tolerance must be non-negative", "agreement_tolerance")
        if self.exact_limit < 0:
            raise ConfigError("exact_limit must be non-negative", "exact_limit")

    @classmethod
    def from_dict(cls, doc: Mapping, base_dir: Path | None = None) -> "EngineConfig":
        unknown = set(doc) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}")

        def resolve(p):
            if p is None:
                return None
            p = Path(p)
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            return str(p)

        cfg = cls(
            rulepack=resolve(doc.get("rulepack")),
            registry=resolve(doc.get("registry")),
            model=resolve(doc.get("model")),
            marginals=resolve(doc.get("marginals")),
            learner=LearnerConfig.from_json(doc.get("learner")),
            weights={**DEFAULT_WEIGHTS, **doc.get("weights", {})},
            spatial=SpatialConfig.from_dict(doc.get("spatial")),
            seed=int(doc.get("seed", 1)),
            agreement_tolerance=float(doc.get("agreement_tolerance", 0.1)),
            exact_limit=int(doc.get("exact_limit", EXACT_LIMIT)),
        )
        for name in ("rulepack", "registry", "marginals"):
            path = getattr(cfg, name)
            if path is not None and not Path(path).is_file():
                raise FileNotFoundError(f"{name} file not found: {path}")
        return cfg

    @classmethod
    def load(cls, path) -> "EngineConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON: {exc.msg} (line {exc.lineno})", str(path)) from None
        return cls.from_dict(doc, path.parent)

    def rulepack_path(self):
        return self.rulepack or data_path("study_library_v1.json")

    def registry_path(self):
        return self.registry or data_path("study_registry_v1.json")


@dataclass
class CycleResult:
    context: Context
    inferences: list[Inference]
    candidates: list[ConsolidatedInference]
    plan: AdaptationPlan
    state: InterfaceState
    churn: int

    def to_json(self) -> dict:
        return {
            "context": self.context.to_json(),
            "candidates": [c.to_json() for c in self.candidates],
            "plan": self.plan.to_json(),
            "state": self.state.to_json(),
            "churn": self.churn,
        }


class Engine:
    """Context in, conflict-free adaptation plan out."""

    def __init__(self, rulebase: RuleBase, registry: Registry, model: PersonalModel | None = None,
                 weights: Mapping[str, float] | None = None, universal: Iterable[UniversalEntry] = (),
                 role_table: Iterable[RoleRule] = STUDY_ROLE_TABLE, exact_limit: int = EXACT_LIMIT):
        self.rulebase = rulebase
        self.registry = registry
        self.model = model
        self.weights = dict(DEFAULT_WEIGHTS if weights is None else weights)
        self.universal = list(universal)
        self.role_table = tuple(role_table)
        self.exact_limit = exact_limit
        self.store = ContextStore(registry)

    @classmethod
    def from_config(cls, config: EngineConfig, model: PersonalModel | None = None) -> "Engine":
        registry, _ = load_registry(config.registry_path())
        rulebase = load_rulepack(Path(config.rulepack_path()), registry)
        if model is None and config.model and Path(config.model).is_file():
            model = PersonalModel.load(config.model)
        if model is not None:
            model.config = config.learner
        return cls(rulebase, registry, model, config.weights, exact_limit=config.exact_limit)

    def _roles_derivable(self, context: Context) -> bool:
        if not all(c in context for c in STUDY_COMPONENTS):
            return False
        return all(f"sui.app_role.{row.app}" in self.registry for row in self.role_table)

    def observe_context(self, entries: Mapping, timestamp: int = 0) -> Context:
        """Upsert the given entries (plus derived app roles) and snapshot."""
        for cid in sorted(entries):
            self.store.upsert(cid, entries[cid], timestamp)
        ctx = self.store.snapshot()
        if self._roles_derivable(ctx):
            for cid, role in derive_app_roles(ctx, self.role_table):
                self.store.upsert(cid, role, timestamp)
            ctx = self.store.snapshot()
        return ctx

    def infer(self, context: Context) -> list[Inference]:
        out = infer_rules(self.rulebase, context)
        if self.model is not None:
            out.extend(self.model.infer(context))
        out.extend(infer_universal(self.universal, context))
        return out

    def step(self, context: Context, state: InterfaceState) -> CycleResult:
        inferences = self.infer(context)
        candidates, plan, new_state = adaptation_cycle(inferences, state, self.weights, self.exact_limit)
        return CycleResult(context, inferences, candidates, plan, new_state, churn(state, new_state))
