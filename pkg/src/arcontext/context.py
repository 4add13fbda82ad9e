"""Context Unit: component registry, context store/snapshots and scenario matching.

Component ids are dot paths whose first segment names the top-level category
(``user``, ``setting`` or ``sui``), e.g. ``user.state.mobility``.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Union

from arcontext.errors import (
    DuplicateId,
    InvalidScenario,
    InvalidTaxonomyPath,
    ParseError,
    PersistentNotExtracted,
    UnknownComponent,
    ValidationError,
)
from arcontext.values import Domain, Value, value_key, value_to_json


class Category(str, Enum):
    USER = "User"
    SETTING = "Setting"
    SUI = "SUI"


class Persistence(str, Enum):
    PERSISTENT = "Persistent"
    TRANSIENT = "Transient"


class InputType(str, Enum):
    SPECIFIED = "Specified"
    SENSED = "Sensed"
    EXTRACTED = "Extracted"


PATH_ROOTS = {"user": Category.USER, "setting": Category.SETTING, "sui": Category.SUI}

# Leaf subcategories per category. The SUI leaves are our own split of the
# occluded / related / interacted-with entities plus task relation (app role).
TAXONOMY: dict[Category, tuple[str, ...]] = {
    Category.USER: ("Persistent User Profile", "Transient User State"),
    Category.SETTING: (
        "Persistent Local Environment",
        "Transient Local Environment",
        "Immediate Environment",
        "Persistent Global Knowledge",
        "Transient Digital Setting",
        "Attendee Profile",
        "Attendee State",
        "Attendee-Setting Interplay",
    ),
    Category.SUI: (
        "Occluded Entities",
        "Related Entities",
        "Interacted Entities",
        "Task Relation",
    ),
}


@dataclass(frozen=True)
class ComponentDescriptor:
    id: str
    category: Category
    subcategory: str
    persistence: Persistence
    input_type: InputType
    domain: Domain

    def __post_init__(self):
        object.__setattr__(self, "category", Category(self.category))
        object.__setattr__(self, "persistence", Persistence(self.persistence))
        object.__setattr__(self, "input_type", InputType(self.input_type))

    def validate(self) -> None:
        parts = self.id.split(".") if self.id else []
        if not parts or any(not p for p in parts):
            raise InvalidTaxonomyPath("component id must be a non-empty dot path", self.id)
        root = PATH_ROOTS.get(parts[0])
        if root is None:
            raise InvalidTaxonomyPath(f"first segment must be one of {sorted(PATH_ROOTS)}", self.id)
        if root is not self.category:
            raise InvalidTaxonomyPath(f"path root {parts[0]!r} does not match category {self.category.value}", self.id)
        if self.subcategory not in TAXONOMY[self.category]:
            raise InvalidTaxonomyPath(
                f"subcategory {self.subcategory!r} is not part of {self.category.value}", self.id
            )
        if self.persistence is Persistence.PERSISTENT and self.input_type is not InputType.EXTRACTED:
            raise PersistentNotExtracted(
                f"persistent components are extracted, got {self.input_type.value}", self.id
            )

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "category": self.category.value,
            "subcategory": self.subcategory,
            "persistence": self.persistence.value,
            "input_type": self.input_type.value,
            "domain": self.domain.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict, path: str = "") -> "ComponentDescriptor":
        try:
            return cls(
                id=doc["id"],
                category=doc["category"],
                subcategory=doc["subcategory"],
                persistence=doc["persistence"],
                input_type=doc["input_type"],
                domain=Domain.from_json(doc["domain"], f"{path}.domain"),
            )
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}", path) from None
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ParseError(str(exc), path) from None


class Registry:
    """Component descriptors keyed by id."""

    def __init__(self, descriptors: Iterable[ComponentDescriptor] = ()):
        self._by_id: dict[str, ComponentDescriptor] = {}
        for d in descriptors:
            self.register(d)

    def register(self, descriptor: ComponentDescriptor) -> "Registry":
        descriptor.validate()
        if descriptor.id in self._by_id:
            raise DuplicateId("component already registered", descriptor.id)
        self._by_id[descriptor.id] = descriptor
        return self

    def __contains__(self, component_id: str) -> bool:
        return component_id in self._by_id

    def __getitem__(self, component_id: str) -> ComponentDescriptor:
        try:
            return self._by_id[component_id]
        except KeyError:
            raise UnknownComponent("component not registered", component_id) from None

    def __iter__(self):
        return iter(self._by_id.values())

    def __len__(self) -> int:
        return len(self._by_id)

    def ids(self) -> list[str]:
        return sorted(self._by_id)

    def check(self, component_id: str, value: Any) -> Value:
        """Coerce ``value`` into the component's domain or raise."""
        return self[component_id].domain.coerce(value, component_id)

    def to_json(self) -> dict:
        return {"registry_version": 1, "components": [self._by_id[i].to_json() for i in self.ids()]}


def register_component(registry: Registry, descriptor: ComponentDescriptor) -> Registry:
    return registry.register(descriptor)


@dataclass(frozen=True)
class Context:
    """Immutable point-in-time view of component values."""

    snapshot_id: int
    timestamp: int
    entries: Mapping[str, Value] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.entries, MappingProxyType):
            object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def get(self, component_id: str, default: Any = None) -> Any:
        return self.entries.get(component_id, default)

    def __contains__(self, component_id: str) -> bool:
        return component_id in self.entries

    def __eq__(self, other):
        if not isinstance(other, Context):
            return NotImplemented
        return (self.snapshot_id, self.timestamp, dict(self.entries)) == (
            other.snapshot_id,
            other.timestamp,
            dict(other.entries),
        )

    __hash__ = None  # type: ignore[assignment]

    def to_json(self) -> dict:
        return {
            "snapshot_id": self.snapshot_id,
            "timestamp_ms": self.timestamp,
            "entries": {k: value_to_json(self.entries[k]) for k in sorted(self.entries)},
        }


class ContextStore:
    """Latest value per component; :meth:`snapshot` freezes the current state.

    Writers may call :meth:`upsert` from several threads; the lock makes each
    snapshot a consistent copy.
    """

    def __init__(self, registry: Registry):
        self.registry = registry
        self._values: dict[str, Value] = {}
        self._timestamp = 0
        self._snapshot_id = 0
        self._lock = threading.Lock()

    def upsert(self, component_id: str, value: Any, timestamp: int) -> "ContextStore":
        checked = self.registry.check(component_id, value)
        with self._lock:
            self._values[component_id] = checked
            self._timestamp = max(self._timestamp, int(timestamp))
        return self

    def snapshot(self) -> Context:
        with self._lock:
            self._snapshot_id += 1
            return Context(self._snapshot_id, self._timestamp, dict(self._values))


def upsert(store: ContextStore, component_id: str, value: Any, timestamp: int) -> ContextStore:
    return store.upsert(component_id, value, timestamp)


def snapshot(store: ContextStore) -> Context:
    return store.snapshot()


# -- scenarios ---------------------------------------------------------------


@dataclass(frozen=True)
class Equals:
    value: Value

    def holds(self, actual: Value) -> bool:
        return value_key(actual) == value_key(self.value)

    def to_json(self) -> dict:
        return {"equals": value_to_json(self.value)}


@dataclass(frozen=True)
class InSet:
    values: tuple

    def holds(self, actual: Value) -> bool:
        key = value_key(actual)
        return any(value_key(v) == key for v in self.values)

    def to_json(self) -> dict:
        return {"in_set": [value_to_json(v) for v in self.values]}


@dataclass(frozen=True)
class InRange:
    lo: float
    hi: float

    def holds(self, actual: Value) -> bool:
        if isinstance(actual, bool) or not isinstance(actual, (int, float)):
            return False
        return self.lo <= actual <= self.hi

    def to_json(self) -> dict:
        return {"in_range": [self.lo, self.hi]}


Predicate = Union[Equals, InSet, InRange]


@dataclass(frozen=True)
class ScenarioSpec:
    """Conjunction of (component, predicate) constraints."""

    id: str
    constraints: tuple[tuple[str, Predicate], ...]

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(sorted(self.constraints, key=_constraint_sort_key)))
        if not self.constraints:
            raise InvalidScenario("a scenario needs at least one constraint", self.id)

    def components(self) -> set[str]:
        return {cid for cid, _ in self.constraints}

    def validate(self, registry: Registry) -> None:
        for cid, pred in self.constraints:
            desc = registry[cid]
            if isinstance(pred, InRange) and not desc.domain.numeric:
                raise InvalidScenario("range predicate on a non-numeric component", f"{self.id}.{cid}")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "constraints": [{"component": cid, **pred.to_json()} for cid, pred in self.constraints],
        }

    @classmethod
    def from_json(cls, doc: dict, path: str = "", default_id: str = "") -> "ScenarioSpec":
        constraints = []
        for i, c in enumerate(doc.get("constraints", [])):
            cpath = f"{path}.constraints[{i}]"
            if "component" not in c:
                raise ParseError("constraint needs a 'component'", cpath)
            constraints.append((c["component"], predicate_from_json(c, cpath)))
        return cls(id=doc.get("id", default_id), constraints=tuple(constraints))


def _constraint_sort_key(item):
    cid, pred = item
    return cid, json.dumps(pred.to_json(), sort_keys=True)


def predicate_from_json(doc: dict, path: str = "") -> Predicate:
    kinds = [k for k in ("equals", "in_set", "in_range") if k in doc]
    if len(kinds) != 1:
        raise ParseError("constraint needs exactly one of equals / in_set / in_range", path)
    kind = kinds[0]
    raw = doc[kind]
    if kind == "equals":
        return Equals(tuple(raw) if isinstance(raw, list) else raw)
    if kind == "in_set":
        if not isinstance(raw, list) or not raw:
            raise ParseError("in_set needs a non-empty list", path)
        return InSet(tuple(tuple(v) if isinstance(v, list) else v for v in raw))
    if not isinstance(raw, list) or len(raw) != 2:
        raise ParseError("in_range needs [lo, hi]", path)
    return InRange(float(raw[0]), float(raw[1]))


def matches(scenario: ScenarioSpec, context: Context) -> bool:
    """True iff every constrained component is present and its predicate holds."""
    for cid, pred in scenario.constraints:
        if cid not in context.entries:
            return False
        if not pred.holds(context.entries[cid]):
            return False
    return True


# -- JSON documents ----------------------------------------------------------


def load_registry(doc: dict | str | Path) -> tuple[Registry, list[ScenarioSpec]]:
    """Build a registry (and any named scenarios) from a registry document."""
    if isinstance(doc, (str, Path)):
        with open(doc, encoding="utf-8") as fh:
            doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("registry_version") != 1:
        raise ParseError("expected an object with registry_version 1")
    registry = Registry()
    for i, d in enumerate(doc.get("components", [])):
        registry.register(ComponentDescriptor.from_json(d, f"components[{i}]"))
    scenarios = []
    for i, s in enumerate(doc.get("scenarios", [])):
        spec = ScenarioSpec.from_json(s, f"scenarios[{i}]")
        spec.validate(registry)
        scenarios.append(spec)
    return registry, scenarios


def context_from_json(doc: dict, registry: Registry, store: ContextStore | None = None) -> Context:
    """Validate a context document and take a snapshot of it."""
    store = store or ContextStore(registry)
    ts = int(doc.get("timestamp_ms", 0))
    for cid, raw in sorted(doc.get("entries", {}).items()):
        store.upsert(cid, raw, ts)
    return store.snapshot()
