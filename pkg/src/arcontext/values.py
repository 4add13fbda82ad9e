"""Value domains.

Values are plain Python objects: ``str`` for categorical labels and text,
``float`` for numbers, ``bool`` for flags and a 3-tuple of floats for vectors.
The owning :class:`Domain` says how a value is to be read, so the same label
string can be categorical in one place and free text in another.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Union

from arcontext.errors import ValidationError, ValueOutOfDomain

Value = Union[str, float, bool, tuple]

KINDS = ("categorical", "number", "boolean", "text", "vec3")


@dataclass(frozen=True)
class Domain:
    kind: str
    labels: tuple[str, ...] = ()
    lo: float | None = None
    hi: float | None = None
    unit: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown value kind {self.kind!r}")
        if self.kind == "categorical" and not self.labels:
            raise ValidationError("categorical domain needs at least one label")
        if self.kind == "number":
            if self.lo is None or self.hi is None:
                raise ValidationError("number domain needs lo and hi")
            if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
                raise ValidationError(f"bad number range [{self.lo}, {self.hi}]")

    @property
    def numeric(self) -> bool:
        return self.kind == "number"

    def contains(self, value: Any) -> bool:
        if self.kind == "categorical":
            return isinstance(value, str) and value in self.labels
        if self.kind == "text":
            return isinstance(value, str)
        if self.kind == "boolean":
            return isinstance(value, bool)
        if self.kind == "number":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return False
            return math.isfinite(value) and self.lo <= value <= self.hi
        # vec3
        return (
            isinstance(value, tuple)
            and len(value) == 3
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) and math.isfinite(c) for c in value)
        )

    def coerce(self, raw: Any, path: str = "") -> Value:
        """Turn a JSON/CSV-level value into the canonical Python value, or raise."""
        value = raw
        if self.kind == "number" and isinstance(raw, (int, float)) and not isinstance(raw, bool):
            value = float(raw)
        elif self.kind == "number" and isinstance(raw, str):
            try:
                value = float(raw)
            except ValueError:
                pass
        elif self.kind == "boolean" and isinstance(raw, str) and raw.lower() in ("true", "false"):
            value = raw.lower() == "true"
        elif self.kind == "vec3" and isinstance(raw, (list, tuple)):
            try:
                value = tuple(float(c) for c in raw)
            except (TypeError, ValueError):
                pass
        if not self.contains(value):
            raise ValueOutOfDomain(f"{raw!r} not in {self.describe()}", path)
        return value

    def describe(self) -> str:
        if self.kind == "categorical":
            return "{" + ", ".join(self.labels) + "}"
        if self.kind == "number":
            unit = f" {self.unit}" if self.unit else ""
            return f"[{self.lo:g}, {self.hi:g}]{unit}"
        return self.kind

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.labels:
            out["labels"] = list(self.labels)
        if self.lo is not None:
            out["lo"] = self.lo
            out["hi"] = self.hi
        if self.unit:
            out["unit"] = self.unit
        return out

    @classmethod
    def from_json(cls, doc: dict, path: str = "") -> "Domain":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ValidationError("domain must be an object with a 'kind'", path)
        try:
            return cls(
                kind=doc["kind"],
                labels=tuple(doc.get("labels", ())),
                lo=None if doc.get("lo") is None else float(doc["lo"]),
                hi=None if doc.get("hi") is None else float(doc["hi"]),
                unit=doc.get("unit", ""),
            )
        except ValidationError as exc:
            raise ValidationError(str(exc), path) from None


def value_to_json(value: Value) -> Any:
    if isinstance(value, tuple):
        return list(value)
    return value


def value_key(value: Value) -> str:
    """Canonical, sortable text form used in bundle keys and checkpoint keys."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = float(value)
    elif isinstance(value, tuple):
        value = [float(c) for c in value]
    return json.dumps(value, sort_keys=True)


def value_from_key(key: str) -> Value:
    raw = json.loads(key)
    return tuple(raw) if isinstance(raw, list) else raw

