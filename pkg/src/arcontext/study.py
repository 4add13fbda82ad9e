"""Constants of the library context-switching study."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

OBJECTIVE = "user.state.rw_objective"
MOBILITY = "user.state.mobility"
CONFINEMENT = "setting.env.confinement"
STUDY_COMPONENTS = (OBJECTIVE, MOBILITY, CONFINEMENT)

APPS = ("Map", "Book1", "Book2", "Messaging", "Stock")
DIMENSIONS = ("visibility", "frame_of_reference", "position_sector", "scale", "opacity")
ROLES = ("Irrelevant", "Assistive", "Primary")


def app_role_id(app: str) -> str:
    return f"sui.app_role.{app}"


# Fixed visiting order C1..C8; each is (objective, mobility, environment).
CONTEXTS: dict[str, tuple[str, str, str]] = {
    "C1": ("LocateBook1", "Mobile", "Unconfined"),
    "C2": ("LocateBook1", "Mobile", "Confined"),
    "C3": ("LocateBook1", "Stationary", "Confined"),
    "C4": ("LocateBook2", "Mobile", "Unconfined"),
    "C5": ("LocateBook2", "Mobile", "Confined"),
    "C6": ("LocateBook2", "Stationary", "Confined"),
    "C7": ("LocateFriend", "Mobile", "Unconfined"),
    "C8": ("Read", "Stationary", "Unconfined"),
}
CONTEXT_ORDER = tuple(CONTEXTS)

DEFAULT_DESIGN = {
    "visibility": "Visible",
    "frame_of_reference": "BodyFixed",
    "position_sector": "Center",
    "scale": 1.0,
    "opacity": 1.0,
}


@dataclass(frozen=True)
class StudyScenario:
    contexts: dict
    apps: tuple[str, ...]
    default_design: dict

    def __post_init__(self):
        if len(self.contexts) != 8:
            raise ValueError("the study scenario has exactly eight contexts")
        for label, assignment in self.contexts.items():
            if len(assignment) != 3:
                raise ValueError(f"{label} must assign all three study components")

    def assignments(self, label: str) -> dict[str, str]:
        return dict(zip(STUDY_COMPONENTS, self.contexts[label]))

    def default_state(self) -> dict[str, dict]:
        return {app: dict(self.default_design) for app in self.apps}


STUDY = StudyScenario(dict(CONTEXTS), APPS, dict(DEFAULT_DESIGN))


def data_path(name: str):
    """Path to a bundled data file."""
    return resources.files("arcontext") / "data" / name
