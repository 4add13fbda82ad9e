"""Regenerate src/arcontext/data/study_library_v1.json.

Weights use impact = 2p - 1, where p is the observed proportion named in the
principle's ``basis`` string. The walking principle keeps the framework's
illustrative 0.85.
"""

import json
from pathlib import Path

APPS = ["Map", "Book1", "Book2", "Messaging", "Stock"]
NON_STOCK = APPS[:4]
AFTER_BOOK1 = ["LocateBook2", "LocateFriend", "Read"]
ALWAYS = {"component": "setting.env.confinement", "in_set": ["Confined", "Unconfined"]}


def impact(p):
    return round(2 * p - 1, 4)


def adapt(dim, value, *targets):
    return {"dimension": dim, "value": value, "targets": list(targets)}


def role(app, *roles):
    c = {"component": f"sui.app_role.{app}"}
    if len(roles) == 1:
        c["equals"] = roles[0]
    else:
        c["in_set"] = list(roles)
    return c


def principle(pid, description, basis, constraints, inferences):
    return {
        "id": pid,
        "description": description,
        "basis": basis,
        "scenario": {"constraints": constraints},
        "inferences": [{"impact": imp, "adaptations": ads} for imp, ads in inferences],
    }


def build():
    ps = []
    for app in APPS:
        ps.append(principle(
            f"relevant_visible_{app}",
            f"Keep {app} visible while it is Assistive or Primary to the current task.",
            "Assistive and Primary apps were never Minimized: p(Visible)=1.00 -> 1.00",
            [role(app, "Assistive", "Primary")],
            [(impact(1.0), [adapt("visibility", "Visible", app)])],
        ))
        ps.append(principle(
            f"irrelevant_visible_{app}",
            f"{app} stays visible by default even when Irrelevant.",
            "33% of Irrelevant apps were Minimized: p(Visible)=0.67 -> 0.34",
            [role(app, "Irrelevant")],
            [(impact(0.67), [adapt("visibility", "Visible", app)])],
        ))
    ps.append(principle(
        "book1_done_minimize",
        "Once the first book has been found, its app is usually put away.",
        "Book1 was Minimized ~70% of the time outside C1-C3: p(Minimized)=0.70 -> 0.40",
        [{"component": "user.state.rw_objective", "in_set": AFTER_BOOK1}],
        [(impact(0.70), [adapt("visibility", "Minimized", "Book1")])],
    ))
    ps.append(principle(
        "book1_done_body_fixed",
        "After its search, a visible Book1 is body-fixed.",
        "Book1 always used Body-fixed when visible outside C1-C3: p=1.00 -> 1.00",
        [{"component": "user.state.rw_objective", "in_set": AFTER_BOOK1}],
        [(impact(1.0), [adapt("frame_of_reference", "BodyFixed", "Book1")])],
    ))
    for app in NON_STOCK:
        ps.append(principle(
            f"read_minimize_{app}",
            f"While reading a physical book, {app} carries no task information and is put away.",
            "rate of Minimizing a task-complete Irrelevant app (Book1 outside C1-C3): p(Minimized)=0.70 -> 0.40",
            [{"component": "user.state.rw_objective", "equals": "Read"}, role(app, "Irrelevant")],
            [(impact(0.70), [adapt("visibility", "Minimized", app)])],
        ))
    ps.append(principle(
        "body_fixed_default",
        "Body-fixed is the usual frame of reference for every app.",
        "90% of the 660 Visible apps were Body-fixed: p=0.90 -> 0.80",
        [ALWAYS],
        [(impact(0.90), [adapt("frame_of_reference", "BodyFixed", app)]) for app in APPS],
    ))
    ps.append(principle(
        "walking_body_fixed",
        "While the user walks, content follows the body.",
        "framework example: a walking scenario favors body-fixed content at impact 0.85 (not a frequency)",
        [{"component": "user.state.mobility", "equals": "Mobile"}],
        [(0.85, [adapt("frame_of_reference", "BodyFixed", "*")])],
    ))
    ps.append(principle(
        "world_fixed_rare",
        "World-fixed content is rarely wanted while moving through the library.",
        "6 of 660 Visible apps were World-fixed: p~0.01 -> -0.98",
        [ALWAYS],
        [(impact(0.01), [adapt("frame_of_reference", "WorldFixed", "*")])],
    ))
    ps.append(principle(
        "map_body_fixed",
        "The map is body-fixed whenever it is shown.",
        "Map consistently used Body-fixed when visible: p=1.00 -> 1.00",
        [ALWAYS],
        [(impact(1.0), [adapt("frame_of_reference", "BodyFixed", "Map")])],
    ))
    ps.append(principle(
        "opaque_default",
        "Apps are kept (nearly) fully opaque.",
        "~85% of apps used opacity >= 0.9: p=0.85 -> 0.70",
        [ALWAYS],
        [(impact(0.85), [adapt("opacity", 1.0, app)]) for app in APPS],
    ))
    for app in NON_STOCK:
        ps.append(principle(
            f"assistive_eye_level_{app}",
            f"When {app} assists the real-world task, place it at eye level in front of the body.",
            "63% of body-fixed Assistive apps sat in the vertical center band: p=0.63 -> 0.26",
            [role(app, "Assistive")],
            [(impact(0.63), [adapt("position_sector", "Center", app)])],
        ))
    return {
        "rulepack_version": 1,
        "name": "study_library_v1",
        "description": (
            "Design principles distilled from the library context-switching study "
            "(20 participants x 8 contexts x 5 apps). Each impact is 2p-1 for the observed "
            "proportion p quoted in the principle's basis, unless the basis states otherwise."
        ),
        "principles": ps,
    }


if __name__ == "__main__":
    out = Path(__file__).resolve().parents[1] / "src" / "arcontext" / "data" / "study_library_v1.json"
    out.write_text(json.dumps(build(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(build()['principles'])} principles)")
