"""Write analysis and replay reports as JSON, CSV tables and PNG figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from arcontext.harness import plotting
from arcontext.harness.replay import ReplayReport


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _write_json(path: Path, doc) -> Path:
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _fmt(x) -> str:
    return "" if x is None else f"{x:.4f}" if isinstance(x, float) else str(x)


def _stat_rows(table: Mapping) -> list:
    return [
        (group, dim, s["n"], _fmt(s["mean"]), _fmt(s["sd"]))
        for group, dims in table.items()
        for dim, s in dims.items()
    ]


def write_analysis(report: Mapping, out_dir, targets: Mapping[str, float] | None = None,
                   figures: bool = True) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [_write_json(out / "analysis.json", report)]
    files.append(_write_csv(out / "visibility_by_context.csv", ("context", "visible_rate"),
                            ((c, _fmt(r)) for c, r in report["visible_rate_by_context"].items())))
    files.append(_write_csv(out / "for_shares.csv", ("frame_of_reference", "share", "count"),
                            ((f, _fmt(s), report["for_counts"].get(f, 0)) for f, s in report["for_shares"].items())))
    stat_header = ("group", "dimension", "n", "mean", "sd")
    for key in ("scale_opacity_by_for", "scale_opacity_by_sector", "scale_opacity_by_role"):
        files.append(_write_csv(out / f"{key}.csv", stat_header, _stat_rows(report[key])))
    files.append(_write_csv(
        out / "role_visibility.csv", ("role", "Visible", "Minimized"),
        ((r, c.get("Visible", 0), c.get("Minimized", 0)) for r, c in report["role_visibility"].items()),
    ))
    if figures:
        files.append(plotting.bar_rates(report["visible_rate_by_context"], out / "visibility_by_context.png",
                                        "Visible apps per context", "visible share", targets))
        files.append(plotting.bar_rates(report["for_shares"], out / "for_shares.png",
                                        "Frame of reference among visible apps"))
        files.append(plotting.grouped_means(report["scale_opacity_by_role"], out / "scale_opacity_by_role.png",
                                            "Scale and opacity by FoR / role"))
    return files


def write_replay(report: ReplayReport, out_dir, figures: bool = True) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "replay.json"
    path.write_text(report.dumps(), encoding="utf-8")
    files = [path]
    files.append(_write_csv(out / "agreement_by_dimension.csv", ("dimension", "agreement"),
                            ((d, _fmt(a)) for d, a in report.agreement_by_dimension.items())))
    files.append(_write_csv(out / "agreement_by_context.csv", ("context", "agreement", "churn"),
                            ((c, _fmt(a), report.churn_by_context[c]) for c, a in report.agreement_by_context.items())))
    rows = []
    for ctx, apps in report.cells.items():
        for app, dims in apps.items():
            for dim, cell in dims.items():
                rows.append((ctx, app, dim, cell["n"], _fmt(cell["agreement"]),
                             json.dumps(cell["engine"], sort_keys=True), json.dumps(cell["trace"], sort_keys=True)))
    files.append(_write_csv(out / "cells.csv", ("context", "app", "dimension", "n", "agreement", "engine", "trace"), rows))
    if figures:
        files.append(plotting.bar_rates(report.agreement_by_dimension, out / "agreement_by_dimension.png",
                                        "Engine/user agreement per dimension", "agreement"))
    return files


def analysis_table(report: Mapping) -> str:
    lines = [f"choices {report['choices']}  participants {report['participants']}  events {report['events']}",
             f"visible {report['visible_rate']:.1%}"]
    lines.append("context  " + "  ".join(f"{c:>5}" for c in report["visible_rate_by_context"]))
    lines.append("visible  " + "  ".join(f"{r:>5.0%}" for r in report["visible_rate_by_context"].values()))
    lines.append("FoR      " + "  ".join(f"{f} {s:.1%}" for f, s in report["for_shares"].items()))
    for f, dims in report["scale_opacity_by_for"].items():
        sc, op = dims["scale"], dims["opacity"]
        lines.append(f"{f:<10} scale M={_fmt(sc['mean'])}  opacity M={_fmt(op['mean'])}  (n={sc['n']})")
    viol = report["domain_violations"]
    lines.append(f"domain violations {sum(viol.values())}")
    return "\n".join(lines)


def replay_table(report: ReplayReport) -> str:
    lines = [f"agreement {report.agreement:.1%}  churn {report.churn}  feedback events {report.feedback_events}"]
    lines.append("dimension            agreement")
    lines += [f"{d:<20} {a:>8.1%}" for d, a in report.agreement_by_dimension.items()]
    lines.append("context  agreement  churn")
    lines += [f"{c:<8} {a:>8.1%}  {report.churn_by_context[c]:>5}" for c, a in report.agreement_by_context.items()]
    return "\n".join(lines)
