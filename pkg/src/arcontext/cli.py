"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from arcontext.adapt import InterfaceState
from arcontext.context import load_registry
from arcontext.engine import Engine, EngineConfig
from arcontext.errors import ArContextError
from arcontext.harness import analyze, ingest_trace, replay, synth_trace, write_trace
from arcontext.harness.replay import ReplayConfig
from arcontext.harness.report import analysis_table, replay_table, write_analysis, write_replay
from arcontext.harness.synth import Marginals, provenance
from arcontext.harness.trace import serialize_trace
from arcontext.learner import PersonalModel
from arcontext.rules import load_rulepack
from arcontext.study import STUDY, data_path

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class _IOFailure(Exception):
    pass


def _emit(args, doc, text: str) -> None:
    if args.json:
        print(json.dumps(doc, indent=1, sort_keys=True))
    else:
        print(text)


def _config(args) -> EngineConfig:
    cfg = EngineConfig.load(args.config) if args.config else EngineConfig()
    changes = {}
    for name in ("rulepack", "registry", "model"):
        value = getattr(args, name, None)
        if value is not None:
            if name != "model" and not Path(value).is_file():
                raise FileNotFoundError(f"{name} file not found: {value}")
            changes[name] = str(value)
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    return dataclasses.replace(cfg, **changes)


def _model(cfg: EngineConfig, required: bool) -> PersonalModel | None:
    if cfg.model and Path(cfg.model).is_file():
        model = PersonalModel.load(cfg.model)
        model.config = cfg.learner
        return model
    if cfg.model and required:
        raise FileNotFoundError(f"model file not found: {cfg.model}")
    return None


def _trace(args, cfg: EngineConfig):
    path = args.trace_pos or args.trace
    if path:
        return ingest_trace(path)
    return synth_trace(cfg.seed, Marginals.load(cfg.marginals))


# -- commands ----------------------------------------------------------------


def cmd_validate(args) -> int:
    registry = load_registry(args.registry)[0] if args.registry else None
    rb = load_rulepack(Path(args.rulepack_path), registry)
    n_inf = sum(len(p.inferences) for p in rb.principles)
    _emit(args, {"valid": True, "name": rb.name, "principles": len(rb.principles), "inferences": n_inf},
          f"OK {rb.name}: {len(rb.principles)} principles, {n_inf} inferences")
    return EXIT_OK


def cmd_infer(args) -> int:
    cfg = _config(args)
    engine = Engine.from_config(cfg, _model(cfg, required=True))
    with open(args.context, encoding="utf-8") as fh:
        doc = json.load(fh)
    context = engine.observe_context(doc.get("entries", {}), int(doc.get("timestamp_ms", 0)))
    state = InterfaceState(doc["state"] if "state" in doc else STUDY.default_state())
    state.validate(engine.rulebase.dimensions)
    result = engine.step(context, state)
    lines = [f"context #{context.snapshot_id}: " + ", ".join(f"{k}={v}" for k, v in sorted(context.entries.items()))]
    lines.append(f"{len(result.candidates)} candidates, {len(result.plan.selected)} selected "
                 f"(total impact {result.plan.total_impact:.3f}, churn {result.churn})")
    for c in result.plan.selected:
        what = "; ".join(f"{a.dimension}={a.value} on {','.join(a.targets)}" for a in c.adaptations)
        srcs = ",".join(sorted({p.source for p in c.provenance}))
        lines.append(f"  {c.impact:+.3f}  {what}  [{srcs}]")
    _emit(args, result.to_json(), "\n".join(lines))
    return EXIT_OK


def _replay(args, learn: bool):
    cfg = _config(args)
    registry, _ = load_registry(cfg.registry_path())
    rulebase = load_rulepack(Path(cfg.rulepack_path()), registry)
    model = _model(cfg, required=False)
    if learn and model is None:
        model = PersonalModel(cfg.learner)
    events = _trace(args, cfg)
    rcfg = ReplayConfig(agreement_tolerance=cfg.agreement_tolerance, weights=cfg.weights, exact_limit=cfg.exact_limit)
    return replay(STUDY, rulebase, model, events, rcfg, registry)


def cmd_replay(args) -> int:
    report, model = _replay(args, learn=False)
    if args.out:
        write_replay(report, args.out, figures=not args.no_figures)
    if args.save_model and model is not None:
        model.save(args.save_model)
    if args.json:
        sys.stdout.write(report.dumps())
    else:
        print(replay_table(report))
    return EXIT_OK


def cmd_learn(args) -> int:
    report, model = _replay(args, learn=True)
    target = args.out or args.model
    if not target:
        raise _IOFailure("learn needs --model or --out for the checkpoint")
    model.save(target)
    cells = sum(len(t) for t in model.estimators.values())
    _emit(args, {"model": str(target), "cells": cells, "agreement": report.agreement},
          f"wrote {target}: {cells} estimator cells, replay agreement {report.agreement:.1%}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _config(args)
    report = analyze(_trace(args, cfg))
    if args.out:
        targets = Marginals.load(cfg.marginals)["visible_rate"]
        write_analysis(report, args.out, targets, figures=not args.no_figures)
    _emit(args, report, analysis_table(report))
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _config(args)
    marginals = Marginals.load(args.marginals or cfg.marginals)
    events = synth_trace(cfg.seed, marginals)
    if args.out:
        write_trace(events, args.out, provenance(cfg.seed, marginals))
        print(f"wrote {len(events)} events to {args.out}")
    else:
        sys.stdout.write(serialize_trace(events, provenance(cfg.seed, marginals)))
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="engine config JSON")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    engine_opts = argparse.ArgumentParser(add_help=False)
    engine_opts.add_argument("--rulepack")
    engine_opts.add_argument("--registry")
    engine_opts.add_argument("--model", help="learner checkpoint")
    engine_opts.add_argument("--seed", type=int)

    trace_opts = argparse.ArgumentParser(add_help=False)
    trace_opts.add_argument("trace_pos", nargs="?", metavar="TRACE", help="trace CSV")
    trace_opts.add_argument("--trace", help="trace CSV (default: synthesize from --seed)")
    trace_opts.add_argument("--out", help="output directory or file")
    trace_opts.add_argument("--no-figures", action="store_true")

    p = argparse.ArgumentParser(prog="arcontext", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="check a rulepack")
    v.add_argument("rulepack_path", nargs="?", default=str(data_path("study_library_v1.json")))
    v.add_argument("--registry", help="registry whose components scenarios must reference")
    v.set_defaults(func=cmd_validate)

    i = sub.add_parser("infer", parents=[common, engine_opts], help="one inference/adaptation cycle")
    i.add_argument("--context", required=True, help="context JSON: {timestamp_ms, entries, state?}")
    i.set_defaults(func=cmd_infer)

    r = sub.add_parser("replay", parents=[common, engine_opts, trace_opts], help="replay a trace")
    r.add_argument("--save-model", help="write the learner checkpoint after replay")
    r.set_defaults(func=cmd_replay)

    a = sub.add_parser("analyze", parents=[common, engine_opts, trace_opts], help="descriptive statistics")
    a.set_defaults(func=cmd_analyze)

    le = sub.add_parser("learn", parents=[common, engine_opts, trace_opts], help="train a checkpoint on a trace")
    le.set_defaults(func=cmd_learn)

    s = sub.add_parser("synth", parents=[common, engine_opts], help="generate a synthetic trace")
    s.add_argument("--marginals")
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except (FileNotFoundError, IsADirectoryError, PermissionError, _IOFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArContextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
