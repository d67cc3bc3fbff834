"""Command-line front end.

Verbs: ``validate``, ``design``, ``simulate``, ``h2``.  Exit codes:

* 0  success
* 2  model file unreadable or not valid JSON
* 3  model/schema invariant violated (pointered message on stderr)
* 4  design rejected (bound or threshold not met; report still emitted)
* 5  numerical solver failure
* 6  simulation divergence

Reports and traces are written to a temp file and renamed into place, so
failure paths never leave partial files behind.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import heterog, homog, report, sim
from .errors import (
    GraphError,
    H2ContainError,
    HorizonTooShort,
    IllConditioned,
    InvalidSpectrum,
    ModelInvariantError,
    ModelParseError,
    NonFiniteState,
    NoStabilizingSolution,
    NotHurwitz,
    RegularityViolation,
    RegulatorInfeasible,
)
from .h2 import h2_norm, h2_norm_quadrature
from .modelfile import HOMOGENEOUS, ModelFile, load_model

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_REJECTED = 4
EXIT_SOLVER = 5
EXIT_DIVERGED = 6


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _apply_overrides(model: ModelFile, args) -> ModelFile:
    design = model.design
    updates = {}
    for field, attr in (("gamma", "gamma"), ("delta", "delta"),
                        ("eta", "eta"), ("c_p", "cp")):
        value = getattr(args, attr, None)
        if value is not None:
            updates[field] = value
    if updates:
        design = dataclasses.replace(design, **updates)
        model = dataclasses.replace(model, design=design)
    return model


def _run_design(model: ModelFile):
    """Design + certificate + assembly + H2 norm for either mode."""
    d = model.design
    if model.mode == HOMOGENEOUS:
        gains = homog.design_homogeneous(
            model.plant, model.partition, d.gamma,
            c_p=d.c_p, delta=d.delta, eta=d.eta,
        )
        cert = homog.verify_homog_certificate(
            model.plant, model.partition, gains, strict=False)
        clp = homog.assemble_error_system(model.plant, model.partition, gains)
        payload = report.build_homog_report(gains, cert, h2_norm(clp))
    else:
        gains = heterog.design_heterogeneous(
            model.agents, model.leader, model.partition, d.gamma,
            delta=d.delta, eta=d.eta,
        )
        cert = heterog.verify_heterog_certificate(
            model.agents, model.leader, model.partition, gains, strict=False)
        clp = heterog.assemble_error_system(
            model.agents, model.leader, model.partition, gains)
        payload = report.build_heterog_report(gains, cert, h2_norm(clp))
    return gains, clp, payload


def cmd_validate(args) -> int:
    model = load_model(args.path)
    plants = [model.plant] if model.mode == HOMOGENEOUS else list(model.agents)
    for i, plant in enumerate(plants):
        try:
            homog.check_regularity(plant, strict_identity=False)
        except RegularityViolation as exc:
            pointer = "plant" if model.mode == HOMOGENEOUS else f"agents[{i}]"
            raise ModelInvariantError(pointer, str(exc)) from exc
    print(f"{args.path}: valid {model.mode} model"
          f" ({model.graph.num_followers} followers,"
          f" {model.graph.num_leaders} leaders)")
    return EXIT_OK


def cmd_design(args) -> int:
    model = _apply_overrides(load_model(args.path), args)
    gains, _, payload = _run_design(model)
    text = report.render_json(payload)
    if args.out:
        _write_atomic(Path(args.out), text)
        sys.stdout.write(report.render_text(payload))
    else:
        sys.stdout.write(text)
    return EXIT_OK if payload["accepted"] else EXIT_REJECTED


def cmd_h2(args) -> int:
    model = _apply_overrides(load_model(args.path), args)
    _, clp, payload = _run_design(model)
    result = {
        "h2_norm": payload["h2_norm"],
        "h2_cost": payload["h2_cost"],
        "sqrt_gamma": payload["sqrt_gamma"],
        "accepted": payload["accepted"],
    }
    if args.quadrature:
        oracle = h2_norm_quadrature(clp)
        result["quadrature_norm"] = oracle.norm
        result["relative_gap"] = (
            abs(oracle.norm - payload["h2_norm"]) / payload["h2_norm"]
            if payload["h2_norm"] else 0.0
        )
    sys.stdout.write(report.render_json(result))
    return EXIT_OK if payload["accepted"] else EXIT_REJECTED


def cmd_simulate(args) -> int:
    model = _apply_overrides(load_model(args.path), args)
    if model.simulation is None:
        raise ModelInvariantError("simulation", "section required by this command")
    gains, _, payload = _run_design(model)
    if not payload["accepted"]:
        sys.stdout.write(report.render_json(payload))
        return EXIT_REJECTED

    settings = model.simulation
    disturbance = settings.disturbance
    if args.seed is not None:
        disturbance = dataclasses.replace(disturbance, seed=args.seed)
    if model.mode == HOMOGENEOUS:
        trace = sim.simulate_homogeneous(
            model.plant, model.partition, gains,
            settings.x0_followers, settings.x0_leaders, w0=settings.w0,
            disturbance=disturbance, T=settings.T, dt=settings.dt,
        )
    else:
        trace = sim.simulate_heterogeneous(
            model.agents, model.leader, model.partition, gains,
            settings.x0_followers, settings.x0_leaders,
            w0=settings.w0, v0=settings.v0,
            disturbance=disturbance, T=settings.T, dt=settings.dt,
        )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "trace.csv"
    tmp = csv_path.with_name(csv_path.name + ".tmp")
    sim.write_trace_csv(trace, tmp)
    os.replace(tmp, csv_path)
    written = [str(csv_path)]
    if args.svg:
        from .plots import save_trace_figures

        written += [str(p) for p in save_trace_figures(trace, out_dir)]

    metrics = sim.containment_metrics(trace)
    sys.stdout.write(report.render_json({
        "final_hull_error": metrics.final_hull_error,
        "final_eps_norm": metrics.final_eps_norm,
        "decay_ratio": metrics.decay_ratio,
        "files": written,
    }))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="h2contain",
        description="Design, certify, and simulate H2-suboptimal containment"
                    " protocols for linear multi-agent systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_design_flags(p):
        p.add_argument("--gamma", type=float, default=None,
                       help="override the cost budget gamma")
        p.add_argument("--delta", type=float, default=None,
                       help="override the feedback Riccati perturbation")
        p.add_argument("--eta", type=float, default=None,
                       help="override the observer Riccati perturbation")
        p.add_argument("--cp", type=float, default=None,
                       help="override the coupling parameter (homogeneous mode)")

    p = sub.add_parser("validate", help="parse and validate a model file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("design", help="design gains and emit the report")
    p.add_argument("path")
    p.add_argument("--out", default=None, help="write the JSON report here"
                   " (human-readable summary then goes to stdout)")
    add_design_flags(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="design, simulate, and export the trace")
    p.add_argument("path")
    p.add_argument("--out-dir", default=".", help="directory for trace.csv and figures")
    p.add_argument("--seed", type=int, default=None,
                   help="override the disturbance seed")
    p.add_argument("--svg", action="store_true",
                   help="also render SVG figures per signal group")
    add_design_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("h2", help="print the closed-loop H2 norm")
    p.add_argument("path")
    p.add_argument("--quadrature", action="store_true",
                   help="also run the impulse-response quadrature cross-check")
    add_design_flags(p)
    p.set_defaults(func=cmd_h2)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ModelInvariantError, GraphError, RegularityViolation,
            InvalidSpectrum) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except NonFiniteState as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (NoStabilizingSolution, IllConditioned, NotHurwitz,
            RegulatorInfeasible, HorizonTooShort) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except H2ContainError as exc:  # anything else from the library
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
