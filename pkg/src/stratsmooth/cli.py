"""Config-driven command line: run, sweep, and certify subcommands.

Exit codes: 0 success, 2 certification failure, 3 pipeline abort, 4 config
error.  All outputs are deterministic for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .catalog import load_problem
from .config import SCHEMA_VERSION, ConfigError, RunConfig, parse_config
from .fields import check_positive_on_box, make_epsilon, make_field
from .report import (
    SWEEP_HEADER,
    closeness_metric,
    constancy_metric,
    lipschitz_metric,
    observable_metric,
    sweep_rows,
    tangency_metric,
    write_csv,
    write_report,
)
from .smoothing import PipelineAbort, SmoothingOptions, smooth_approximate
from .strata import check_frontier, check_normal_flatness, check_whitney_a
from .tube import TubeConstructionError, TubeSpec, validate_tube

EXIT_OK = 0
EXIT_CERTIFICATION = 2
EXIT_PIPELINE = 3
EXIT_CONFIG = 4


def _default_checks(cfg: RunConfig, strat) -> list[str]:
    checks = ["closeness", "tangency", "lipschitz"]
    if cfg.target_order >= 2:
        checks.append("constancy")
    if strat.matrix_shape is not None:
        checks.append("observable")
    return checks


def _build(cfg: RunConfig):
    strat = load_problem(cfg.problem)
    dim = strat.ambient_dim
    box = cfg.resolved_box(dim)
    field = make_field(cfg.field_spec, dim, box=box)
    epsilon = make_epsilon(cfg.epsilon_spec, dim, box=box)
    check_positive_on_box(epsilon, box, seed=cfg.seed)
    options = SmoothingOptions(
        target_order=cfg.target_order,
        pre_smooth=cfg.pre_smooth,
        freeze_width=cfg.freeze_width,
        support_box=cfg.support_box,
        seed=cfg.seed,
        tube_samples=cfg.counts.get("tube", 150),
        certification_samples=cfg.counts.get("certify", 120),
    )
    smoothed = smooth_approximate(field, epsilon, strat, options, box=box)
    return strat, box, smoothed


def _problem_block(strat) -> dict:
    return {
        "name": strat.name,
        "ambient_dim": strat.ambient_dim,
        "matrix_shape": list(strat.matrix_shape) if strat.matrix_shape else None,
        "strata": [{"id": s.id, "dim": s.dim} for s in strat.ordered_by_dimension()],
        "frontier": [list(p) for p in strat.pairs()],
        "claimed_whitney": strat.claimed_whitney,
        "claimed_normally_flat": strat.claimed_normally_flat,
    }


def cmd_run(cfg: RunConfig, out_dir: str | None) -> int:
    started = time.perf_counter()
    try:
        strat, box, smoothed = _build(cfg)
    except PipelineAbort as exc:
        if exc.stage == "certification":
            print(f"certification failure: {exc}", file=sys.stderr)
            return EXIT_CERTIFICATION
        print(f"pipeline abort at stage {exc.stage!r}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except TubeConstructionError as exc:
        print(f"pipeline abort: {exc}", file=sys.stderr)
        return EXIT_PIPELINE

    checks = cfg.checks if cfg.checks is not None else _default_checks(cfg, strat)
    metrics = {}
    if "closeness" in checks:
        metrics["closeness"] = closeness_metric(smoothed, box, cfg.counts["closeness"], cfg.seed)
    if "tangency" in checks:
        metrics["tangency"] = tangency_metric(smoothed, cfg.counts["tangency"], cfg.seed)
    if "lipschitz" in checks:
        metrics["lipschitz"] = lipschitz_metric(smoothed, box, cfg.counts["lipschitz"], cfg.seed)
    if "constancy" in checks:
        metrics["local_constancy"] = constancy_metric(smoothed, cfg.counts["constancy"], cfg.seed)
    if "observable" in checks:
        metrics["observable"] = observable_metric(smoothed, cfg.bessel_delta, cfg.seed)

    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "run",
        "config": cfg.raw,
        "problem": _problem_block(strat),
        "certificates": [c.to_dict() for c in smoothed.certificates],
        "stages": smoothed.to_metadata()["stages"],
        "pipeline": smoothed.to_metadata(),
        "metrics": metrics,
        "checks": checks,
        "status": "pass",
    }

    report_path = _out_path(cfg.report_path, out_dir)
    samples_path = _out_path(cfg.samples_path, out_dir)
    write_report(report_path, report)

    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 9000]))
    lo, hi = box
    count = min(cfg.counts["closeness"], 2000)
    pts = rng.uniform(lo, hi, size=(count, strat.ambient_dim))
    header = ["index"] + [f"x{i}" for i in range(strat.ambient_dim)] + ["f", "g", "epsilon", "err_over_eps"]
    rows = []
    for i, p in enumerate(pts):
        fv = smoothed.base(p)
        gv = smoothed(p)
        ev = smoothed.epsilon(p)
        rows.append([i, *[float(v) for v in p], fv, gv, ev, abs(fv - gv) / ev])
    write_csv(samples_path, header, rows)

    elapsed = time.perf_counter() - started
    print(f"run complete in {elapsed:.1f}s: report at {report_path}, samples at {samples_path}")
    return EXIT_OK


def cmd_certify(cfg: RunConfig, check: str, out_dir: str | None) -> int:
    strat = load_problem(cfg.problem)
    reports = []
    if check == "frontier":
        reports.append(check_frontier(strat, seed=cfg.seed))
    elif check == "whitney":
        for low, high in strat.pairs():
            reports.append(check_whitney_a(strat, low, high, seed=cfg.seed))
    elif check == "flatness":
        for low, high in strat.pairs():
            reports.append(check_normal_flatness(strat, low, high, samples=cfg.counts["certify"], seed=cfg.seed))
    elif check == "tube":
        dim = strat.ambient_dim
        box = cfg.resolved_box(dim)
        field = make_field(cfg.field_spec, dim, box=box)
        epsilon = make_epsilon(cfg.epsilon_spec, dim, box=box)
        share = epsilon.scaled(1.0 / (len(strat.strata) + 1))
        for stratum in strat.ordered_by_dimension():
            spec = TubeSpec(stratum_id=stratum.id)
            try:
                spec = validate_tube(strat, spec, field, share, samples=cfg.counts["tube"], seed=cfg.seed)
                reports.append(spec.certificate)
            except TubeConstructionError as exc:
                print(f"tube construction failed: {exc}", file=sys.stderr)
                return EXIT_PIPELINE
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown check {check!r}")

    passed = all(r.passed for r in reports)
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "certify",
        "check": check,
        "config": cfg.raw,
        "problem": _problem_block(strat),
        "certificates": [r.to_dict() for r in reports],
        "status": "pass" if passed else "certification-failure",
    }
    path = _out_path(cfg.report_path, out_dir)
    write_report(path, report)
    print(f"certify {check}: {'pass' if passed else 'FAIL'}; report at {path}")
    return EXIT_OK if passed else EXIT_CERTIFICATION


def _parse_path_spec(spec: str, dim: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        if os.path.exists(spec):
            with open(spec, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        else:
            doc = json.loads(spec)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse path spec: {exc}") from None
    kind = doc.get("kind", "segment")
    if kind == "segment":
        start = np.asarray(doc["start"], float)
        stop = np.asarray(doc["stop"], float)
        num = int(doc.get("num", 101))
        if start.shape != (dim,) or stop.shape != (dim,):
            raise ConfigError(f"path endpoints must have {dim} coordinates")
        params = np.linspace(0.0, 1.0, num)
        points = start[None, :] + params[:, None] * (stop - start)[None, :]
        return params, points
    if kind == "points":
        points = np.asarray(doc["points"], float)
        if points.ndim != 2 or points.shape[1] != dim:
            raise ConfigError(f"path points must be rows of {dim} coordinates")
        params = np.asarray(doc.get("params", np.arange(len(points))), float)
        return params, points
    raise ConfigError(f"unknown path kind {kind!r}")


def cmd_sweep(cfg: RunConfig, path_spec: str, out_dir: str | None) -> int:
    try:
        strat, box, smoothed = _build(cfg)
    except PipelineAbort as exc:
        code = EXIT_CERTIFICATION if exc.stage == "certification" else EXIT_PIPELINE
        print(f"cannot sweep: {exc}", file=sys.stderr)
        return code
    params, points = _parse_path_spec(path_spec, strat.ambient_dim)
    rows = sweep_rows(smoothed, points, params, cfg.bessel_delta)
    path = _out_path(cfg.samples_path, out_dir)
    write_csv(path, SWEEP_HEADER, rows)
    print(f"sweep complete: {len(rows)} rows at {path}")
    return EXIT_OK


def _out_path(name: str, out_dir: str | None) -> str:
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        return os.path.join(out_dir, os.path.basename(name))
    parent = os.path.dirname(name)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return name


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratsmooth",
        description="Gradient-tangent smoothing on stratified sets: build, certify, probe.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="certify, build the pipeline, verify, and write reports")
    run.add_argument("--config", required=True, help="path to a JSON run config")
    run.add_argument("--out-dir", default=None, help="directory for report.json / samples.csv")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")

    sweep = sub.add_parser("sweep", help="evaluate the pipeline along a parametrized path")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--path", required=True, help="path spec: JSON file or inline JSON")
    sweep.add_argument("--out-dir", default=None)
    sweep.add_argument("--seed", type=int, default=None)

    certify = sub.add_parser("certify", help="run one certification family and report")
    certify.add_argument("--config", required=True)
    certify.add_argument("--check", required=True, choices=["frontier", "whitney", "flatness", "tube"])
    certify.add_argument("--out-dir", default=None)
    certify.add_argument("--seed", type=int, default=None)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.raw = dict(cfg.raw)
            cfg.raw.setdefault("sampling", {})
            cfg.raw["sampling"] = dict(cfg.raw["sampling"], seed=args.seed)
        if args.command == "run":
            return cmd_run(cfg, args.out_dir)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.path, args.out_dir)
        if args.command == "certify":
            return cmd_certify(cfg, args.check, args.out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
