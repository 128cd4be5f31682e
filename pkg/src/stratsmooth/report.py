"""Run metrics, deterministic JSON reports, and CSV sample dumps.

Reports never contain wall-clock data or machine identifiers: with a fixed
seed two runs of the same config produce byte-identical files.  Timing is
printed to the console instead.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .linalg import fd_gradient
from .pseudoinverse import generator_probe, pinv_pairing
from .smoothing import SmoothedField, check_local_constancy
from .strata import _rng
from .tube import tube_membership


def jsonable(obj):
    """Recursively convert numpy scalars/arrays so json.dump accepts them."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and (np.isnan(obj) or np.isinf(obj)):
        return repr(obj)
    return obj


def write_report(path: str, document: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(jsonable(document), fh, sort_keys=True, indent=2, ensure_ascii=True)
        fh.write("\n")


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    """RFC-4180 output: CRLF line endings, minimal quoting, header row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(c) for c in row])


def _format_cell(cell):
    if isinstance(cell, (float, np.floating)):
        return repr(float(cell))
    if isinstance(cell, (int, np.integer)):
        return int(cell)
    return cell


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def closeness_metric(g: SmoothedField, box, count: int, seed: int) -> dict:
    rng = _rng(seed, "metric", "closeness")
    lo, hi = box
    pts = rng.uniform(lo, hi, size=(count, g.base.dim))
    worst = 0.0
    worst_point = None
    for p in pts:
        ratio = abs(g.base(p) - g(p)) / g.epsilon(p)
        if ratio > worst:
            worst = ratio
            worst_point = [float(v) for v in p]
    return {"samples": count, "max_ratio": worst, "worst_point": worst_point, "passed": bool(worst < 1.0)}


def tangency_metric(g: SmoothedField, count: int, seed: int, tol: float = 1e-5) -> dict:
    out = {}
    for stratum in g.stratification.ordered_by_dimension():
        if stratum.is_open:
            continue
        rng = _rng(seed, "metric", "tangency", stratum.id)
        feet = stratum.sampler(count, rng)
        worst = 0.0
        for y in feet:
            grad = fd_gradient(g.value, y)
            normal_part = stratum.normal_projector(y) @ grad
            worst = max(worst, float(np.linalg.norm(normal_part)) / (1.0 + float(np.linalg.norm(grad))))
        out[stratum.id] = {"samples": count, "max_residual": worst, "passed": bool(worst <= tol)}
    return out


def lipschitz_metric(g: SmoothedField, box, pairs: int, seed: int) -> dict:
    rng = _rng(seed, "metric", "lipschitz")
    lo, hi = box
    a = rng.uniform(lo, hi, size=(pairs, g.base.dim))
    b = rng.uniform(lo, hi, size=(pairs, g.base.dim))
    worst = 0.0
    for p, q in zip(a, b):
        d = float(np.linalg.norm(p - q))
        if d < 1e-9:
            continue
        worst = max(worst, abs(g(p) - g(q)) / d)
    m = len(g.stratification.strata)
    ledger = g.lip_ledger
    stage_bound = (12.0 ** m) * (g.base.lip + 0.01)
    return {
        "pairs": pairs,
        "sampled_lip": worst,
        "ledger_bound": ledger,
        "stage_bound_no_presmooth": stage_bound,
        "passed": bool(worst <= ledger + 1e-9),
    }


def constancy_metric(g: SmoothedField, count: int, seed: int) -> dict:
    out = {}
    for stratum in g.stratification.ordered_by_dimension():
        if stratum.is_open:
            continue
        rep = check_local_constancy(g, stratum, samples=count, seed=seed)
        out[stratum.id] = rep.to_dict()
    return out


def observable_metric(g: SmoothedField, bessel_delta: float, seed: int) -> dict:
    """Continuity probe of the pseudoinverse pairing across each closed stratum.

    Approaches sampled stratum points along normal rays at geometric
    parameters and reports the oscillation of the pairing over the tightest
    decade, plus a growth ratio for the generator probe.
    """
    out = {}
    shape = g.stratification.matrix_shape
    if shape is None:
        return {"skipped": "not a matrix problem"}
    for stratum in g.stratification.ordered_by_dimension():
        if stratum.is_open:
            continue
        rng = _rng(seed, "metric", "observable", stratum.id)
        feet = stratum.sampler(4, rng)
        worst_osc = 0.0
        probe_vals = []
        near_vals = []
        for y in feet:
            normal = stratum.normal_projector(y) @ rng.standard_normal(stratum.ambient_dim)
            norm = float(np.linalg.norm(normal))
            if norm < 1e-12:
                continue
            normal /= norm
            base = pinv_pairing(g, y)
            vals = [base]
            for k in range(8, 13):
                for sign in (1.0, -1.0):
                    t = sign * 2.0 ** (-k)
                    x = y + t * normal
                    vals.append(pinv_pairing(g, x))
                    probe_vals.append(abs(generator_probe(g, x, bessel_delta)))
                    if k >= 11:
                        near_vals.append(probe_vals[-1])
            worst_osc = max(worst_osc, float(np.max(vals) - np.min(vals)))
        med = float(np.median(probe_vals)) if probe_vals else 0.0
        near_max = float(np.max(near_vals)) if near_vals else 0.0
        growth = near_max / max(med, 1e-12)
        out[stratum.id] = {
            "pairing_oscillation": worst_osc,
            "pairing_passed": bool(worst_osc <= 1e-4),
            "generator_bulk_median": med,
            "generator_near_max": near_max,
            "generator_growth_ratio": growth,
            "generator_passed": bool(growth <= 2.0 or near_max <= 1e-8),
        }
    return out


def sweep_rows(g: SmoothedField, points: np.ndarray, params: np.ndarray, bessel_delta: float) -> list[list]:
    """One CSV row per path point: parameter, value, gradient norm, normal
    residual against the innermost enclosing tube, pairing and probe."""
    rows = []
    is_matrix = g.stratification.matrix_shape is not None
    for t, x in zip(params, points):
        try:
            val = g(x)
            grad = g.grad(x)
            gnorm = float(np.linalg.norm(grad))
            residual = ""
            inner = None
            for record in sorted(g.stages, key=lambda r: r.dim):
                if record.trivial or record.spec is None:
                    continue
                stratum = g.stratification.by_id(record.stratum_id)
                tp = tube_membership(stratum, x, record.spec)
                if tp is not None:
                    inner = (stratum, tp)
                    break
            if inner is not None:
                stratum, _ = inner
                foot = stratum.project(x)
                normal_part = stratum.normal_projector(foot) @ grad
                residual = float(np.linalg.norm(normal_part)) / (1.0 + gnorm)
            if is_matrix:
                obs = pinv_pairing(g, x)
                gen = generator_probe(g, x, bessel_delta)
            else:
                obs = ""
                gen = ""
            rows.append([float(t), val, gnorm, residual, obs, gen, ""])
        except Exception as exc:  # noqa: BLE001 - row-level fault isolation
            rows.append([float(t), "", "", "", "", "", f"error:{type(exc).__name__}"])
    return rows


SWEEP_HEADER = ["t", "g", "grad_norm", "normal_residual", "observable", "generator", "flag"]
