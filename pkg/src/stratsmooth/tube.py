"""Tubular neighborhoods with validated widths, and the interpolation weight.

The width profile of a stratum's tube is

    delta(y) = scale * smoothclamp(softmin(clearances(y))^2, cap),

where the clearances underestimate the distances to the frontier and to any
unrelated strata of dimension at most dim M.  Squaring gives the quadratic
decay toward the frontier that the validated conditions require; the clamp
saturates smoothly at the cap with slope at most one, which keeps delta
non-expansive.  ``validate_tube`` Monte-Carlo checks the four conditions the
smoothing stages rely on (field closeness across the tube, quadratic gap
bound, projection-differential continuity and boundedness), halving the
scale until all hold with a factor-two safety margin.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .bump import cutoff, cutoff_derivative
from .linalg import fd_gradient, fd_jacobian, power_softmin, spectral_norm
from .strata import CertificationReport, DomainError, ProjectionError, Stratification, Stratum, _rng, make_report


class TubeConstructionError(RuntimeError):
    """No admissible tube width found after the allowed number of halvings."""


@dataclass(frozen=True)
class TubeSpec:
    """Validated tube-width parameters for one stratum."""

    stratum_id: str
    scale: float = 0.125
    softmin_order: int = 8
    width_cap: float = 1.0
    certificate: Optional[CertificationReport] = None

    @property
    def validated(self) -> bool:
        return self.certificate is not None and self.certificate.passed

    def to_dict(self) -> dict:
        return {
            "stratum_id": self.stratum_id,
            "scale": self.scale,
            "softmin_order": self.softmin_order,
            "width_cap": self.width_cap,
            "certificate": self.certificate.to_dict() if self.certificate else None,
        }


class TubePoint(NamedTuple):
    x: np.ndarray
    foot: np.ndarray    # P_M(x)
    gap: float          # |x - foot|
    width: float        # delta(foot)
    ratio: float        # gap / width, < 1 inside the tube


def smoothclamp(u: float, cap: float) -> float:
    """C-infinity saturation: increasing, <= min(u, cap), slope <= 1."""
    if np.isinf(u):
        return cap
    return cap * u / (cap + u)


def tube_width(stratum: Stratum, y: np.ndarray, spec: TubeSpec) -> float:
    """Width delta(y) of the stratum's tube at an on-manifold point."""
    y = np.asarray(y, dtype=float)
    clearances = [c(y) for c in stratum.frontier_clearances] + [c(y) for c in stratum.extra_clearances]
    s = power_softmin(clearances, spec.softmin_order)
    if np.isinf(s):
        return spec.scale * spec.width_cap
    if s <= 0.0:
        raise DomainError(f"nonpositive clearance at a point claimed to lie on {stratum.id!r}")
    return spec.scale * smoothclamp(s * s, spec.width_cap)


def tube_membership(stratum: Stratum, x: np.ndarray, spec: TubeSpec) -> Optional[TubePoint]:
    """TubePoint if x lies strictly inside the tube, else None.

    Projection ties and undefined projections count as outside; open strata
    (dimension equal to the ambient) have zero-gap tubes consisting of the
    stratum itself.
    """
    x = np.asarray(x, dtype=float)
    try:
        foot = stratum.project(x)
    except ProjectionError:
        return None
    gap = float(np.linalg.norm(x - foot))
    try:
        width = tube_width(stratum, foot, spec)
    except DomainError:
        return None
    if width <= 0.0 or gap >= width:
        return None
    return TubePoint(x=x, foot=foot, gap=gap, width=width, ratio=gap / width)


def blend_weight(stratum: Stratum, x: np.ndarray, spec: TubeSpec) -> float:
    """Interpolation weight: cutoff(gap/width) inside the tube, 0 outside."""
    tp = tube_membership(stratum, x, spec)
    if tp is None:
        return 0.0
    return cutoff(tp.ratio)


def composed_width(stratum: Stratum, x: np.ndarray, spec: TubeSpec) -> float:
    """delta(P_M(x)); raises ProjectionError outside the projection domain."""
    return tube_width(stratum, stratum.project(x), spec)


def _grad_composed_width(stratum: Stratum, x: np.ndarray, spec: TubeSpec) -> np.ndarray:
    h = 1e-6 * max(1.0, float(np.linalg.norm(x)))
    return fd_gradient(lambda z: composed_width(stratum, z, spec), x, h=h, richardson=False)


def blend_weight_gradient(stratum: Stratum, x: np.ndarray, spec: TubeSpec) -> np.ndarray:
    """Gradient of the interpolation weight.

    Zero on the inner plateau (ratio <= 1/4), beyond the drop (ratio >= 3/4)
    and outside the tube.  In the transition annulus:

        grad = r * cutoff'(r) * [ (x - foot)/gap^2 - grad(delta o P_M)(x)/width ],

    using that the gradient of the distance-to-stratum factor is the unit
    normal displacement.  Raises DomainError on the stratum frontier, where
    the weight is not differentiable.
    """
    x = np.asarray(x, dtype=float)
    if stratum.frontier_clearances:
        near_frontier = min(c(x) for c in stratum.frontier_clearances)
        if near_frontier <= 1e-12 * (1.0 + float(np.linalg.norm(x))):
            raise DomainError("interpolation weight is not differentiable on the frontier")
    tp = tube_membership(stratum, x, spec)
    if tp is None or tp.ratio <= 0.25 or tp.ratio >= 0.75:
        return np.zeros_like(x)
    t = tp.ratio
    radial = (x - tp.foot) / (tp.gap ** 2)
    width_term = _grad_composed_width(stratum, x, spec) / tp.width
    return t * cutoff_derivative(t) * (radial - width_term)


def _projection_jacobian(stratum: Stratum, x: np.ndarray) -> np.ndarray:
    if stratum.projection_differential is not None:
        return stratum.projection_differential(x)
    h = 1e-6 * max(1.0, float(np.linalg.norm(x)))
    return fd_jacobian(stratum.project, x, h=h)


def _frontier_gap(strat: Stratification, stratum: Stratum, x: np.ndarray) -> float:
    """Distance from x to the stratum's frontier, via the lower strata."""
    lows = strat.below(stratum.id)
    if not lows:
        return float("inf")
    best = float("inf")
    for low in lows:
        try:
            best = min(best, float(np.linalg.norm(np.asarray(x, float) - low.project(x))))
        except ProjectionError:
            pass
    if np.isinf(best):
        for c in stratum.frontier_clearances:
            best = min(best, float(c(x)))
    return best


def validate_tube(
    strat: Stratification,
    spec: TubeSpec,
    field,
    epsilon,
    samples: int = 150,
    seed: int = 0,
    max_halvings: int = 20,
    safety: float = 2.0,
) -> TubeSpec:
    """Monte-Carlo validation of the tube conditions, shrinking the scale as needed.

    Conditions checked on points x = foot + r * normal drawn inside the tube
    (margins carry the given safety factor):

      closeness:     |field(x) - field(P_M x)| <= epsilon(x) / safety
      quadratic-gap: |x - P_M x| <= d(x, frontier)^2 / safety
      dp-continuity: ||DP_M(x) - DP_M(foot)||_2 <= d(foot, frontier) / safety
      dp-bound:      ||DP_M(x)||_2 <= 1 + 1/safety

    Open strata (zero-gap tubes) and empty frontiers make the corresponding
    conditions vacuous; the certificate says so.  On failure the scale is
    halved, up to ``max_halvings``; exhausting the budget raises
    TubeConstructionError naming the violated condition.
    """
    stratum = strat.by_id(spec.stratum_id)
    if stratum.is_open:
        cert = make_report(
            "tube-conditions", strat.name, 0, 0.0, 1.0,
            pair=None, details={
                "stratum": stratum.id, "trivial": True, "seed": seed,
                "note": "open stratum: zero-gap tube, all conditions vacuous",
            },
        )
        return dataclasses.replace(spec, certificate=cert)

    if samples < 1:
        raise ValueError("tube validation of a closed stratum needs at least one sample")
    has_frontier = bool(stratum.frontier_clearances)
    dp_bound = 1.0 + 1.0 / safety

    current = spec
    last_failure = "closeness"
    for trial in range(max_halvings + 1):
        rng = _rng(seed, "tube", stratum.id, trial)
        feet = stratum.sampler(samples, rng)
        margins = {"closeness": np.inf, "quadratic-gap": np.inf, "dp-continuity": np.inf, "dp-bound": np.inf}
        width_lip = 0.0
        failed = None
        prev_foot = None
        prev_width = None
        for i in range(samples):
            foot = feet[i]
            width = tube_width(stratum, foot, current)
            if prev_foot is not None:
                dist = float(np.linalg.norm(foot - prev_foot))
                if dist > 1e-9:
                    width_lip = max(width_lip, abs(width - prev_width) / dist)
            prev_foot, prev_width = foot, width
            normal = stratum.normal_projector(foot) @ rng.standard_normal(stratum.ambient_dim)
            norm = float(np.linalg.norm(normal))
            if norm < 1e-12:
                continue
            normal /= norm
            r = rng.uniform(0.05, 0.999) * width
            x = foot + r * normal
            try:
                refoot = stratum.project(x)
            except ProjectionError:
                continue
            gap = float(np.linalg.norm(x - refoot))

            margin = float(epsilon(x)) / safety - abs(float(field(x)) - float(field(refoot)))
            margins["closeness"] = min(margins["closeness"], margin)
            if margin < 0.0:
                failed = "closeness"
                break

            if has_frontier:
                dx = _frontier_gap(strat, stratum, x)
                margin = dx * dx / safety - gap
                margins["quadratic-gap"] = min(margins["quadratic-gap"], margin)
                if margin < 0.0:
                    failed = "quadratic-gap"
                    break

            dp_x = _projection_jacobian(stratum, x)
            margin = dp_bound - spectral_norm(dp_x)
            margins["dp-bound"] = min(margins["dp-bound"], margin)
            if margin < 0.0:
                failed = "dp-bound"
                break

            if has_frontier:
                dp_foot = _projection_jacobian(stratum, refoot)
                dfoot = _frontier_gap(strat, stratum, refoot)
                margin = dfoot / safety - spectral_norm(dp_x - dp_foot)
                margins["dp-continuity"] = min(margins["dp-continuity"], margin)
                if margin < 0.0:
                    failed = "dp-continuity"
                    break

        if failed is None:
            details = {
                "stratum": stratum.id,
                "scale": current.scale,
                "halvings": trial,
                "seed": seed,
                "safety": safety,
                "samples": samples,
                "width_lipschitz": width_lip,
                "margins": {k: (None if np.isinf(v) else float(v)) for k, v in margins.items()},
                "vacuous": [] if has_frontier else ["quadratic-gap", "dp-continuity"],
                "smoothness_order": None if np.isinf(stratum.smoothness_order) else stratum.smoothness_order,
            }
            cert = make_report("tube-conditions", strat.name, samples, 0.0, 1.0, details=details)
            return dataclasses.replace(current, certificate=cert)
        last_failure = failed
        current = dataclasses.replace(current, scale=current.scale / 2.0)
    raise TubeConstructionError(
        f"tube for stratum {stratum.id!r} still violates {last_failure!r} after {max_halvings} halvings"
    )
