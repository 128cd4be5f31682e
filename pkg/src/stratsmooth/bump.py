"""Certified one-dimensional cutoff used by the tube interpolation weight.

``cutoff`` is 1 on [0, 1/4], 0 on [3/4, inf), infinitely smooth, and its
slope never exceeds 7/3 in magnitude; additionally sup |t * cutoff'(t)| stays
under 7/4.  Both constants are load-bearing in the Lipschitz bookkeeping of
the smoothing stages, which is why the naive cubic smoothstep (peak slope 3
over a width-1/2 window) is not usable here.

Construction: cutoff(t) = 1 - integral_0^t rho, where rho is the uniform
density on [RAMP_START, RAMP_END] (height 1/0.46 ~= 2.174 < 7/3) convolved
with a compactly supported mollifier of half-width ETA.  The mollifier's
first and second antiderivatives have no closed form, so they are tabulated
once as piecewise Chebyshev polynomials (absolute accuracy well below 1e-12)
and evaluated from the table afterwards.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.chebyshev import Chebyshev

# Transition endpoints and mollifier half-width.  The smoothed ramp is
# supported on [RAMP_START - ETA, RAMP_END + ETA] = [0.255, 0.745], safely
# inside (1/4, 3/4), and its height 1/(RAMP_END - RAMP_START) clears the
# 7/3 slope budget with ~0.16 margin.
RAMP_START = 0.27
RAMP_END = 0.73
ETA = 0.015

SLOPE_BOUND = 7.0 / 3.0
TILT_BOUND = 7.0 / 4.0

_PANELS = 24
_DEGREE = 24


class _MollifierTable:
    """Piecewise-Chebyshev antiderivatives of the standard compact mollifier.

    h(u) = exp(-1/(1 - u^2)) on (-1, 1), normalized to unit mass.  The table
    stores, per panel, Chebyshev representations of the first antiderivative
    H1 (the CDF) and the second antiderivative H2, with running constants so
    the pieces join exactly across panels.
    """

    def __init__(self, panels: int = _PANELS, degree: int = _DEGREE):
        edges = np.linspace(-1.0, 1.0, panels + 1)

        def raw(u):
            u = np.asarray(u, dtype=float)
            out = np.zeros_like(u)
            inside = np.abs(u) < 1.0
            ui = u[inside]
            out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
            return out

        first = []
        second = []
        c1 = 0.0  # running value of H1 at the left edge
        c2 = 0.0  # running value of H2 at the left edge
        for a, b in zip(edges[:-1], edges[1:]):
            ch = Chebyshev.interpolate(raw, degree, domain=[a, b])
            p1 = ch.integ(lbnd=a) + c1
            p2 = p1.integ(lbnd=a) + c2
            first.append(p1)
            second.append(p2)
            c1 = float(p1(b))
            c2 = float(p2(b))
        mass = c1
        self.edges = edges
        self.first = [p / mass for p in first]
        self.second = [p / mass for p in second]
        self.second_at_one = c2 / mass

    def _eval(self, pieces, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(pieces) - 1)
        for j in range(len(pieces)):
            mask = (idx == j) & (x > -1.0) & (x < 1.0)
            if np.any(mask):
                out[mask] = pieces[j](x[mask])
        return out

    def cdf(self, x):
        """H1(x) = integral of the unit-mass mollifier from -1 to x."""
        x = np.asarray(x, dtype=float)
        out = self._eval(self.first, x)
        out[x >= 1.0] = 1.0
        return out

    def cdf_integral(self, x):
        """H2(x) = integral of H1 from -1 to x; equals x for x >= 1."""
        x = np.asarray(x, dtype=float)
        out = self._eval(self.second, x)
        hi = x >= 1.0
        out[hi] = self.second_at_one + (x[hi] - 1.0)
        return out


_table: _MollifierTable | None = None


def _get_table() -> _MollifierTable:
    global _table
    if _table is None:
        _table = _MollifierTable()
    return _table


def _check_domain(t: np.ndarray) -> None:
    if np.any(t < 0.0):
        raise ValueError("cutoff is only defined for t >= 0")


def ramp_density(t):
    """Derivative mass of the cutoff: the mollified uniform density on the ramp."""
    t = np.asarray(t, dtype=float)
    _check_domain(t)
    table = _get_table()
    width = RAMP_END - RAMP_START
    out = np.zeros_like(t)
    active = (t > RAMP_START - ETA) & (t < RAMP_END + ETA)
    if np.any(active):
        ta = t[active]
        out[active] = (table.cdf((ta - RAMP_START) / ETA) - table.cdf((ta - RAMP_END) / ETA)) / width
    return out


def cutoff(t):
    """Value of the certified cutoff in [0, 1]; accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    _check_domain(t)
    table = _get_table()
    width = RAMP_END - RAMP_START
    out = np.empty_like(t)
    lo = t <= RAMP_START - ETA
    hi = t >= RAMP_END + ETA
    mid = ~(lo | hi)
    out[lo] = 1.0
    out[hi] = 0.0
    if np.any(mid):
        tm = t[mid]
        ramp = ETA / width * (
            table.cdf_integral((tm - RAMP_START) / ETA) - table.cdf_integral((tm - RAMP_END) / ETA)
        )
        out[mid] = np.clip(1.0 - ramp, 0.0, 1.0)
    return float(out[0]) if scalar else out


def cutoff_derivative(t):
    """Derivative of the cutoff: nonpositive, bounded by 7/3 in magnitude."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = -ramp_density(t)
    return float(out[0]) if scalar else out


def certify(step: float = 1e-4, upper: float = 1.5) -> dict:
    """Dense-sampling certificate for the cutoff's contracted bounds.

    Samples [0, upper] at the given step and reports the observed range,
    monotonicity defect, slope margin against 7/3, and tilt margin against
    sup |t * cutoff'(t)| <= 7/4.
    """
    t = np.arange(0.0, upper + step, step)
    v = cutoff(t)
    d = cutoff_derivative(t)
    plateau = v[t <= 0.25]
    tail = v[t >= 0.75]
    return {
        "step": step,
        "min_value": float(v.min()),
        "max_value": float(v.max()),
        "plateau_defect": float(np.max(np.abs(plateau - 1.0))) if plateau.size else 0.0,
        "tail_defect": float(np.max(np.abs(tail))) if tail.size else 0.0,
        "monotone_defect": float(max(0.0, np.max(np.diff(v)))),
        "max_slope": float(np.max(np.abs(d))),
        "slope_margin": float(SLOPE_BOUND - np.max(np.abs(d))),
        "max_tilt": float(np.max(np.abs(t * d))),
        "tilt_margin": float(TILT_BOUND - np.max(np.abs(t * d))),
    }
