import numpy as np
import pytest
from scipy.integrate import quad

from stratsmooth.bump import (
    ETA,
    RAMP_END,
    RAMP_START,
    SLOPE_BOUND,
    TILT_BOUND,
    certify,
    cutoff,
    cutoff_derivative,
    ramp_density,
    _get_table,
)


def test_plateau_and_tail_values():
    assert cutoff(0.2) == 1.0
    assert cutoff(0.0) == 1.0
    assert cutoff(0.8) == 0.0
    assert cutoff(5.0) == 0.0


def test_midpoint_by_symmetry():
    # the ramp is symmetric about 1/2, so the half mass sits exactly there
    assert abs(cutoff(0.5) - 0.5) <= 1e-12


def test_midpoint_derivative_is_ramp_height():
    assert abs(cutoff_derivative(0.5) + 1.0 / (RAMP_END - RAMP_START)) <= 1e-12


def test_derivative_zero_on_plateau():
    assert cutoff_derivative(0.1) == 0.0
    assert cutoff_derivative(0.9) == 0.0


def test_domain_error():
    with pytest.raises(ValueError):
        cutoff(-0.1)
    with pytest.raises(ValueError):
        cutoff_derivative(np.array([0.3, -1e-9]))


def test_dense_certificate():
    cert = certify(step=1e-4)
    assert cert["min_value"] >= 0.0
    assert cert["max_value"] <= 1.0
    assert cert["plateau_defect"] == 0.0
    assert cert["tail_defect"] == 0.0
    assert cert["monotone_defect"] <= 1e-12
    assert cert["slope_margin"] >= 0.15
    assert cert["tilt_margin"] >= 0.15
    assert cert["max_slope"] <= SLOPE_BOUND
    assert cert["max_tilt"] <= TILT_BOUND


def test_derivative_matches_finite_differences():
    ts = np.linspace(1e-3, 1.2, 300)
    h = 1e-6
    fd = (cutoff(ts + h) - cutoff(np.maximum(ts - h, 0.0))) / (2 * h)
    assert np.max(np.abs(fd - cutoff_derivative(ts))) <= 1e-6


def test_endpoint_flatness():
    # all mass lies inside the mollified ramp support
    for t in np.linspace(0.0, RAMP_START - ETA, 50):
        assert cutoff_derivative(t) == 0.0
    for t in np.linspace(RAMP_END + ETA, 2.0, 50):
        assert cutoff_derivative(t) == 0.0


def test_table_matches_adaptive_quadrature():
    table = _get_table()

    def raw(u):
        return np.exp(-1.0 / (1.0 - u * u)) if abs(u) < 1 else 0.0

    mass, _ = quad(raw, -1, 1, epsabs=1e-14, epsrel=1e-13, limit=200)
    for x in [-0.95, -0.4, 0.0, 0.33, 0.77, 0.999]:
        ref, _ = quad(raw, -1, x, epsabs=1e-14, epsrel=1e-13, limit=200)
        assert abs(table.cdf(np.array([x]))[0] - ref / mass) <= 1e-12


def test_cutoff_value_against_quadrature():
    # integral of the mollified ramp density from 0 to t, by quadrature
    for t in [0.3, 0.45, 0.6, 0.7]:
        ref, _ = quad(lambda s: ramp_density(np.array([s]))[0], 0.0, t, epsabs=1e-12, limit=300)
        assert abs((1.0 - cutoff(t)) - ref) <= 1e-9


def test_vectorized_evaluation():
    ts = np.linspace(0, 1, 17)
    vals = cutoff(ts)
    assert vals.shape == ts.shape
    assert np.all((vals >= 0) & (vals <= 1))
    assert isinstance(cutoff(0.3), float)
