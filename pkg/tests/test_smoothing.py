import numpy as np
import pytest

from stratsmooth.catalog import (
    axis_stratification,
    load_problem,
    rank_stratification,
    simplex2d_stratification,
)
from stratsmooth.fields import (
    bump_field,
    constant_field,
    coordinate_field,
    distance_field,
    squared_norm_field,
)
from stratsmooth.linalg import fd_gradient
from stratsmooth.smoothing import (
    PipelineAbort,
    SmoothingOptions,
    check_local_constancy,
    induction_step,
    pre_smooth,
    smooth_approximate,
)
from stratsmooth.strata import Stratification, Stratum
from stratsmooth.tube import TubeSpec, tube_width, validate_tube


BOX2 = (-2 * np.ones(2), 2 * np.ones(2))
BOX4 = (-2 * np.ones(4), 2 * np.ones(4))


def origin_stratification():
    origin = Stratum(
        id="origin", dim=0, ambient_dim=2,
        project=lambda x: np.zeros(2),
        tangent_projector=lambda y: np.zeros((2, 2)),
        sampler=lambda n, rng: np.zeros((n, 2)),
    )
    return Stratification(strata=(origin,), frontier=frozenset(), name="origin",
                          claimed_whitney=True, claimed_normally_flat=True)


# ---------------------------------------------------------------------------
# pre-smoothing
# ---------------------------------------------------------------------------

def test_pre_smooth_preserves_affine():
    f = coordinate_field(0, 2)
    sm = pre_smooth(f, constant_field(0.5, 2), r=0.01, box=BOX2)
    for x in [np.array([0.3, -1.2]), np.array([-1.7, 0.4])]:
        assert sm(x) == pytest.approx(f(x), abs=1e-12)


def test_pre_smooth_absolute_value():
    f = distance_field(np.zeros(1))
    box = (-2 * np.ones(1), 2 * np.ones(1))
    sm = pre_smooth(f, constant_field(0.1, 1), r=0.05, box=box)
    xs = np.linspace(-2, 2, 400)
    assert max(abs(sm(np.array([x])) - abs(x)) for x in xs) <= 0.1
    lips = max(
        abs(sm(np.array([x + 1e-4])) - sm(np.array([x]))) / 1e-4 for x in xs
    )
    assert lips <= 1.0 + 0.05


def test_pre_smooth_refuses_high_dimension():
    f = constant_field(1.0, 7)
    with pytest.raises(PipelineAbort):
        pre_smooth(f, constant_field(0.1, 7), r=0.01, box=(-np.ones(7), np.ones(7)))


def test_pre_smooth_skipped_for_smooth_inputs():
    f = squared_norm_field(2, box=BOX2)
    strat = axis_stratification(2)
    g = smooth_approximate(f, constant_field(0.1, 2), strat, SmoothingOptions(pre_smooth="auto"))
    assert not g.pre_smoothed


# ---------------------------------------------------------------------------
# induction step
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def axis_stage():
    strat = axis_stratification(2)
    f = squared_norm_field(2, box=BOX2)
    eps = constant_field(0.5, 2)
    spec = validate_tube(strat, TubeSpec("axis", scale=0.125), f, eps.scaled(0.5), samples=60)
    g = induction_step(f, strat.by_id("axis"), spec)
    return strat, f, spec, g


def test_step_agrees_on_stratum(axis_stage):
    strat, f, spec, g = axis_stage
    x = np.array([1.2, 0.0])
    assert g(x) == pytest.approx(f(x))


def test_step_gradient_tangent_on_stratum(axis_stage):
    strat, f, spec, g = axis_stage
    x = np.array([1.2, 0.0])
    grad = fd_gradient(g.value, x)
    assert abs(grad[1]) <= 1e-6 * (1 + np.linalg.norm(grad))


def test_step_unchanged_outside_tube(axis_stage):
    strat, f, spec, g = axis_stage
    x = np.array([0.5, 1.5])
    assert g(x) == f(x)
    assert np.allclose(g.grad(x), f.grad(x))


def test_step_constant_along_normal_in_inner_tube(axis_stage):
    strat, f, spec, g = axis_stage
    y = np.array([0.8, 0.0])
    w = tube_width(strat.by_id("axis"), y, spec)
    vals = [g(y + np.array([0.0, t])) for t in np.linspace(-0.24 * w, 0.24 * w, 9)]
    assert max(vals) - min(vals) <= 1e-14


def test_step_closeness_within_budget(axis_stage):
    strat, f, spec, g = axis_stage
    rng = np.random.default_rng(0)
    for _ in range(300):
        x = rng.uniform(-2, 2, size=2)
        assert abs(g(x) - f(x)) <= 0.25 + 1e-12  # budget 0.5/2 with safety 2


def test_step_gradient_matches_fd_everywhere(axis_stage):
    strat, f, spec, g = axis_stage
    rng = np.random.default_rng(1)
    for _ in range(60):
        x = rng.uniform(-1.5, 1.5, size=2)
        assert np.allclose(g.grad(x), fd_gradient(g.value, x), atol=2e-5)


def test_step_requires_validated_tube():
    strat = axis_stratification(2)
    f = squared_norm_field(2, box=BOX2)
    with pytest.raises(PipelineAbort):
        induction_step(f, strat.by_id("axis"), TubeSpec("axis"))


def test_step_lip_bookkeeping(axis_stage):
    strat, f, spec, g = axis_stage
    assert g.lip == pytest.approx(12.0 * f.lip)


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------

def test_point_stratum_pipeline_freezes_origin():
    strat = origin_stratification()
    f = squared_norm_field(2, box=BOX2)
    g = smooth_approximate(f, constant_field(0.1, 2), strat, SmoothingOptions(target_order=2))
    # g is identically f(0) = 0 on a ball around the origin
    spec = g.stage_for("origin").spec
    w = spec.scale * spec.width_cap
    for x in [np.zeros(2), np.array([0.1 * w, -0.15 * w])]:
        assert abs(g(x)) <= 1e-14
    grad0 = fd_gradient(g.value, np.zeros(2))
    assert np.allclose(grad0, 0.0, atol=1e-9)


def test_axis_pipeline_coordinate_field():
    strat = axis_stratification(2)
    f = coordinate_field(1, 2)
    eps = constant_field(0.05, 2)
    g = smooth_approximate(f, eps, strat, SmoothingOptions())
    rng = np.random.default_rng(2)
    worst = max(abs(f(p) - g(p)) / eps(p) for p in rng.uniform(-2, 2, size=(2000, 2)))
    assert worst < 1.0
    for x1 in np.linspace(-1.9, 1.9, 25):
        x = np.array([x1, 0.0])
        assert abs(g(x)) < eps(x)
        grad = fd_gradient(g.value, x)
        assert abs(grad[1]) <= 1e-6


def test_gradient_persists_on_frontier():
    strat = load_problem("Aplus:n=2")
    f = squared_norm_field(4, box=BOX4)
    g = smooth_approximate(f, constant_field(0.05, 4), strat, SmoothingOptions(target_order=2))
    # after all stages the gradient at the origin (deepest frontier) matches
    # the plain field's: the tubes collapse quadratically around it
    x = np.zeros(4)
    assert np.allclose(fd_gradient(g.value, x), f.grad(x), atol=1e-7)


def test_whitney_gradient_continuity_into_frontier():
    strat = load_problem("Aplus:n=2")
    f = squared_norm_field(4, box=BOX4)
    g = smooth_approximate(f, constant_field(0.05, 4), strat, SmoothingOptions(target_order=2))
    rng = np.random.default_rng(3)
    w = rng.standard_normal(4)
    w /= np.linalg.norm(w)
    grad0 = fd_gradient(g.value, np.zeros(4))
    gaps = []
    for k in range(3, 11):
        x = 2.0 ** (-k) * w
        gaps.append(np.linalg.norm(fd_gradient(g.value, x) - grad0))
    assert gaps[-1] <= 1e-3
    assert gaps[-1] <= gaps[0] + 1e-12


def test_budget_split_across_stages():
    strat = load_problem("Aplus:n=2")
    f = squared_norm_field(4, box=BOX4)
    eps = constant_field(0.12, 4)
    g = smooth_approximate(f, eps, strat, SmoothingOptions(target_order=2))
    m = len(strat.strata)
    # per-stage certificates were validated against eps/(m+1)
    for record in g.stages:
        if record.trivial:
            continue
        assert record.spec.certificate.passed
    rng = np.random.default_rng(4)
    worst = max(abs(f(p) - g(p)) / eps(p) for p in rng.uniform(-2, 2, size=(1500, 4)))
    assert worst < m / (m + 1.0) + 1e-9


def test_local_constancy_simplex():
    strat = simplex2d_stratification()
    f = squared_norm_field(2, box=BOX2)
    g = smooth_approximate(f, constant_field(0.05, 2), strat, SmoothingOptions(target_order=2))
    for sid in ["v0", "v1", "v2", "e01", "e02", "e12"]:
        rep = check_local_constancy(g, strat.by_id(sid), samples=20)
        assert rep.passed, (sid, rep.max_violation)


def test_flat_pipeline_requires_flat_claim():
    strat = load_problem("counterexample")
    f = squared_norm_field(3)
    with pytest.raises(PipelineAbort):
        smooth_approximate(f, constant_field(0.1, 3), strat, SmoothingOptions(target_order=2))


def test_projection_composition_collapses_near_lower_strata():
    # on the normally flat pipeline, g o P_L == g near each lower stratum L
    strat = load_problem("Aplus:n=2")
    f = squared_norm_field(4, box=BOX4)
    g = smooth_approximate(f, constant_field(0.05, 4), strat, SmoothingOptions(target_order=2))
    m1 = strat.by_id("rank-1")
    spec = g.stage_for("rank-1").spec
    rng = np.random.default_rng(5)
    for y in m1.sampler(15, rng):
        w = tube_width(m1, y, spec)
        v = m1.normal_projector(y) @ rng.standard_normal(4)
        v /= np.linalg.norm(v)
        x = y + 0.2 * w * v
        assert abs(g(x) - g(m1.project(x))) <= 1e-12


def test_support_confinement():
    strat = axis_stratification(2)
    f = bump_field(np.zeros(2), 0.8)
    support_box = (-1.2 * np.ones(2), 1.2 * np.ones(2))
    g = smooth_approximate(
        f, constant_field(0.05, 2), strat,
        SmoothingOptions(support_box=support_box),
    )
    rng = np.random.default_rng(6)
    for _ in range(400):
        x = rng.uniform(-2, 2, size=2)
        if np.any(np.abs(x) > 1.2):
            assert g(x) == 0.0


def test_freeze_width_keeps_field_far_away():
    strat = axis_stratification(2)
    f = squared_norm_field(2, box=BOX2)
    g = smooth_approximate(
        f, constant_field(0.05, 2), strat,
        SmoothingOptions(freeze_width=0.2, pre_smooth="never"),
    )
    rng = np.random.default_rng(7)
    for _ in range(400):
        x = rng.uniform(-2, 2, size=2)
        if abs(x[1]) > 0.2:
            assert g(x) == f(x)


def test_metadata_serializes():
    strat = axis_stratification(2)
    f = coordinate_field(1, 2)
    g = smooth_approximate(f, constant_field(0.05, 2), strat, SmoothingOptions())
    meta = g.to_metadata()
    assert meta["stages"][0]["stratum_id"] == "axis"
    assert meta["stages"][0]["tube"]["certificate"]["passed"]
    import json
    json.dumps(meta)  # must be JSON-serializable as-is


def test_smoothness_claims():
    g1 = smooth_approximate(
        coordinate_field(1, 2), constant_field(0.05, 2),
        axis_stratification(2), SmoothingOptions(target_order=1),
    )
    assert g1.field.smoothness == 1.0  # Whitney path claims C^1 only
    g2 = smooth_approximate(
        squared_norm_field(4, box=BOX4), constant_field(0.05, 4),
        load_problem("Aplus:n=2"), SmoothingOptions(target_order=3),
    )
    assert g2.field.smoothness == 3.0  # certified normally flat path


def test_per_stage_lipschitz_inflation_sampled():
    strat = axis_stratification(2)
    f = squared_norm_field(2, box=BOX2)
    g = smooth_approximate(f, constant_field(0.05, 2), strat, SmoothingOptions())
    rng = np.random.default_rng(11)
    a = rng.uniform(-2, 2, size=(2000, 2))
    b = rng.uniform(-2, 2, size=(2000, 2))
    worst = 0.0
    for p, q in zip(a, b):
        d = np.linalg.norm(p - q)
        if d > 1e-9:
            worst = max(worst, abs(g(p) - g(q)) / d)
    assert worst <= 12.0 * f.lip * 1.05
