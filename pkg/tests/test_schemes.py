import math

import numpy as np
import pytest

from hybridproj.errors import (DegenerateHalfSpace, EmptyLevelSet, GeometryMismatch,
                               SchemeError)
from hybridproj.levelset import SamplerConfig
from hybridproj.operators import (contraction_scale, gk_truncated, identity,
                                  projection_onto_box, rotation)
from hybridproj.schemes import (Schedule, init_state, make_dn_halfspace, run_scheme,
                                step_matsushita_takahashi, step_nakajo_takahashi,
                                step_nested)
from hybridproj.space import Geometry, norm

FAST = SamplerConfig(600, seed=1)


def test_schedules():
    h = Schedule("harmonic")
    assert h(1) == 0.5 and h(9) == 0.1
    g = Schedule("geometric", {"c": 0.9, "r": 0.5})
    assert g(2) == pytest.approx(0.225)
    assert Schedule("constant_alpha", {"alpha": 0.3})(17) == 0.3
    for kind, params in [("harmonic", {"c": 2.5}), ("geometric", {"r": 1.0}),
                         ("constant_alpha", {"alpha": 1.0}), ("bogus", {})]:
        with pytest.raises(ValueError):
            Schedule(kind, params)


def test_dn_halfspace_examples():
    h = make_dn_halfspace(Geometry(2, 2), [0, 0], [1, 0])
    assert np.allclose(h.normal, [1, 0]) and h.offset == 0.0
    with pytest.raises(DegenerateHalfSpace):
        make_dn_halfspace(Geometry(2, 2), [0.3, 0.4], [0.3, 0.4])
    h = make_dn_halfspace(Geometry(2, 3), [0, 0], [1, 1])
    assert np.allclose(h.normal, 2 ** (-1 / 3) * np.ones(2)) and h.offset == 0.0


def test_dn_halfspace_contains_iterate_on_boundary(rng):
    for p in (1.5, 2.0, 3.0):
        g = Geometry(3, p)
        xn, x = rng.normal(size=3), rng.normal(size=3)
        h = make_dn_halfspace(g, xn, x)
        assert abs(h.value(xn[None])[0]) <= 1e-12
        # the anchor lies strictly on the infeasible side
        assert h.value(x[None])[0] > 0


def test_first_step_one_dimensional_exact():
    g = Geometry(1, 2)
    op = contraction_scale(g, 0.5)
    for step in (step_nested, step_matsushita_takahashi):
        state = init_state(g, op, [1.0], "nested" if step is step_nested else "mt")
        step(g, op, state, Schedule("harmonic"), FAST)
        # C_1 = [-0.5, 0.5], D_1 degenerate, x_2 = P(1) = 0.5
        assert state.current[0] == pytest.approx(0.5, abs=1e-9)
        assert state.dn_halfspaces == [None]
        assert state.n == 2


@pytest.mark.parametrize("scheme", ["nested", "mt", "nt"])
def test_identity_is_stationary(scheme):
    g = Geometry(2, 2)
    op = identity(g)
    x = np.array([0.3, -0.7])
    state = init_state(g, op, x, scheme)
    for _ in range(3):
        if scheme == "nested":
            step_nested(g, op, state, Schedule(), FAST)
        elif scheme == "mt":
            step_matsushita_takahashi(g, op, state, Schedule(), FAST)
        else:
            step_nakajo_takahashi(g, op, state, Schedule("constant_alpha"))
        assert np.allclose(state.current, x, atol=1e-9)


def test_fixed_anchor_stays():
    g = Geometry(2, 3)
    op = projection_onto_box(g, [-0.5, -0.5], [0.5, 0.5])
    u = np.array([0.2, -0.1])
    state = init_state(g, op, u, "nested")
    for _ in range(3):
        step_nested(g, op, state, Schedule(), FAST)
        assert np.allclose(state.current, u, atol=1e-9)


def test_nt_rotation_quarter_turn_first_step():
    g = Geometry(2, 2)
    op = rotation(g, math.pi / 2)
    state = init_state(g, op, [1.0, 0.0], "nt")
    step_nakajo_takahashi(g, op, state, Schedule("constant_alpha", {"alpha": 0.0}))
    assert np.allclose(state.current, [0.5, 0.5], atol=1e-9)


@pytest.mark.parametrize("alpha", [0.0, 0.5])
def test_nt_rotation_keeps_origin_feasible(alpha):
    g = Geometry(2, 2)
    op = rotation(g, 1.0)
    state = init_state(g, op, [1.0, 1.0], "nt")
    zero = np.zeros((1, 2))
    for _ in range(15):
        before = len(state.trace.cuts)
        step_nakajo_takahashi(g, op, state, Schedule("constant_alpha", {"alpha": alpha}))
        cn = state.trace.cuts[before].value(zero)[0]
        if alpha == 0.0:
            # y_n = T x_n and ||T x_n|| = ||x_n||: 0 is on the boundary of C_n
            assert abs(cn) <= 1e-12
        else:
            assert cn < 0
        assert all(h.value(zero)[0] <= 1e-12 for h in state.trace.cuts)


def test_nt_rejects_non_euclidean():
    g = Geometry(2, 3)
    op = contraction_scale(g, 0.5)
    with pytest.raises(GeometryMismatch):
        init_state(g, op, [1, 1], "nt")
    state = init_state(g, op, [1, 1], "nested")
    with pytest.raises(GeometryMismatch):
        step_nakajo_takahashi(g, op, state, Schedule("constant_alpha"))


def test_mt_requires_nonexpansive():
    g = Geometry(3, 2)
    with pytest.raises(ValueError):
        init_state(g, gk_truncated(g), [0.5, 0, 0], "mt")


def test_mt_contraction_converges():
    g = Geometry(2, 2)
    trace = run_scheme(g, contraction_scale(g, 0.5), [1.0, 1.0], "mt",
                       sampler=FAST, max_iter=40, stop_tol=1e-6)
    assert norm(g, trace.final) <= 1e-2


def test_max_iter_zero_and_identity_stop():
    g = Geometry(2, 2)
    trace = run_scheme(g, contraction_scale(g, 0.5), [1.0, 1.0], max_iter=0)
    assert len(trace.rows) == 1 and trace.stop_reason == "max_iter"
    assert all(math.isnan(trace.rows[0][k]) for k in ("vi_residual", "level_bound"))
    trace = run_scheme(g, identity(g), [0.2, 0.1])
    assert trace.iterations == 0 and trace.stop_reason == "residual"
    assert trace.rows[0]["n"] == 1


def test_nested_gk_converges_with_monotone_anchor_distance():
    g = Geometry(3, 2)
    x = [0.9, 0.1, 0.1]
    trace = run_scheme(g, gk_truncated(g), x, sampler=SamplerConfig(1000), max_iter=30)
    assert norm(g, trace.final) <= 1e-2
    ad = trace.column("anchor_dist")
    assert np.all(np.diff(ad) >= -1e-9)
    assert ad.max() <= norm(g, np.asarray(x)) + 1e-7
    assert np.nanmax(trace.column("fp_d_violation")) <= 1e-8
    lev, bnd = trace.column("fp_level_residual")[1:], trace.column("level_bound")[1:]
    assert np.all(lev <= bnd)


def test_nested_lp_anchor_distance_invariants():
    g = Geometry(2, 3)
    x = np.array([0.8, -0.6])
    trace = run_scheme(g, contraction_scale(g, 0.5), x, sampler=FAST, max_iter=12,
                       stop_tol=1e-12)
    ad = trace.column("anchor_dist")
    assert np.all(np.diff(ad) >= -1e-9)
    assert ad.max() <= norm(g, x) + 1e-7
    assert np.nanmin(trace.column("vi_residual")) >= -1e-7
    assert len(trace.cuts) == trace.iterations - 1


def test_run_is_deterministic():
    g = Geometry(2, 2)
    op = contraction_scale(g, 0.5)
    a = run_scheme(g, op, [1, 1], sampler=FAST, max_iter=5)
    b = run_scheme(g, op, [1, 1], sampler=FAST, max_iter=5)
    assert a.rows == b.rows


def test_scheme_error_wraps_empty_level_set():
    g = Geometry(2, 2)
    starved = SamplerConfig(3, importance_fraction=0.0, boundary_rays=0, descent_steps=0)
    with pytest.raises(SchemeError) as info:
        run_scheme(g, contraction_scale(g, 0.5), [1, 1], sampler=starved,
                   t_schedule=Schedule("geometric", {"c": 1e-6, "r": 0.5}), max_iter=5)
    err = info.value
    assert isinstance(err.cause, EmptyLevelSet)
    assert err.iteration == 1 and len(err.trace.rows) == 1


@pytest.mark.parametrize("scheme", ["nested", "mt"])
@pytest.mark.parametrize("p, lo, hi, x", [
    (3.0, [-0.35, -0.34, -0.21], [0.31, 0.47, 0.46], [0.86, -0.77, 0.458]),
    (1.5, [-0.36, -0.16, -0.13], [0.28, 0.39, 0.26], [0.19, -0.32, -0.22]),
])
def test_box_clamp_reaches_corner_projection(scheme, p, lo, hi, x):
    # P_F(x) sits on a vertex or edge of F, which the sampled hull has to reach
    g = Geometry(3, p)
    op = projection_onto_box(g, lo, hi)
    trace = run_scheme(g, op, x, scheme, sampler=SamplerConfig(1000), max_iter=40)
    assert norm(g, trace.final - np.clip(x, lo, hi)) <= 1e-2
