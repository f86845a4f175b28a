"""Engine behavior: iteration, Jacobians, root location, fixed-point search.

Core claims:
  - operator application matches the closed-form case maps and fixes the
    states it should fix
  - iteration detects convergence from successive distance, thins storage,
    and reports fixed starting points as zero steps
  - the analytic Jacobian equals central finite differences of the
    quadratic form
  - quadratic root location agrees with direct root computation
  - grid search finds exactly the isolated fixed points, and only points
    of the fixed set when that set is a continuum
"""

import numpy as np
import pytest

from qsobp import four_types, two_types
from qsobp.dynamics import (
    QuadraticCharacteristic,
    RootLocation,
    StabilityKind,
    classify_fixed_point_2d,
    classify_quadratic,
    conserved_quantity_drift,
    find_fixed_points_grid,
    iterate,
    iterate_map,
    jacobian,
)
from qsobp.simplex import Tolerance, make_state, random_state, state_distance
from qsobp.two_types import TwoTypeParams, lift_operator


def identity_operator():
    from qsobp.construction import ConfigurationSpace, build_operator, make_graph, uniform_weights

    space = ConfigurationSpace.build(make_graph(2, [(1, 2)]), 2, [0, 1])
    return build_operator(space, uniform_weights(space))


# -- apply -------------------------------------------------------------------


def test_identity_operator_fixes_everything():
    op = identity_operator()
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = random_state(rng, 2, 2)
        assert state_distance(op.apply(s), s) == 0.0


def test_two_type_apply_value():
    op = lift_operator(TwoTypeParams(a=2.0 / 3.0, b=0.5))
    s = make_state([0.5, 0.5], [0.5, 0.5])
    out = op.apply(s)
    # x1' = x1 + a x2 y1 = 1/2 + (2/3)(1/4) = 2/3
    assert out.female[0] == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_two_type_apply_fixes_male_vertex_states():
    op = lift_operator(TwoTypeParams(a=0.3, b=0.8))
    for x in (0.0, 0.25, 0.5, 0.99):
        s = make_state([x, 1.0 - x], [0.0, 1.0])
        assert state_distance(op.apply(s), s) == 0.0


# -- iterate -----------------------------------------------------------------


def test_iterate_fixed_start_reports_zero_steps():
    op = lift_operator(TwoTypeParams(a=0.4, b=0.5))
    s = make_state([0.3, 0.7], [0.0, 1.0])
    run = iterate(op, s)
    assert run.converged
    assert run.steps_taken == 0
    assert state_distance(run.limit, s) == 0.0


def test_iterate_two_type_example():
    op = lift_operator(TwoTypeParams(a=0.4, b=0.5))
    run = iterate(op, make_state([0.2, 0.8], [0.25, 0.75]))
    assert run.converged
    expected = make_state([0.4, 0.6], [0.0, 1.0])
    assert state_distance(run.limit, expected) <= 1e-6


def test_iterate_four_type_interior_start():
    p = four_types.FourTypeParams(a=0.3, b=0.3, c=0.3, d=0.3, a0=0.5, c0=0.5)
    run = iterate_map(four_types.full_step_fn(p), (0.2, 0.3, 0.3, 0.2, 0.1, 0.4, 0.2, 0.3))
    assert run.converged
    # types 1 and 3 die out in both sexes
    for idx in (0, 2, 4, 6):
        assert abs(run.limit[idx]) <= 1e-6


def test_iterate_map_thins_storage():
    # A rigid irrational rotation never converges; storage must stay capped
    # while first and last states are retained.
    angle = 2.0 * np.pi * 0.03137

    def rotate(s):
        x, y = s
        return (
            x * np.cos(angle) - y * np.sin(angle),
            x * np.sin(angle) + y * np.cos(angle),
        )

    run = iterate_map(rotate, (1.0, 0.0), Tolerance(max_iters=50_000))
    assert not run.converged
    assert run.limit is None
    assert run.steps_taken == 50_000
    assert len(run.states) <= 10_001
    assert run.state_steps[0] == 0
    assert run.state_steps[-1] == 50_000


def test_iterate_map_tracks_functional_drift():
    p = TwoTypeParams(a=0.4, b=0.5)
    run = iterate_map(
        two_types.step_fn(p),
        (0.2, 0.25),
        track=lambda s: two_types.invariant_line_level(p, s),
    )
    assert run.converged
    assert run.tracked_drift <= 1e-12


# -- jacobian ----------------------------------------------------------------


def test_jacobian_of_identity_operator():
    # The full quadratic form of a breed-true operator is (x, y) ->
    # (x * sum(y), y * sum(x)), so its ambient Jacobian carries rank-one
    # off-diagonal blocks; restricted to simplex tangent vectors
    # (zero-sum perturbations) it acts as the identity.
    op = identity_operator()
    rng = np.random.default_rng(1)
    s = random_state(rng, 2, 2)
    x = np.array(s.female.probs)
    y = np.array(s.male.probs)
    expected = np.block(
        [
            [np.eye(2), np.outer(x, np.ones(2))],
            [np.outer(y, np.ones(2)), np.eye(2)],
        ]
    )
    j = jacobian(op, s)
    np.testing.assert_allclose(j, expected, atol=1e-15)
    for _ in range(10):
        dx = rng.normal(size=2)
        dy = rng.normal(size=2)
        tangent = np.concatenate([dx - dx.mean(), dy - dy.mean()])
        np.testing.assert_allclose(j @ tangent, tangent, atol=1e-12)


def test_jacobian_matches_central_differences():
    rng = np.random.default_rng(42)
    h = 1e-6
    for _ in range(10):
        n = int(rng.integers(2, 5))
        nu = int(rng.integers(2, 5))
        pf = rng.dirichlet(np.ones(n), size=(n, nu))
        pm = rng.dirichlet(np.ones(nu), size=(n, nu))
        from qsobp.construction import BisexualOperator

        op = BisexualOperator.from_tensors(pf, pm)
        s = random_state(rng, n, nu)
        analytic = jacobian(op, s)
        coords = np.array(s.coords())
        numeric = np.empty((n + nu, n + nu))
        for col in range(n + nu):
            hi, lo = coords.copy(), coords.copy()
            hi[col] += h
            lo[col] -= h
            f_hi = np.concatenate(op.quadratic_form(hi[:n], hi[n:]))
            f_lo = np.concatenate(op.quadratic_form(lo[:n], lo[n:]))
            numeric[:, col] = (f_hi - f_lo) / (2.0 * h)
        assert np.abs(analytic - numeric).max() <= 1e-6


# -- quadratic root location -------------------------------------------------


def test_classify_quadratic_examples():
    assert classify_quadratic(QuadraticCharacteristic(-0.5, 0.04)).kind is RootLocation.BOTH_INSIDE
    verdict = classify_quadratic(QuadraticCharacteristic(-3.0, 2.0))
    assert verdict.kind is RootLocation.ROOT_AT_ONE
    assert verdict.other == "outside"
    assert classify_quadratic(QuadraticCharacteristic(-2.5, 1.0)).kind is RootLocation.SPLIT


def test_classify_quadratic_circle_cases():
    # conjugate pair on the circle and a double root at -1
    assert classify_quadratic(QuadraticCharacteristic(0.5, 1.0)).kind is RootLocation.ON_CIRCLE
    assert classify_quadratic(QuadraticCharacteristic(2.0, 1.0)).kind is RootLocation.ON_CIRCLE
    verdict = classify_quadratic(QuadraticCharacteristic(-2.0, 1.0))
    assert verdict.kind is RootLocation.ROOT_AT_ONE
    assert verdict.other == "on"


def _verdict_from_roots(B, C):
    moduli = sorted(abs(r) for r in np.roots([1.0, B, C]))
    roots = np.roots([1.0, B, C])
    if any(abs(r - 1.0) < 1e-12 for r in roots):
        other = min(abs(r) for r in roots if abs(r - 1.0) >= 1e-12) if sum(
            abs(r - 1.0) < 1e-12 for r in roots
        ) == 1 else 1.0
        if abs(other - 1.0) < 1e-12:
            tag = "on"
        elif other < 1.0:
            tag = "inside"
        else:
            tag = "outside"
        return (RootLocation.ROOT_AT_ONE, tag)
    if any(abs(m - 1.0) < 1e-12 for m in moduli):
        return (RootLocation.ON_CIRCLE, None)
    if moduli[1] < 1.0:
        return (RootLocation.BOTH_INSIDE, None)
    if moduli[0] > 1.0:
        return (RootLocation.BOTH_OUTSIDE, None)
    return (RootLocation.SPLIT, None)


def test_classify_quadratic_agrees_with_direct_roots():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 2000:
        B = float(rng.uniform(-4.0, 4.0))
        C = float(rng.uniform(-4.0, 4.0))
        qc = QuadraticCharacteristic(B, C)
        near_boundary = (
            abs(qc.at(1.0)) < 1e-9 or abs(qc.at(-1.0)) < 1e-9 or abs(abs(C) - 1.0) < 1e-9
        )
        if near_boundary:
            continue
        verdict = classify_quadratic(qc)
        kind, tag = _verdict_from_roots(B, C)
        assert verdict.kind is kind, (B, C)
        if tag is not None:
            assert verdict.other == tag
        checked += 1


# -- planar classification ---------------------------------------------------


def test_classify_fixed_point_2d_kinds():
    tol = Tolerance()
    assert classify_fixed_point_2d([[0.5, 0.1], [0.0, 0.3]], tol).kind is StabilityKind.ATTRACTING
    assert classify_fixed_point_2d([[2.0, 0.0], [0.0, 0.5]], tol).kind is StabilityKind.SADDLE
    assert classify_fixed_point_2d([[2.0, 0.0], [0.0, 3.0]], tol).kind is StabilityKind.REPELLING
    verdict = classify_fixed_point_2d([[1.0, 0.0], [0.0, 0.5]], tol)
    assert verdict.kind is StabilityKind.NON_HYPERBOLIC
    assert verdict.eigen_moduli == (1.0, 0.5)


def test_two_type_boundary_points_are_non_hyperbolic():
    p = TwoTypeParams(a=0.6, b=0.4)
    for point in ((0.2, 0.0), (0.7, 0.0), (1.0, 0.3), (1.0, 0.0)):
        verdict = classify_fixed_point_2d(two_types.jacobian_matrix(p, point))
        assert verdict.kind is StabilityKind.NON_HYPERBOLIC


# -- grid fixed-point search -------------------------------------------------


def test_grid_finds_isolated_four_type_points():
    p = four_types.FourTypeParams(a=0.3, b=0.3, c=0.3, d=0.3, a0=0.5, c0=0.5)
    points = find_fixed_points_grid(
        four_types.sub12_step_fn(p), ((0.0, 0.5), (0.0, 0.5)), grid=7
    )
    assert len(points) == 2
    np.testing.assert_allclose(points[0], (0.0, 0.0), atol=1e-8)
    np.testing.assert_allclose(points[1], (0.5, 0.5), atol=1e-8)


def test_grid_on_critical_line_lands_on_fixed_curve():
    p = four_types.FourTypeParams(a=0.4, b=0.3, c=0.6, d=0.3, a0=0.5, c0=0.5)
    curve = four_types.fixed_curve(p)
    points = find_fixed_points_grid(
        four_types.sub12_step_fn(p), ((0.0, 0.5), (0.0, 0.5)), grid=8
    )
    assert len(points) >= 8
    for x, y in points:
        assert abs(y - curve(x)) <= 1e-7


def test_grid_on_two_type_map_stays_in_fixed_segments():
    # Near the corner (1,0) the residual vanishes quadratically with the
    # distance to the fixed set, so a tight residual bound is needed for a
    # 1e-6 set-distance guarantee.
    p = TwoTypeParams(a=0.45, b=0.55)
    points = find_fixed_points_grid(
        two_types.step_fn(p), ((0.0, 1.0), (0.0, 1.0)), grid=6, tol=Tolerance(abs_eps=1e-12)
    )
    assert points
    for x, y in points:
        assert min(abs(y), abs(x - 1.0)) <= 1e-6


# -- conserved quantities ----------------------------------------------------


def test_constant_functional_has_zero_drift():
    p = TwoTypeParams(a=0.4, b=0.5)
    run = iterate_map(two_types.step_fn(p), (0.2, 0.25))
    assert conserved_quantity_drift(run, lambda s: 1.0) == 0.0


def test_invariant_level_drift_is_tiny():
    p = TwoTypeParams(a=0.4, b=0.5)
    run = iterate_map(two_types.step_fn(p), (0.2, 0.25))
    drift = conserved_quantity_drift(run, lambda s: two_types.invariant_line_level(p, s))
    assert drift <= 1e-12


def test_pair_sum_drift_is_tiny():
    p = four_types.FourTypeParams(a=0.7, b=0.2, c=0.6, d=0.4, a0=0.4, c0=0.6)
    run = iterate_map(four_types.full_step_fn(p), (0.1, 0.3, 0.25, 0.35, 0.3, 0.3, 0.15, 0.25))
    drift = conserved_quantity_drift(run, lambda s: s[0] + s[1])
    assert drift <= 1e-12
