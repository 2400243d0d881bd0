import dataclasses
import math

import numpy as np
import pytest

from collagebvp.basis import schauder_eval
from collagebvp.expr import parse
from collagebvp.forward import GalerkinSolution, ProblemSpec, reference_problem, solve_forward
from collagebvp.inverse import (
    MODES,
    BoxConstraint,
    MinimizeSettings,
    ResidualModel,
    build_residual,
    collage_bound_check,
    minimize,
    objective,
)
from collagebvp.linalg import cholesky_factor

BOX = BoxConstraint(0.5, 3.0, 0.5, 3.0)
TRUE = (math.e, math.pi / 2)


def trapezoid(fn, panels):
    x = np.linspace(0.0, 1.0, panels + 1)
    return float(np.trapezoid(fn(x), x))


def zero_problem():
    return ProblemSpec(
        lam1=1.0,
        lam2=1.0,
        alpha1=0.0,
        alpha2=0.0,
        beta1=0.0,
        beta2=0.0,
        f=parse("0"),
        g=parse("0"),
    )


def test_box_validation_and_clip():
    with pytest.raises(ValueError):
        BoxConstraint(1.0, 1.0, 0.0, 2.0)
    assert np.array_equal(BOX.clip([0.0, 5.0]), [0.5, 3.0])
    assert BOX.contains([1.0, 1.0])
    assert not BOX.contains([0.0, 1.0])


def test_residual_vanishes_at_true_coefficients_when_n_le_m():
    spec = reference_problem()
    for m in (7, 15):
        target = solve_forward(spec, m)
        model = build_residual(target, 7, spec.f, spec.g)
        assert objective(model, TRUE, "l2") <= 1e-9


def test_zero_data_gives_zero_triples():
    target = solve_forward(zero_problem(), 7)
    model = build_residual(target, 7, parse("0"), parse("0"))
    assert np.array_equal(model.r0, np.zeros(7))
    assert np.array_equal(model.p, np.zeros(7))
    assert np.array_equal(model.q, np.zeros(7))


def test_triples_match_trapezoid_oracle():
    spec = reference_problem()
    target = solve_forward(spec, 15)
    model = build_residual(target, 7, spec.f, spec.g)
    x = np.linspace(0.0, 1.0, 10**6 + 1)
    u, v, _, _ = target.evaluate(x)
    for k in range(7):
        tent = schauder_eval(k + 3, x)
        assert abs(model.p[k] - np.trapezoid(u * tent, x)) < 1e-10
        assert abs(model.q[k] - np.trapezoid(v * tent, x)) < 1e-10


def test_residual_is_affine_in_the_coefficients():
    spec = reference_problem()
    target = solve_forward(spec, 15)
    model = build_residual(target, 7, spec.f, spec.g)
    rng = np.random.default_rng(13)
    for _ in range(50):
        lam = rng.uniform(0.5, 3.0, size=2)
        lam2 = rng.uniform(0.5, 3.0, size=2)
        t = rng.uniform()
        mix = t * lam + (1 - t) * lam2
        blend = t * model.residuals(*lam) + (1 - t) * model.residuals(*lam2)
        assert np.max(np.abs(model.residuals(*mix) - blend)) < 1e-14


def test_gram_is_spd():
    spec = reference_problem()
    model = build_residual(solve_forward(spec, 7), 7, spec.f, spec.g)
    np.linalg.cholesky(model.gram)


def test_objective_modes_on_zero_model():
    n = 5
    gram = np.eye(n)
    model = ResidualModel(
        r0=np.zeros(n),
        p=np.zeros(n),
        q=np.zeros(n),
        gram=gram,
        gram_chol=cholesky_factor(gram),
    )
    for mode in MODES:
        assert objective(model, (1.7, 0.9), mode) == 0.0


def test_single_row_zero_at_matching_lam():
    gram = np.eye(1)
    model = ResidualModel(
        r0=np.array([-1.0]),
        p=np.array([1.0]),
        q=np.array([0.0]),
        gram=gram,
        gram_chol=cholesky_factor(gram),
    )
    for mode in MODES:
        assert objective(model, (1.0, 123.4), mode) == 0.0


def test_dual_norm_with_identity_gram_equals_l2():
    rng = np.random.default_rng(14)
    gram = np.eye(6)
    model = ResidualModel(
        r0=rng.standard_normal(6),
        p=rng.standard_normal(6),
        q=rng.standard_normal(6),
        gram=gram,
        gram_chol=cholesky_factor(gram),
    )
    for _ in range(20):
        lam = rng.uniform(0.5, 3.0, size=2)
        assert objective(model, lam, "dual-norm") == pytest.approx(
            objective(model, lam, "l2"), rel=1e-13
        )


def test_mode_consistency_inequalities():
    spec = reference_problem()
    model = build_residual(solve_forward(spec, 3), 7, spec.f, spec.g)
    rng = np.random.default_rng(15)
    for _ in range(50):
        lam = rng.uniform(0.5, 3.0, size=2)
        abs_sum = objective(model, lam, "paper-abs-sum")
        l1 = objective(model, lam, "l1")
        l2 = objective(model, lam, "l2")
        assert abs_sum <= l1 + 1e-15
        assert l2 <= l1 + 1e-15


def test_unknown_mode_rejected():
    spec = reference_problem()
    model = build_residual(solve_forward(spec, 3), 3, spec.f, spec.g)
    with pytest.raises(ValueError):
        objective(model, TRUE, "l3")
    with pytest.raises(ValueError):
        minimize(model, BOX, mode="l3")


@pytest.mark.parametrize("m", [15, 31])
def test_converged_recovery_rows(m):
    spec = reference_problem()
    target = solve_forward(spec, m)
    model = build_residual(target, 7, spec.f, spec.g)
    result = minimize(model, BOX, "l2")
    assert abs(result.lam1 - 2.71828) < 1e-3
    assert abs(result.lam2 - 1.5708) < 1e-3


def test_synthetic_recovery_inside_box():
    spec = dataclasses.replace(reference_problem(), lam1=1.3, lam2=2.4)
    target = solve_forward(spec, 63)
    model = build_residual(target, 7, spec.f, spec.g)
    result = minimize(model, BOX, "l2")
    assert abs(result.lam1 - 1.3) < 1e-3
    assert abs(result.lam2 - 2.4) < 1e-3


def test_recovery_with_box_excluding_benchmark_point():
    spec = dataclasses.replace(reference_problem(), lam1=0.8, lam2=0.9)
    target = solve_forward(spec, 63)
    model = build_residual(target, 7, spec.f, spec.g)
    result = minimize(model, BoxConstraint(0.5, 1.0, 0.5, 1.0), "l2")
    assert abs(result.lam1 - 0.8) < 1e-3
    assert abs(result.lam2 - 0.9) < 1e-3


def test_monotone_identification():
    spec = reference_problem()
    distances = []
    for m in (3, 7, 15, 31):
        target = solve_forward(spec, m)
        model = build_residual(target, 7, spec.f, spec.g)
        result = minimize(model, BOX, "l2")
        assert BOX.contains((result.lam1, result.lam2))
        distances.append(math.hypot(result.lam1 - TRUE[0], result.lam2 - TRUE[1]))
    assert all(b <= a + 1e-9 for a, b in zip(distances, distances[1:]))
    assert distances[-1] < 1e-3


def test_non_identifiable_target_still_returns_grid_result():
    target = solve_forward(zero_problem(), 7)
    model = build_residual(target, 7, parse("0"), parse("0"))
    result = minimize(model, BOX, "l2")
    assert not result.diagnostics["identifiable"]
    assert BOX.contains((result.lam1, result.lam2))
    # objective is identically zero: tie-break picks the lowest corner
    assert (result.lam1, result.lam2) == (0.5, 0.5)


def test_grid_tie_break_determinism():
    spec = reference_problem()
    model = build_residual(solve_forward(spec, 15), 7, spec.f, spec.g)
    a = minimize(model, BOX, "l2")
    b = minimize(model, BOX, "l2")
    assert (a.lam1, a.lam2, a.value) == (b.lam1, b.lam2, b.value)


def test_paper_abs_sum_objective_small_at_reported_minimum():
    spec = reference_problem()
    for m in (3, 15):
        model = build_residual(solve_forward(spec, m), 7, spec.f, spec.g)
        result = minimize(model, BOX, "paper-abs-sum")
        assert objective(model, (result.lam1, result.lam2), "paper-abs-sum") <= 1e-6


def test_settings_grid_size():
    spec = reference_problem()
    model = build_residual(solve_forward(spec, 15), 7, spec.f, spec.g)
    result = minimize(model, BOX, "l2", MinimizeSettings(grid_points=11))
    assert abs(result.lam1 - TRUE[0]) < 1e-3  # closed form still nails it
    assert result.diagnostics["grid"][0] in np.linspace(0.5, 3.0, 11)


def test_collage_bound_for_reference_solution():
    spec = reference_problem()
    xbar = solve_forward(spec, 15)
    check = collage_bound_check(spec, xbar, 15)
    assert check.lhs == 0.0
    assert check.holds and check.holds_sum


def test_collage_bound_single_coefficient_perturbation():
    spec = reference_problem()
    xbar = solve_forward(spec, 15)
    coef = xbar.coef_u.copy()
    coef[3] += 0.1
    y = dataclasses.replace(xbar, coef_u=coef)
    check = collage_bound_check(spec, y, 15)
    assert check.holds
    assert check.lhs > 0.0


def test_collage_bound_random_sweep():
    spec = reference_problem()
    m = 15
    xbar = solve_forward(spec, m)
    rng = np.random.default_rng(16)
    for _ in range(100):
        y = dataclasses.replace(
            xbar,
            coef_u=xbar.coef_u + rng.uniform(-1.0, 1.0, m),
            coef_v=xbar.coef_v + rng.uniform(-1.0, 1.0, m),
        )
        check = collage_bound_check(spec, y, m)
        assert check.holds


def test_collage_bound_dimension_mismatch():
    spec = reference_problem()
    y = solve_forward(spec, 7)
    with pytest.raises(ValueError, match="dimension mismatch"):
        collage_bound_check(spec, y, 15)
