"""Interpolating family, local generator, integration, per-step disturbance."""

import math

import numpy as np
import pytest

from qcollide.channels import (
    NOT_WEIGHTS,
    PauliWeights,
    affine_of_linear,
    bloch_vector,
    density_from_bloch,
)
from qcollide.collision import simulate_closed
from qcollide.dynamics import (
    BASIS_ANTISYM,
    BASIS_EXCHANGE,
    BASIS_ISO,
    BOUND_CONSTANT,
    FamilyParams,
    GeneratorCoeffs,
    SingularAt,
    Trajectory,
    calibrate_convention,
    cb_norm_lower_bound,
    coeff_extract,
    coeff_printed,
    commutator_drive,
    drive_affine,
    family_det3,
    family_map,
    generator_numeric,
    integrate,
    master_rhs,
    printed_xa,
    semigroup_defect,
    singular_times,
    step_bound,
    step_delta_estimate,
    step_difference_coeffs,
    target_affine,
)
from qcollide.linalg import PAULIS, herm_unitary_exp
from helpers import random_density, random_weights


NOT5 = FamilyParams(q=NOT_WEIGHTS, n=5)


def test_family_params_validation():
    p = FamilyParams(q=NOT_WEIGHTS, n=4)
    assert abs(p.alpha - math.pi / 8) < 1e-15
    FamilyParams(q=NOT_WEIGHTS, n=4, alpha=math.pi / 8)
    with pytest.raises(ValueError):
        FamilyParams(q=NOT_WEIGHTS, n=4, alpha=0.3)
    with pytest.raises(ValueError):
        FamilyParams(q=NOT_WEIGHTS, n=0)


def test_target_and_drive_affine():
    q = PauliWeights(0.2, 0.3, 0.5)
    t = target_affine(q)
    assert np.abs(t - np.diag([1.0, -0.6, -0.4, 0.0])).max() < 1e-12
    d = drive_affine(NOT_WEIGHTS)
    expect = np.zeros((4, 4))
    expect[1:, 1:] = -(2.0 / 3.0) * BASIS_ANTISYM
    assert np.abs(d - expect).max() < 1e-12
    assert np.abs(d[0]).max() < 1e-12  # drive is traceless, no constant part


def test_family_map_boundary_values():
    assert np.abs(family_map(0.0, NOT5) - np.eye(4)).max() < 1e-15
    assert np.abs(family_map(5.0, NOT5) - target_affine(NOT_WEIGHTS)).max() < 1e-12


def test_family_map_matches_closed_collision_form():
    rng = np.random.default_rng(0)
    for n in (2, 5):
        q = random_weights(rng)
        p = FamilyParams(q=q, n=n)
        rho = random_density(rng, 2)
        v = np.concatenate(([1.0], bloch_vector(rho)))
        for t in (0.0, 0.31, 1.0, n / 2.0, float(n)):
            out = family_map(t, p) @ v
            assert abs(out[0] - 1.0) < 1e-12
            ref = bloch_vector(simulate_closed(rho, q, p.alpha * t))
            assert np.abs(out[1:] - ref).max() < 1e-12


def test_family_det3_profile():
    assert abs(family_det3(0.0, NOT5) - 1.0) < 1e-15
    # equal weights: det3 = x (x^2 + sin(2 alpha t)^2 / 3) with printed x
    for t in (0.4, 1.7, 2.9):
        x, _ = printed_xa(t, NOT5.alpha)
        expect = x * (x * x + math.sin(2 * NOT5.alpha * t) ** 2 / 3.0)
        assert abs(family_det3(t, NOT5) - expect) < 1e-12
    assert abs(family_det3(10.0 / 3.0, NOT5)) < 1e-12


def test_singular_times_equal_weights():
    stars = singular_times(NOT5, 0.0, 5.0)
    assert len(stars) == 1
    assert abs(stars[0] - 10.0 / 3.0) < 1e-9
    p3 = FamilyParams(q=NOT_WEIGHTS, n=3)
    stars3 = singular_times(p3, 0.0, 3.0)
    assert len(stars3) == 1 and abs(stars3[0] - 2.0) < 1e-9


def test_singular_times_generic_weights():
    rng = np.random.default_rng(1)
    q = random_weights(rng)
    p = FamilyParams(q=q, n=4)
    for s in singular_times(p, 0.0, 4.0):
        assert abs(family_det3(s, p)) < 1e-9


def test_generator_is_left_logarithmic_derivative():
    p = NOT5
    for t in (0.2, 1.1, 2.4, 4.6):
        l_mat = generator_numeric(t, p)
        h = 1e-6
        deriv = (family_map(t + h, p) - family_map(t - h, p)) / (2 * h)
        assert np.abs(l_mat @ family_map(t, p) - deriv).max() < 1e-7


def test_generator_richardson_convergence():
    # central differences: halving h shrinks the h-dependent error ~4x
    p = NOT5
    t = 1.3
    l1 = generator_numeric(t, p, h=2e-3)
    l2 = generator_numeric(t, p, h=1e-3)
    l3 = generator_numeric(t, p, h=5e-4)
    r = np.abs(l1 - l2).max() / np.abs(l2 - l3).max()
    assert 3.5 < r < 4.5


def test_generator_at_zero_is_pure_drive():
    co, resid = coeff_extract(generator_numeric(0.0, NOT5))
    assert abs(co.b) < 1e-9
    assert abs(co.c + 2.0 * NOT5.alpha / 3.0) < 1e-9
    assert abs(co.d) < 1e-9
    assert resid < 1e-9


def test_generator_singularity_raises():
    with pytest.raises(SingularAt):
        generator_numeric(10.0 / 3.0, NOT5)
    with pytest.raises(SingularAt):
        generator_numeric(3.3, NOT5, singular_tol=0.1)
    generator_numeric(3.3, NOT5)  # fine at the default cutoff


def test_coeff_extract_exact_on_span():
    block = 0.3 * BASIS_ISO + 0.7 * BASIS_ANTISYM - 0.2 * BASIS_EXCHANGE
    l_mat = np.zeros((4, 4))
    l_mat[1:, 1:] = block
    co, resid = coeff_extract(l_mat)
    assert np.abs(np.array(co.as_tuple()) - [0.3, 0.7, -0.2]).max() < 1e-14
    assert resid < 1e-14


def test_coeff_extract_reports_off_span_remainder():
    l_mat = np.zeros((4, 4))
    l_mat[1, 1] = 1.0  # diag(1,0,0) is not in span(I, A, S)
    co, resid = coeff_extract(l_mat)
    assert abs(co.b - 1.0 / 3.0) < 1e-14
    assert resid > 0.1
    with pytest.raises(ValueError):
        coeff_extract(np.eye(3))


def test_generator_coeffs_validation():
    with pytest.raises(ValueError):
        GeneratorCoeffs(b=math.nan, c=0.0, d=0.0)


def test_equal_weight_generator_stays_in_span():
    for t in (0.1, 0.9, 2.2, 4.1, 4.9):
        _, resid = coeff_extract(generator_numeric(t, NOT5))
        assert resid < 1e-9


def test_printed_xa_values():
    assert printed_xa(0.0, NOT5.alpha) == (1.0, 0.0)
    x, a = printed_xa(10.0 / 3.0, NOT5.alpha)
    assert abs(x) < 1e-15
    assert abs(a - math.sqrt(3.0) / 12.0) < 1e-15


def test_coeff_printed_guards_and_disagreement():
    with pytest.raises(ZeroDivisionError):
        coeff_printed(10.0 / 3.0, NOT5.alpha)
    printed = coeff_printed(0.0, NOT5.alpha)
    numeric, _ = coeff_extract(generator_numeric(0.0, NOT5))
    # the retained closed forms disagree with the measured generator at t = 0
    assert abs(printed.c - numeric.c) > 0.1


def test_calibrate_convention():
    k = calibrate_convention()
    assert np.abs(np.array(k) - [2.0, -1.0, 2.0]).max() < 1e-12


def test_master_rhs_block_scales_linearly():
    rng = np.random.default_rng(2)
    b, c, d = rng.normal(size=3)
    full = affine_of_linear(lambda rho: master_rhs(rho, GeneratorCoeffs(b, c, d)))
    expect = np.zeros((4, 4))
    expect[1:, 1:] = 2.0 * b * BASIS_ISO - c * BASIS_ANTISYM + 2.0 * d * BASIS_EXCHANGE
    assert np.abs(full - expect).max() < 1e-12


def test_master_rhs_reproduces_state_derivative():
    # operator-form rhs with rescaled block coefficients equals d rho / dt
    rng = np.random.default_rng(3)
    rho0 = random_density(rng, 2)
    t = 0.7
    v0 = np.concatenate(([1.0], bloch_vector(rho0)))

    def state_at(tt):
        v = family_map(tt, NOT5) @ v0
        return density_from_bloch(v[1:] / v[0])

    h = 1e-6
    drho = (state_at(t + h) - state_at(t - h)) / (2 * h)
    co, _ = coeff_extract(generator_numeric(t, NOT5))
    adjusted = GeneratorCoeffs(b=co.b / 2.0, c=-co.c, d=co.d / 2.0)
    assert np.abs(master_rhs(state_at(t), adjusted) - drho).max() < 1e-6


def test_commutator_drive_traceless():
    rng = np.random.default_rng(4)
    rho = random_density(rng, 2)
    out = commutator_drive(NOT_WEIGHTS, rho)
    assert abs(np.trace(out)) < 1e-15
    assert np.abs(out - out.conj().T).max() < 1e-15  # i[sigma, rho] is Hermitian


def test_trajectory_states_property():
    tr = Trajectory(times=np.array([0.0, 1.0]), bloch=np.array([[0, 0, 1.0], [1.0, 0, 0]]))
    assert np.abs(tr.states[0] - np.diag([1.0, 0.0])).max() < 1e-15
    assert np.abs(tr.final_state - np.full((2, 2), 0.5)).max() < 1e-15
    assert tr.final_bloch.tolist() == [1.0, 0.0, 0.0]


def test_integvalidation_and_trivial_interval():
    rng = np.random.default_rng(5)
    rho = random_density(rng, 2)
    with pytest.raises(ValueError):
        integrate(rho, 0.0, 1.0, 0, NOT5)
    with pytest.raises(ValueError):
        integrate(rho, 1.0, 0.0, 100, NOT5)
    with pytest.raises(ValueError):
        integrate(np.eye(2), 0.0, 1.0, 10, NOT5)
    tr = integrate(rho, 0.5, 0.5, 10, NOT5)
    assert tr.times.tolist() == [0.5]
    assert np.abs(tr.bloch[0] - bloch_vector(rho)).max() < 1e-15


def test_integrate_matches_family_before_singularity():
    rng = np.random.default_rng(6)
    rho = random_density(rng, 2)
    tr = integrate(rho, 0.0, 3.0, 3000, NOT5)
    assert tr.times[0] == 0.0 and tr.times[-1] == 3.0
    assert np.all(np.diff(tr.times) > 0)
    v = family_map(3.0, NOT5) @ np.concatenate(([1.0], bloch_vector(rho)))
    assert np.abs(tr.final_bloch - v[1:]).max() < 1e-9


def test_integrate_refuses_singular_interval_without_segment():
    rng = np.random.default_rng(7)
    rho = random_density(rng, 2)
    with pytest.raises(SingularAt):
        integrate(rho, 0.0, 5.0, 1000, NOT5)


def test_integrate_segment_bridges_singularity():
    rng = np.random.default_rng(8)
    rho = random_density(rng, 2)
    tr = integrate(rho, 0.0, 5.0, 10000, NOT5, segment=True)
    assert np.abs(tr.final_bloch + bloch_vector(rho) / 3.0).max() < 1e-8
    # the excluded window leaves no sample points near the singular time
    gap = np.abs(tr.times - 10.0 / 3.0)
    assert gap.min() > 0.9e-3 * NOT5.n


def test_integrate_segment_rejects_endpoint_inside_window():
    rng = np.random.default_rng(9)
    rho = random_density(rng, 2)
    with pytest.raises(SingularAt):
        integrate(rho, 10.0 / 3.0, 5.0, 100, NOT5, segment=True)


def test_integrate_fixed_point_maximally_mixed():
    rho = 0.5 * np.eye(2, dtype=complex)
    tr = integrate(rho, 0.0, 5.0, 2000, NOT5, segment=True)
    assert np.abs(tr.bloch).max() < 1e-12


def test_integrate_custom_margin():
    rng = np.random.default_rng(10)
    rho = random_density(rng, 2)
    tr = integrate(rho, 0.0, 5.0, 8000, NOT5, segment=True, margin=0.05)
    assert np.abs(tr.final_bloch + bloch_vector(rho) / 3.0).max() < 1e-7
    assert np.abs(tr.times - 10.0 / 3.0).min() > 0.049


def test_semigroup_defect():
    assert semigroup_defect(NOT5, 1.0, 0.0) < 1e-14
    grid = [0.5, 1.0, 1.5, 2.0]
    worst = max(semigroup_defect(NOT5, s, t) for s in grid for t in grid)
    assert worst > 1e-3


def test_step_bound_example_and_invariant():
    sb = step_bound(0, 4)
    assert abs(sb.c_next + 0.5) < 1e-15
    assert abs(sb.d_next - 0.5) < 1e-15
    assert abs(sb.bound - BOUND_CONSTANT * math.sin(math.pi / 4)) < 1e-15
    for n in (2, 5, 16):
        for j in range(n):
            s = step_bound(j, n)
            target = math.sin(math.pi / n) ** 2
            assert abs(s.c_next**2 + s.d_next**2 - target) < 1e-12
    with pytest.raises(ValueError):
        step_bound(4, 4)
    with pytest.raises(ValueError):
        step_bound(-1, 4)


def test_step_difference_identity():
    rng = np.random.default_rng(11)
    for q in (NOT_WEIGHTS, random_weights(rng)):
        n = 7
        p = FamilyParams(q=q, n=n)
        tgt = target_affine(q)
        drv = drive_affine(q)
        for j in range(n):
            c, d = step_difference_coeffs(j, n)
            diff = family_map(j + 1.0, p) - family_map(float(j), p)
            model = c * (np.eye(4) - tgt) + d * drv
            assert np.abs(diff - model).max() < 1e-12
    with pytest.raises(ValueError):
        step_difference_coeffs(7, 7)


def test_cb_norm_lower_bound_known_values():
    def flip_delta(rho):
        return rho - PAULIS[0] @ rho @ PAULIS[0]

    est = cb_norm_lower_bound(flip_delta, trials=32, seed=0)
    assert abs(est - 2.0) < 1e-6
    assert est <= 2.0 + 1e-9
    assert cb_norm_lower_bound(lambda rho: 0.0 * rho, trials=4, seed=0) < 1e-12
    with pytest.raises(ValueError):
        cb_norm_lower_bound(flip_delta, trials=0)


def test_cb_norm_lower_bound_monotone_in_trials():
    def delta(rho):
        return rho - PAULIS[2] @ rho @ PAULIS[2]

    lo = cb_norm_lower_bound(delta, trials=8, seed=3)
    hi = cb_norm_lower_bound(delta, trials=16, seed=3)
    assert hi >= lo - 1e-12


def test_step_delta_estimate_matches_generic_route():
    j, n = 1, 4
    q = NOT_WEIGHTS
    th0 = j * math.pi / (2 * n)
    th1 = (j + 1) * math.pi / (2 * n)

    def delta(rho):
        out = np.zeros((2, 2), dtype=complex)
        for qk, sk in zip(q.as_tuple(), PAULIS):
            u1 = herm_unitary_exp(sk, th1)
            u0 = herm_unitary_exp(sk, th0)
            out += qk * (u1 @ rho @ u1.conj().T - u0 @ rho @ u0.conj().T)
        return out

    fast = step_delta_estimate(j, n, q, trials=16, seed=1)
    generic = cb_norm_lower_bound(delta, trials=16, seed=1)
    assert abs(fast - generic) < 1e-9


def test_step_delta_estimate_within_bound():
    for n in (3, 6):
        for j in range(n):
            est = step_delta_estimate(j, n, NOT_WEIGHTS, trials=8, seed=0)
            assert est <= step_bound(j, n).bound + 1e-9
    with pytest.raises(ValueError):
        step_delta_estimate(3, 3, NOT_WEIGHTS)
