"""Dense collision engine vs the closed form, plus the random-unitary model."""

import numpy as np
import pytest

from qcollide.channels import NOT_WEIGHTS, PauliWeights, bloch_vector, pauli_apply
from qcollide.collision import (
    CollisionConfig,
    DenseEnv,
    GhzDiagonalEnv,
    RandomUnitarySpec,
    RandomUnitaryTerm,
    control_unitary,
    dense_site_cap,
    ghz_env,
    homogeneous_index,
    max_joint_dim,
    ru_collision,
    ru_dense_check,
    ru_roots,
    simulate_closed,
    simulate_dense,
    target_eta,
)
from qcollide.linalg import PAULIS, herm_unitary_exp, kron, unitary_root, unitarity_defect
from helpers import random_density, random_unitary, random_weights


def coherent_ghz_env(rng, q: PauliWeights, n: int) -> DenseEnv:
    # Gram-matrix coherences sqrt(q_i q_j) <v_i|v_j> keep the operator PSD
    # with the GHZ weights on the diagonal
    vecs = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    gram = vecs @ vecs.conj().T
    d = 3**n
    omega = np.zeros((d, d), dtype=complex)
    qs = q.as_tuple()
    for i in range(3):
        for j in range(3):
            hi, hj = homogeneous_index(i, n), homogeneous_index(j, n)
            omega[hi, hj] = np.sqrt(qs[i] * qs[j]) * gram[i, j]
    return DenseEnv(omega=omega, n=n)


def test_homogeneous_index():
    assert [homogeneous_index(k, 1) for k in range(3)] == [0, 1, 2]
    assert [homogeneous_index(k, 2) for k in range(3)] == [0, 4, 8]
    assert [homogeneous_index(k, 3) for k in range(3)] == [0, 13, 26]
    with pytest.raises(ValueError):
        homogeneous_index(3, 2)


def test_target_eta():
    assert target_eta(1) == np.pi / 2
    assert abs(target_eta(4) - np.pi / 8) < 1e-15
    with pytest.raises(ValueError):
        target_eta(0)


def test_collision_config_validation():
    CollisionConfig(eta=0.3, n=4)
    with pytest.raises(ValueError):
        CollisionConfig(eta=0.3, n=0)
    with pytest.raises(ValueError):
        CollisionConfig(eta=np.nan, n=2)
    with pytest.raises(ValueError):
        CollisionConfig(eta=0.3, n=2, backend="sparse")


def test_ghz_env_structure():
    q = PauliWeights(0.2, 0.3, 0.5)
    env = ghz_env(q, 2)
    diag = np.diagonal(env.omega).real
    assert abs(diag.sum() - 1.0) < 1e-15
    assert diag[0] == 0.2 and diag[4] == 0.3 and diag[8] == 0.5
    off = env.omega - np.diag(np.diagonal(env.omega))
    assert np.abs(off).max() == 0


def test_dense_env_validation():
    with pytest.raises(ValueError):
        DenseEnv(omega=np.eye(9) / 9, n=1)  # shape mismatch for n=1
    with pytest.raises(ValueError):
        DenseEnv(omega=np.eye(3), n=1)  # trace 3


def test_control_unitary_block_structure():
    eta = 0.41
    u = control_unitary(eta)
    assert unitarity_defect(u) < 1e-14
    for k, sk in enumerate(PAULIS):
        block = u[np.ix_([k, k + 3], [k, k + 3])]
        assert np.abs(block - herm_unitary_exp(sk, eta)).max() < 1e-14
    assert np.abs(control_unitary(0.0) - np.eye(6)).max() == 0


def test_simulate_dense_zero_steps_is_identity():
    rng = np.random.default_rng(0)
    rho = random_density(rng, 2)
    env = GhzDiagonalEnv(q=NOT_WEIGHTS, n=3)
    out = simulate_dense(rho, env, target_eta(3), 0)
    assert np.abs(out - rho).max() < 1e-14


def test_simulate_dense_matches_closed_form():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3, 4):
        q = random_weights(rng)
        rho = random_density(rng, 2)
        eta = target_eta(n)
        env = GhzDiagonalEnv(q=q, n=n)
        for steps in range(n + 1):
            dense = simulate_dense(rho, env, eta, steps)
            closed = simulate_closed(rho, q, steps * eta)
            assert np.abs(dense - closed).max() < 1e-12


def test_simulate_dense_off_target_angle():
    rng = np.random.default_rng(2)
    q = random_weights(rng)
    rho = random_density(rng, 2)
    eta = 0.37  # not pi/(2n) for any n
    dense = simulate_dense(rho, GhzDiagonalEnv(q=q, n=3), eta, 3)
    closed = simulate_closed(rho, q, 3 * eta)
    assert np.abs(dense - closed).max() < 1e-12


def test_full_run_realizes_pauli_mixture():
    rng = np.random.default_rng(3)
    for n in (1, 2, 4):
        q = random_weights(rng)
        rho = random_density(rng, 2)
        out = simulate_dense(rho, GhzDiagonalEnv(q=q, n=n), target_eta(n), n)
        assert np.abs(out - pauli_apply(q, rho)).max() < 1e-12


def test_universal_not_endpoint():
    rng = np.random.default_rng(4)
    rho = random_density(rng, 2)
    out = simulate_dense(rho, GhzDiagonalEnv(q=NOT_WEIGHTS, n=3), target_eta(3), 3)
    assert np.abs(bloch_vector(out) + bloch_vector(rho) / 3).max() < 1e-12


def test_env_coherence_never_reaches_reduced_state():
    # support on repeated strings only: off-diagonal GHZ coherences cancel
    # in the partial trace at every step, not just the endpoint
    rng = np.random.default_rng(5)
    for n in (2, 3):
        q = random_weights(rng)
        rho = random_density(rng, 2)
        env = coherent_ghz_env(rng, q, n)
        eta = target_eta(n)
        for steps in range(n + 1):
            dense = simulate_dense(rho, env, eta, steps)
            closed = simulate_closed(rho, q, steps * eta)
            assert np.abs(dense - closed).max() < 1e-12


def test_simulate_dense_argument_validation():
    rng = np.random.default_rng(6)
    rho = random_density(rng, 2)
    env = GhzDiagonalEnv(q=NOT_WEIGHTS, n=2)
    with pytest.raises(ValueError):
        simulate_dense(rho, env, 0.3, 3)  # steps > n
    with pytest.raises(ValueError):
        simulate_dense(np.eye(2), env, 0.3, 1)  # trace 2
    with pytest.raises(ValueError):
        simulate_dense(random_density(rng, 3), env, 0.3, 1)


def test_simulate_closed_theta_zero_and_pi_half():
    rng = np.random.default_rng(7)
    q = random_weights(rng)
    rho = random_density(rng, 2)
    assert np.abs(simulate_closed(rho, q, 0.0) - rho).max() == 0
    assert np.abs(simulate_closed(rho, q, np.pi / 2) - pauli_apply(q, rho)).max() < 1e-15


def test_dense_cap_environment_override(monkeypatch):
    monkeypatch.setenv("QCOLLIDE_DENSE_CAP", "2")
    assert dense_site_cap() == 2
    assert max_joint_dim() == 18
    with pytest.raises(ValueError):
        ghz_env(NOT_WEIGHTS, 3)
    monkeypatch.setenv("QCOLLIDE_DENSE_CAP", "abc")
    with pytest.raises(ValueError):
        dense_site_cap()
    monkeypatch.setenv("QCOLLIDE_DENSE_CAP", "0")
    with pytest.raises(ValueError):
        dense_site_cap()
    monkeypatch.delenv("QCOLLIDE_DENSE_CAP")
    assert dense_site_cap() == 6


def ru_spec_fixture(rng, d: int, m: int, n: int) -> RandomUnitarySpec:
    w = rng.uniform(0.2, 1.0, size=m)
    w /= w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    terms = tuple(
        RandomUnitaryTerm(weight=float(wj), unitary=random_unitary(rng, d))
        for wj in w
    )
    return RandomUnitarySpec(d=d, n=n, terms=terms)


def test_ru_term_validation():
    with pytest.raises(ValueError):
        RandomUnitaryTerm(weight=-0.1, unitary=np.eye(2))
    with pytest.raises(ValueError):
        RandomUnitaryTerm(weight=np.nan, unitary=np.eye(2))
    with pytest.raises(ValueError):
        RandomUnitaryTerm(weight=0.5, unitary=np.diag([1.0, 2.0]))


def test_ru_term_load_tolerance_is_looser_than_construction():
    # deviation ~2e-11 passes the 1e-10 load gate but not the 1e-12 default
    v = np.eye(2, dtype=complex)
    v[0, 0] += 1e-11
    term = RandomUnitaryTerm(weight=1.0, unitary=v)
    spec = RandomUnitarySpec(d=2, n=3, terms=(term,))
    ru_roots(spec)
    with pytest.raises(ValueError):
        unitary_root(v, 3)


def test_ru_spec_validation():
    t = RandomUnitaryTerm(weight=0.5, unitary=np.eye(2))
    with pytest.raises(ValueError):
        RandomUnitarySpec(d=2, n=3, terms=(t,))  # weights sum to 0.5
    with pytest.raises(ValueError):
        RandomUnitarySpec(d=3, n=3, terms=(RandomUnitaryTerm(1.0, np.eye(2)),))
    with pytest.raises(ValueError):
        RandomUnitarySpec(d=2, n=3, terms=())
    spec = RandomUnitarySpec(
        d=2, n=2, terms=(t, RandomUnitaryTerm(weight=0.5, unitary=np.eye(2)))
    )
    assert spec.env_dim == 2


def test_ru_roots_power_back():
    rng = np.random.default_rng(8)
    spec = ru_spec_fixture(rng, d=3, m=2, n=4)
    for w, t in zip(ru_roots(spec), spec.terms):
        assert np.abs(np.linalg.matrix_power(w, 4) - t.unitary).max() < 1e-10


def test_ru_collision_boundaries():
    rng = np.random.default_rng(9)
    spec = ru_spec_fixture(rng, d=2, m=3, n=3)
    rho = random_density(rng, 2)
    assert np.abs(ru_collision(rho, spec, 0) - rho).max() < 1e-13
    target = sum(
        t.weight * (t.unitary @ rho @ t.unitary.conj().T) for t in spec.terms
    )
    assert np.abs(ru_collision(rho, spec, 3) - target).max() < 1e-10
    with pytest.raises(ValueError):
        ru_collision(rho, spec, 4)
    with pytest.raises(ValueError):
        ru_collision(random_density(rng, 3), spec, 1)


def test_ru_dense_check_agrees_every_step():
    rng = np.random.default_rng(10)
    for d, m, n in ((2, 2, 3), (3, 2, 2), (2, 3, 2)):
        spec = ru_spec_fixture(rng, d=d, m=m, n=n)
        rho = random_density(rng, d)
        roots = ru_roots(spec)
        for k in range(n + 1):
            dense = ru_dense_check(rho, spec, k)
            closed = ru_collision(rho, spec, k, roots=roots)
            assert np.abs(dense - closed).max() < 1e-11


def test_ru_endpoint_is_branch_independent():
    # replace a principal root by another commuting n-th root: the endpoint
    # channel cannot tell, midpoints generally can
    rng = np.random.default_rng(11)
    n = 3
    z = random_unitary(rng, 2)
    phis = np.array([0.4, -1.1])
    v = (z * np.exp(1j * phis)) @ z.conj().T
    spec = RandomUnitarySpec(
        d=2,
        n=n,
        terms=(
            RandomUnitaryTerm(weight=0.7, unitary=v),
            RandomUnitaryTerm(weight=0.3, unitary=random_unitary(rng, 2)),
        ),
    )
    principal = list(ru_roots(spec))
    alt = list(principal)
    alt[0] = (z * np.exp(1j * (phis + 2 * np.pi * np.array([1, 0])) / n)) @ z.conj().T
    assert np.abs(np.linalg.matrix_power(alt[0], n) - v).max() < 1e-12

    rho = random_density(rng, 2)
    end_a = ru_collision(rho, spec, n, roots=principal)
    end_b = ru_collision(rho, spec, n, roots=alt)
    assert np.abs(end_a - end_b).max() < 1e-12
    mid_a = ru_collision(rho, spec, 1, roots=principal)
    mid_b = ru_collision(rho, spec, 1, roots=alt)
    assert np.abs(mid_a - mid_b).max() > 1e-3


def test_ru_dense_check_cap(monkeypatch):
    monkeypatch.setenv("QCOLLIDE_DENSE_CAP", "2")
    rng = np.random.default_rng(12)
    spec = ru_spec_fixture(rng, d=2, m=3, n=3)  # 2 * 27 = 54 > 18
    with pytest.raises(ValueError):
        ru_dense_check(random_density(rng, 2), spec, 1)
