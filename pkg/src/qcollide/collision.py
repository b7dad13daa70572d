"""Collision-model engines: dense multi-qutrit simulation and its closed form.

The system qubit collides once with each particle of an n-qutrit environment
through the controlled interaction C = sum_k sigma_k (x) |k><k| exponentiated
to U = exp(i eta C). Environment basis labels map x -> 0, y -> 1, z -> 2; in
joint operators the system factor comes first and environment site 0 is the
most significant qutrit. The dense path stores the full joint state, so it is
capped (QCOLLIDE_DENSE_CAP, default 6 sites); the closed form needs only the
2x2 system state and works for any n.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .channels import PauliWeights, pauli_apply
from .linalg import (
    ATOL_CONSTRUCT,
    PAULIS,
    check_density,
    herm_unitary_exp,
    kron,
    partial_trace_env,
    unitarity_defect,
    unitary_root,
)

DENSE_CAP_ENV = "QCOLLIDE_DENSE_CAP"
DEFAULT_DENSE_SITE_CAP = 6


def dense_site_cap() -> int:
    """Environment-size cap for dense simulation (env var override allowed)."""
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None:
        return DEFAULT_DENSE_SITE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{DENSE_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError(f"{DENSE_CAP_ENV} must be >= 1, got {cap}")
    return cap


def max_joint_dim() -> int:
    """Largest joint dimension the dense engine will allocate (2 * 3^cap)."""
    return 2 * 3 ** dense_site_cap()


def target_eta(n: int) -> float:
    """Interaction angle pi/(2n) that makes n collisions hit the target channel."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.pi / (2.0 * n)


@dataclass(frozen=True)
class CollisionConfig:
    """Run parameters: interaction angle, environment size, engine choice."""

    eta: float
    n: int
    backend: str = "fast"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not np.isfinite(self.eta):
            raise ValueError(f"eta must be finite, got {self.eta!r}")
        if self.backend not in ("fast", "dense"):
            raise ValueError(f"backend must be 'fast' or 'dense', got {self.backend!r}")


@dataclass(frozen=True)
class GhzDiagonalEnv:
    """n qutrits in sum_k q_k |k...k><k...k|, stored implicitly by its weights."""

    q: PauliWeights
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True, eq=False)
class DenseEnv:
    """n qutrits given by an explicit 3^n density operator."""

    omega: np.ndarray
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        omega = np.asarray(self.omega, dtype=complex)
        d = 3 ** self.n
        if omega.shape != (d, d):
            raise ValueError(f"omega shape {omega.shape} != ({d}, {d}) for n={self.n}")
        omega = check_density(omega, name="omega")
        object.__setattr__(self, "omega", omega)


EnvSpec = Union[GhzDiagonalEnv, DenseEnv]


def homogeneous_index(k: int, n: int) -> int:
    """Row index of the repeated string |k k ... k> in the 3^n basis."""
    if not 0 <= k <= 2:
        raise ValueError(f"basis label must be 0, 1 or 2, got {k}")
    return k * (3**n - 1) // 2


def ghz_env(q: PauliWeights, n: int) -> DenseEnv:
    """Materialize the GHZ-diagonal environment as a dense operator."""
    cap = dense_site_cap()
    if n > cap:
        raise ValueError(f"n={n} exceeds the dense environment cap {cap}")
    d = 3**n
    omega = np.zeros((d, d), dtype=complex)
    for k, qk in enumerate(q.as_tuple()):
        i = homogeneous_index(k, n)
        omega[i, i] = qk
    return DenseEnv(omega=omega, n=n)


def control_unitary(eta: float) -> np.ndarray:
    """Collision unitary exp(i eta C) on qubit (x) qutrit, C = sum_k sigma_k (x) |k><k|."""
    u = np.zeros((6, 6), dtype=complex)
    for k, sk in enumerate(PAULIS):
        proj = np.zeros((3, 3), dtype=complex)
        proj[k, k] = 1.0
        u += kron(herm_unitary_exp(sk, eta), proj)
    return u


def _apply_site_unitary(
    joint: np.ndarray, u_pair: np.ndarray, d_sys: int, site_dim: int, n_sites: int, site: int
) -> np.ndarray:
    # Conjugate the joint state by u_pair acting on (system, env site) only.
    before = site_dim**site
    after = site_dim ** (n_sites - site - 1)
    u4 = u_pair.reshape(d_sys, site_dim, d_sys, site_dim)
    j = joint.reshape(d_sys, before, site_dim, after, d_sys, before, site_dim, after)
    out = np.einsum("WXYZ,YpZqyrzt,wxyz->WpXqwrxt", u4, j, u4.conj(), optimize=True)
    dim = d_sys * site_dim**n_sites
    return out.reshape(dim, dim)


def simulate_dense(
    rho: np.ndarray, env: EnvSpec, eta: float, steps: int
) -> np.ndarray:
    """Run `steps` collisions against an explicit environment state.

    Parameters
    ----------
    rho : qubit density operator (validated).
    env : GhzDiagonalEnv or DenseEnv; site j is consumed by collision j+1.
    eta : interaction angle.
    steps : number of collisions, 0 <= steps <= env.n.

    Returns
    -------
    Reduced system state after tracing out the environment (validated).
    """
    rho = check_density(rho)
    if rho.shape != (2, 2):
        raise ValueError(f"system state must be 2x2, got shape {rho.shape}")
    if isinstance(env, GhzDiagonalEnv):
        env = ghz_env(env.q, env.n)
    if not isinstance(env, DenseEnv):
        raise TypeError(f"unsupported environment spec {type(env).__name__}")
    if not 0 <= steps <= env.n:
        raise ValueError(f"steps must satisfy 0 <= steps <= n={env.n}, got {steps}")
    cap = dense_site_cap()
    if env.n > cap:
        raise ValueError(f"n={env.n} exceeds the dense environment cap {cap}")

    u_pair = control_unitary(eta)
    joint = kron(rho, env.omega)
    for j in range(steps):
        joint = _apply_site_unitary(joint, u_pair, 2, 3, env.n, j)
    reduced = partial_trace_env(joint, 2, 3**env.n)
    return check_density(reduced, name="reduced state")


def simulate_closed(rho: np.ndarray, q: PauliWeights, theta: float) -> np.ndarray:
    """Closed form of the stroboscopic map after absorbing the environment.

    Equals cos^2(theta) rho + sin^2(theta) sum_k q_k sigma_k rho sigma_k
    + i sin(theta) cos(theta) sum_k q_k [sigma_k, rho]; at theta = pi/2 this
    is exactly the Pauli mixture regardless of n.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"system state must be 2x2, got shape {rho.shape}")
    c, s = np.cos(theta), np.sin(theta)
    out = (c * c) * rho + (s * s) * pauli_apply(q, rho)
    comm = np.zeros((2, 2), dtype=complex)
    for qk, sk in zip(q.as_tuple(), PAULIS):
        comm += qk * (sk @ rho - rho @ sk)
    return out + (1j * s * c) * comm


# ---------------------------------------------------------------------------
# Random-unitary generalization: qudit system, m-term environment
# ---------------------------------------------------------------------------


# Load-time unitarity tolerance for term unitaries (looser than the 1e-12
# construction default so serialized matrices round-tripped through text work).
RU_UNITARITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RandomUnitaryTerm:
    """One branch of a random-unitary target: weight q and unitary V."""

    weight: float
    unitary: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.weight) or self.weight < 0.0:
            raise ValueError(f"weight must be finite and >= 0, got {self.weight!r}")
        u = np.asarray(self.unitary, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"unitary must be square, got shape {u.shape}")
        dev = unitarity_defect(u)
        if dev > RU_UNITARITY_TOL:
            raise ValueError(f"V is not unitary within 1e-10 (deviation {dev:.3e})")
        object.__setattr__(self, "unitary", u)


@dataclass(frozen=True, eq=False)
class RandomUnitarySpec:
    """Target sum_j q_j V_j rho V_j^dag to be reached in n collisions.

    d is the system dimension; the environment particle dimension equals the
    number of terms.
    """

    d: int
    n: int
    terms: tuple[RandomUnitaryTerm, ...]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("at least one term required")
        for t in terms:
            if t.unitary.shape != (self.d, self.d):
                raise ValueError(
                    f"term unitary shape {t.unitary.shape} != ({self.d}, {self.d})"
                )
        total = sum(t.weight for t in terms)
        if abs(total - 1.0) > ATOL_CONSTRUCT:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {total!r}")
        object.__setattr__(self, "terms", terms)

    @property
    def env_dim(self) -> int:
        return len(self.terms)


def ru_roots(spec: RandomUnitarySpec) -> tuple[np.ndarray, ...]:
    """Principal n-th roots of every term unitary."""
    return tuple(
        unitary_root(t.unitary, spec.n, tol=RU_UNITARITY_TOL) for t in spec.terms
    )


def ru_collision(
    rho: np.ndarray,
    spec: RandomUnitarySpec,
    k: int,
    roots: Optional[Sequence[np.ndarray]] = None,
) -> np.ndarray:
    """State after k collisions of the random-unitary model (closed form).

    Equals sum_j q_j W_j^k rho W_j^{dag k} with W_j an n-th root of V_j. Any
    root branch works at k = n; `roots` overrides the principal branch.
    """
    rho = check_density(rho)
    if rho.shape != (spec.d, spec.d):
        raise ValueError(f"state shape {rho.shape} != ({spec.d}, {spec.d})")
    if not 0 <= k <= spec.n:
        raise ValueError(f"k must satisfy 0 <= k <= n={spec.n}, got {k}")
    if roots is None:
        roots = ru_roots(spec)
    out = np.zeros((spec.d, spec.d), dtype=complex)
    for t, w in zip(spec.terms, roots):
        wk = np.linalg.matrix_power(w, k)
        out += t.weight * (wk @ rho @ wk.conj().T)
    return check_density(out, name="collided state")


def ru_dense_check(rho: np.ndarray, spec: RandomUnitarySpec, k: int) -> np.ndarray:
    """Dense cross-check of ru_collision via an explicit m^n environment.

    Builds the GHZ-diagonal environment over m = len(terms) levels, applies
    the controlled root unitary sum_j W_j (x) |j><j| to sites 0..k-1, then
    traces the environment out. Subject to the dense cap on d * m^n.
    """
    rho = check_density(rho)
    if rho.shape != (spec.d, spec.d):
        raise ValueError(f"state shape {rho.shape} != ({spec.d}, {spec.d})")
    if not 0 <= k <= spec.n:
        raise ValueError(f"k must satisfy 0 <= k <= n={spec.n}, got {k}")
    m = spec.env_dim
    joint_dim = spec.d * m**spec.n
    if joint_dim > max_joint_dim():
        raise ValueError(
            f"joint dimension {joint_dim} exceeds the dense cap {max_joint_dim()}"
        )

    env_d = m**spec.n
    omega = np.zeros((env_d, env_d), dtype=complex)
    for j, t in enumerate(spec.terms):
        i = j * (env_d - 1) // (m - 1) if m > 1 else 0
        omega[i, i] = t.weight

    roots = ru_roots(spec)
    u_pair = np.zeros((spec.d * m, spec.d * m), dtype=complex)
    for j, w in enumerate(roots):
        proj = np.zeros((m, m), dtype=complex)
        proj[j, j] = 1.0
        u_pair += kron(w, proj)

    joint = kron(rho, omega)
    for site in range(k):
        joint = _apply_site_unitary(joint, u_pair, spec.d, m, spec.n, site)
    reduced = partial_trace_env(joint, spec.d, env_d)
    return check_density(reduced, name="reduced state")
