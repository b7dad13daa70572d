"""Qubit channel representations: Pauli mixtures, Kraus, affine (Bloch), Choi.

Bloch convention: rho = (I + r . sigma)/2 with r_k = tr(rho sigma_k). Affine
maps are 4x4 real matrices acting on the column (1, rx, ry, rz); trace
preservation pins the first row to (1, 0, 0, 0). Choi convention:
J = (1/d) sum_ij E(|i><j|) (x) |i><j|, output factor first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import (
    ATOL_CONSTRUCT,
    PAULIS,
    check_density,
    hermiticity_defect,
    partial_trace_sys,
)

# Membership cutoff for the indivisible family: every weight strictly above this.
INDIVISIBLE_CUTOFF = 1e-12


@dataclass(frozen=True)
class PauliWeights:
    """Convex weights (qx, qy, qz) of a Pauli mixing channel.

    Each weight must be >= 0 and the three must sum to 1 within 1e-12.
    """

    qx: float
    qy: float
    qz: float

    def __post_init__(self):
        vals = (self.qx, self.qy, self.qz)
        for label, v in zip("xyz", vals):
            if not np.isfinite(v) or v < 0.0:
                raise ValueError(f"q_{label} must be finite and >= 0, got {v!r}")
        if abs(sum(vals) - 1.0) > ATOL_CONSTRUCT:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {sum(vals)!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.qx, self.qy, self.qz)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())


# Equal weights: the channel sending r -> -r/3 (optimal universal spin flip).
NOT_WEIGHTS = PauliWeights(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Bloch vector r_k = tr(rho sigma_k) of a qubit operator."""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {rho.shape}")
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def density_from_bloch(r: Sequence[float]) -> np.ndarray:
    """Qubit density operator (I + r . sigma)/2; requires |r| <= 1 + 1e-12."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError(f"Bloch vector must have 3 components, got shape {r.shape}")
    norm = float(np.linalg.norm(r))
    if norm > 1.0 + ATOL_CONSTRUCT:
        raise ValueError(f"Bloch vector lies outside the unit ball (|r| = {norm!r})")
    rho = 0.5 * np.eye(2, dtype=complex)
    for rk, sk in zip(r, PAULIS):
        rho = rho + 0.5 * rk * sk
    return rho


def pauli_apply(q: PauliWeights, rho: np.ndarray) -> np.ndarray:
    """Apply the Pauli mixture sum_k q_k sigma_k rho sigma_k."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {rho.shape}")
    out = np.zeros((2, 2), dtype=complex)
    for qk, sk in zip(q.as_tuple(), PAULIS):
        out += qk * (sk @ rho @ sk)
    return out


def _probe_states() -> list[np.ndarray]:
    half = 0.5 * np.eye(2, dtype=complex)
    probes = [half]
    for sk in PAULIS:
        probes.append(half + 0.5 * sk)
    return probes


def affine_of_linear(apply: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Tomograph any linear qubit map into its 4x4 affine matrix.

    Probes I/2 and (I + sigma_k)/2; the first row holds the measured trace
    behavior (not forced to (1,0,0,0)), so non-trace-preserving maps such as
    commutator drives are representable.
    """
    probes = _probe_states()
    outs = [np.asarray(apply(p), dtype=complex) for p in probes]
    traces = [complex(np.trace(o)).real for o in outs]
    blochs = [bloch_vector(o) for o in outs]
    t = np.zeros((4, 4))
    t[0, 0] = traces[0]
    t[1:, 0] = blochs[0]
    for k in range(3):
        t[0, k + 1] = traces[k + 1] - traces[0]
        t[1:, k + 1] = blochs[k + 1] - blochs[0]
    return t


def affine_of(apply: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Affine (Bloch) matrix of a trace-preserving qubit map.

    Raises ValueError if the tomographed first row deviates from (1, 0, 0, 0)
    by more than 1e-8.
    """
    t = affine_of_linear(apply)
    dev = float(np.abs(t[0] - np.array([1.0, 0.0, 0.0, 0.0])).max())
    if dev > 1e-8:
        raise ValueError(f"map is not trace preserving (first-row deviation {dev:.3e})")
    return t


def check_affine(t: np.ndarray) -> np.ndarray:
    """Validate the shape and trace-preserving first row of an affine map."""
    t = np.asarray(t, dtype=float)
    if t.shape != (4, 4):
        raise ValueError(f"affine map must be 4x4, got shape {t.shape}")
    dev = float(np.abs(t[0] - np.array([1.0, 0.0, 0.0, 0.0])).max())
    if dev > 1e-10:
        raise ValueError(f"affine first row deviates from (1,0,0,0) by {dev:.3e}")
    return t


def choi_of(apply: Callable[[np.ndarray], np.ndarray], d: int) -> np.ndarray:
    """Choi matrix J = (1/d) sum_ij E(|i><j|) (x) |i><j| (output factor first)."""
    if d < 1:
        raise ValueError("dimension must be positive")
    j = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            e_ab = np.zeros((d, d), dtype=complex)
            e_ab[a, b] = 1.0
            j += np.kron(np.asarray(apply(e_ab), dtype=complex), e_ab)
    return j / d


def check_choi(j: np.ndarray) -> np.ndarray:
    """Validate hermiticity (1e-10) and unit trace (1e-10) of a Choi matrix."""
    j = np.asarray(j, dtype=complex)
    if j.ndim != 2 or j.shape[0] != j.shape[1]:
        raise ValueError(f"Choi matrix must be square, got shape {j.shape}")
    defect = hermiticity_defect(j)
    if defect > 1e-10:
        raise ValueError(f"Choi matrix is not Hermitian (defect {defect:.3e})")
    tr = complex(np.trace(j))
    if abs(tr - 1.0) > 1e-10:
        raise ValueError(f"Choi matrix does not have unit trace (trace {tr})")
    return j


@dataclass(frozen=True)
class CptpReport:
    """Outcome of a complete-positivity + trace-preservation check."""

    ok: bool
    min_eigenvalue: float
    trace_preservation_error: float
    tol: float

    def __bool__(self) -> bool:
        return self.ok


def is_cptp(choi: np.ndarray, tol: float = 1e-10) -> CptpReport:
    """Check CPTP-ness of a Choi matrix.

    Complete positivity: min eigenvalue >= -tol. Trace preservation: the
    partial trace over the output (first) factor equals I/d within tol.
    """
    choi = np.asarray(choi, dtype=complex)
    dsq = choi.shape[0]
    d = int(round(np.sqrt(dsq)))
    if choi.ndim != 2 or choi.shape != (dsq, dsq) or d * d != dsq:
        raise ValueError(f"Choi matrix shape {choi.shape} is not (d^2, d^2)")
    herm = 0.5 * (choi + choi.conj().T)
    min_eig = float(np.linalg.eigvalsh(herm)[0])
    tp = partial_trace_sys(choi, d, d)
    tp_err = float(np.abs(tp - np.eye(d) / d).max())
    ok = (min_eig >= -tol) and (tp_err <= tol)
    return CptpReport(ok=ok, min_eigenvalue=min_eig, trace_preservation_error=tp_err, tol=tol)


def is_indivisible_family(q: PauliWeights) -> bool:
    """Membership in the indivisible Pauli family: every weight > 1e-12.

    This answers family membership only; it is not a general divisibility
    test for arbitrary channels.
    """
    return all(v > INDIVISIBLE_CUTOFF for v in q.as_tuple())


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Channel given by Kraus operators; sum_k K_k^dag K_k = I within 1e-10."""

    d: int
    ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if not self.ops:
            raise ValueError("at least one Kraus operator required")
        ops = tuple(np.asarray(k, dtype=complex) for k in self.ops)
        for k in ops:
            if k.shape != (self.d, self.d):
                raise ValueError(f"Kraus operator shape {k.shape} != ({self.d}, {self.d})")
        object.__setattr__(self, "ops", ops)
        total = sum(k.conj().T @ k for k in ops)
        dev = float(np.abs(total - np.eye(self.d)).max())
        if dev > 1e-10:
            raise ValueError(f"Kraus completeness violated (deviation {dev:.3e})")

    @classmethod
    def from_unitary_mixture(
        cls, weights: Sequence[float], unitaries: Sequence[np.ndarray]
    ) -> "KrausChannel":
        if len(weights) != len(unitaries):
            raise ValueError("weights and unitaries must have equal length")
        ops = tuple(
            np.sqrt(float(w)) * np.asarray(u, dtype=complex)
            for w, u in zip(weights, unitaries)
        )
        d = ops[0].shape[0]
        return cls(d=d, ops=ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.d, self.d):
            raise ValueError(f"state shape {rho.shape} != ({self.d}, {self.d})")
        out = np.zeros((self.d, self.d), dtype=complex)
        for k in self.ops:
            out += k @ rho @ k.conj().T
        return out


def validate_state(rho: np.ndarray) -> np.ndarray:
    """Alias for density-operator validation, re-exported for channel callers."""
    return check_density(rho)
