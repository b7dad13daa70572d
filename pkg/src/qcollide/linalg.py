"""Dense complex linear algebra helpers for small multipartite Hilbert spaces.

Everything here works on plain numpy arrays. Matrices are complex unless a
function says otherwise; no sparse or symbolic paths are provided since the
tractable regime (a few qutrits) fits comfortably in dense memory.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

# Construction-time validation tolerance (hermiticity, trace, unitarity).
ATOL_CONSTRUCT = 1e-12
# Eigenvalue floor for positive semidefiniteness checks.
PSD_FLOOR = -1e-10

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

for _m in PAULIS:
    _m.flags.writeable = False


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor most significant."""
    return np.kron(np.asarray(a), np.asarray(b))


def _as_square(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


def partial_trace_env(m: np.ndarray, d_sys: int, d_env: int) -> np.ndarray:
    """Trace out the trailing factor of a (d_sys*d_env)-dimensional operator."""
    m = _as_square(m, "operator")
    if m.shape[0] != d_sys * d_env:
        raise ValueError(
            f"dimension mismatch: operator is {m.shape[0]}-dimensional, "
            f"expected {d_sys}*{d_env}"
        )
    r = m.reshape(d_sys, d_env, d_sys, d_env)
    return np.trace(r, axis1=1, axis2=3)


def partial_trace_sys(m: np.ndarray, d_sys: int, d_env: int) -> np.ndarray:
    """Trace out the leading factor of a (d_sys*d_env)-dimensional operator."""
    m = _as_square(m, "operator")
    if m.shape[0] != d_sys * d_env:
        raise ValueError(
            f"dimension mismatch: operator is {m.shape[0]}-dimensional, "
            f"expected {d_sys}*{d_env}"
        )
    r = m.reshape(d_sys, d_env, d_sys, d_env)
    return np.trace(r, axis1=0, axis2=2)


def hermiticity_defect(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.abs(m - m.conj().T).max())


def unitarity_defect(u: np.ndarray) -> float:
    u = _as_square(u, "matrix")
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())


def herm_unitary_exp(c: np.ndarray, eta: float) -> np.ndarray:
    """exp(i*eta*C) for C that is both Hermitian and unitary (C^2 = I).

    For such C the series collapses to cos(eta)*I + i*sin(eta)*C, which is
    what gets evaluated; no general matrix exponential is involved.
    Raises ValueError if C fails either precondition at 1e-12.
    """
    c = _as_square(c, "C")
    if hermiticity_defect(c) > ATOL_CONSTRUCT:
        raise ValueError("C is not Hermitian within 1e-12")
    if np.abs(c @ c - np.eye(c.shape[0])).max() > ATOL_CONSTRUCT:
        raise ValueError("C is not unitary (C^2 != I) within 1e-12")
    return np.cos(eta) * np.eye(c.shape[0]) + 1j * np.sin(eta) * c


def unitary_root(v: np.ndarray, n: int, tol: float = ATOL_CONSTRUCT) -> np.ndarray:
    """Principal n-th root of a unitary matrix.

    Parameters
    ----------
    v : unitary matrix (checked at `tol`, default 1e-12).
    n : positive integer root order.

    Returns
    -------
    W with W^n = V; each eigenvalue e^{i*theta} of V (theta in (-pi, pi],
    so -1 maps to e^{i*pi/n}) contributes e^{i*theta/n}. Unitary V is normal,
    so the complex Schur form is diagonal and supplies the spectral
    decomposition directly; degenerate eigenvalues are handled for free since
    any orthonormal basis of the eigenspace works.
    """
    v = _as_square(v, "V")
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"root order must be a positive integer, got {n!r}")
    if unitarity_defect(v) > tol:
        raise ValueError(f"V is not unitary within {tol:g}")
    t, z = scipy.linalg.schur(v.astype(complex), output="complex")
    phases = np.angle(np.diagonal(t))
    root_eigs = np.exp(1j * phases / n)
    return (z * root_eigs) @ z.conj().T


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values."""
    m = _as_square(m, "operator")
    return float(np.linalg.svd(m, compute_uv=False).sum())


def check_density(rho: np.ndarray, *, name: str = "rho") -> np.ndarray:
    """Validate a density operator; returns the input as a complex ndarray.

    Hermitian within 1e-12, unit trace within 1e-12, eigenvalues >= -1e-10.
    """
    rho = _as_square(rho, name).astype(complex)
    defect = hermiticity_defect(rho)
    if defect > ATOL_CONSTRUCT:
        raise ValueError(f"{name} is not Hermitian (defect {defect:.3e})")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > ATOL_CONSTRUCT:
        raise ValueError(f"{name} does not have unit trace (trace {tr})")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < PSD_FLOOR:
        raise ValueError(f"{name} is not positive semidefinite (min eig {lo:.3e})")
    return rho


def is_density(rho: np.ndarray) -> bool:
    try:
        check_density(rho)
    except ValueError:
        return False
    return True
