"""Continuous interpolation of the collision sequence and its local generator.

The n-step sequence embeds in a one-parameter family T_t (t in collision
units, alpha = pi/(2n) radians per unit) built from three fixed affine maps:
identity, the target Pauli mixture, and a commutator drive. The local
generator L_t = (dT_t/dt) T_t^{-1} is computed numerically; closed-form
coefficient expressions from the printed analysis are kept verbatim in
separate *_printed ops for comparison only and are never used to drive
integration. det of the Bloch block vanishes at isolated times (t = 2n/3 for
equal weights), where the generator blows up; integration either refuses the
interval or bridges an excluded window with the exact two-sided family ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .channels import PauliWeights, affine_of, affine_of_linear, pauli_apply
from .linalg import PAULIS, check_density

# Default determinant cutoff below which the generator is treated as singular.
SINGULAR_DET_TOL = 1e-6
# A-priori constant in the per-step disturbance bound K * sin(pi/n).
BOUND_CONSTANT = 2.0 + 8.0 * math.sqrt(2.0)

# Basis of the 3x3 Bloch-block algebra the family generator lives in:
# isotropic, antisymmetric (rotation-like), symmetric exchange. The algebra
# is closed under products (A*S = S*A = -A, A^2 = S - 2I, S^2 = 2I + S).
BASIS_ISO = np.eye(3)
BASIS_ANTISYM = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
BASIS_EXCHANGE = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
for _m in (BASIS_ISO, BASIS_ANTISYM, BASIS_EXCHANGE):
    _m.flags.writeable = False

# Hamiltonian part of the operator-form master equation (hbar = 1): equal
# rotation generator about the (1,1,1) Bloch axis.
AXIS_HAMILTONIAN = PAULIS[0] + PAULIS[1] + PAULIS[2]
AXIS_HAMILTONIAN.flags.writeable = False


class SingularAt(Exception):
    """Generator requested at (or within margin of) a singular family time."""

    def __init__(self, t: float, det: float):
        self.t = float(t)
        self.det = float(det)
        super().__init__(f"family map is singular near t = {self.t!r} (det3 = {self.det:.3e})")


@dataclass(frozen=True)
class FamilyParams:
    """Weights q, collision count n, and the time scale alpha = pi/(2n)."""

    q: PauliWeights
    n: int
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        expected = math.pi / (2.0 * self.n)
        if self.alpha is None:
            object.__setattr__(self, "alpha", expected)
        elif abs(self.alpha - expected) > 1e-12:
            raise ValueError(
                f"alpha = {self.alpha!r} inconsistent with pi/(2n) = {expected!r}"
            )


@dataclass(frozen=True)
class GeneratorCoeffs:
    """Coefficients (b, c, d) of a generator in the (I, A, S) block basis."""

    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("b", "c", "d"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"coefficient {name} must be finite")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.b, self.c, self.d)


def commutator_drive(q: PauliWeights, rho: np.ndarray) -> np.ndarray:
    """Traceless drive i sum_k q_k [sigma_k, rho] appearing between strobe times."""
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros((2, 2), dtype=complex)
    for qk, sk in zip(q.as_tuple(), PAULIS):
        out += qk * (sk @ rho - rho @ sk)
    return 1j * out


@lru_cache(maxsize=64)
def _family_basis(q_tuple: tuple[float, float, float]):
    q = PauliWeights(*q_tuple)
    target = affine_of(lambda rho: pauli_apply(q, rho))
    drive = affine_of_linear(lambda rho: commutator_drive(q, rho))
    target.flags.writeable = False
    drive.flags.writeable = False
    return target, drive


def target_affine(q: PauliWeights) -> np.ndarray:
    """Affine matrix of the endpoint Pauli mixture."""
    return _family_basis(q.as_tuple())[0].copy()


def drive_affine(q: PauliWeights) -> np.ndarray:
    """Affine matrix (first row zero) of the commutator drive."""
    return _family_basis(q.as_tuple())[1].copy()


def family_map(t: float, p: FamilyParams) -> np.ndarray:
    """Affine matrix of the interpolating map at collision time t.

    cos^2(alpha t) * I + sin^2(alpha t) * target + sin cos * drive; agrees with
    the closed-form collision map at every t and with the stroboscopic points
    at integer t.
    """
    target, drive = _family_basis(p.q.as_tuple())
    th = p.alpha * t
    c, s = math.cos(th), math.sin(th)
    return (c * c) * np.eye(4) + (s * s) * target + (s * c) * drive


def family_det3(t: float, p: FamilyParams) -> float:
    """det of the 3x3 Bloch block of the family map."""
    return float(np.linalg.det(family_map(t, p)[1:, 1:]))


def printed_xa(t: float, alpha: float) -> tuple[float, float]:
    """Scalar pair (x, a) of the printed family decomposition, kept verbatim.

    Comparison-only: the printed a disagrees with the tomographed drive
    coefficient in sign and scale, which is exactly what the discrepancy
    report downstream is meant to surface.
    """
    x = (4.0 * math.cos(alpha * t) ** 2 - 1.0) / 3.0
    a = math.sin(2.0 * alpha * t) / 6.0
    return x, a


def generator_numeric(
    t: float,
    p: FamilyParams,
    h: Optional[float] = None,
    singular_tol: float = SINGULAR_DET_TOL,
) -> np.ndarray:
    """Local generator L_t = (dT_t/dt) T_t^{-1} by central differences.

    h defaults to 1e-6/alpha. Raises SingularAt when |det3| <= singular_tol.
    """
    e_t = family_map(t, p)
    det3 = float(np.linalg.det(e_t[1:, 1:]))
    if abs(det3) <= singular_tol:
        raise SingularAt(t, det3)
    if h is None:
        h = 1e-6 / p.alpha
    deriv = (family_map(t + h, p) - family_map(t - h, p)) / (2.0 * h)
    return deriv @ np.linalg.inv(e_t)


def coeff_extract(l_mat: np.ndarray) -> tuple[GeneratorCoeffs, float]:
    """Project a generator's Bloch block onto (I, A, S).

    Returns the coefficients and the Frobenius norm of the off-span remainder.
    """
    l_mat = np.asarray(l_mat, dtype=float)
    if l_mat.shape != (4, 4):
        raise ValueError(f"generator must be 4x4, got shape {l_mat.shape}")
    block = l_mat[1:, 1:]
    b = float(np.trace(block) / 3.0)
    c = float(np.sum(BASIS_ANTISYM * block) / 6.0)
    d = float(np.sum(BASIS_EXCHANGE * block) / 6.0)
    remainder = block - b * BASIS_ISO - c * BASIS_ANTISYM - d * BASIS_EXCHANGE
    return GeneratorCoeffs(b=b, c=c, d=d), float(np.linalg.norm(remainder))


def coeff_printed(t: float, alpha: float) -> GeneratorCoeffs:
    """Printed closed-form coefficients, kept verbatim for comparison only.

    Raises ZeroDivisionError at the guard points (x = 0, reached at
    alpha t = pi/3, and a^2 + x^2 = 0).
    """
    x, a = printed_xa(t, alpha)
    if abs(x) < 1e-12:
        raise ZeroDivisionError(f"printed coefficients undefined at x(t) = 0 (t = {t!r})")
    denom = a * a + x * x
    if denom == 0.0:
        raise ZeroDivisionError(f"printed coefficients undefined at a^2 + x^2 = 0 (t = {t!r})")
    b = (2.0 / 9.0) * a * (12.0 * alpha + 1.0 / denom)
    c = (1.0 / (9.0 * x)) * (
        alpha * (3.0 * x - 1.0) / 2.0 - a * (3.0 * x + a) / (x * denom)
    )
    d = a * (3.0 * a - x) / (9.0 * x * denom)
    return GeneratorCoeffs(b=b, c=c, d=d)


def master_rhs(rho: np.ndarray, coeffs: GeneratorCoeffs) -> np.ndarray:
    """Operator-form master equation right-hand side (hbar = 1).

    -(i c / 2) [rho, H] - (b / 2) (sum_j sigma_j rho sigma_j - 3 rho)
    + d sum_{j != k} sigma_j rho sigma_k, with H the (1,1,1)-axis Hamiltonian.
    The exchange double sum collapses to H rho H - sum_j sigma_j rho sigma_j.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"state must be 2x2, got shape {rho.shape}")
    h = AXIS_HAMILTONIAN
    pauli_sum = np.zeros((2, 2), dtype=complex)
    for sk in PAULIS:
        pauli_sum += sk @ rho @ sk
    comm = rho @ h - h @ rho
    exchange = h @ rho @ h - pauli_sum
    return (
        (-0.5j * coeffs.c) * comm
        - (0.5 * coeffs.b) * (pauli_sum - 3.0 * rho)
        + coeffs.d * exchange
    )


def calibrate_convention(tol: float = 1e-10) -> tuple[float, float, float]:
    """Bloch-block scale factors of the three unit-coefficient master terms.

    Tomographs master_rhs with (b,c,d) = unit vectors and projects each block
    onto its basis matrix; raises if any block leaves the expected span.
    """
    probes = (
        ((1.0, 0.0, 0.0), BASIS_ISO),
        ((0.0, 1.0, 0.0), BASIS_ANTISYM),
        ((0.0, 0.0, 1.0), BASIS_EXCHANGE),
    )
    kappas = []
    for unit, basis in probes:
        coeffs = GeneratorCoeffs(*unit)
        full = affine_of_linear(lambda rho: master_rhs(rho, coeffs))
        block = full[1:, 1:]
        kappa = float(np.sum(basis * block) / np.sum(basis * basis))
        expected = np.zeros((4, 4))
        expected[1:, 1:] = kappa * basis
        resid = float(np.linalg.norm(full - expected))
        if resid > tol:
            raise ValueError(
                f"master term {unit} leaves the (I, A, S) span (residual {resid:.3e})"
            )
        kappas.append(kappa)
    return tuple(kappas)


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time grid and Bloch coordinates of an integrated path."""

    times: np.ndarray
    bloch: np.ndarray

    @property
    def states(self) -> np.ndarray:
        paulis = np.stack(PAULIS)
        return 0.5 * (np.eye(2, dtype=complex) + np.einsum("tk,kij->tij", self.bloch, paulis))

    @property
    def final_bloch(self) -> np.ndarray:
        return self.bloch[-1].copy()

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def singular_times(
    p: FamilyParams, t0: float, t1: float, samples: int = 2049
) -> list[float]:
    """Times in [t0, t1] where det3 of the family map crosses zero.

    Scans a uniform grid and refines each sign change with brentq; zero
    touches of even multiplicity would escape the scan, but the family's det
    crosses transversally at its singular points.
    """
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    if t1 == t0:
        return [t0] if abs(family_det3(t0, p)) == 0.0 else []
    ts = np.linspace(t0, t1, samples)
    ds = np.array([family_det3(t, p) for t in ts])
    roots: list[float] = []
    for i in range(samples - 1):
        a, b = ds[i], ds[i + 1]
        if a == 0.0:
            roots.append(float(ts[i]))
        elif a * b < 0.0:
            roots.append(float(brentq(lambda t: family_det3(t, p), ts[i], ts[i + 1])))
    if ds[-1] == 0.0:
        roots.append(float(ts[-1]))
    merged: list[float] = []
    for r in sorted(roots):
        if not merged or r - merged[-1] > 1e-9 * max(1.0, p.n):
            merged.append(r)
    return merged


def _rk4_span(
    r0: np.ndarray,
    a: float,
    b: float,
    steps: int,
    p: FamilyParams,
    singular_tol: float,
) -> tuple[list[float], list[np.ndarray]]:
    # Fixed-step classical RK4 on the Bloch vector; generator reused across
    # the matching stage times of consecutive steps.
    h = (b - a) / steps

    def gen(t: float) -> np.ndarray:
        return generator_numeric(t, p, singular_tol=singular_tol)

    def slope(l_mat: np.ndarray, r: np.ndarray) -> np.ndarray:
        return l_mat[1:, 0] + l_mat[1:, 1:] @ r

    times = [a]
    states = [r0.copy()]
    r = r0.copy()
    l_left = gen(a)
    for i in range(steps):
        t = a + i * h
        l_mid = gen(t + 0.5 * h)
        l_right = gen(t + h)
        k1 = slope(l_left, r)
        k2 = slope(l_mid, r + 0.5 * h * k1)
        k3 = slope(l_mid, r + 0.5 * h * k2)
        k4 = slope(l_right, r + h * k3)
        r = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        times.append(t + h)
        states.append(r.copy())
        l_left = l_right
    return times, states


def integrate(
    rho0: np.ndarray,
    t0: float,
    t1: float,
    steps: int,
    p: FamilyParams,
    *,
    segment: bool = False,
    margin: Optional[float] = None,
    singular_tol: float = SINGULAR_DET_TOL,
) -> Trajectory:
    """Integrate dr/dt = L_t r with fixed-step RK4 over [t0, t1].

    Parameters
    ----------
    rho0 : initial qubit density operator (validated).
    steps : total RK4 step budget (split across subintervals in segment mode).
    segment : when True, windows of half-width `margin` around each singular
        time are excluded and bridged exactly with T(b) T(a)^{-1}; when False
        a singular time inside the interval raises SingularAt.
    margin : half-width of the excluded windows, default 1e-3 * n.

    The maximally mixed state is a fixed point for any weights.
    """
    rho0 = check_density(rho0)
    if rho0.shape != (2, 2):
        raise ValueError(f"initial state must be 2x2, got shape {rho0.shape}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    if margin is None:
        margin = 1e-3 * p.n
    r0 = np.array(
        [np.trace(rho0 @ s).real for s in PAULIS]
    )
    if t1 == t0:
        return Trajectory(times=np.array([t0]), bloch=np.array([r0]))

    stars = singular_times(p, t0 - margin, t1 + margin)
    windows: list[tuple[float, float]] = []
    for s in stars:
        a, b = s - margin, s + margin
        if b <= t0 or a >= t1:
            continue
        if windows and a <= windows[-1][1]:
            windows[-1] = (windows[-1][0], b)
        else:
            windows.append((a, b))
    if windows and not segment:
        s = stars[0]
        raise SingularAt(s, family_det3(s, p))
    for a, b in windows:
        if a < t0 < b or a < t1 < b:
            raise SingularAt(0.5 * (a + b), family_det3(0.5 * (a + b), p))

    spans: list[tuple[float, float]] = []
    cursor = t0
    for a, b in windows:
        spans.append((cursor, a))
        cursor = b
    spans.append((cursor, t1))
    total = sum(b - a for a, b in spans)
    if total <= 0.0:
        raise SingularAt(0.5 * (t0 + t1), family_det3(0.5 * (t0 + t1), p))

    times: list[float] = []
    blochs: list[np.ndarray] = []
    r = r0
    for idx, (a, b) in enumerate(spans):
        if b > a:
            n_steps = max(1, round(steps * (b - a) / total))
            seg_times, seg_states = _rk4_span(r, a, b, n_steps, p, singular_tol)
        else:
            seg_times, seg_states = [a], [r.copy()]
        if times:
            seg_times, seg_states = seg_times[1:], seg_states[1:]
        times.extend(seg_times)
        blochs.extend(seg_states)
        if blochs:
            r = blochs[-1]
        if idx < len(spans) - 1:
            wa, wb = windows[idx]
            va = np.concatenate(([1.0], r))
            vb = family_map(wb, p) @ np.linalg.solve(family_map(wa, p), va)
            r = vb[1:] / vb[0]
            times.append(wb)
            blochs.append(r.copy())
    return Trajectory(times=np.array(times), bloch=np.array(blochs))


def semigroup_defect(p: FamilyParams, s: float, t: float) -> float:
    """Frobenius norm of T(s) T(t) - T(s + t); nonzero off a semigroup."""
    return float(
        np.linalg.norm(family_map(s, p) @ family_map(t, p) - family_map(s + t, p))
    )


# ---------------------------------------------------------------------------
# Per-step disturbance: closed-form coefficients and norm estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepBound:
    """Printed per-step coefficients and the a-priori disturbance bound."""

    j: int
    n: int
    c_next: float
    d_next: float
    bound: float


def step_bound(j: int, n: int) -> StepBound:
    """Closed trig forms of the step-(j+1) coefficients plus K sin(pi/n).

    These are the printed simplifications; they satisfy
    c^2 + d^2 = sin^2(pi/n). The exact difference coefficients that the
    decomposition identity requires live in step_difference_coeffs.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= j < n:
        raise ValueError(f"j must satisfy 0 <= j < n, got {j}")
    c = -math.sin((2 * j + 1) * math.pi / n) * math.sin(math.pi / n)
    d = math.cos((2 * j + 1) * math.pi / n) * math.sin(math.pi / n)
    return StepBound(j=j, n=n, c_next=c, d_next=d, bound=BOUND_CONSTANT * math.sin(math.pi / n))


def step_difference_coeffs(j: int, n: int) -> tuple[float, float]:
    """Exact coefficients (C, D) with T_{j+1} - T_j = C (I - target) + D drive."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= j < n:
        raise ValueError(f"j must satisfy 0 <= j < n, got {j}")
    th0 = j * math.pi / (2.0 * n)
    th1 = (j + 1) * math.pi / (2.0 * n)
    c = math.cos(th1) ** 2 - math.cos(th0) ** 2
    d = 0.5 * (math.sin(2.0 * th1) - math.sin(2.0 * th0))
    return c, d


def _pure_state_chart(params: np.ndarray) -> np.ndarray:
    """Pure states in C^4 from batches of 6 angles (global phase fixed).

    params has shape (..., 6); the result has shape (..., 4) with unit norm
    by construction, so the whole chart stays feasible under coordinate moves.
    """
    params = np.asarray(params, dtype=float)
    a, b, c = params[..., 0], params[..., 1], params[..., 2]
    phases = np.exp(1j * params[..., 3:6])
    sa, ca = np.sin(a), np.cos(a)
    sb, cb = np.sin(b), np.cos(b)
    sc, cc = np.sin(c), np.cos(c)
    out = np.empty(params.shape[:-1] + (4,), dtype=complex)
    out[..., 0] = ca
    out[..., 1] = sa * cb * phases[..., 0]
    out[..., 2] = sa * sb * cc * phases[..., 1]
    out[..., 3] = sa * sb * sc * phases[..., 2]
    return out


def _batched_ascent(
    values: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    iters: int,
    step0: float,
    min_step: float = 1e-7,
) -> float:
    # Cyclic coordinate ascent run in lockstep over all restarts; each row
    # accepts or rejects its own probes, so results match independent runs.
    x = np.array(x0, dtype=float)
    fx = values(x)
    step = np.full(x.shape[0], step0)
    for _ in range(iters):
        improved = np.zeros(x.shape[0], dtype=bool)
        for i in range(x.shape[1]):
            for sign in (1.0, -1.0):
                y = x.copy()
                y[:, i] += sign * step
                fy = values(y)
                better = fy > fx
                x[better] = y[better]
                fx[better] = fy[better]
                improved |= better
        step[~improved] *= 0.5
        if np.all(step < min_step):
            break
    return float(fx.max())


def cb_norm_lower_bound(
    delta: Callable[[np.ndarray], np.ndarray],
    trials: int = 64,
    seed: int = 0,
    iters: int = 60,
    step0: float = 0.5,
) -> float:
    """Lower bound on the completely bounded norm of a qubit-input map.

    Maximizes ||(delta (x) id)(psi psi^dag)||_1 over pure psi in C^4 with a
    qubit ancilla (enough for qubit-input maps) by seeded multi-start
    coordinate ascent. Deterministic for fixed (trials, seed); the running
    max makes the result non-decreasing in trials at fixed seed.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def values(x: np.ndarray) -> np.ndarray:
        psis = _pure_state_chart(x)
        out = np.empty(x.shape[0])
        for row, psi in enumerate(psis):
            block = np.outer(psi, psi.conj()).reshape(2, 2, 2, 2)
            mapped = np.empty((2, 2, 2, 2), dtype=complex)
            for a in range(2):
                for b in range(2):
                    mapped[:, a, :, b] = delta(block[:, a, :, b])
            out[row] = np.linalg.svd(mapped.reshape(4, 4), compute_uv=False).sum()
        return out

    rng = np.random.default_rng(seed)
    x0 = rng.uniform(0.0, 2.0 * math.pi, size=(trials, 6))
    return _batched_ascent(values, x0, iters, step0)


def step_delta_estimate(
    j: int,
    n: int,
    q: PauliWeights,
    trials: int = 64,
    seed: int = 0,
    iters: int = 60,
    step0: float = 0.5,
) -> float:
    """Lower bound on the cb norm of the step-(j+1) difference map.

    Same estimator as cb_norm_lower_bound, with the difference of the two
    unitary mixtures evaluated in rank-1 form and all restarts advanced in
    one numpy batch, which keeps the sweep over every (j, n) pair fast.
    """
    if not 0 <= j < n:
        raise ValueError(f"j must satisfy 0 <= j < n, got {j}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    th0 = j * math.pi / (2.0 * n)
    th1 = (j + 1) * math.pi / (2.0 * n)
    eye2 = np.eye(2)
    plus = np.stack(
        [
            math.sqrt(qk) * np.kron(np.cos(th1) * eye2 + 1j * np.sin(th1) * sk, eye2)
            for qk, sk in zip(q.as_tuple(), PAULIS)
        ]
    )
    minus = np.stack(
        [
            math.sqrt(qk) * np.kron(np.cos(th0) * eye2 + 1j * np.sin(th0) * sk, eye2)
            for qk, sk in zip(q.as_tuple(), PAULIS)
        ]
    )

    def values(x: np.ndarray) -> np.ndarray:
        psis = _pure_state_chart(x)
        v = np.einsum("kab,tb->tka", plus, psis)
        w = np.einsum("kab,tb->tka", minus, psis)
        out = np.einsum("tka,tkb->tab", v, v.conj())
        out -= np.einsum("tka,tkb->tab", w, w.conj())
        return np.abs(np.linalg.eigvalsh(out)).sum(axis=1)

    rng = np.random.default_rng(seed)
    x0 = rng.uniform(0.0, 2.0 * math.pi, size=(trials, 6))
    return _batched_ascent(values, x0, iters, step0)
