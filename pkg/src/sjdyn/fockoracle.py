"""Truncated Fock-space oracle: dense matrices, direct propagation, fidelity.

Everything here is brute force on purpose.  The six generators are explicit
dim×dim matrices in the number basis, with the su(1,1) triple realized on a
single bosonic mode:

    K₊ = ½(a†)²,   K₋ = ½a²,   K₀ = ¼(2a†a + 1).

The realization splits into parity sectors with lowest K₀ eigenvalue
k = ¼ (even, cyclic vector |0⟩) or k = ¾ (odd, cyclic vector |1⟩).  The
closed-form machinery elsewhere in the package is checked against direct
Schrödinger integration and against coherent-state vectors built by matrix
exponential — no shared code paths with the things being checked.

Truncation policy: any operation whose result would leak into the top of the
basis refuses (raises :class:`TruncationError`) rather than silently
truncating.  Squeezing populates high levels fast; never trust a truncated
tail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import ComplexCoefficients, coeffs_to_real
from .geometry import BargmannIndex
from .weinorman import RealState, wn_phase_rhs, wn_rhs

__all__ = [
    "TAIL_LEVELS",
    "TAIL_MASS_MAX",
    "NORM_DRIFT_MAX",
    "FockBasisSpec",
    "OperatorSet",
    "StateVector",
    "TruncationError",
    "NormDriftError",
    "build_generators",
    "cyclic_vector",
    "coherent_vector",
    "displacement_matrix",
    "squeeze_matrix",
    "chart_state_vector",
    "hamiltonian_matrix",
    "propagate",
    "expectation",
    "solution_fidelity",
]

#: size of the top-of-basis window used for truncation adequacy
TAIL_LEVELS = 10
#: maximum tail mass relative to total mass
TAIL_MASS_MAX = 1e-10
#: maximum allowed norm drift in RK4 propagation
NORM_DRIFT_MAX = 1e-8


class TruncationError(RuntimeError):
    """The truncated basis cannot represent this state adequately."""


class NormDriftError(RuntimeError):
    """Propagation lost unitarity; the step is too large."""


@dataclass(frozen=True)
class FockBasisSpec:
    """Truncated number basis |0⟩..|dim−1⟩ with a parity sector selection.

    sector "even" uses cyclic vector |0⟩ (k = ¼), "odd" uses |1⟩ (k = ¾);
    the odd sector is meaningful for the su(1,1) part only.
    """

    dim: int
    sector: str = "even"

    def __post_init__(self) -> None:
        dim = int(self.dim)
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        if self.sector not in ("even", "odd"):
            raise ValueError(f"sector must be 'even' or 'odd', got {self.sector!r}")
        object.__setattr__(self, "dim", dim)

    @property
    def k(self) -> BargmannIndex:
        return BargmannIndex(0.25 if self.sector == "even" else 0.75)

    @property
    def cyclic_index(self) -> int:
        return 0 if self.sector == "even" else 1


@dataclass(frozen=True)
class OperatorSet:
    """The six generator matrices; adag = a†, Km = K₊†, K0 hermitian."""

    a: np.ndarray
    adag: np.ndarray
    K0: np.ndarray
    Kp: np.ndarray
    Km: np.ndarray
    Id: np.ndarray

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class StateVector:
    """A (generally unnormalized) vector of number-basis amplitudes."""

    psi: np.ndarray

    def __post_init__(self) -> None:
        psi = np.asarray(self.psi, dtype=complex).reshape(-1)
        if psi.size < 2:
            raise ValueError("state must have at least 2 amplitudes")
        if not np.all(np.isfinite(psi)):
            raise ValueError("amplitudes must be finite")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))

    def normalized(self) -> "StateVector":
        nrm = self.norm
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.psi / nrm)


# --- generators and states ------------------------------------------------------


def build_generators(spec: FockBasisSpec) -> OperatorSet:
    """Number-basis matrices with a|m⟩ = √m|m−1⟩ and the one-mode K's.

    Truncation corrupts only the top two levels of each bracket; every
    commutator check must mask those rows/columns.
    """
    dim = spec.dim
    a = np.zeros((dim, dim), dtype=complex)
    for m in range(1, dim):
        a[m - 1, m] = np.sqrt(m)
    adag = a.conj().T
    kp = 0.5 * (adag @ adag)
    km = 0.5 * (a @ a)
    k0 = 0.25 * (2.0 * (adag @ a) + np.eye(dim))
    return OperatorSet(a=a, adag=adag, K0=k0, Kp=kp, Km=km, Id=np.eye(dim, dtype=complex))


def cyclic_vector(spec: FockBasisSpec) -> StateVector:
    """|0⟩ for the even sector, |1⟩ for the odd one."""
    psi = np.zeros(spec.dim, dtype=complex)
    psi[spec.cyclic_index] = 1.0
    return StateVector(psi)


def _check_tail(psi: np.ndarray, what: str) -> None:
    total = float(np.vdot(psi, psi).real)
    if total == 0.0:
        raise TruncationError(f"{what}: zero vector")
    lo = max(1, psi.size - TAIL_LEVELS)
    tail = float(np.vdot(psi[lo:], psi[lo:]).real)
    if tail > TAIL_MASS_MAX * total:
        raise TruncationError(
            f"{what}: tail mass {tail / total:.3e} of total exceeds {TAIL_MASS_MAX:.1e}; "
            "increase dim"
        )


def coherent_vector(z: complex, w: complex, spec: FockBasisSpec) -> StateVector:
    """Unnormalized e_{z,w} = exp(z·a† + w·K₊) applied to the cyclic vector.

    z·a† + w·K₊ is strictly lower triangular in the number basis, so the
    exponential series terminates exactly within the truncation.  Raises
    :class:`TruncationError` when the top :data:`TAIL_LEVELS` levels carry
    more than :data:`TAIL_MASS_MAX` of the mass.
    """
    z = complex(z)
    w = complex(w)
    if abs(w) >= 1.0:
        raise ValueError(f"|w| must be < 1, got |w|={abs(w)}")
    ops = build_generators(spec)
    M = z * ops.adag + w * ops.Kp
    term = cyclic_vector(spec).psi.copy()
    acc = term.copy()
    for j in range(1, spec.dim + 1):
        term = (M @ term) / j
        if not np.any(term):
            break
        acc += term
    _check_tail(acc, "coherent_vector")
    return StateVector(acc)


def _expm_skew(hermitian_generator: np.ndarray) -> np.ndarray:
    """exp(−i·G) for hermitian G, via eigendecomposition (exactly unitary)."""
    vals, vecs = np.linalg.eigh(hermitian_generator)
    return (vecs * np.exp(-1j * vals)) @ vecs.conj().T


def displacement_matrix(alpha: complex, spec: FockBasisSpec) -> np.ndarray:
    """Unitary D(α) = exp(α·a† − ᾱ·a)."""
    alpha = complex(alpha)
    ops = build_generators(spec)
    return _expm_skew(1j * (alpha * ops.adag - alpha.conjugate() * ops.a))


def squeeze_matrix(w: complex, spec: FockBasisSpec) -> np.ndarray:
    """Unitary S(w) = exp(ζ·K₊ − ζ̄·K₋) with ζ = artanh|w|·(w/|w|), |w| < 1."""
    w = complex(w)
    s = abs(w)
    if s >= 1.0:
        raise ValueError(f"|w| must be < 1, got |w|={s}")
    if s == 0.0:
        zeta = 0.0 + 0.0j
    else:
        zeta = (w / s) * np.arctanh(s)
    ops = build_generators(spec)
    return _expm_skew(1j * (zeta * ops.Kp - zeta.conjugate() * ops.Km))


def chart_state_vector(alpha: complex, w: complex, phi: float, spec: FockBasisSpec) -> StateVector:
    """e^{−iφ}·D(α)·S(w) applied to the cyclic vector, tail-checked."""
    psi = displacement_matrix(alpha, spec) @ (squeeze_matrix(w, spec) @ cyclic_vector(spec).psi)
    _check_tail(psi, "chart_state_vector")
    return StateVector(np.exp(-1j * float(phi)) * psi)


# --- Hamiltonians and propagation --------------------------------------------------


def hamiltonian_matrix(c: ComplexCoefficients, spec: FockBasisSpec) -> np.ndarray:
    """H = ε_a·a + ε̄_a·a† + ε₀·K₀ + ε₊·K₊ + ε₋·K₋ (hermitian by construction)."""
    ops = build_generators(spec)
    return (
        c.eps_a * ops.a
        + c.eps_a.conjugate() * ops.adag
        + c.eps_0 * ops.K0
        + c.eps_plus * ops.Kp
        + c.eps_minus * ops.Km
    )


def _require_hermitian(H: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(H))))
    resid = float(np.max(np.abs(H - H.conj().T)))
    if resid > 1e-12 * scale:
        raise ValueError(f"H not hermitian: residual {resid:.3e}")


def propagate(
    psi0: StateVector,
    H: np.ndarray,
    t: float,
    steps: int | None = None,
    *,
    method: str | None = None,
) -> StateVector:
    """Solve i·ψ̇ = H·ψ for constant hermitian H over time t.

    method "expm" (default when steps is None) diagonalizes H once;
    method "rk4" takes the given number of fixed steps and raises
    :class:`NormDriftError` if the norm drifts by more than
    :data:`NORM_DRIFT_MAX`.
    """
    H = np.asarray(H, dtype=complex)
    _require_hermitian(H)
    t = float(t)
    if method is None:
        method = "expm" if steps is None else "rk4"
    if method == "expm":
        vals, vecs = np.linalg.eigh(H)
        psi = (vecs * np.exp(-1j * vals * t)) @ (vecs.conj().T @ psi0.psi)
        return StateVector(psi)
    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")
    if not steps or int(steps) < 1:
        raise ValueError("rk4 propagation requires steps >= 1")
    n = int(steps)
    h = t / n
    psi = psi0.psi.astype(complex).copy()
    norm0 = float(np.linalg.norm(psi))
    for _ in range(n):
        k1 = -1j * (H @ psi)
        k2 = -1j * (H @ (psi + 0.5 * h * k1))
        k3 = -1j * (H @ (psi + 0.5 * h * k2))
        k4 = -1j * (H @ (psi + h * k3))
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    drift = abs(float(np.linalg.norm(psi)) - norm0)
    if drift > NORM_DRIFT_MAX:
        raise NormDriftError(f"norm drift {drift:.3e} exceeds {NORM_DRIFT_MAX:.1e}; reduce step")
    return StateVector(psi)


def expectation(psi: StateVector, M: np.ndarray) -> complex:
    """⟨ψ|M|ψ⟩ / ⟨ψ|ψ⟩."""
    num = complex(np.vdot(psi.psi, M @ psi.psi))
    den = float(np.vdot(psi.psi, psi.psi).real)
    return num / den


# --- the main cross-check -----------------------------------------------------------


def solution_fidelity(
    c: ComplexCoefficients,
    s0: RealState,
    t: float,
    spec: FockBasisSpec,
    *,
    step: float = 1e-3,
) -> float:
    """|⟨ψ_direct(t), ψ_closed(t)⟩| for the closed-form solution e^{−iφ}D(α)S(w)|0⟩.

    ψ_direct integrates the Schrödinger equation from D(α₀)S(w₀)|0⟩ by
    diagonalization; (α, w, φ)(t) integrate the real equations of motion and
    phase with k = ¼ by fixed-step RK4.  Truncation adequacy is enforced at
    eleven sample times along the direct trajectory and on the closed-form
    state; inadequate truncation raises :class:`TruncationError`.
    """
    if spec.sector != "even":
        raise ValueError("solution_fidelity uses the even sector (k=1/4)")
    t = float(t)
    rc = coeffs_to_real(c)
    k = spec.k

    psi0 = chart_state_vector(s0.alpha, s0.w, 0.0, spec)
    H = hamiltonian_matrix(c, spec)
    vals, vecs = np.linalg.eigh(H)
    coeffs0 = vecs.conj().T @ psi0.psi
    for ti in np.linspace(0.0, t, 11):
        psi_i = (vecs * np.exp(-1j * vals * ti)) @ coeffs0
        _check_tail(psi_i, f"solution_fidelity at t={ti:.3f}")
    psi_direct = (vecs * np.exp(-1j * vals * t)) @ coeffs0

    # real equations of motion, co-integrated with the phase
    y = np.array([s0.x, s0.y, s0.u, s0.v, 0.0])

    def rhs(yv: np.ndarray) -> np.ndarray:
        st = RealState(x=yv[0], y=yv[1], u=yv[2], v=yv[3])
        dx, dy, du, dv = wn_rhs(rc, st)
        return np.array([dx, dy, du, dv, wn_phase_rhs(rc, st, k)])

    n_steps = max(1, int(np.ceil(abs(t) / step))) if t else 0
    h = t / n_steps if n_steps else 0.0
    for _ in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    psi_cs = chart_state_vector(complex(y[0], y[1]), complex(y[2], y[3]), y[4], spec)
    overlap = abs(complex(np.vdot(psi_direct, psi_cs.psi)))
    return overlap / (float(np.linalg.norm(psi_direct)) * psi_cs.norm)
