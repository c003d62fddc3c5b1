"""Fock-basis state space for N atoms in two modes.

A two-mode junction with fixed atom number N lives in the symmetric spin-N/2
representation: the basis states |n> are eigenstates of the number-imbalance
operator J_z with n in {-N/2, ..., N/2}, stored at index i = n + N/2.

Everything here is immutable after construction and all operations are pure
functions, so concurrent read access from multiple threads is safe.
"""

import math
from dataclasses import dataclass, InitVar

import numpy as np
from scipy.special import gammaln

__all__ = [
    "FockBasis",
    "PureState",
    "DensityMatrix",
    "SpinOperator",
    "fock_state",
    "coherent_state",
    "overlap",
    "spin_operator",
    "expectation",
    "husimi",
]

NORM_TOL = 1e-12
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10
IMAG_RESIDUE_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FockBasis:
    """Basis |n>, n in {-N/2,...,N/2}, of the fixed-N two-mode Hilbert space."""

    n_atoms: int

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError(f"need at least one atom, got N={self.n_atoms}")

    @property
    def dim(self) -> int:
        return self.n_atoms + 1

    @property
    def imbalances(self) -> np.ndarray:
        """Array of J_z eigenvalues n, ordered by index (half-integer for odd N)."""
        return np.arange(self.dim) - self.n_atoms / 2

    def index_of(self, n: float) -> int:
        """Index i = n + N/2 of the Fock state |n>."""
        i = n + self.n_atoms / 2
        if abs(i - round(i)) > 1e-9:
            raise ValueError(f"n={n} is not of the form integer - N/2 for N={self.n_atoms}")
        i = int(round(i))
        if not 0 <= i <= self.n_atoms:
            raise ValueError(f"imbalance n={n} outside [-N/2, N/2] for N={self.n_atoms}")
        return i


@dataclass(frozen=True)
class PureState:
    """Normalized complex amplitude vector over a FockBasis."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise ValueError(f"amplitude vector has shape {amps.shape}, expected ({self.basis.dim},)")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 - 1 = {norm2 - 1:.3e}")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    def density_matrix(self) -> "DensityMatrix":
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        return DensityMatrix(self.basis, rho, check_positive=False)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, trace-one, positive-semidefinite matrix over a FockBasis.

    Hermiticity and trace are always verified; the eigenvalue check is an
    O(dim^3) diagonalization and can be skipped by internal constructors that
    preserve positivity structurally (complete positivity of the channel,
    convex mixtures of projectors, ...).
    """

    basis: FockBasis
    elements: np.ndarray
    check_positive: InitVar[bool] = True

    def __post_init__(self, check_positive):
        el = np.asarray(self.elements, dtype=complex)
        dim = self.basis.dim
        if el.shape != (dim, dim):
            raise ValueError(f"matrix has shape {el.shape}, expected ({dim}, {dim})")
        herm = np.abs(el - el.conj().T).max()
        if herm > HERMITICITY_TOL:
            raise ValueError(f"matrix not Hermitian: max |rho - rho^dag| = {herm:.3e}")
        tr = complex(np.trace(el))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace differs from one by {abs(tr - 1.0):.3e}")
        if check_positive:
            lo = float(np.linalg.eigvalsh(el).min())
            if lo < EIGENVALUE_FLOOR:
                raise ValueError(f"matrix not positive semidefinite: min eigenvalue {lo:.3e}")
        object.__setattr__(self, "elements", _readonly(el))


@dataclass(frozen=True)
class SpinOperator:
    """Collective angular momentum component in the Fock basis."""

    basis: FockBasis
    axis: object  # "x" | "y" | "z" or a unit 3-vector
    elements: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "elements", _readonly(np.asarray(self.elements, dtype=complex)))


def fock_state(n_atoms: int, imbalance: float) -> PureState:
    """Fock state |n> with J_z eigenvalue n = imbalance."""
    basis = FockBasis(n_atoms)
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.index_of(imbalance)] = 1.0
    return PureState(basis, amps)


def _coherent_radial(n_atoms: int, theta: float) -> np.ndarray:
    """Radial (phi-independent) amplitude profile of |theta, phi>, unit norm.

    Evaluated through log-binomials so that N ~ 2000 does not overflow; the
    tan(theta/2) > 1 hemisphere is rewritten to avoid the singular tangent,
    and a log-sum-exp shift plus explicit normalization keeps the lgamma
    rounding drift out of the norm.  theta in {0, pi} collapses onto a single
    Fock state.
    """
    if theta == 0.0 or theta == math.pi:
        radial = np.zeros(n_atoms + 1)
        radial[-1 if theta else 0] = 1.0
        return radial
    m = np.arange(n_atoms + 1)
    logbinom = gammaln(n_atoms + 1) - gammaln(m + 1) - gammaln(n_atoms - m + 1)
    t = math.tan(theta / 2)
    if t <= 1.0:
        logw = 0.5 * logbinom + m * math.log(t) - (n_atoms / 2) * math.log1p(t * t)
    else:
        logw = 0.5 * logbinom + (m - n_atoms) * math.log(t) - (n_atoms / 2) * math.log1p(t ** -2)
    radial = np.exp(logw - logw.max())
    return radial / np.linalg.norm(radial)


def coherent_state(n_atoms: int, theta: float, phi: float) -> PureState:
    """SU(2) coherent state |theta, phi>.

    Amplitude at index m = n + N/2 is binom(N,m)^(1/2) alpha^m / (1+|alpha|^2)^(N/2)
    with alpha = tan(theta/2) exp(-i phi), so the mean spin points along
    (N/2)(sin(theta)cos(phi), sin(theta)sin(phi), -cos(theta)).
    """
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta={theta} outside [0, pi]")
    basis = FockBasis(n_atoms)
    if theta == 0.0:
        return fock_state(n_atoms, -n_atoms / 2)
    if theta == math.pi:
        return fock_state(n_atoms, n_atoms / 2)
    m = np.arange(basis.dim)
    return PureState(basis, _coherent_radial(n_atoms, theta) * np.exp(-1j * m * phi))


def overlap(a: PureState, b: PureState) -> complex:
    """Inner product <a|b>."""
    if a.basis != b.basis:
        raise ValueError(f"basis mismatch: N={a.basis.n_atoms} vs N={b.basis.n_atoms}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _ladder_coefficients(n_atoms: int) -> np.ndarray:
    j = n_atoms / 2
    n = np.arange(n_atoms + 1) - j
    return np.sqrt(j * (j + 1) - n[:-1] * (n[:-1] + 1))


def spin_operator(n_atoms: int, axis) -> SpinOperator:
    """J along a pure axis ("x", "y", "z") or a unit 3-vector (n_x, n_y, n_z).

    J_z is diagonal with entries n; J_x and J_y are tridiagonal with the
    standard ladder coefficients, Hermitian exactly by construction.
    """
    basis = FockBasis(n_atoms)
    dim = basis.dim
    if isinstance(axis, str):
        if axis not in ("x", "y", "z"):
            raise ValueError(f"unknown axis {axis!r}")
        el = np.zeros((dim, dim), dtype=complex)
        if axis == "z":
            np.fill_diagonal(el, basis.imbalances)
        else:
            c = _ladder_coefficients(n_atoms)
            lower = np.arange(1, dim)
            upper = np.arange(dim - 1)
            if axis == "x":
                el[lower, upper] = 0.5 * c
                el[upper, lower] = 0.5 * c
            else:
                # J_y = (J_+ - J_-)/(2i): the raising part sits on the lower triangle
                el[lower, upper] = -0.5j * c
                el[upper, lower] = 0.5j * c
        return SpinOperator(basis, axis, el)

    v = np.asarray(axis, dtype=float)
    if v.shape != (3,):
        raise ValueError("axis must be 'x', 'y', 'z' or a 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError(f"direction not a unit vector: |v| = {np.linalg.norm(v):.15f}")
    el = sum(v[i] * spin_operator(n_atoms, ax).elements for i, ax in enumerate("xyz"))
    return SpinOperator(basis, tuple(v), el)


def _operator_matrix(op) -> np.ndarray:
    if isinstance(op, SpinOperator):
        return op.elements
    return np.asarray(op, dtype=complex)


def expectation(state, op) -> float:
    """<O> = tr(rho O) for a DensityMatrix, or <psi|O|psi> for a PureState.

    The imaginary residue is checked against a tolerance before being
    discarded; a residue above it signals an inconsistent (non-Hermitian)
    input and raises.
    """
    if isinstance(op, SpinOperator) and op.basis != _basis_of(state):
        raise ValueError("operator and state live on different bases")
    mat = _operator_matrix(op)
    if isinstance(state, PureState):
        val = complex(np.vdot(state.amplitudes, mat @ state.amplitudes))
    elif isinstance(state, DensityMatrix):
        # tr(rho O) = sum_ij rho_ij O_ji, O(dim^2) instead of a matmul
        val = complex(np.sum(state.elements * mat.T))
    else:
        raise TypeError(f"expected PureState or DensityMatrix, got {type(state).__name__}")
    tol = IMAG_RESIDUE_TOL * max(1.0, abs(val))
    if abs(val.imag) > tol:
        raise ArithmeticError(f"expectation has imaginary residue {val.imag:.3e} above tolerance {tol:.3e}")
    return val.real


def husimi(state, theta: float, phi: float) -> float:
    """Husimi function Q(theta, phi) = <theta,phi| rho |theta,phi>.

    Lies in [0, 1]; for pure states it equals |<theta,phi|psi>|^2.
    """
    probe = coherent_state(_basis_of(state).n_atoms, theta, phi)
    if isinstance(state, PureState):
        return abs(overlap(probe, state)) ** 2
    val = complex(np.vdot(probe.amplitudes, state.elements @ probe.amplitudes))
    if abs(val.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(val)):
        raise ArithmeticError(f"Husimi value has imaginary residue {val.imag:.3e}")
    return val.real


def _basis_of(state) -> FockBasis:
    if isinstance(state, (PureState, DensityMatrix)):
        return state.basis
    raise TypeError(f"expected PureState or DensityMatrix, got {type(state).__name__}")
