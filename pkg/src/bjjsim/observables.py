"""Physical diagnostics: visibility, state distances, Husimi profiles, Fisher information.

The Ramsey visibility (2/N) tr(rho J_x) measures the surviving phase coherence
between the two modes; under Gaussian noise it factorizes into
exp(-a2(t)/2) cos(lambda_bar t) cos^(N-1)(chi t).  Phase relaxation of the
mod-q diagonal part toward the Fock mixture is quantified by the trace
distance, decoherence of the off-diagonal part by its Frobenius weight, and
the remaining metrological power by the quantum Fisher information optimized
over collective rotation axes.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .hilbert import DensityMatrix, PureState, expectation, spin_operator
from .hilbert import _coherent_radial
from .dynamics import QuenchSpec, visibility_noiseless
from .noise import NoiseModel, phase_variance

__all__ = [
    "FisherResult",
    "HusimiScan",
    "visibility",
    "visibility_noisy",
    "trace_distance",
    "offdiag_weight",
    "theta3",
    "husimi_steady_approx",
    "husimi_two_component_approx",
    "fisher_information",
    "husimi_scan",
]

FISHER_EIGENVALUE_FLOOR = 1e-12
THETA3_TERM_CUTOFF = 1e-15


@dataclass(frozen=True)
class FisherResult:
    """Quantum Fisher information, the optimal generator axis, and the full 3x3 form."""

    value: float
    direction: np.ndarray  # unit 3-vector
    form: np.ndarray  # real symmetric 3x3 matrix, F(n) = n.form.n

    def __post_init__(self):
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))
        object.__setattr__(self, "form", np.asarray(self.form, dtype=float))


@dataclass(frozen=True)
class HusimiScan:
    """Husimi values on a (theta, phi) grid; values[i, j] = Q(thetas[i], phis[j])."""

    thetas: np.ndarray
    phis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.min() < -1e-12:
            raise ValueError(f"Husimi scan has negative value {vals.min():.3e}")
        object.__setattr__(self, "thetas", np.asarray(self.thetas, dtype=float))
        object.__setattr__(self, "phis", np.asarray(self.phis, dtype=float))
        object.__setattr__(self, "values", vals)


def _as_matrix(state) -> tuple[np.ndarray, int]:
    if isinstance(state, DensityMatrix):
        return state.elements, state.basis.n_atoms
    if isinstance(state, PureState):
        return np.outer(state.amplitudes, state.amplitudes.conj()), state.basis.n_atoms
    el = np.asarray(state, dtype=complex)
    return el, el.shape[0] - 1


def visibility(rho) -> float:
    """Ramsey fringe visibility nu = (2/N) tr(rho J_x)."""
    if isinstance(rho, (DensityMatrix, PureState)):
        n_atoms = rho.basis.n_atoms
        return (2.0 / n_atoms) * expectation(rho, spin_operator(n_atoms, "x"))
    el, n_atoms = _as_matrix(rho)
    jx = spin_operator(n_atoms, "x").elements
    return (2.0 / n_atoms) * float(np.real(np.sum(el * jx.T)))


def visibility_noisy(spec: QuenchSpec, model: NoiseModel, t: float) -> float:
    """Closed-form noisy visibility exp(-a2(t)/2) cos(lambda_bar t) cos^(N-1)(chi t).

    lambda_bar is the total detuning mean, spec.lambda_bar + model.lambda_bar,
    so the formula matches the matrix pipeline no matter which of the two
    carries the physical mean.
    """
    lam = spec.lambda_bar + model.lambda_bar
    return math.exp(-0.5 * phase_variance(model, t)) * math.cos(lam * t) * visibility_noiseless(spec, t)


def trace_distance(a, b) -> float:
    """(1/2) sum |eigenvalues(a - b)| for Hermitian a, b; lies in [0, 1] for states."""
    ma, na = _as_matrix(a)
    mb, nb = _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError(f"shape mismatch: {ma.shape} vs {mb.shape}")
    return 0.5 * float(np.abs(np.linalg.eigvalsh(ma - mb)).sum())


def offdiag_weight(rho_od) -> float:
    """Frobenius norm of an off-diagonal part; its decay quantifies decoherence."""
    el, _ = _as_matrix(rho_od)
    return float(np.linalg.norm(el, "fro"))


def theta3(z, nome: float) -> float:
    """Jacobi theta function 1 + 2 sum_k nome^(k^2) cos(2 k z), truncated below 1e-15."""
    if not 0.0 <= nome < 1.0:
        raise ValueError(f"nome must lie in [0, 1), got {nome}")
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    k = 1
    while True:
        amp = 2.0 * nome ** (k * k)
        total = total + amp * np.cos(2 * k * z)
        if amp < THETA3_TERM_CUTOFF:
            break
        k += 1
    return float(total) if total.ndim == 0 else total


def husimi_steady_approx(n_atoms: int, theta: float) -> float:
    """Large-N Husimi profile ((1+sin t)/2)^(N+1/2) / sqrt(pi N sin t) of the Fock mixture."""
    s = math.sin(theta)
    if s <= 0:
        raise ValueError(f"theta={theta} must lie strictly inside (0, pi)")
    return math.exp((n_atoms + 0.5) * math.log((1 + s) / 2) - 0.5 * math.log(math.pi * n_atoms * s))


def husimi_two_component_approx(n_atoms, spread, lambda_bar, chi, theta, phi):
    """Theta-function approximation of the dephased two-component superposition's Husimi.

    Q_d(theta, phi) ~= Q_inf(theta) * Theta3(phi + pi lambda_bar/(2 chi), exp(-2 a^2))
    where a = spread is the accumulated phase spread at the formation time
    t_2 = pi/(2 chi) and Q_inf is the flat steady profile.  The theta argument
    is the bare angle (no half-angle) and the nome is exp(-2 a^2); this
    convention reproduces the exact Husimi of the filtered mod-2 diagonal part
    (the Fourier series of the exact profile has coefficients
    binom(2N, N-2k)/binom(2N, N) * nome^(k^2), and the approximation replaces
    the binomial ratio by one).

    Accurate for N >> 1 and spread >> N^(-1/4); warns outside that regime.
    """
    if n_atoms < 20:
        warnings.warn(f"approximation derived for large N, got N={n_atoms}", stacklevel=2)
    if spread < n_atoms ** -0.25:
        warnings.warn(
            f"spread {spread:.3g} below N^(-1/4) = {n_atoms ** -0.25:.3g}; approximation degrades",
            stacklevel=2,
        )
    nome = math.exp(-2.0 * spread * spread)
    z = np.asarray(phi, dtype=float) + math.pi * lambda_bar / (2 * chi)
    return husimi_steady_approx(n_atoms, theta) * theta3(z, nome)


def fisher_information(rho, direction=None) -> FisherResult:
    """Quantum Fisher information for collective rotation generators.

    From the eigendecomposition rho = sum p_i |i><i|, the information along
    axis n is F(n) = 2 sum_(i,j) (p_i - p_j)^2/(p_i + p_j) |<i|J_n|j>|^2
    (terms with p_i + p_j below a 1e-12 floor are dropped).  F is an exact
    quadratic form in the axis, so the optimum over directions is the largest
    eigenvalue of the 3x3 form M_ab = 2 sum w_ij Re[<i|J_a|j><j|J_b|i>] and
    needs no search.  For pure states this reduces to 4 Var(J_n).

    If direction is given, value is evaluated along it; otherwise the optimal
    axis and value are returned.  In all cases the full form is attached.
    """
    el, n_atoms = _as_matrix(rho)
    p, u = np.linalg.eigh(el)
    pair_sum = p[:, None] + p[None, :]
    keep = pair_sum > FISHER_EIGENVALUE_FLOOR
    weights = np.where(keep, 2.0 * (p[:, None] - p[None, :]) ** 2 / np.where(keep, pair_sum, 1.0), 0.0)
    rotated = [u.conj().T @ spin_operator(n_atoms, ax).elements @ u for ax in "xyz"]
    form = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            form[a, b] = form[b, a] = float(np.sum(weights * np.real(rotated[a] * rotated[b].conj())))
    if direction is not None:
        v = np.asarray(direction, dtype=float)
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError(f"direction not a unit vector: |v| = {np.linalg.norm(v):.15f}")
        return FisherResult(float(v @ form @ v), v, form)
    eigvals, eigvecs = np.linalg.eigh(form)
    best = eigvecs[:, -1]
    if best[np.argmax(np.abs(best))] < 0:  # fix the +/- sign ambiguity deterministically
        best = -best
    return FisherResult(float(eigvals[-1]), best, form)


def husimi_scan(state, thetas, phis) -> HusimiScan:
    """Husimi function evaluated on the outer product of a theta and a phi grid."""
    el, n_atoms = _as_matrix(state)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    m = np.arange(n_atoms + 1)
    values = np.empty((thetas.size, phis.size))
    phase_bank = np.exp(-1j * np.outer(m, phis))
    for i, theta in enumerate(thetas):
        probes = _coherent_radial(n_atoms, theta)[:, None] * phase_bank
        values[i] = np.real(np.sum(probes.conj() * (el @ probes), axis=0))
    return HusimiScan(thetas, phis, values)
