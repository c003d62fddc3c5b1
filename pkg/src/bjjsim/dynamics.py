"""Quenched evolution of the junction after the tunneling term is switched off.

The Hamiltonian chi*J_z^2 - lambda_bar*J_z is diagonal in the Fock basis, so
time evolution multiplies the amplitude at n by exp(-i(chi n^2 - lambda_bar n)t).
Starting from the equatorial phase state, the evolution revives at T = 2pi/chi
and passes through q-component superpositions of phase states at t_q = T/(2q).

The deterministic mean lambda_bar of the detuning lives here, in QuenchSpec;
stochastic fluctuations around it live in the noise module.  A pipeline must
account for the physical mean exactly once, in either place (both routes give
the same density matrix).
"""

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import FockBasis, PureState, coherent_state

__all__ = [
    "QuenchSpec",
    "CatSpec",
    "evolve",
    "visibility_noiseless",
    "cat_state",
    "cat_component_matrix",
    "decompose",
]


@dataclass(frozen=True)
class QuenchSpec:
    """Parameters of the quenched junction: atom number, interaction chi, mean detuning."""

    n_atoms: int
    chi: float  # rad/s
    lambda_bar: float = 0.0  # rad/s, deterministic part of the detuning

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError(f"need at least one atom, got N={self.n_atoms}")
        if self.chi <= 0:
            raise ValueError(f"interaction strength must be positive, got chi={self.chi}")

    @property
    def revival_time(self) -> float:
        """T = 2 pi / chi, when the noiseless evolution returns to the initial state."""
        return 2 * math.pi / self.chi

    def cat_time(self, q: int) -> float:
        """t_q = T/(2q), when the q-component superposition forms."""
        return self.revival_time / (2 * q)


@dataclass(frozen=True)
class CatSpec:
    """q-component superposition of phase states formed at t_q = T/(2q).

    The components sit at phi_k = 2 pi k/q (rotated by -lambda_bar*t_q when the
    quench carries a mean detuning), with coefficients u0*c_k where |u0|^2 = 1/q
    and c_k = exp(i pi k(k+N)/q).  Only even q and even N are supported; the
    coefficient formula for odd q is not established, so those are rejected.
    """

    quench: QuenchSpec
    q: int

    def __post_init__(self):
        if self.q < 2 or self.q % 2 != 0:
            raise ValueError(f"only even q >= 2 is supported, got q={self.q}")
        if self.quench.n_atoms % 2 != 0:
            raise ValueError(f"only even atom numbers are supported, got N={self.quench.n_atoms}")

    @property
    def t_q(self) -> float:
        return self.quench.cat_time(self.q)

    @property
    def component_phases(self) -> np.ndarray:
        """Equatorial angles phi_k of the q superposed phase states."""
        k = np.arange(self.q)
        return 2 * math.pi * k / self.q - self.quench.lambda_bar * self.t_q

    def coefficients(self) -> np.ndarray:
        """c_k = exp(i pi k(k+N)/q)."""
        k = np.arange(self.q)
        return np.exp(1j * math.pi * k * (k + self.quench.n_atoms) / self.q)


def evolve(state: PureState, spec: QuenchSpec, t: float) -> PureState:
    """Evolve under chi*J_z^2 - lambda_bar*J_z for time t (diagonal, norm preserving)."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got t={t}")
    if state.basis.n_atoms != spec.n_atoms:
        raise ValueError("state and quench spec have different atom numbers")
    n = state.basis.imbalances
    phases = np.exp(-1j * (spec.chi * n ** 2 - spec.lambda_bar * n) * t)
    return PureState(state.basis, state.amplitudes * phases)


def visibility_noiseless(spec: QuenchSpec, t: float) -> float:
    """Ramsey visibility cos^(N-1)(chi t) of the noiseless quench from the phase state."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got t={t}")
    return math.cos(spec.chi * t) ** (spec.n_atoms - 1)


def cat_state(cat: CatSpec) -> PureState:
    """The q-component superposition, phase-fixed against the direct evolution.

    |u0|^2 = 1/q leaves the global phase of the superposition free; it is fixed
    by rotating the overlap with evolve(coherent, spec, t_q) onto the positive
    real axis, so the fidelity between both constructions is 1.
    """
    n_atoms = cat.quench.n_atoms
    basis = FockBasis(n_atoms)
    amps = np.zeros(basis.dim, dtype=complex)
    for ck, phik in zip(cat.coefficients(), cat.component_phases):
        amps += ck * coherent_state(n_atoms, math.pi / 2, phik).amplitudes
    amps /= math.sqrt(cat.q)
    evolved = evolve(coherent_state(n_atoms, math.pi / 2, 0.0), cat.quench, cat.t_q)
    z = np.vdot(amps, evolved.amplitudes)
    amps *= z / abs(z)
    return PureState(basis, amps / np.linalg.norm(amps))


def cat_component_matrix(cat: CatSpec, k: int, k2: int) -> np.ndarray:
    """Fock-basis matrix of the (k, k') cross term of the superposition.

    Entry (n, n') is (1/q) 2^-N binom(N, n+N/2)^(1/2) binom(N, n'+N/2)^(1/2)
    exp(-2i pi(k n - k' n')/q) exp(i pi(k^2 - k'^2)/q), times the rigid rotation
    exp(i lambda_bar t_q (n - n')) when the quench carries a mean detuning.
    Summing over all (k, k') reproduces the projector onto the evolved state.
    """
    if not (0 <= k < cat.q and 0 <= k2 < cat.q):
        raise ValueError(f"component indices must lie in [0, {cat.q}), got ({k}, {k2})")
    n_atoms = cat.quench.n_atoms
    basis = FockBasis(n_atoms)
    n = basis.imbalances
    from .hilbert import _coherent_radial

    radial = _coherent_radial(n_atoms, math.pi / 2)  # binom^(1/2)/2^(N/2)
    q = cat.q
    # (1/q) c_k c_k'^* |phi_k><phi_k'| written out over Fock amplitudes; the
    # m = n + N/2 phases and the N-dependent part of c_k combine into the
    # entry phases exp(-2i pi (k n - k' n')/q) exp(i pi (k^2 - k'^2)/q)
    m = n + n_atoms / 2
    coeff = cat.coefficients()
    left = coeff[k] * radial * np.exp(-2j * math.pi * k * m / q)
    right = coeff[k2] * radial * np.exp(-2j * math.pi * k2 * m / q)
    out = np.outer(left, right.conj()) / q
    lam = cat.quench.lambda_bar
    if lam != 0.0:
        rot = np.exp(1j * lam * cat.t_q * n)
        out = out * np.outer(rot, rot.conj())
    return out


def decompose(rho, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a Fock-basis matrix into its n' = n (mod q) part and the complement.

    Returns (rho_d, rho_od).  The split is an exact partition (rho_d + rho_od
    reconstructs the input bitwise) and commutes with any elementwise dephasing
    filter.  For the noiseless superposition, rho_d holds the statistical
    mixture of the q phase states and rho_od the inter-component coherences.
    """
    el = rho.elements if hasattr(rho, "elements") else np.asarray(rho, dtype=complex)
    dim = el.shape[0]
    idx = np.arange(dim)
    mask = (np.subtract.outer(idx, idx) % q) == 0
    rho_d = np.where(mask, el, 0.0)
    rho_od = np.where(mask, 0.0, el)
    return rho_d, rho_od
