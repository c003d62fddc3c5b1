"""Stationary classical phase noise coupled to the number imbalance.

A stochastic detuning lambda(t) rotates the state rigidly about z by the
random angle phi(t) = -integral of lambda.  Averaging over realizations turns
the Fock-basis matrix element (n, n') into itself times the characteristic
function of phi at n'-n; for Gaussian noise that kernel is
exp(-a2(t) m^2 / 2) exp(-i lambda_bar t m) with a2(t) the accumulated phase
variance, the double time integral of the correlation function h(tau).

Concrete models: Ornstein-Uhlenbeck h(tau) = h0 exp(-|tau|/tau_c) (closed-form
a2, realizes both the quadratic short-time and the linear Markov regime),
white noise h(tau) = 2 D delta(tau) (pure Markov), and a user correlation
function integrated by adaptive quadrature.  A Monte-Carlo trajectory sampler
provides an independent oracle for the analytic kernel.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .hilbert import DensityMatrix, FockBasis, PureState
from .dynamics import QuenchSpec, evolve

__all__ = [
    "NoiseModel",
    "TrajectoryEnsemble",
    "phase_variance",
    "dephasing_factor",
    "spread_phase",
    "apply_dephasing",
    "steady_state",
    "sample_trajectories",
    "mc_density_matrix",
    "validate_model",
]

OU_MAX_STEP_FRACTION = 1 / 20  # exact recursion stays well-resolved below tau_c/20
_SAMPLING_CHUNK = 1024  # trajectories per deterministic seed stream


@dataclass(frozen=True)
class NoiseModel:
    """Stationary Gaussian noise on the detuning, described by its correlation function.

    lambda_bar is the process mean.  When a pipeline already carries the mean
    in its QuenchSpec, construct the model with lambda_bar=0; the closed-form
    visibility and the Monte-Carlo oracle treat the two placements as the same
    physical parameter, so it must be accounted for exactly once.
    """

    kind: str  # "ou" | "white" | "custom"
    lambda_bar: float = 0.0
    h0: Optional[float] = None  # rad^2/s^2, zero-lag correlation (OU)
    tau_c: Optional[float] = None  # s, correlation time (OU)
    diffusion: Optional[float] = None  # rad^2/s, phase diffusion constant (white)
    corr: Optional[Callable[[float], float]] = None  # h(tau) for "custom"

    @classmethod
    def ornstein_uhlenbeck(cls, h0: float, tau_c: float, lambda_bar: float = 0.0) -> "NoiseModel":
        """h(tau) = h0 exp(-|tau|/tau_c)."""
        if h0 < 0:
            raise ValueError(f"zero-lag correlation must be nonnegative, got h0={h0}")
        if tau_c <= 0:
            raise ValueError(f"correlation time must be positive, got tau_c={tau_c}")
        return cls(kind="ou", lambda_bar=lambda_bar, h0=h0, tau_c=tau_c)

    @classmethod
    def white(cls, diffusion: float, lambda_bar: float = 0.0) -> "NoiseModel":
        """Markov limit h(tau) = 2 D delta(tau), i.e. a2(t) = 2 D t."""
        if diffusion < 0:
            raise ValueError(f"diffusion constant must be nonnegative, got D={diffusion}")
        return cls(kind="white", lambda_bar=lambda_bar, diffusion=diffusion)

    @classmethod
    def custom(cls, corr: Callable[[float], float], lambda_bar: float = 0.0) -> "NoiseModel":
        """User-supplied correlation function h(tau); a2 by adaptive quadrature."""
        return cls(kind="custom", lambda_bar=lambda_bar, corr=corr)


def validate_model(model: NoiseModel, times) -> None:
    """Check h(0) >= 0, h(tau) = h(-tau) and a2 nondecreasing on a sample grid."""
    times = np.asarray(times, dtype=float)
    if model.kind == "custom":
        h0 = model.corr(0.0)
        if h0 < 0:
            raise ValueError(f"h(0) = {h0} must be nonnegative")
        scale = abs(h0) + 1e-300
        for tau in times:
            if abs(model.corr(tau) - model.corr(-tau)) > 1e-9 * scale:
                raise ValueError(f"correlation function not symmetric at tau={tau}")
    a2 = np.array([phase_variance(model, t) for t in np.sort(times)])
    if np.any(np.diff(a2) < -1e-12 * max(a2.max(), 1e-300)):
        raise ValueError("accumulated phase variance is not nondecreasing on the sample grid")


def _x_minus_one_plus_exp_neg(x: float) -> float:
    """x - 1 + exp(-x), evaluated without cancellation for small x."""
    if x < 1e-3:
        # series x^2/2 - x^3/6 + x^4/24 - x^5/120; truncation below 1e-16 relative
        return x * x * (0.5 + x * (-1.0 / 6 + x * (1.0 / 24 - x / 120)))
    return x - 1.0 + math.exp(-x)


def phase_variance(model: NoiseModel, t: float) -> float:
    """Accumulated phase variance a2(t) = 2 * int_0^t dtau int_0^tau du h(u), in rad^2."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got t={t}")
    if t == 0:
        return 0.0
    if model.kind == "ou":
        x = t / model.tau_c
        return 2.0 * model.h0 * model.tau_c ** 2 * _x_minus_one_plus_exp_neg(x)
    if model.kind == "white":
        return 2.0 * model.diffusion * t
    if model.kind == "custom":
        # reduce the double integral to 2 * int_0^t (t-u) h(u) du
        val, err = quad(lambda u: (t - u) * model.corr(u), 0.0, t, epsabs=0.0, epsrel=1e-11, limit=200)
        if err > 1e-8 * abs(val) + 1e-15:
            raise RuntimeError(
                f"quadrature for a2({t}) did not converge: value {val:.6e}, error estimate {err:.3e}"
            )
        return 2.0 * val
    raise ValueError(f"unknown noise kind {model.kind!r}")


def dephasing_factor(model: NoiseModel, m, t: float):
    """Characteristic-function kernel f(m, t) = exp(-a2 m^2/2) exp(-i lambda_bar t m).

    Satisfies |f| <= 1 and f(-m) = conj(f(m)).  Vectorized over m.
    """
    m = np.asarray(m)
    a2 = phase_variance(model, t)
    out = np.exp(-0.5 * a2 * m.astype(float) ** 2) * np.exp(-1j * model.lambda_bar * t * m)
    return complex(out) if out.ndim == 0 else out


def spread_phase(rho, variance: float, mean_angle: float = 0.0, extra_kernel=None):
    """Average a matrix over a Gaussian rigid rotation about z.

    Multiplies the (n, n') entry by exp(-variance (n-n')^2 / 2) times
    exp(-i mean_angle (n-n')); the diagonal is untouched and Hermiticity,
    trace and positivity are preserved (the Gaussian kernel matrix is positive
    semidefinite, so the elementwise product is completely positive).

    extra_kernel(m) may supply additional multiplicative factors such as
    higher-cumulant corrections exp(b_p (n'-n)^p); it is called with the array
    of differences m = n'-n, must satisfy extra_kernel(0) = 1, and positivity
    is then re-checked on construction since an arbitrary kernel need not be
    completely positive.
    """
    if variance < 0:
        raise ValueError(f"variance must be nonnegative, got {variance}")
    el = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    dim = el.shape[0]
    idx = np.arange(dim)
    delta = np.subtract.outer(idx, idx)  # n - n'
    kernel = np.exp(-0.5 * variance * delta.astype(float) ** 2)
    if mean_angle != 0.0:
        kernel = kernel * np.exp(-1j * mean_angle * delta)
    if extra_kernel is not None:
        extra = np.asarray(extra_kernel(-delta))
        if abs(extra[0, 0] - 1.0) > 1e-12:
            raise ValueError("extra kernel must equal 1 at m = 0 to preserve the trace")
        kernel = kernel * extra
    out = el * kernel
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(rho.basis, out, check_positive=extra_kernel is not None)
    return out


def apply_dephasing(rho, model: NoiseModel, t: float, extra_kernel=None):
    """Apply the noise average at time t: entry (n, n') times f(n'-n, t).

    Accepts a DensityMatrix or a bare matrix part (e.g. one output of
    dynamics.decompose) and returns the same shape.
    """
    return spread_phase(
        rho,
        phase_variance(model, t),
        mean_angle=-model.lambda_bar * t,
        extra_kernel=extra_kernel,
    )


def steady_state(n_atoms: int) -> DensityMatrix:
    """Long-time limit: the Fock mixture with binomial weights 2^-N binom(N, n+N/2).

    Equals the uniform average of equatorial coherent-state projectors over the
    phase.  Weights are evaluated through exact rationals, so they are
    correctly rounded for any N.
    """
    basis = FockBasis(n_atoms)
    denom = 1 << n_atoms
    probs = [float(Fraction(math.comb(n_atoms, k), denom)) for k in range(basis.dim)]
    return DensityMatrix(basis, np.diag(np.asarray(probs, dtype=complex)), check_positive=False)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Accumulated noise angles phi(t) for a batch of independent realizations.

    phases[i, k] is phi of trajectory i at time k*dt, with phi(0) = 0.  The
    ensemble is bit-reproducible from (seed, n_traj, dt, t_max, model): each
    block of trajectories draws from its own seed stream, so the result is
    independent of how many workers sampled it.
    """

    dt: float
    t_max: float
    seed: int
    phases: np.ndarray

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=float)
        if ph.ndim != 2:
            raise ValueError("phases must be a (trajectories, steps+1) array")
        if np.any(ph[:, 0] != 0.0):
            raise ValueError("every trajectory must start at phi(0) = 0")
        ph = np.ascontiguousarray(ph)
        ph.setflags(write=False)
        object.__setattr__(self, "phases", ph)

    @property
    def n_traj(self) -> int:
        return self.phases.shape[0]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.phases.shape[1]) * self.dt

    def index_of(self, t: float) -> int:
        """Grid index of time t; raises if t is not on the sampling grid."""
        k = int(round(t / self.dt))
        if not 0 <= k < self.phases.shape[1] or abs(k * self.dt - t) > 1e-9 * max(self.dt, t):
            raise ValueError(f"t={t} is not on the sampled time grid (dt={self.dt}, t_max={self.t_max})")
        return k


def _sample_chunk(model: NoiseModel, rng: np.random.Generator, size: int, n_steps: int, dt: float) -> np.ndarray:
    out = np.zeros((size, n_steps + 1))
    if model.kind == "white":
        sigma = math.sqrt(2.0 * model.diffusion * dt)
        incr = rng.normal(-model.lambda_bar * dt, sigma, (size, n_steps))
        np.cumsum(incr, axis=1, out=out[:, 1:])
        return out
    # exact one-step OU recursion: no O(dt) discretization bias in lambda itself
    lam_bar = model.lambda_bar
    alpha = math.exp(-dt / model.tau_c)
    sigma = math.sqrt(model.h0 * (1.0 - alpha * alpha))
    lam = rng.normal(lam_bar, math.sqrt(model.h0), size)  # stationary initial law
    for k in range(1, n_steps + 1):
        lam_next = lam_bar + (lam - lam_bar) * alpha + sigma * rng.standard_normal(size)
        out[:, k] = out[:, k - 1] - 0.5 * dt * (lam + lam_next)  # trapezoid accumulation
        lam = lam_next
    return out


def sample_trajectories(
    model: NoiseModel,
    t_max: float,
    dt: float,
    n_traj: int,
    seed: int,
    n_threads: int = 1,
) -> TrajectoryEnsemble:
    """Draw n_traj realizations of phi(t) on the grid {0, dt, ..., t_max}.

    Only the OU and white models can be sampled.  For OU the step must resolve
    the correlation time (dt <= tau_c/20) so the trapezoid accumulation bias
    stays far below statistical error.
    """
    if model.kind not in ("ou", "white"):
        raise ValueError(f"cannot sample noise of kind {model.kind!r}")
    if model.kind == "ou" and dt > model.tau_c * OU_MAX_STEP_FRACTION:
        raise ValueError(f"dt={dt} too coarse: need dt <= tau_c/20 = {model.tau_c * OU_MAX_STEP_FRACTION}")
    if dt <= 0 or t_max <= 0 or n_traj < 1:
        raise ValueError("need dt > 0, t_max > 0 and at least one trajectory")
    n_steps = int(round(t_max / dt))
    phases = np.zeros((n_traj, n_steps + 1))
    starts = range(0, n_traj, _SAMPLING_CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(starts))

    def fill(i_chunk: int) -> None:
        lo = i_chunk * _SAMPLING_CHUNK
        hi = min(lo + _SAMPLING_CHUNK, n_traj)
        rng = np.random.default_rng(children[i_chunk])
        phases[lo:hi] = _sample_chunk(model, rng, hi - lo, n_steps, dt)

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(fill, range(len(children))))
    else:
        for i in range(len(children)):
            fill(i)
    return TrajectoryEnsemble(dt=dt, t_max=n_steps * dt, seed=seed, phases=phases)


def mc_density_matrix(
    initial: PureState,
    spec: QuenchSpec,
    ensemble: TrajectoryEnsemble,
    t: float,
) -> DensityMatrix:
    """Monte-Carlo noise average (1/M) sum_traj of the rotated evolved projector.

    Implemented through the empirical characteristic function
    C(m) = (1/M) sum exp(i m phi) in place of the analytic kernel, which costs
    O(M N) + O(N^2) instead of M outer products.  The diagonal carries no
    statistical error since phi cancels there.
    """
    k = ensemble.index_of(t)
    phi = ensemble.phases[:, k]
    psi = evolve(initial, spec, t).amplitudes
    dim = psi.size
    m = np.arange(dim)
    c_pos = np.exp(1j * np.outer(phi, m)).mean(axis=0)
    c_full = np.concatenate([c_pos[:0:-1].conj(), c_pos])  # C(m) for m = -N..N
    idx = np.arange(dim)
    kernel = c_full[np.subtract.outer(idx, idx) * -1 + dim - 1]  # entry (n,n') gets C(n'-n)
    rho = np.outer(psi, psi.conj()) * kernel
    return DensityMatrix(FockBasis(spec.n_atoms), rho, check_positive=False)
