"""Exact desk-scale simulator of a quenched two-mode Bose Josephson junction with phase noise."""

from .hilbert import (
    DensityMatrix,
    FockBasis,
    PureState,
    SpinOperator,
    coherent_state,
    expectation,
    fock_state,
    husimi,
    overlap,
    spin_operator,
)
from .dynamics import (
    CatSpec,
    QuenchSpec,
    cat_component_matrix,
    cat_state,
    decompose,
    evolve,
    visibility_noiseless,
)
from .noise import (
    NoiseModel,
    TrajectoryEnsemble,
    apply_dephasing,
    dephasing_factor,
    mc_density_matrix,
    phase_variance,
    sample_trajectories,
    spread_phase,
    steady_state,
    validate_model,
)
from .observables import (
    FisherResult,
    HusimiScan,
    fisher_information,
    husimi_scan,
    husimi_steady_approx,
    husimi_two_component_approx,
    offdiag_weight,
    theta3,
    trace_distance,
    visibility,
    visibility_noisy,
)

__version__ = "0.1.0"

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
    "QuenchSpec",
    "CatSpec",
    "evolve",
    "visibility_noiseless",
    "cat_state",
    "cat_component_matrix",
    "decompose",
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
    "__version__",
]
