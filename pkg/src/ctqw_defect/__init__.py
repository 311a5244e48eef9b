"""Continuous-time quantum walks on a line with single-point position and
transition defects: closed-form spectral solution and a truncated-Hamiltonian
reference propagator."""

__version__ = "0.1.0"

from .exceptions import (
    AccuracyError,
    CTQWError,
    DegenerateDenominatorError,
    DisconnectedDefectError,
    DomainError,
    InvalidParameterError,
    NoBoundStateError,
    PoleError,
    WindowError,
)
from .lattice import (
    DefectLineParams,
    LatticeWindow,
    NodeState,
    TridiagonalHamiltonian,
    band_interval,
    basis_state,
    build_hamiltonian,
    light_cone_radius,
    make_params,
    window_for,
)
from .spectral import (
    BoundState,
    TravelingMode,
    YRoot,
    bound_amplitude,
    bound_candidates,
    bound_states,
    even_amplitude,
    f_of_k,
    f_of_lambda,
    fallback_root_find,
    lambda_of_k,
    odd_amplitude,
    traveling_mode,
    validate_bound,
    y_of_lambda,
)
from .propagator import (
    PropagatorReport,
    QuadratureSpec,
    compare_backends,
    completeness_residual,
    evolve_oracle,
    evolve_spectral,
)
from .observables import (
    DefectSiteDecomposition,
    ProbabilityDistribution,
    bound_projection_probability,
    defect_site_decomposition,
    interference_period,
    probability_distribution,
    std_dev,
    two_bound_closed_form,
)
from .estimator import DefectWalk
