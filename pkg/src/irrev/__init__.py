"""Spectral factorization, forward/backward Markov pairs and the lossless heat-bath picture of stationary Gaussian processes."""

__version__ = "0.1.0"

from .errors import IrrevError
from .polyrat import Polynomial, RationalFunction, coprime_reduce, even_odd_split, is_hurwitz, polyval, roots
from .spectral import (
    MatrixSpectralModel,
    ScalarSpectralDensity,
    coanalytic_factor,
    solve_are,
    spectral_distribution,
    spectral_factor_matrix,
    spectral_factor_scalar,
    validate_density,
)
from .realization import (
    ForwardBackwardPair,
    InnerFunction,
    StateSpaceModel,
    build_pair,
    covariance_function,
    invariance_check,
    minimal_realization,
    solve_lyapunov,
    structural_function,
)
from .lossless import FosterForm, foster_synthesis, k_to_z0, load_state_space, storage_matrix, verify_foster, z0_to_k
from .bath import FiniteBath, canonical_flow, characteristic_functional, invariant_covariance, momentum_whiteness, sample_phase
from .simulate import (
    LineBathConfig,
    SamplePath,
    simulate_backward,
    simulate_forward,
    simulate_line_bath,
    simulate_wiener_observable,
)
from .estimate import (
    empirical_covariance,
    entropy_trajectory,
    increment_variance_fit,
    pnd_check,
    welch_psd,
    whiteness_test,
)
