"""structid: structure-constrained identification of governing equations.

Candidate libraries built from physics priors (skew-gradient Hamiltonian
entries, conservation-law divergences, gradient-flow variational
derivatives) feed a weak-form sparse-regression pipeline: subspace pursuit
across sparsity levels, contribution-score trimming, and reduction-in-
residual model selection.
"""

from .algebra import Factor, InvDistance, Monomial, monomial, poly
from .data import (
    GridDataset,
    IdentifyTrace,
    LinearSystem,
    SparseModel,
    build_linear_system,
    load_dataset,
    model_from_json,
    model_to_json,
    save_dataset,
    validate_dataset,
)
from .dictionary import (
    Dictionary,
    EnergyDensityTerm,
    FeatureTerm,
    ScalarHamiltonianTerm,
    TermPiece,
    build_flux_library,
    build_gradient_flow_library,
    build_hamiltonian_library,
    dictionary_from_json,
    dictionary_to_json,
    evaluate_strong,
    monomial_key,
    pde_coefficients,
    truth_model,
    variational_derivative,
)
from .differentiate import central_diff, dataset_derivative, spectral_diff, time_derivative
from .libraries import (
    SYSTEMS,
    build_baseline_library,
    index_of,
    prior_library,
)
from .noise import StateError, add_noise, coeff_error, noise_sigma, state_error, tpr, trial_seed
from .regression import (
    PipelineConfig,
    SelectionResult,
    identify,
    identify_blocks,
    least_squares,
    select_sparsity,
    subspace_pursuit,
    trim,
)
from .simulate import (
    FULL_SCALE,
    SimConfig,
    allen_cahn_energy,
    default_config,
    resimulate,
    resimulation_ic,
    simulate,
    simulate_allen_cahn,
    simulate_burgers,
    simulate_diffusion,
    simulate_harmonic,
    simulate_swe,
    simulate_three_body,
)
from .weakform import (
    TestFunctionFamily,
    WeakPlan,
    build_weak_plan,
    evaluate_weak,
    make_test_family,
    quadrature_weights,
    weak_target,
)

__version__ = "0.1.0"
