"""crosspoly: constructive cross-polytope machinery at desk scale.

Submodules mirror the proof toolkit: geometry (hulls, Gram-Schmidt chains,
volumes), sparse_l1 (minimum-l1 representations), maurey (empirical-method
sparsification), suppression (random generator suppression), gauss_mc
(Gaussian-measure Monte Carlo and closed-form bounds), gluskin (random
polytope pipeline), params (parameter derivations and the exponent sweep).
"""

from .errors import (
    ContractError,
    ConvergenceError,
    CrossPolyError,
    InfeasibleError,
    InputError,
    MaureyFailure,
    NumericalError,
)
from .gauss_mc import (
    binom_bound_check,
    chi_square_tail_check,
    crosspoly_measure_bound,
    det_shrink_check,
    gaussian_norm_tail_check,
    mc_measure,
    projection_monotonicity_check,
    thickening_bound,
)
from .geometry import (
    CrossPolytope,
    GramSchmidtChain,
    ThickenedPolytope,
    cross_polytope_volume,
    distance_to_hull,
    gram_schmidt_chain,
    hull_backend,
    hull_contains,
    minkowski_absorb_check,
    project_polytope,
    support_function,
)
from .gluskin import (
    bm_estimate,
    bridge_check,
    gen_gluskin,
    powering_check,
    random_coefficient_matrix,
    u_norm_event_check,
)
from .maurey import maurey_sparsify, union_inclusion_check
from .params import (
    DEFAULT_CONSTANTS,
    ParamSet,
    check_constraints,
    derive_params,
    entropy_tk_check,
    exponent_fit,
    load_constants,
    rho_max,
)
from .rand import l1_ball_point, substream
from .sparse_l1 import (
    SparseRep,
    brute_force_min_l1,
    l1_decomposition_cover_check,
    min_l1_representation,
)
from .suppression import (
    block_tail_experiment,
    block_tail_failure_bound,
    suppression_measure_bound,
    verify_suppression_inequality,
)

__version__ = "0.1.0"
