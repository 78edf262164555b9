"""Fisher-information measures of nonclassicality and robustness for states on grids."""

__version__ = "0.1.0"

from .grid import (  # noqa: E402
    MOMENTUM,
    POSITION,
    Density,
    GridSpec,
    Marginals,
    StateEnsemble,
    WaveFunction,
    density_of,
    ensemble_density,
    ensemble_marginals,
    gradient,
    laplacian,
    marginals_of,
    moments,
    to_momentum,
    to_position,
)
from .states import (  # noqa: E402
    coherent,
    gaussian,
    gaussian_nd,
    ho_eigenstate,
    product_state,
    random_state,
    squeezed,
    superposition,
    thermal_ho_densities,
)
from .info import (  # noqa: E402
    check_length_chain,
    cramer_rao_gap,
    ensemble_information,
    entropy,
    fisher_information,
    fisher_matrix,
    length_set,
)
from .nonclassical import (  # noqa: E402
    classical_momentum,
    classical_position,
    commutator_bound,
    fisher_heisenberg_chain,
    joint_nonclassicality,
    nonclassical_covariances,
    quantum_potential,
    variance_split_momentum,
    variance_split_position,
)
from .diffusion import (  # noqa: E402
    DiffusionConfig,
    anisotropic_rate_check,
    debruijn_report,
    diffuse,
    entropy_trajectory,
    joint_robustness,
    quantum_phase_space_diffuse,
)
from .continuity import EvolutionConfig, continuity_residual, evolve  # noqa: E402
