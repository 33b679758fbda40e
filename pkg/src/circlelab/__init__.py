"""Random products of conformal circle maps, their stationary measures and
Lyapunov exponents, executable contraction certificates, and drifted Brownian
motion on the hyperbolic upper half-plane."""

__version__ = "0.1.0"

from .maps import (
    MoebiusMap,
    ParametricMap,
    apply_map,
    circle_dist,
    compose,
    derivative,
    identity_map,
    invert,
    rotation,
)
from .system import (
    ConstantWeights,
    CosineWeights,
    GeneratorSystem,
    SymmetryReport,
    check_symmetry,
    sample_step,
    system_from_config,
)
from .trajectory import (
    TrajectoryRecord,
    birkhoff_average,
    cocycle_identity_holds,
    derive_seed,
    empirical_measure,
    simulate_trajectory,
)
from .measures import (
    ConvergenceReport,
    GridMeasure,
    apply_diffusion,
    detect_invariant_measure,
    dirac_measure,
    measure_distance,
    stationary_measure,
    uniform_measure,
)
from .lyapunov import (
    BasinEstimate,
    DichotomyParams,
    DichotomyVerdict,
    LyapunovEstimate,
    classify_dichotomy,
    estimate_basin_probabilities,
    estimate_lyapunov_trajectory,
    formula_quadrature_bound,
    lyapunov_from_formula,
)
from .contraction import (
    ContractionCertificate,
    certificate_bound_holds,
    fit_contraction,
    track_interval,
    verify_contraction_lemma,
)
from .hyperbolic import (
    DiscretizationRecord,
    HyperbolicParams,
    HyperbolicPath,
    discretize_path,
    estimate_step_scale,
    hyperbolic_distance,
    leafwise_lyapunov,
    simulate_hyperbolic_ensemble,
    simulate_hyperbolic_path,
    simulate_v_process,
    v_final_ensemble,
    xi_stationarity_test,
)
