"""Cone-embedded learning and forecasting for space-time lattice fields.

The pipeline: simulate (or load) a raster cube of a causal moving-average
field, estimate its dependence parameters from variograms, embed the cube
into supervised examples spaced far enough apart for the generalization
bounds to bite, then train randomized ensembles and evaluate the bounds.
"""

from .bounds import (
    BoundReport,
    ValidationReport,
    admissible_s_grid,
    bound_gibbs_typeI,
    bound_gibbs_typeII,
    bound_typeI_erm,
    bound_typeI_general,
    bound_typeII,
    bound_typeII_erm,
    chisq_plus_one_dirac_uniform,
    exp_inequality_rhs,
    kl_dirac_uniform,
    validate_exp_inequality,
)
from .embed import (
    EmbeddingSpec,
    TrainingSet,
    build_training_set,
    cone_index_set,
    cone_offsets,
    forecast_features,
    select_a_t,
)
from .errors import (
    ConecastError,
    ConeOutOfBoundsError,
    ConstraintViolationError,
    EmptyPairSetError,
    EstimationError,
    InsufficientDataError,
    InvalidConfigError,
    InvalidParameterError,
    MemoryBudgetError,
    NoFeasibleSpacingError,
    NonMultipleLagError,
    SamplingFailureError,
)
from .estimate import (
    EstimationReport,
    empirical_variance,
    empirical_variogram,
    estimate_parameters,
    invert_variograms,
)
from .field_sim import RasterCube, SimConfig, ambit_cells, simulate_stou
from .learn import (
    EnsembleForecast,
    LinearPredictor,
    PredictorGrid,
    aver_rmae,
    empirical_risk,
    ensemble_forecast,
    erm,
    gibbs_draw,
    gibbs_draws,
    gibbs_draw_exact,
    gibbs_grid_weights,
    random_l1_grid,
    truncated_loss,
)
from .levy import (
    GaussianSeed,
    NigSeed,
    SeedMoments,
    sample_increment,
    sample_increments,
    seed_from_dict,
    seed_moments,
)
from .moments import (
    MstouGammaModel,
    StouModel,
    mstou_cov,
    mstou_variance,
    stou_corr,
    stou_variance,
    variogram_theoretical,
)
from .rng import RandomStream, counter_uniforms
from .theta import (
    MstouThetaBound,
    ThetaDecay,
    theta_lex_covbound,
    theta_lex_mstou,
    theta_lex_mstou_gamma,
    theta_lex_stou,
    theta_loss,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "ConecastError",
    "ConeOutOfBoundsError",
    "ConstraintViolationError",
    "EmbeddingSpec",
    "EmptyPairSetError",
    "EnsembleForecast",
    "EstimationError",
    "EstimationReport",
    "GaussianSeed",
    "InsufficientDataError",
    "InvalidConfigError",
    "InvalidParameterError",
    "LinearPredictor",
    "MemoryBudgetError",
    "MstouGammaModel",
    "MstouThetaBound",
    "NigSeed",
    "NoFeasibleSpacingError",
    "NonMultipleLagError",
    "PredictorGrid",
    "RandomStream",
    "RasterCube",
    "SamplingFailureError",
    "SeedMoments",
    "SimConfig",
    "StouModel",
    "ThetaDecay",
    "TrainingSet",
    "ValidationReport",
    "admissible_s_grid",
    "ambit_cells",
    "aver_rmae",
    "bound_gibbs_typeI",
    "bound_gibbs_typeII",
    "bound_typeI_erm",
    "bound_typeI_general",
    "bound_typeII",
    "bound_typeII_erm",
    "build_training_set",
    "chisq_plus_one_dirac_uniform",
    "cone_index_set",
    "cone_offsets",
    "counter_uniforms",
    "empirical_risk",
    "empirical_variance",
    "empirical_variogram",
    "ensemble_forecast",
    "erm",
    "estimate_parameters",
    "exp_inequality_rhs",
    "forecast_features",
    "gibbs_draw",
    "gibbs_draws",
    "gibbs_draw_exact",
    "gibbs_grid_weights",
    "kl_dirac_uniform",
    "invert_variograms",
    "mstou_cov",
    "mstou_variance",
    "random_l1_grid",
    "sample_increment",
    "sample_increments",
    "seed_from_dict",
    "seed_moments",
    "select_a_t",
    "simulate_stou",
    "stou_corr",
    "stou_variance",
    "theta_lex_covbound",
    "theta_lex_mstou",
    "theta_lex_mstou_gamma",
    "theta_lex_stou",
    "theta_loss",
    "truncated_loss",
    "validate_exp_inequality",
    "variogram_theoretical",
]
