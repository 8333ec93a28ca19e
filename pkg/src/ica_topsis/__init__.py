"""TOPSIS ranking on observed or ICA-recovered latent criteria."""

from .alignment import AdjustedSeparation, correct_permutation, correct_sign, resolve
from .exceptions import (
    DegenerateAlternativesWarning,
    IcaTopsisError,
    NotConvergedError,
    RankDeficientError,
    SingularCovarianceError,
    TieBreakWarning,
    ZeroColumnError,
    ZeroDiagonalError,
)
from .experiment import (
    DEFAULT_MIXING,
    DEFAULT_SNR_GRID_DB,
    METHODS,
    ExperimentConfig,
    ExperimentResult,
    MixingSpec,
    add_noise,
    generate_latents,
    mix,
    rank_with_method,
    run_experiment,
    run_realization,
)
from .ica import (
    IcaOptions,
    SeparationResult,
    WhiteningResult,
    center_whiten,
    estimated_mixing,
    fastica,
    infomax,
)
from .kendall import kendall_tau
from .topsis import (
    DecisionMatrix,
    IdealSolutions,
    Ranking,
    WeightVector,
    apply_weights,
    covariance,
    euclidean_distances,
    ideal_solutions,
    mahalanobis_distances,
    normalize,
    similarity,
    topsis_euclidean,
    topsis_mahalanobis,
)

__version__ = "0.1.0"
