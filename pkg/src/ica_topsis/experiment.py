"""Monte-Carlo harness comparing ranking methods on synthetic mixed criteria.

Each realization draws uniform latent variables, ranks them directly
(the ground truth), mixes them through a diagonally dominant matrix with
additive white Gaussian noise at a target SNR, and ranks the observed data
with four methods: plain TOPSIS, Mahalanobis TOPSIS, and TOPSIS on the
latent variables recovered by FastICA or Infomax. Disagreement with the
ground truth is measured by the normalized Kendall tau distance and
aggregated per (method, SNR) cell over many realizations.

Seeding is splittable and counter-based: every (SNR index, realization
index) cell derives its own generator from the experiment seed, so results
are bit-identical regardless of execution order or parallelism, and
extending the realization count leaves earlier records unchanged.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .alignment import resolve
from .exceptions import IcaTopsisError, NotConvergedError
from .ica import IcaOptions, fastica, infomax
from .kendall import kendall_tau
from .topsis import DecisionMatrix, Ranking, WeightVector, topsis_euclidean, topsis_mahalanobis

__all__ = [
    "METHODS",
    "MixingSpec",
    "DEFAULT_MIXING",
    "DEFAULT_SNR_GRID_DB",
    "ExperimentConfig",
    "ExperimentResult",
    "generate_latents",
    "mix",
    "add_noise",
    "rank_with_method",
    "run_realization",
    "run_experiment",
]

METHODS = ("topsis-e", "topsis-m", "ica-topsis-fastica", "ica-topsis-infomax")

SNR_DB_MIN = 0.0  # exclusive
SNR_DB_MAX = 50.0  # inclusive

DEFAULT_SNR_GRID_DB = tuple(float(s) for s in range(5, 55, 5))

# reserved SNR index for noiseless runs when deriving per-cell seeds
_NOISELESS_INDEX = 2**31 - 1


@dataclass
class MixingSpec:
    """Square mixing matrix with positive, row-dominant diagonal entries."""

    matrix: np.ndarray
    description: str = ""

    def __post_init__(self):
        self.matrix = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n):
            raise ValueError(f"mixing matrix must be square, got {self.matrix.shape}")
        if not np.isfinite(self.matrix).all():
            raise ValueError("mixing matrix contains NaN or infinite entries")
        diag = np.diag(self.matrix)
        if (diag <= 0).any():
            raise ValueError("mixing matrix diagonal must be positive")
        off = np.abs(self.matrix - np.diag(diag)).max(axis=1)
        if (diag <= off).any():
            raise ValueError(
                "each diagonal entry must dominate its row in absolute value"
            )
        cond = np.linalg.cond(self.matrix)
        if not np.isfinite(cond) or cond > 1e12:
            raise ValueError("mixing matrix is singular or near-singular")

    @property
    def latent_count(self) -> int:
        return self.matrix.shape[0]


DEFAULT_MIXING = MixingSpec(
    np.array([[1.00, -0.15], [0.30, 1.00]]),
    description="benchmark 2x2 mixing, dominant diagonal",
)


def _default_weights() -> WeightVector:
    return WeightVector(np.array([0.5, 0.5]))


@dataclass
class ExperimentConfig:
    """Full parameterization of the SNR sweep."""

    alternatives: int = 100
    mixing: MixingSpec = field(default_factory=lambda: MixingSpec(DEFAULT_MIXING.matrix))
    weights: WeightVector = field(default_factory=_default_weights)
    snr_grid_db: tuple[float, ...] = DEFAULT_SNR_GRID_DB
    realizations: int = 1000
    seed: int = 0
    methods: tuple[str, ...] = METHODS
    ica: IcaOptions = field(default_factory=IcaOptions)

    def __post_init__(self):
        if self.alternatives < 2:
            raise ValueError("need at least 2 alternatives")
        self.snr_grid_db = tuple(float(s) for s in self.snr_grid_db)
        for snr in self.snr_grid_db:
            _check_snr(snr)
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if not isinstance(self.weights, WeightVector):
            self.weights = WeightVector(self.weights)
        if len(self.weights) != self.mixing.latent_count:
            raise ValueError(
                f"got {len(self.weights)} weights for "
                f"{self.mixing.latent_count} latent variables"
            )
        self.methods = tuple(self.methods)
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown method(s): {sorted(unknown)}")
        if not self.methods:
            raise ValueError("at least one method is required")


@dataclass
class ExperimentResult:
    """Aggregated Kendall tau per (method, SNR) cell.

    ``realizations[i, j]`` counts the records that produced a tau value
    (non-convergence is scored with the best iterate and still counted
    here); ``failures[i, j]`` counts non-converged or errored records.
    """

    methods: tuple[str, ...]
    snr_grid_db: tuple[float, ...]
    mean_tau: np.ndarray
    std_tau: np.ndarray
    realizations: np.ndarray
    failures: np.ndarray

    def cell(self, method: str, snr_db: float):
        i = self.methods.index(method)
        j = self.snr_grid_db.index(float(snr_db))
        return (
            self.mean_tau[i, j],
            self.std_tau[i, j],
            int(self.realizations[i, j]),
            int(self.failures[i, j]),
        )


def _check_snr(snr_db: float) -> float:
    snr_db = float(snr_db)
    if not math.isfinite(snr_db) or not (SNR_DB_MIN < snr_db <= SNR_DB_MAX):
        raise ValueError(
            f"snr_db must lie in ({SNR_DB_MIN:g}, {SNR_DB_MAX:g}] dB, got {snr_db!r}"
        )
    return snr_db


def generate_latents(n_alternatives: int, n_latents: int, seed) -> np.ndarray:
    """Draw i.i.d. Uniform[0,1] latent variables, one row per latent."""
    if n_alternatives < 1 or n_latents < 1:
        raise ValueError("counts must be positive")
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0, size=(n_latents, n_alternatives))


def mix(latents: np.ndarray, spec: MixingSpec) -> np.ndarray:
    """Apply the linear mixing matrix to the latent variables."""
    latents = np.asarray(latents, dtype=float)
    if latents.shape[0] != spec.latent_count:
        raise ValueError(
            f"expected {spec.latent_count} latent rows, got {latents.shape[0]}"
        )
    return spec.matrix @ latents


def add_noise(mixed: np.ndarray, snr_db: float, seed) -> np.ndarray:
    """Add white Gaussian noise per channel at the target SNR.

    The noise variance on channel n is var(mixed_n) / 10^(snr_db / 10),
    with var the unbiased sample variance of the noiseless channel.
    """
    snr_db = _check_snr(snr_db)
    mixed = np.asarray(mixed, dtype=float)
    signal_var = mixed.var(axis=1, ddof=1)
    if (signal_var == 0).any():
        raise ValueError("cannot set an SNR on a zero-variance channel")
    noise_var = signal_var / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(mixed.shape) * np.sqrt(noise_var)[:, None]
    return mixed + noise


def rank_with_method(
    decision: DecisionMatrix,
    weights: WeightVector,
    method: str,
    ica_options: IcaOptions | None = None,
) -> tuple[Ranking, bool]:
    """Rank a decision matrix with one of the four methods.

    For the ICA methods the observed criteria are separated, the
    permutation/sign ambiguities resolved, and plain TOPSIS applied to the
    recovered latent variables. Returns the ranking and a flag that is True
    when separation did not converge (the best iterate is still ranked).
    """
    if method == "topsis-e":
        return topsis_euclidean(decision, weights), False
    if method == "topsis-m":
        return topsis_mahalanobis(decision, weights), False
    if method in ("ica-topsis-fastica", "ica-topsis-infomax"):
        separate = fastica if method == "ica-topsis-fastica" else infomax
        failed = False
        try:
            separation = separate(decision.values.T, ica_options)
        except NotConvergedError as err:
            separation = err.result
            failed = True
        adjusted = resolve(separation)
        latent_decision = DecisionMatrix(
            adjusted.sources_adjusted.T,
            alternative_labels=decision.alternative_labels,
        )
        return topsis_euclidean(latent_decision, weights), failed
    raise ValueError(f"unknown method {method!r}")


def _cell_seed_sequence(config: ExperimentConfig, snr_db, realization_index: int):
    if snr_db is None:
        snr_index = _NOISELESS_INDEX
    else:
        snr_index = config.snr_grid_db.index(float(snr_db))
    return np.random.SeedSequence(
        entropy=config.seed, spawn_key=(snr_index, realization_index)
    )


def run_realization(
    config: ExperimentConfig, snr_db, realization_index: int
) -> dict[str, tuple[float, bool]]:
    """Run one realization at one SNR and score every configured method.

    ``snr_db`` must be a value of ``config.snr_grid_db``, or None to
    disable noise. Returns ``{method: (tau, failed)}``; ``tau`` is NaN when
    a method errored outright (non-convergence is scored, not dropped).
    """
    cell = _cell_seed_sequence(config, snr_db, realization_index)
    latent_seed, noise_seed, fastica_seed, infomax_seed = cell.spawn(4)

    latents = generate_latents(
        config.alternatives, config.mixing.latent_count, latent_seed
    )
    ground_truth = topsis_euclidean(DecisionMatrix(latents.T), config.weights)

    observed = mix(latents, config.mixing)
    if snr_db is not None:
        observed = add_noise(observed, snr_db, noise_seed)
    decision = DecisionMatrix(observed.T)

    records: dict[str, tuple[float, bool]] = {}
    for method in config.methods:
        ica_seed = fastica_seed if method == "ica-topsis-fastica" else infomax_seed
        options = dataclasses.replace(config.ica, seed=ica_seed)
        try:
            ranking, failed = rank_with_method(decision, config.weights, method, options)
            tau = kendall_tau(ground_truth, ranking)
        except IcaTopsisError:
            tau, failed = math.nan, True
        records[method] = (tau, failed)
    return records


def _run_block(config: ExperimentConfig, snr_index: int, start: int, stop: int):
    snr_db = config.snr_grid_db[snr_index]
    block = [run_realization(config, snr_db, r) for r in range(start, stop)]
    return snr_index, start, block


def run_experiment(config: ExperimentConfig, n_jobs: int = 1) -> ExperimentResult:
    """Run the full sweep and aggregate tau statistics per (method, SNR).

    ``n_jobs > 1`` distributes blocks of realizations over worker
    processes; per-cell seeding keeps the result identical to a serial run.
    """
    n_methods = len(config.methods)
    n_snr = len(config.snr_grid_db)
    taus = np.full((n_methods, n_snr, config.realizations), np.nan)
    failed = np.zeros((n_methods, n_snr, config.realizations), dtype=bool)

    def store(snr_index, start, block):
        for offset, records in enumerate(block):
            for i, method in enumerate(config.methods):
                tau, fail = records[method]
                taus[i, snr_index, start + offset] = tau
                failed[i, snr_index, start + offset] = fail

    if n_jobs <= 1:
        for j in range(n_snr):
            store(*_run_block(config, j, 0, config.realizations))
    else:
        block_size = max(1, math.ceil(config.realizations / (4 * n_jobs)))
        tasks = [
            (j, start, min(start + block_size, config.realizations))
            for j in range(n_snr)
            for start in range(0, config.realizations, block_size)
        ]
        with concurrent.futures.ProcessPoolExecutor(max_workers=n_jobs) as pool:
            futures = [pool.submit(_run_block, config, *task) for task in tasks]
            for future in concurrent.futures.as_completed(futures):
                store(*future.result())

    scored = np.isfinite(taus)
    counts = scored.sum(axis=2)
    sums = np.where(scored, taus, 0.0).sum(axis=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, sums / counts, np.nan)
        sq = np.where(scored, (taus - mean[:, :, None]) ** 2, 0.0).sum(axis=2)
        std = np.where(counts > 1, np.sqrt(sq / np.maximum(counts - 1, 1)), 0.0)
    return ExperimentResult(
        methods=config.methods,
        snr_grid_db=config.snr_grid_db,
        mean_tau=mean,
        std_tau=std,
        realizations=counts,
        failures=failed.sum(axis=2),
    )
