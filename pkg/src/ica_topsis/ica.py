"""Blind source separation for the determined linear mixing model.

Observations are channels x samples matrices assumed to follow
``x(k) = A l(k) + g(k)`` with as many channels as latent variables. The
module provides eigendecomposition-based centering/whitening, symmetric
fixed-point FastICA with the tanh contrast, and natural-gradient Infomax
in two flavours: the extended variant that switches the nonlinearity per
component according to the sign of its kurtosis (required for sub-Gaussian
sources such as uniform latents), and the classic logistic variant for
super-Gaussian sources.

Estimated sources are returned in whitened scale (zero mean, unit
variance); absolute source scale is not identifiable and positive
rescaling is absorbed downstream by TOPSIS normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NotConvergedError, RankDeficientError

__all__ = [
    "IcaOptions",
    "WhiteningResult",
    "SeparationResult",
    "center_whiten",
    "fastica",
    "infomax",
    "estimated_mixing",
]

MIN_SAMPLES_PER_CHANNEL = 10
FASTICA_MAX_ITER = 1000
FASTICA_TOL = 1e-8
INFOMAX_MAX_EPOCHS = 5000
INFOMAX_TOL = 1e-7
INFOMAX_SIGN_CADENCE = 10
DIVERGENCE_LIMIT = 1e6
DIVERGENCE_CHECK_EVERY = 25


@dataclass
class IcaOptions:
    """Tuning knobs shared by both separation algorithms.

    ``max_iter`` counts fixed-point iterations for FastICA and epochs for
    Infomax; ``tol`` is the convergence threshold on the respective update
    measure. ``restarts`` bounds the number of fresh random initializations
    tried after the first attempt (FastICA restarts on non-convergence,
    Infomax only on divergence, halving the learning rate each time).
    ``seed`` accepts anything ``numpy.random.default_rng`` does.
    """

    seed: object = None
    max_iter: int | None = None
    tol: float | None = None
    restarts: int = 5
    learning_rate: float = 0.01
    variant: str = "extended"


@dataclass
class WhiteningResult:
    """Centered, decorrelated, unit-variance view of the observations."""

    whitened: np.ndarray
    whitening_matrix: np.ndarray
    mean: np.ndarray


@dataclass
class SeparationResult:
    """Separating matrix with the sources and diagnostics it produces.

    ``separating`` composes the whitening transform and the learned
    orthogonal rotation, so ``separating @ (observations - mean)`` equals
    ``sources`` exactly. ``estimated_mixing`` is its inverse and maps
    source space back to (centered) observation space.
    """

    separating: np.ndarray
    estimated_mixing: np.ndarray
    sources: np.ndarray
    mean: np.ndarray
    iterations: int
    converged: bool
    algorithm: str


def _check_observations(x, min_ratio: int = 1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("observations must be a channels x samples matrix")
    n_ch, n_samples = x.shape
    if n_ch < 2:
        raise ValueError(f"need at least 2 channels, got {n_ch}")
    if n_samples <= n_ch:
        raise ValueError(
            f"need more samples than channels, got {n_samples} samples for {n_ch} channels"
        )
    if n_samples < min_ratio * n_ch:
        raise ValueError(
            f"need at least {min_ratio} samples per channel "
            f"({min_ratio * n_ch} total), got {n_samples}"
        )
    if not np.isfinite(x).all():
        raise ValueError("observations contain NaN or infinite entries")
    return x


def center_whiten(observations) -> WhiteningResult:
    """Remove channel means and decorrelate to identity covariance.

    The whitening matrix is D^{-1/2} E^T from the eigendecomposition of the
    (unbiased) sample covariance of the channels.

    Raises
    ------
    RankDeficientError
        If the sample covariance is not full rank.
    """
    x = _check_observations(observations)
    mean = x.mean(axis=1)
    centered = x - mean[:, None]
    cov = np.cov(centered, ddof=1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[-1] <= 0 or eigvals[0] <= 1e-12 * eigvals[-1]:
        raise RankDeficientError(
            "sample covariance of the observations is rank deficient"
        )
    whitening = (eigvecs / np.sqrt(eigvals)).T
    return WhiteningResult(
        whitened=whitening @ centered,
        whitening_matrix=whitening,
        mean=mean,
    )


def _random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _sym_decorrelate(w: np.ndarray) -> np.ndarray:
    # W <- (W W^T)^{-1/2} W, the orthogonal polar factor
    s, u = np.linalg.eigh(w @ w.T)
    return (u / np.sqrt(s)) @ u.T @ w


def _build_result(white, rotation, observations, iterations, converged, algorithm):
    separating = rotation @ white.whitening_matrix
    sources = separating @ (observations - white.mean[:, None])
    return SeparationResult(
        separating=separating,
        estimated_mixing=np.linalg.inv(separating),
        sources=sources,
        mean=white.mean,
        iterations=iterations,
        converged=converged,
        algorithm=algorithm,
    )


# E[log cosh g] for standard normal g, the Gaussian baseline of the
# negentropy proxy (E[log cosh y] - baseline)^2
_GAUSSIAN_LOGCOSH = 0.3745672074914381


def _logcosh_contrast(y: np.ndarray) -> float:
    # stable log cosh: |y| + log1p(exp(-2|y|)) - log 2
    a = np.abs(y)
    logcosh = (a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)).mean(axis=1)
    return float(((logcosh - _GAUSSIAN_LOGCOSH) ** 2).sum())


def fastica(observations, options: IcaOptions | None = None) -> SeparationResult:
    """Symmetric fixed-point FastICA with the tanh nonlinearity.

    All components are updated in parallel and re-orthogonalized
    symmetrically each iteration; an attempt converges when every component
    direction moves by less than ``tol`` (measured as 1 - |<w_new, w_old>|).
    The full restart budget is always spent and the converged attempt with
    the largest log-cosh negentropy proxy wins, which discards the rare
    spurious fixed points the tanh contrast admits on small samples.

    Raises
    ------
    NotConvergedError
        If no attempt converges; ``.result`` carries the best iterate.
    """
    opts = options or IcaOptions()
    x = _check_observations(observations, min_ratio=MIN_SAMPLES_PER_CHANNEL)
    max_iter = opts.max_iter if opts.max_iter is not None else FASTICA_MAX_ITER
    tol = opts.tol if opts.tol is not None else FASTICA_TOL

    white = center_whiten(x)
    z = white.whitened
    n, n_samples = z.shape
    rng = np.random.default_rng(opts.seed)

    best_converged = None  # (contrast, rotation)
    best_failed = None  # (lim, rotation)
    total_iterations = 0
    for _attempt in range(opts.restarts + 1):
        w = _random_orthogonal(n, rng)
        lim = np.inf
        for _ in range(max_iter):
            total_iterations += 1
            y = w @ z
            g = np.tanh(y)
            g_prime_mean = 1.0 - (g**2).mean(axis=1)
            w_new = _sym_decorrelate(g @ z.T / n_samples - g_prime_mean[:, None] * w)
            lim = 1.0 - np.abs(np.einsum("ij,ij->i", w_new, w)).min()
            w = w_new
            if lim < tol:
                break
        if lim < tol:
            contrast = _logcosh_contrast(w @ z)
            if best_converged is None or contrast > best_converged[0]:
                best_converged = (contrast, w)
        elif best_failed is None or lim < best_failed[0]:
            best_failed = (lim, w)

    if best_converged is not None:
        return _build_result(
            white, best_converged[1], x, total_iterations, True, "fastica"
        )
    result = _build_result(white, best_failed[1], x, total_iterations, False, "fastica")
    raise NotConvergedError(
        f"FastICA did not converge within {max_iter} iterations "
        f"and {opts.restarts} restarts (last update {best_failed[0]:.3e})",
        result=result,
    )


def _kurtosis_signs(y: np.ndarray) -> np.ndarray:
    centered = y - y.mean(axis=1, keepdims=True)
    var = (centered**2).mean(axis=1)
    kurt = (centered**4).mean(axis=1) / var**2 - 3.0
    return np.where(kurt > 0, 1.0, -1.0)


def infomax(observations, options: IcaOptions | None = None) -> SeparationResult:
    """Natural-gradient Infomax on whitened observations.

    The default ``extended`` variant switches each component between the
    super- and sub-Gaussian update according to the sign of its sample
    kurtosis; the ``logistic`` variant is the classic Bell-Sejnowski rule
    for super-Gaussian sources. One epoch applies the full-batch natural
    gradient with the configured learning rate (the step on the per-sample
    mean gradient). On divergence the learning rate is halved and the run
    restarts from a fresh initialization; plain non-convergence returns the
    final iterate via NotConvergedError. The learned unmixing is projected
    onto its orthogonal polar factor before composing the result, which
    removes the scale drift inherent to the Infomax stationary point.

    Raises
    ------
    NotConvergedError
        Epoch budget exhausted, or divergence persisted through the
        restart budget; ``.result`` carries the best iterate.
    """
    opts = options or IcaOptions()
    if opts.variant not in ("extended", "logistic"):
        raise ValueError(f"unknown infomax variant {opts.variant!r}")
    if opts.learning_rate < 0:
        raise ValueError("learning rate must be non-negative")
    x = _check_observations(observations, min_ratio=MIN_SAMPLES_PER_CHANNEL)
    max_epochs = opts.max_iter if opts.max_iter is not None else INFOMAX_MAX_EPOCHS
    tol = opts.tol if opts.tol is not None else INFOMAX_TOL
    algorithm = f"infomax-{opts.variant}"

    white = center_whiten(x)
    z = white.whitened
    n, n_samples = z.shape
    rng = np.random.default_rng(opts.seed)
    eye = np.eye(n)

    if opts.learning_rate == 0.0:
        # no update is possible; report the initialization honestly
        b = _random_orthogonal(n, rng)
        return _build_result(white, b, x, 0, False, algorithm)

    extended = opts.variant == "extended"
    lr = opts.learning_rate
    epochs = 0
    best = None  # (delta_norm, rotation, epochs)
    for _attempt in range(opts.restarts + 1):
        b = _random_orthogonal(n, rng)
        diverged = False
        delta_norm = np.inf
        signs = np.ones(n)
        for epoch in range(max_epochs):
            epochs += 1
            y = b @ z
            if extended:
                # kurtosis signs stabilize quickly; refreshing them on a
                # fixed cadence keeps the epoch cheap and deterministic
                if epoch % INFOMAX_SIGN_CADENCE == 0:
                    signs = _kurtosis_signs(y)
                phi = signs[:, None] * np.tanh(y)
                phi += y
            else:
                # logistic score 1 - 2*sigmoid(y) == -tanh(y/2)
                phi = np.tanh(0.5 * y)
            delta = lr * b - (lr / n_samples) * ((phi @ y.T) @ b)
            b = b + delta
            if epoch % DIVERGENCE_CHECK_EVERY == 0 and (
                not np.isfinite(b).all() or np.abs(b).max() > DIVERGENCE_LIMIT
            ):
                diverged = True
                break
            delta_norm = math.sqrt(np.einsum("ij,ij->", delta, delta))
            if delta_norm < tol:
                rotation = _sym_decorrelate(b)
                return _build_result(white, rotation, x, epochs, True, algorithm)
        if diverged or not np.isfinite(b).all():
            lr *= 0.5
            diverged = True
            continue
        if best is None or delta_norm < best[0]:
            best = (delta_norm, b, epochs)
        break  # epoch budget exhausted without divergence: keep this iterate

    if best is None:
        # every attempt diverged: report the last initialization honestly
        result = _build_result(
            white, _random_orthogonal(n, rng), x, epochs, False, algorithm
        )
        raise NotConvergedError(
            f"Infomax diverged in all {opts.restarts + 1} attempts", result=result
        )
    rotation = _sym_decorrelate(best[1])
    result = _build_result(white, rotation, x, best[2], False, algorithm)
    raise NotConvergedError(
        f"Infomax did not reach update norm {tol:.1e} within {max_epochs} epochs "
        f"(last update {best[0]:.3e})",
        result=result,
    )


def estimated_mixing(separating) -> np.ndarray:
    """Invert a square separating matrix to recover the mixing estimate."""
    b = np.atleast_2d(np.asarray(separating, dtype=float))
    if b.shape[0] != b.shape[1]:
        raise ValueError(f"separating matrix must be square, got {b.shape}")
    cond = np.linalg.cond(b)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(
            f"separating matrix is singular (condition number {cond:.3e})"
        )
    return np.linalg.inv(b)
