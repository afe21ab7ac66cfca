"""Gaussian-process regression of a cable trace, one axis at a time.

Squared-exponential kernel with unit signal variance plus an independent
noise term theta**2 on the diagonal.  Corridors use the latent posterior
variance (prior variance 1), i.e. they bound the cable itself rather than
a future noisy detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .assign import CableTrace
from .errors import SingularKernel, TooFewPoints
from .frame import CableMap, CableRecord, SurveyConfig

INTERVAL_SIGMAS = 2.0


def kernel(x_i, x_j, same_index, beta, theta) -> float:
    return math.exp(-((x_i - x_j) ** 2) / (2.0 * beta * beta)) + (theta * theta if same_index else 0.0)


def se_kernel(xa, xb, beta) -> np.ndarray:
    """Noise-free squared-exponential cross-covariance matrix."""
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    d = xa[:, None] - xb[None, :]
    return np.exp(-(d * d) / (2.0 * beta * beta))


def kernel_matrix(xs, beta, theta) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    return se_kernel(xs, xs, beta) + theta * theta * np.eye(len(xs))


@dataclass(frozen=True, eq=False)
class GpModel:
    train_x: np.ndarray
    alpha: np.ndarray
    chol_factor: np.ndarray
    beta: float
    theta: float
    # constant prior mean; 0 gives the plain zero-mean model
    offset: float = 0.0


@dataclass(frozen=True)
class Prediction:
    mean: float
    stddev: float


def gp_fit(xs, targets, beta, theta, offset=0.0) -> GpModel:
    xs = np.asarray(xs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if xs.ndim != 1 or xs.shape != targets.shape or len(xs) == 0:
        raise ValueError("xs and targets must be equal-length non-empty 1-D sequences")
    if not beta > 0 or theta < 0:
        raise ValueError("need beta > 0 and theta >= 0")
    kmat = kernel_matrix(xs, beta, theta)
    try:
        chol = np.linalg.cholesky(kmat)
    except np.linalg.LinAlgError:
        raise SingularKernel(
            f"kernel matrix is not positive definite (n={len(xs)}, theta={theta}); "
            "duplicate inputs need theta > 0"
        ) from None
    # LAPACK accepts tiny positive pivots produced by rounding on singular K
    if np.min(np.diag(chol)) ** 2 <= len(xs) * np.finfo(float).eps * np.max(np.diag(kmat)):
        raise SingularKernel(f"kernel matrix is numerically singular (n={len(xs)}, theta={theta})")
    w = solve_triangular(chol, targets - offset, lower=True)
    alpha = solve_triangular(chol.T, w, lower=False)
    return GpModel(xs, alpha, chol, float(beta), float(theta), float(offset))


def gp_predict_many(model: GpModel, x_star) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and latent stddev at each of `x_star`."""
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    k_star = se_kernel(x_star, model.train_x, model.beta)
    mean = model.offset + k_star @ model.alpha
    half = solve_triangular(model.chol_factor, k_star.T, lower=True)
    var = 1.0 - np.einsum("ij,ij->j", half, half)
    return mean, np.sqrt(np.maximum(var, 0.0))


def gp_predict(model: GpModel, x_star: float) -> Prediction:
    mean, std = gp_predict_many(model, [x_star])
    return Prediction(float(mean[0]), float(std[0]))


def sample_grid(x_first: float, x_last: float, step: float) -> np.ndarray:
    """x_first, x_first + step, ... with x_last always included."""
    n = int(math.floor((x_last - x_first) / step * (1 + 1e-12)))
    xs = x_first + step * np.arange(n + 1)
    xs = xs[xs < x_last - 1e-9 * step]
    return np.append(xs, x_last)


def fit_cable(trace: CableTrace, config: SurveyConfig) -> CableRecord:
    """Independent GP fits of y(x) and z(x) sampled over the trace's x-range.

    Each axis uses its trace mean as a constant prior mean, so the zero-mean
    kernel model acts on deviations instead of pulling the curve toward the
    survey origin.
    """
    if len(trace.points) < 2:
        raise TooFewPoints(f"cable {trace.cable_id} has {len(trace.points)} point(s), need >= 2")
    xs, ys, zs = trace.arrays()
    model_y = gp_fit(xs, ys, config.beta_y, config.theta_y, offset=float(ys.mean()))
    model_z = gp_fit(xs, zs, config.beta_depth, config.theta_z, offset=float(zs.mean()))
    grid = sample_grid(float(xs[0]), float(xs[-1]), config.sample_step)
    mean_y, sd_y = gp_predict_many(model_y, grid)
    mean_z, sd_z = gp_predict_many(model_z, grid)
    return CableRecord(
        trace.cable_id, grid, mean_y, mean_z, INTERVAL_SIGMAS * sd_y, INTERVAL_SIGMAS * sd_z
    )


def fit_map(traces, config: SurveyConfig) -> CableMap:
    return CableMap(tuple(fit_cable(t, config) for t in traces))
