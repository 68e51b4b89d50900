"""Gaussian process regression with an RBF kernel over 2D positions.

Sparse binary observations (crowd=1.0, free=0.0) are interpolated into a
smooth field; the posterior variance doubles as a per-cell confidence
measure. The prior mean is zero, so far from any observation the field
relaxes to "free" and the variance to the signal variance.

Exact GPR only: training sets are tens of points per run, so a dense
Cholesky factorization is cheap and there is no hyperparameter fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, FactorizationError
from .grid import GridMap, WorldPoint, cell_centers

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class Hyperparameters:
    """RBF kernel and noise settings.

    k(a, b) = signal_variance * exp(-||a - b||^2 / (2 * lengthscale^2)).
    The default lengthscale matches the 3 m observation spacing so adjacent
    stations correlate strongly; jitter pads the Gram diagonal so the
    factorization survives near-duplicate points.
    """

    lengthscale: float = 3.0
    signal_variance: float = 1.0
    noise_variance: float = 0.01
    jitter: float = 1e-10

    def __post_init__(self):
        if self.lengthscale <= 0:
            raise ValueError(f"lengthscale must be > 0, got {self.lengthscale}")
        if self.signal_variance <= 0:
            raise ValueError(f"signal_variance must be > 0, got {self.signal_variance}")
        if self.noise_variance < 0 or self.jitter < 0:
            raise ValueError("noise_variance and jitter must be >= 0")
        if self.noise_variance + self.jitter <= 0:
            raise ValueError("noise_variance + jitter must be > 0")


@dataclass(frozen=True)
class Prediction:
    mean: float
    variance: float


@dataclass(frozen=True, eq=False)
class GprModel:
    """Fitted GPR state; immutable, safe for concurrent predict calls."""

    points: np.ndarray = field(repr=False)  # (n, 2) training positions
    targets: np.ndarray = field(repr=False)  # (n,) label encodings
    hyper: Hyperparameters
    chol: np.ndarray = field(repr=False)  # lower-triangular factor
    alpha: np.ndarray = field(repr=False)  # (K + (sn2+jitter) I)^-1 y

    @property
    def n(self) -> int:
        return self.points.shape[0]


def kernel(a: WorldPoint, b: WorldPoint, hyper: Hyperparameters) -> float:
    """RBF covariance between two world points."""
    d2 = (a.x - b.x) ** 2 + (a.y - b.y) ** 2
    return hyper.signal_variance * math.exp(-d2 / (2.0 * hyper.lengthscale**2))


def _kernel_matrix(xa: np.ndarray, xb: np.ndarray, hyper: Hyperparameters) -> np.ndarray:
    """Covariance matrix between point sets of shape (n, 2) and (m, 2)."""
    d2 = ((xa[:, None, :] - xb[None, :, :]) ** 2).sum(axis=2)
    return hyper.signal_variance * np.exp(-d2 / (2.0 * hyper.lengthscale**2))


def fit(
    points: list[WorldPoint] | np.ndarray,
    targets: list[float] | np.ndarray,
    hyper: Hyperparameters | None = None,
) -> GprModel:
    """Factor the regularized Gram matrix and precompute the weight vector."""
    hyper = hyper or Hyperparameters()
    if isinstance(points, np.ndarray):
        x = np.asarray(points, dtype=np.float64)
    else:
        x = np.array([[p.x, p.y] for p in points], dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 2:
        raise DimensionMismatchError(f"points must be (n, 2), got {x.shape}")
    if x.shape[0] == 0:
        raise DimensionMismatchError("need at least one training point")
    if y.shape != (x.shape[0],):
        raise DimensionMismatchError(
            f"targets shape {y.shape} does not match {x.shape[0]} points"
        )
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("training data must be finite")

    gram = _kernel_matrix(x, x, hyper)
    gram[np.diag_indices_from(gram)] += hyper.noise_variance + hyper.jitter
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as e:
        raise FactorizationError(
            f"Gram matrix of {x.shape[0]} points is not positive definite "
            "(duplicate points with zero noise, or bad hyperparameters?)"
        ) from e
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, y))
    x.setflags(write=False)
    y.setflags(write=False)
    chol.setflags(write=False)
    alpha.setflags(write=False)
    return GprModel(points=x, targets=y, hyper=hyper, chol=chol, alpha=alpha)


def _predict_batch(model: GprModel, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean/variance at (m, 2) query positions."""
    kstar = _kernel_matrix(model.points, queries, model.hyper)  # (n, m)
    mean = kstar.T @ model.alpha
    v = np.linalg.solve(model.chol, kstar)  # (n, m)
    variance = model.hyper.signal_variance - (v * v).sum(axis=0)
    return mean, np.maximum(variance, VARIANCE_FLOOR)


def predict(model: GprModel, q: WorldPoint) -> Prediction:
    """Posterior at a single query point."""
    mean, variance = _predict_batch(model, np.array([[q.x, q.y]]))
    return Prediction(mean=float(mean[0]), variance=float(variance[0]))


def predict_grid(model: GprModel, template: GridMap) -> tuple[GridMap, GridMap]:
    """Evaluate the posterior at every cell center of ``template``.

    Returns (mean, variance) grids aligned with the template.
    """
    xs, ys = cell_centers(template)
    queries = np.column_stack([xs.ravel(), ys.ravel()])
    mean, variance = _predict_batch(model, queries)
    shape = (template.height, template.width)
    return (
        template.with_values(mean.reshape(shape), kind="mean"),
        template.with_values(variance.reshape(shape), kind="variance"),
    )
