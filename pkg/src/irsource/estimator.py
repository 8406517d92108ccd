"""scikit-learn style wrappers around the variance estimator and the inversion.

``VarianceTransformer`` maps a flux ensemble ``(P, n_points, N_t)`` to the
variance matrix ``(n_points, N_t)``; ``StrengthRecovery`` fits on that
matrix and predicts ``|f|`` at arbitrary times. Chained in a
:class:`sklearn.pipeline.Pipeline` they reproduce the inversion stage of an
experiment.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import InvalidArgumentError
from .grid import GridSpec
from .inversion import KaczmarzConfig, build_volterra_system, kaczmarz_invert
from .profiles import SpatialProfile
from .spectral import DEFAULT_TOLERANCE, MAX_MODES, BoundaryPoint, kernel_table
from .synthesis import VarianceAccumulator, VarianceSeries


def _as_points(points):
    out = []
    for p in points:
        if isinstance(p, BoundaryPoint):
            out.append(p)
        elif isinstance(p, (int, float)):
            out.append(BoundaryPoint(float(p)))
        elif isinstance(p, (tuple, list)):
            out.append(BoundaryPoint(*p))
        else:
            out.append(BoundaryPoint.parse(p))
    return out


def _check_flux(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[:, None, :]
    if X.ndim != 3:
        raise InvalidArgumentError(f"flux must be (P, N_t) or (P, n_points, N_t), got {X.shape}")
    check_array(X.reshape(X.shape[0], -1))
    return X


class VarianceTransformer(TransformerMixin, BaseEstimator):
    """Raw second moment of partial flux sums, scaled by ``h_t / P``."""

    def __init__(self, h_t=2.0**-7, centered=False):
        self.h_t = h_t
        self.centered = centered

    def fit(self, X, y=None):
        X = _check_flux(X)
        if not self.h_t > 0:
            raise InvalidArgumentError("h_t must be positive")
        self.n_points_, self.n_times_ = X.shape[1], X.shape[2]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_times_")
        X = _check_flux(X)
        if X.shape[1:] != (self.n_points_, self.n_times_):
            raise InvalidArgumentError("flux shape differs from the one seen in fit")
        acc = VarianceAccumulator(self.n_points_, self.n_times_)
        acc.add(X)
        return acc.values(self.h_t, self.centered)


class StrengthRecovery(BaseEstimator):
    """Recover ``|f|`` from variance series via regularized block Kaczmarz.

    Parameters
    ----------
    equation : {"heat", "wave"}
    g : str or SpatialProfile
        Known spatial source factor (``"quadratic"`` or ``"biquadratic"``).
    points : sequence
        Observation points, one per row of the variance matrix.
    h_t : float
        Time step of the variance series.
    alpha, epsilon, max_iter
        Regularization, stopping tolerance on the combined residual, sweep cap.
    kernel_tolerance, max_modes
        Adaptive truncation settings for the recovery kernels.
    """

    def __init__(
        self,
        equation="heat",
        g="quadratic",
        points=(0.0, 1.0),
        h_t=2.0**-7,
        alpha=1e-2,
        epsilon=2e-3,
        max_iter=500,
        kernel_tolerance=DEFAULT_TOLERANCE,
        max_modes=MAX_MODES,
    ):
        self.equation = equation
        self.g = g
        self.points = points
        self.h_t = h_t
        self.alpha = alpha
        self.epsilon = epsilon
        self.max_iter = max_iter
        self.kernel_tolerance = kernel_tolerance
        self.max_modes = max_modes

    def _profile(self):
        return self.g if isinstance(self.g, SpatialProfile) else SpatialProfile.named(self.g)

    def fit(self, X, y=None):
        """``X`` is the variance matrix ``(n_points, N_t)``; ``y`` is ignored."""
        V = check_array(X, ensure_min_samples=1)
        points = _as_points(self.points)
        if V.shape[0] != len(points):
            raise InvalidArgumentError(f"{V.shape[0]} variance rows for {len(points)} points")
        if self.equation not in ("heat", "wave"):
            raise InvalidArgumentError(f"equation must be heat or wave, got {self.equation!r}")
        g = self._profile()
        n_t = V.shape[1]
        grid = GridSpec(dim=g.dim, n_x=2, n_t=n_t, T=n_t * self.h_t)
        m = 1 if self.equation == "heat" else 2
        self.kernels_ = [
            kernel_table(z, g, m, grid, self.kernel_tolerance, self.max_modes) for z in points
        ]
        series = [VarianceSeries(z, z, V[i], 1, 0.0, grid.h_t) for i, z in enumerate(points)]
        system = build_volterra_system(self.kernels_, series)
        rec = kaczmarz_invert(system, KaczmarzConfig(self.alpha, self.epsilon, self.max_iter))
        self.reconstruction_ = rec
        self.times_ = rec.times
        self.f_squared_ = rec.f_squared
        self.strength_ = rec.strength
        self.n_iter_ = rec.iterations
        self.converged_ = rec.converged
        return self

    def predict(self, t):
        """Piecewise-constant ``|f|`` at times ``t`` (value of ``t_k`` on ``[t_k, t_{k+1})``)."""
        check_is_fitted(self, "strength_")
        t = np.asarray(t, dtype=float)
        k = np.clip(np.floor(t / self.h_t + 1e-9).astype(int), 0, self.strength_.size - 1)
        return self.strength_[k]
