"""Second-moment estimator of the time-integrated boundary flux.

For each observation point,

    V_j = (h_t / P) * sum_p ( sum_{k<j} flux_p[k] )^2,   j = 1 .. N_t,

where ``flux_p[k]`` is the stored sample at ``t_{k+1}``, so the inner sum
is the right-endpoint rule for the flux integral over ``[0, t_j]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError


@dataclass(frozen=True)
class VarianceSeries:
    z: object
    observed_z: object
    values: np.ndarray = field(repr=False)
    path_count: int
    noise_level: float
    h_t: float
    master_seed: int | None = None
    centered: bool = False

    @property
    def times(self):
        return np.arange(1, self.values.size + 1) * self.h_t

    @property
    def integral_variance(self):
        """``h_t V_j``: the estimate of ``Var[int_0^{t_j} flux]`` itself.

        ``V_j`` carries one factor ``1/h_t`` so that ``V = G f`` needs no step
        factor; multiply back to compare with the convolution integral.
        """
        return self.h_t * self.values

    @property
    def standard_error(self):
        """Rough one-sigma Monte Carlo error ``sqrt(2/P) V_j``."""
        return np.sqrt(2.0 / self.path_count) * self.values


class VarianceAccumulator:
    """Streaming accumulator of squared partial sums over path batches.

    Batch contributions are kept separately and combined with ``math.fsum``,
    so the merged result is independent of the order batches arrive in.
    """

    def __init__(self, n_points, n_t):
        self.n_points = n_points
        self.n_t = n_t
        self._squares = []
        self._sums = []
        self.count = 0

    def add(self, flux):
        """Add a batch of flux series shaped ``(B, n_points, N_t)``."""
        flux = np.asarray(flux, dtype=float)
        if flux.shape[1:] != (self.n_points, self.n_t):
            raise InvalidArgumentError(
                f"batch shape {flux.shape[1:]} != ({self.n_points}, {self.n_t})"
            )
        partial = np.cumsum(flux, axis=2)
        self._squares.append(np.sum(partial**2, axis=0))
        self._sums.append(np.sum(partial, axis=0))
        self.count += flux.shape[0]

    def merge(self, other):
        if (other.n_points, other.n_t) != (self.n_points, self.n_t):
            raise InvalidArgumentError("cannot merge accumulators of different shapes")
        self._squares.extend(other._squares)
        self._sums.extend(other._sums)
        self.count += other.count
        return self

    @staticmethod
    def _exact_total(parts, shape):
        if not parts:
            return np.zeros(shape)
        stacked = np.stack(parts).reshape(len(parts), -1)
        return np.array([math.fsum(col) for col in stacked.T]).reshape(shape)

    def values(self, h_t, centered=False):
        """``V`` for every point, shape ``(n_points, N_t)``."""
        if self.count == 0:
            raise InvalidArgumentError("no paths accumulated")
        shape = (self.n_points, self.n_t)
        second = self._exact_total(self._squares, shape) / self.count
        if centered:
            mean = self._exact_total(self._sums, shape) / self.count
            second = np.maximum(second - mean**2, 0.0)
        return h_t * second


def variance_series(ensemble, z, centered=False, noisy=True):
    """Estimate ``V_1 .. V_{N_t}`` at observation point ``z`` of ``ensemble``.

    ``centered`` subtracts the sample mean of the partial sums (off by
    default; the integrated flux has zero mean analytically).
    """
    i = ensemble.point_index(z)
    data = ensemble.noisy if noisy else ensemble.clean
    acc = VarianceAccumulator(1, data.shape[2])
    acc.add(data[:, i : i + 1, :])
    return VarianceSeries(
        z=ensemble.requested_points[i],
        observed_z=ensemble.observation_points[i],
        values=acc.values(ensemble.h_t, centered)[0],
        path_count=ensemble.path_count,
        noise_level=ensemble.noise_level,
        h_t=ensemble.h_t,
        master_seed=ensemble.master_seed,
        centered=centered,
    )


def variance_from_batches(batches, points, observed, n_t, h_t, sigma, master_seed, centered=False):
    """Streamed variant: consume :class:`~irsource.fdm.FluxBatch` objects, keep only sums."""
    acc = VarianceAccumulator(len(points), n_t)
    for batch in batches:
        acc.add(batch.noisy)
    values = acc.values(h_t, centered)
    return [
        VarianceSeries(z, oz, values[i], acc.count, float(sigma), h_t, master_seed, centered)
        for i, (z, oz) in enumerate(zip(points, observed))
    ]
