"""Uniform space-time grids on the unit interval and unit square."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError


def _partitions(step, name):
    if not step > 0:
        raise InvalidArgumentError(f"{name} must be positive, got {step}")
    n = int(round(1.0 / step))
    if n < 1 or abs(n * step - 1.0) > 1e-12:
        raise InvalidArgumentError(f"1/{name} must be an integer, got {name}={step}")
    return n


@dataclass(frozen=True)
class GridSpec:
    """Space-time discretization of ``D x [0, T]``.

    ``n_x`` (and ``n_y`` in 2D) count spatial partitions of [0, 1], ``n_t``
    counts time steps, so ``h_t = T / n_t``.
    """

    dim: int
    n_x: int
    n_t: int
    T: float = 1.0
    n_y: int | None = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidArgumentError(f"dim must be 1 or 2, got {self.dim}")
        if self.n_x < 2 or self.n_t < 1:
            raise InvalidArgumentError("grid needs n_x >= 2 and n_t >= 1")
        if not self.T > 0:
            raise InvalidArgumentError(f"T must be positive, got {self.T}")
        if self.dim == 2:
            if self.n_y is None:
                object.__setattr__(self, "n_y", self.n_x)
            if self.n_y < 2:
                raise InvalidArgumentError("grid needs n_y >= 2")
        elif self.n_y is not None:
            raise InvalidArgumentError("n_y is only meaningful for dim=2")

    @classmethod
    def from_steps(cls, h_x, h_t, T=1.0, dim=1, h_y=None):
        n_x = _partitions(h_x, "h_x")
        if not h_t > 0:
            raise InvalidArgumentError(f"h_t must be positive, got {h_t}")
        n_t = int(round(T / h_t))
        if n_t < 1 or abs(n_t * h_t - T) > 1e-12 * max(1.0, T):
            raise InvalidArgumentError(f"T/h_t must be an integer (T={T}, h_t={h_t})")
        n_y = None
        if dim == 2:
            n_y = _partitions(h_y if h_y is not None else h_x, "h_y")
        return cls(dim=dim, n_x=n_x, n_t=n_t, T=T, n_y=n_y)

    @property
    def h_x(self):
        return 1.0 / self.n_x

    @property
    def h_y(self):
        return None if self.n_y is None else 1.0 / self.n_y

    @property
    def h_t(self):
        return self.T / self.n_t

    def x_nodes(self):
        return np.linspace(0.0, 1.0, self.n_x + 1)

    def y_nodes(self):
        if self.n_y is None:
            raise InvalidArgumentError("1D grid has no y nodes")
        return np.linspace(0.0, 1.0, self.n_y + 1)

    def time_levels(self):
        """All time levels t_0 = 0, ..., t_{N_t} = T."""
        return np.arange(self.n_t + 1) * self.h_t

    def observation_times(self):
        """t_1, ..., t_{N_t}: the levels at which flux data exist."""
        return np.arange(1, self.n_t + 1) * self.h_t

    def refined(self, factor=2):
        """Grid with every step divided by ``factor``."""
        return GridSpec(
            dim=self.dim,
            n_x=self.n_x * factor,
            n_t=self.n_t * factor,
            T=self.T,
            n_y=None if self.n_y is None else self.n_y * factor,
        )
