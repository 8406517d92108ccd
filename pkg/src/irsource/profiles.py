"""Named and tabulated source profiles.

The temporal profile ``f`` is the unknown to be recovered. The spatial
profile ``g`` is the known, controllable factor of the source ``g(x) f(t) dW``.
Named profiles carry a ``scale`` factor so sign flips and rescalings stay
serializable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .exceptions import InvalidArgumentError


def _sine(t):
    return np.sin(2.0 * np.pi * t)


def _two_mode(t):
    return 0.6 - 0.3 * np.cos(2.0 * np.pi * t) - 0.3 * np.cos(4.0 * np.pi * t)


def _step(t):
    return 1.5 * ((t > 0.2) & (t <= 0.6)) + 1.0 * ((t > 0.6) & (t <= 0.8))


def _constant(t):
    return np.ones_like(t)


_TEMPORAL = {
    "sine": _sine,
    "two_mode": _two_mode,
    "step": _step,
    "constant": _constant,
}


@dataclass(frozen=True)
class TemporalProfile:
    """Time-dependent source factor ``f``.

    Either one of the named forms (``sine``, ``two_mode``, ``step``,
    ``constant``) times ``scale``, or tabulated values at ``t_0 .. t_{N_t-1}``
    held piecewise constant on ``[t_k, t_{k+1})``.
    """

    name: str
    scale: float = 1.0
    values: tuple | None = None
    h_t: float | None = None

    def __post_init__(self):
        if self.name == "tabulated":
            if self.values is None or self.h_t is None or not self.h_t > 0:
                raise InvalidArgumentError("tabulated profile needs values and h_t > 0")
        elif self.name not in _TEMPORAL:
            raise InvalidArgumentError(
                f"unknown temporal profile {self.name!r}; "
                f"choose from {sorted(_TEMPORAL) + ['tabulated']}"
            )

    @classmethod
    def tabulated(cls, values, h_t, scale=1.0):
        return cls("tabulated", scale, tuple(float(v) for v in values), float(h_t))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.name == "tabulated":
            vals = np.asarray(self.values)
            k = np.clip(np.floor(t / self.h_t + 1e-9).astype(int), 0, len(vals) - 1)
            return self.scale * vals[k]
        return self.scale * _TEMPORAL[self.name](t)

    def scaled(self, c):
        return TemporalProfile(self.name, self.scale * c, self.values, self.h_t)


def _quadratic(x):
    return x * (1.0 - x)


def _biquadratic(x, y):
    return x * y * (1.0 - x) * (1.0 - y)


def _quadratic_coefficient(n):
    # <x(1-x), sqrt(2) sin(n pi x)>
    return 2.0 * np.sqrt(2.0) * (1.0 - (-1.0) ** n) / (n**3 * np.pi**3)


@dataclass(frozen=True)
class SpatialProfile:
    """Spatial source factor ``g`` on the unit interval or unit square.

    ``coefficient`` optionally gives ``<g, phi>`` in closed form for a mode
    index tuple; everything else falls back to quadrature.
    """

    name: str
    dim: int
    func: Callable = field(compare=False, repr=False)
    scale: float = 1.0
    coefficient: Callable | None = field(default=None, compare=False, repr=False)
    params: tuple = ()

    def __call__(self, x, y=None):
        if self.dim == 1:
            return self.scale * self.func(np.asarray(x, dtype=float))
        return self.scale * self.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def closed_form(self, index):
        if self.coefficient is None:
            return None
        return self.scale * self.coefficient(tuple(index))

    def scaled(self, c):
        return SpatialProfile(
            self.name, self.dim, self.func, self.scale * c, self.coefficient, self.params
        )

    @classmethod
    def quadratic(cls, scale=1.0):
        """``g(x) = x (1 - x)`` on [0, 1]."""
        return cls("quadratic", 1, _quadratic, scale, lambda idx: _quadratic_coefficient(idx[0]))

    @classmethod
    def biquadratic(cls, scale=1.0):
        """``g(x, y) = x y (1 - x) (1 - y)`` on the unit square."""
        return cls(
            "biquadratic",
            2,
            _biquadratic,
            scale,
            lambda idx: _quadratic_coefficient(idx[0]) * _quadratic_coefficient(idx[1]),
        )

    @classmethod
    def mode(cls, index, scale=1.0):
        """A single normalized Dirichlet eigenfunction, so ``g_n = scale * delta``."""
        index = tuple(int(i) for i in index)
        if len(index) == 1:
            (p,) = index

            def func(x):
                return np.sqrt(2.0) * np.sin(p * np.pi * x)

        else:
            p, q = index

            def func(x, y):
                return 2.0 * np.sin(p * np.pi * x) * np.sin(q * np.pi * y)

        return cls(
            "mode",
            len(index),
            func,
            scale,
            lambda idx: float(tuple(idx) == index),
            index,
        )

    @classmethod
    def zero(cls, dim=1):
        if dim == 1:
            return cls("zero", 1, np.zeros_like, 1.0, lambda idx: 0.0)
        return cls("zero", 2, lambda x, y: np.zeros(np.broadcast(x, y).shape), 1.0, lambda idx: 0.0)

    @classmethod
    def tabulated(cls, values):
        """Linear (1D) or bilinear (2D) interpolant of samples on a uniform grid of [0,1]^d."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            nodes = np.linspace(0.0, 1.0, values.size)
            return cls("tabulated", 1, lambda x: np.interp(x, nodes, values))
        if values.ndim == 2:
            interp = RegularGridInterpolator(
                (np.linspace(0.0, 1.0, values.shape[0]), np.linspace(0.0, 1.0, values.shape[1])),
                values,
            )

            def func(x, y):
                x, y = np.broadcast_arrays(x, y)
                pts = np.stack([x.ravel(), y.ravel()], axis=-1)
                return interp(pts).reshape(x.shape)

            return cls("tabulated", 2, func)
        raise InvalidArgumentError("tabulated g must be a 1D or 2D array")

    @classmethod
    def named(cls, name, scale=1.0):
        if name == "quadratic":
            return cls.quadratic(scale)
        if name == "biquadratic":
            return cls.biquadratic(scale)
        raise InvalidArgumentError(f"unknown named spatial profile {name!r}")
