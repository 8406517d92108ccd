"""Dirichlet-Laplacian eigensystem and the boundary-flux recovery kernel.

Eigenpairs on the unit interval are ``lambda_n = n^2 pi^2`` with
``phi_n = sqrt(2) sin(n pi x)``; on the unit square they are tensor
products ``2 sin(p pi x) sin(q pi y)`` with ``lambda = (p^2 + q^2) pi^2``,
flattened by nondecreasing eigenvalue with a lexicographic tie-break.

The recovery kernel at a boundary point ``z`` is

    G_z(t) = sum_n c_{z,n} g_n (1 - exp(-lambda_n t))        (heat, m=1)
    G_z(t) = sum_n c_{z,n} g_n (1 - cos(sqrt(lambda_n) t))   (wave, m=2)

with ``c_{z,n} = -(1/lambda_n) dphi_n/dn(z)`` and ``g_n = <g, phi_n>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError, TruncationLimitError
from .grid import GridSpec
from .profiles import SpatialProfile

DEFAULT_TOLERANCE = 1e-8
MAX_MODES = 100_000
_QUAD_INTERVALS_1D = 4096
_QUAD_INTERVALS_2D = 1024
_SIDES_2D = ("x0", "x1", "y0", "y1")


@dataclass(frozen=True)
class SpatialDomain:
    """The unit interval (``dim=1``) or the unit square (``dim=2``)."""

    dim: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidArgumentError(f"dim must be 1 or 2, got {self.dim}")


@dataclass(frozen=True)
class EigenMode:
    """Normalized Dirichlet eigenpair; call it to evaluate ``phi`` pointwise."""

    index: tuple
    eigenvalue: float

    @property
    def dim(self):
        return len(self.index)

    def __call__(self, x, y=None):
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return np.sqrt(2.0) * np.sin(self.index[0] * np.pi * x)
        p, q = self.index
        return 2.0 * np.sin(p * np.pi * x) * np.sin(q * np.pi * np.asarray(y, dtype=float))

    def gradient(self, x, y=None):
        """Analytic gradient; a scalar derivative in 1D, an ``(d/dx, d/dy)`` pair in 2D."""
        if self.dim == 1:
            n = self.index[0]
            return np.sqrt(2.0) * n * np.pi * np.cos(n * np.pi * np.asarray(x, dtype=float))
        p, q = self.index
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        dx = 2.0 * p * np.pi * np.cos(p * np.pi * x) * np.sin(q * np.pi * y)
        dy = 2.0 * q * np.pi * np.sin(p * np.pi * x) * np.cos(q * np.pi * y)
        return dx, dy


@dataclass(frozen=True)
class BoundaryPoint:
    """A point on the boundary of the unit interval or unit square.

    1D points are ``BoundaryPoint(0.0)`` or ``BoundaryPoint(1.0)``. 2D points
    pass both coordinates; one must sit on a side, the other strictly inside
    (0, 1) since the normal is undefined at corners.
    """

    x: float
    y: float | None = None
    side: str = field(init=False)

    def __post_init__(self):
        x, y = float(self.x), self.y
        object.__setattr__(self, "x", x)
        if y is None:
            if x == 0.0:
                side = "left"
            elif x == 1.0:
                side = "right"
            else:
                raise InvalidArgumentError(f"{x} is not on the boundary of [0, 1]")
        else:
            y = float(y)
            object.__setattr__(self, "y", y)
            on_x = x in (0.0, 1.0)
            on_y = y in (0.0, 1.0)
            if on_x and on_y:
                raise InvalidArgumentError(f"corner ({x}, {y}) has no outward normal")
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0) or not (on_x or on_y):
                raise InvalidArgumentError(f"({x}, {y}) is not on the boundary of [0, 1]^2")
            if on_x:
                side = "x0" if x == 0.0 else "x1"
            else:
                side = "y0" if y == 0.0 else "y1"
        object.__setattr__(self, "side", side)

    @property
    def dim(self):
        return 1 if self.y is None else 2

    @property
    def offset(self):
        """Coordinate along the side (2D only)."""
        if self.dim == 1:
            return None
        return self.y if self.side in ("x0", "x1") else self.x

    @property
    def coords(self):
        return (self.x,) if self.y is None else (self.x, self.y)

    def label(self):
        # shortest text that round-trips; integral coordinates print as "0", "1"
        return ",".join(str(int(c)) if float(c).is_integer() else repr(float(c)) for c in self.coords)

    @classmethod
    def parse(cls, text):
        """Parse ``"0"`` or ``"0,0.2"``."""
        parts = [float(p) for p in str(text).replace(" ", "").split(",") if p]
        if len(parts) == 1:
            return cls(parts[0])
        if len(parts) == 2:
            return cls(parts[0], parts[1])
        raise InvalidArgumentError(f"cannot parse boundary point {text!r}")


@dataclass(frozen=True)
class KernelTable:
    """``G_z`` sampled at ``t_j = j h_t``, ``j = 1 .. N_t`` (never at t=0)."""

    z: BoundaryPoint
    m: int
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    truncation: int

    @property
    def h_t(self):
        return float(self.times[0])


def _mode_indices(dim, count):
    """Index array of shape (count, dim) in the flattening order."""
    if count < 1:
        raise InvalidArgumentError(f"count must be >= 1, got {count}")
    if dim == 1:
        return np.arange(1, count + 1).reshape(-1, 1)
    radius = int(np.ceil(np.sqrt(4.0 * count / np.pi))) + 2
    while True:
        p, q = np.meshgrid(np.arange(1, radius + 1), np.arange(1, radius + 1), indexing="ij")
        s = (p**2 + q**2).ravel()
        # every pair with p^2+q^2 <= radius^2 is present in the box
        if np.count_nonzero(s <= radius**2) >= count:
            break
        radius *= 2
    p, q = p.ravel(), q.ravel()
    order = np.lexsort((q, p, s))[:count]
    return np.stack([p[order], q[order]], axis=1)


def _eigenvalues(indices):
    return np.pi**2 * np.sum(indices.astype(float) ** 2, axis=1)


def eigen_modes(domain, count):
    """First ``count`` Dirichlet eigenpairs of ``domain`` in the flattening order."""
    if not isinstance(domain, SpatialDomain):
        domain = SpatialDomain(int(domain))
    idx = _mode_indices(domain.dim, int(count))
    lams = _eigenvalues(idx)
    return [EigenMode(tuple(int(i) for i in row), float(lam)) for row, lam in zip(idx, lams)]


def _normal_derivatives(indices, z):
    """Outward normal derivative of every mode in ``indices`` at ``z``."""
    indices = np.asarray(indices)
    if indices.shape[1] != z.dim:
        raise InvalidArgumentError(f"mode dimension {indices.shape[1]} != boundary point dimension {z.dim}")
    if z.dim == 1:
        n = indices[:, 0].astype(float)
        if z.side == "left":
            return -np.sqrt(2.0) * n * np.pi
        return np.sqrt(2.0) * n * np.pi * (-1.0) ** n
    p = indices[:, 0].astype(float)
    q = indices[:, 1].astype(float)
    s = z.offset
    if z.side == "x0":
        return -2.0 * p * np.pi * np.sin(q * np.pi * s)
    if z.side == "x1":
        return 2.0 * p * np.pi * (-1.0) ** p * np.sin(q * np.pi * s)
    if z.side == "y0":
        return -2.0 * q * np.pi * np.sin(p * np.pi * s)
    return 2.0 * q * np.pi * (-1.0) ** q * np.sin(p * np.pi * s)


def boundary_normal_derivative(mode, z):
    """``d phi / d n`` at ``z`` with ``n`` the outward unit normal."""
    if not isinstance(z, BoundaryPoint):
        raise InvalidArgumentError(f"expected a BoundaryPoint, got {z!r}")
    return float(_normal_derivatives(np.array([mode.index]), z)[0])


def flux_coefficient(mode, z):
    """``c_{z,n} = -(1/lambda_n) dphi_n/dn(z)``."""
    return -boundary_normal_derivative(mode, z) / mode.eigenvalue


def simpson_weights(n_intervals):
    """Composite Simpson weights on ``n_intervals + 1`` uniform nodes of [0, 1]."""
    if n_intervals < 2 or n_intervals % 2:
        raise InvalidArgumentError("Simpson's rule needs an even number of intervals")
    w = np.ones(n_intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * n_intervals)


def _quadrature_coefficients(g, indices, n_intervals=None):
    indices = np.asarray(indices)
    top = int(indices.max())
    if g.dim == 1:
        n = n_intervals or max(_QUAD_INTERVALS_1D, 16 * top)
        n += n % 2
        x = np.linspace(0.0, 1.0, n + 1)
        wg = simpson_weights(n) * g(x)
        k = indices[:, 0]
        return np.sqrt(2.0) * np.sin(np.pi * np.outer(k, x)) @ wg
    n = n_intervals or max(_QUAD_INTERVALS_2D, 16 * top)
    n += n % 2
    x = np.linspace(0.0, 1.0, n + 1)
    w = simpson_weights(n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    weighted = w[:, None] * g(X, Y) * w[None, :]
    orders = np.arange(1, top + 1)
    S = np.sqrt(2.0) * np.sin(np.pi * np.outer(x, orders))
    C = S.T @ weighted @ S
    return C[indices[:, 0] - 1, indices[:, 1] - 1]


def quadrature_coefficient(g, mode, n_intervals=None):
    """``<g, phi>`` by composite Simpson quadrature, ignoring any closed form."""
    return float(_quadrature_coefficients(g, np.array([mode.index]), n_intervals)[0])


def _source_coefficients(g, indices):
    if g.coefficient is not None:
        return np.array([g.closed_form(row) for row in np.asarray(indices)], dtype=float)
    return _quadrature_coefficients(g, indices)


def source_coefficient(g, mode):
    """``g_n = <g, phi_n>``; closed form for named profiles, Simpson otherwise."""
    if g.dim != mode.dim:
        raise InvalidArgumentError(f"profile dimension {g.dim} != mode dimension {mode.dim}")
    return float(_source_coefficients(g, np.array([mode.index]))[0])


def kernel_series(z, g, truncation):
    """Eigenvalues and weights ``c_{z,n} g_n`` of the first ``truncation`` modes."""
    if g.dim != z.dim:
        raise InvalidArgumentError(f"profile dimension {g.dim} != boundary point dimension {z.dim}")
    idx = _mode_indices(z.dim, int(truncation))
    lams = _eigenvalues(idx)
    weights = -_normal_derivatives(idx, z) / lams * _source_coefficients(g, idx)
    return lams, weights


def _evaluate_series(lams, weights, m, t, chunk=4096):
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    out = np.zeros(flat.shape)
    for start in range(0, lams.size, chunk):
        lam = lams[start : start + chunk]
        w = weights[start : start + chunk]
        if m == 1:
            basis = -np.expm1(-np.outer(flat, lam))
        else:
            basis = 2.0 * np.sin(0.5 * np.outer(flat, np.sqrt(lam))) ** 2
        out += basis @ w
    return out.reshape(t.shape)


def _check_m(m):
    if m not in (1, 2):
        raise InvalidArgumentError(f"m must be 1 (heat) or 2 (wave), got {m}")


def kernel_value(z, g, m, t, truncation):
    """``G_z(t)`` summed over the first ``truncation`` modes; ``t`` may be an array."""
    _check_m(m)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidArgumentError("kernel is defined for t >= 0 only")
    if truncation < 1:
        raise InvalidArgumentError(f"truncation must be >= 1, got {truncation}")
    lams, weights = kernel_series(z, g, truncation)
    out = _evaluate_series(lams, weights, m, t)
    return float(out) if out.ndim == 0 else out


def kernel_table(z, g, m, grid, tolerance=DEFAULT_TOLERANCE, max_modes=MAX_MODES, start=16):
    """Tabulate ``G_z`` on ``t_1 .. t_{N_t}`` with adaptive truncation.

    The truncation doubles until going from N to 2N modes moves no sample by
    ``tolerance`` or more; the 2N-mode values are returned.
    """
    _check_m(m)
    if not tolerance > 0:
        raise InvalidArgumentError(f"tolerance must be positive, got {tolerance}")
    times = grid.observation_times()
    n = min(start, max_modes)
    lams, weights = kernel_series(z, g, max_modes if 2 * n > max_modes else 2 * n)
    change = np.inf
    while 2 * n <= max_modes:
        coarse = _evaluate_series(lams[:n], weights[:n], m, times)
        fine = _evaluate_series(lams[: 2 * n], weights[: 2 * n], m, times)
        change = float(np.max(np.abs(fine - coarse)))
        if change < tolerance:
            return KernelTable(z, m, times, fine, 2 * n)
        n *= 2
        if 2 * n <= max_modes:
            lams, weights = kernel_series(z, g, 2 * n)
    raise TruncationLimitError(max_modes, change)
