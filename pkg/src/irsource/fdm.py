"""Finite-difference forward solvers and boundary-flux synthesis.

Heat: implicit Euler in time, central second differences in space (3-point
in 1D, 5-point in 2D). Wave (1D only): the three-level averaged implicit
scheme with the start-up step derived from ``u^1 = u^{-1}``. Every scheme
holds ``u = 0`` on the boundary and starts from rest.

Solvers accept one path (``dW`` of length ``N_t``) or a batch of paths
stacked as columns (``dW`` of shape ``(N_t, B)``); the batch form is what
the ensemble synthesis uses.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import InvalidArgumentError
from .grid import GridSpec
from .noise import IncrementSeries, increment_matrix, noise_matrix
from .profiles import SpatialProfile, TemporalProfile
from .spectral import BoundaryPoint


class TridiagonalFactor:
    """Thomas-algorithm factorization of a constant tridiagonal matrix.

    ``lower[i]`` multiplies ``x[i-1]`` and ``upper[i]`` multiplies ``x[i+1]``
    in row ``i``; ``lower[0]`` and ``upper[-1]`` are ignored. The elimination
    is done once; :meth:`solve` handles one right-hand side or many stacked
    as columns.
    """

    def __init__(self, lower, diag, upper):
        lower = np.asarray(lower, dtype=float)
        diag = np.asarray(diag, dtype=float)
        upper = np.asarray(upper, dtype=float)
        n = diag.size
        if lower.size != n or upper.size != n:
            raise InvalidArgumentError("tridiagonal bands must have equal length")
        self.n = n
        self.lower = lower
        self.inv_pivot = np.empty(n)
        self.upper_mod = np.empty(n)
        pivot = diag[0]
        for i in range(n):
            if i > 0:
                pivot = diag[i] - lower[i] * self.upper_mod[i - 1]
            if pivot == 0.0:
                raise InvalidArgumentError("zero pivot in tridiagonal elimination")
            self.inv_pivot[i] = 1.0 / pivot
            self.upper_mod[i] = upper[i] / pivot if i < n - 1 else 0.0

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise InvalidArgumentError(f"rhs has {rhs.shape[0]} rows, system has {self.n}")
        x = np.empty_like(rhs)
        x[0] = rhs[0] * self.inv_pivot[0]
        for i in range(1, self.n):
            x[i] = (rhs[i] - self.lower[i] * x[i - 1]) * self.inv_pivot[i]
        for i in range(self.n - 2, -1, -1):
            x[i] -= self.upper_mod[i] * x[i + 1]
        return x


def _second_difference(u, h):
    """``delta_x^2`` on interior values with zero Dirichlet neighbours (axis 0)."""
    out = -2.0 * u
    out[1:] += u[:-1]
    out[:-1] += u[1:]
    return out / h**2


def _laplacian_2d(n_x, n_y, h_x, h_y):
    def d2(n, h):
        m = n - 1
        return sp.diags([np.ones(m - 1), -2.0 * np.ones(m), np.ones(m - 1)], [-1, 0, 1]) / h**2

    return sp.kronsum(d2(n_y, h_y), d2(n_x, h_x), format="csc")


@dataclass(frozen=True)
class FieldState:
    """Solution on all grid nodes (boundary included) at time level ``time_index``."""

    values: np.ndarray
    time_index: int


def _as_increments(dW, grid):
    if isinstance(dW, IncrementSeries):
        if not math.isclose(dW.h_t, grid.h_t, rel_tol=1e-12):
            raise InvalidArgumentError(f"increment step {dW.h_t} != grid step {grid.h_t}")
        dW = dW.values
    dW = np.asarray(dW, dtype=float)
    if dW.ndim not in (1, 2) or dW.shape[0] != grid.n_t:
        raise InvalidArgumentError(f"expected {grid.n_t} increments, got shape {dW.shape}")
    return dW


class _Scheme:
    """Shared machinery: spatial operator, forcing samples, time marching."""

    def __init__(self, grid, f, g):
        if g.dim != grid.dim:
            raise InvalidArgumentError(f"profile dimension {g.dim} != grid dimension {grid.dim}")
        self.grid = grid
        self.f_values = np.asarray(f(grid.time_levels()[:-1]), dtype=float)
        if grid.dim == 1:
            x = grid.x_nodes()[1:-1]
            self.g_values = np.asarray(g(x), dtype=float)
            self.interior_shape = (grid.n_x - 1,)
        else:
            X, Y = np.meshgrid(grid.x_nodes()[1:-1], grid.y_nodes()[1:-1], indexing="ij")
            self.g_values = np.asarray(g(X, Y), dtype=float).ravel()
            self.interior_shape = (grid.n_x - 1, grid.n_y - 1)

    def forcing(self, j, dW):
        """``f(t_j) g dW_j`` on the flattened interior, one column per path."""
        w = dW[j]
        if np.ndim(w) == 0:
            return self.f_values[j] * w * self.g_values
        return np.outer(self.g_values, self.f_values[j] * w)

    def to_full(self, interior):
        """Interior vector(s) -> full-grid array(s) with zero boundary."""
        shape = tuple(s + 2 for s in self.interior_shape)
        batch = interior.shape[1:]
        full = np.zeros(shape + batch)
        core = interior.reshape(self.interior_shape + batch)
        if self.grid.dim == 1:
            full[1:-1] = core
        else:
            full[1:-1, 1:-1] = core
        return full


class HeatScheme1D(_Scheme):
    def __init__(self, grid, f, g):
        super().__init__(grid, f, g)
        m = grid.n_x - 1
        r = grid.h_t / grid.h_x**2
        off = -r * np.ones(m)
        self.factor = TridiagonalFactor(off, (1.0 + 2.0 * r) * np.ones(m), off)

    def march(self, dW):
        u = np.zeros(self.interior_shape + dW.shape[1:])
        for j in range(self.grid.n_t):
            u = self.factor.solve(u + self.forcing(j, dW))
            yield u


class HeatScheme2D(_Scheme):
    def __init__(self, grid, f, g):
        super().__init__(grid, f, g)
        lap = _laplacian_2d(grid.n_x, grid.n_y, grid.h_x, grid.h_y)
        system = sp.identity(lap.shape[0], format="csc") - grid.h_t * lap
        self.lu = spla.splu(system.tocsc())

    def march(self, dW):
        u = np.zeros((int(np.prod(self.interior_shape)),) + dW.shape[1:])
        for j in range(self.grid.n_t):
            u = self.lu.solve(u + self.forcing(j, dW))
            yield u


class WaveScheme1D(_Scheme):
    def __init__(self, grid, f, g):
        super().__init__(grid, f, g)
        m = grid.n_x - 1
        r = grid.h_t**2 / (4.0 * grid.h_x**2)
        off = -r * np.ones(m)
        self.factor = TridiagonalFactor(off, (1.0 + 2.0 * r) * np.ones(m), off)

    def march(self, dW):
        h_t, h_x = self.grid.h_t, self.grid.h_x
        prev = np.zeros(self.interior_shape + dW.shape[1:])
        cur = self.factor.solve(0.5 * h_t * self.forcing(0, dW))
        yield cur
        for j in range(1, self.grid.n_t):
            rhs = (
                2.0 * cur
                - prev
                + 0.25 * h_t**2 * _second_difference(2.0 * cur + prev, h_x)
                + h_t * self.forcing(j, dW)
            )
            prev, cur = cur, self.factor.solve(rhs)
            yield cur


def make_scheme(equation, grid, f, g):
    if equation == "heat":
        return HeatScheme1D(grid, f, g) if grid.dim == 1 else HeatScheme2D(grid, f, g)
    if equation == "wave":
        if grid.dim != 1:
            raise InvalidArgumentError("the wave scheme is implemented in 1D only")
        return WaveScheme1D(grid, f, g)
    raise InvalidArgumentError(f"equation must be 'heat' or 'wave', got {equation!r}")


def _solve(scheme, dW):
    dW = _as_increments(dW, scheme.grid)
    batch = dW.shape[1:]
    states = [FieldState(scheme.to_full(np.zeros((int(np.prod(scheme.interior_shape)),) + batch)), 0)]
    for j, u in enumerate(scheme.march(dW), start=1):
        states.append(FieldState(scheme.to_full(u), j))
    return states


def solve_heat_1d(grid, f, g, dW):
    """Implicit Euler for ``u_t - u_xx = f g dW/dt``; returns levels ``0 .. N_t``."""
    if grid.dim != 1:
        raise InvalidArgumentError("solve_heat_1d needs a 1D grid")
    return _solve(HeatScheme1D(grid, f, g), dW)


def solve_heat_2d(grid, f, g, dW):
    """Implicit Euler with the 5-point Laplacian; one sparse LU reused for every step."""
    if grid.dim != 2:
        raise InvalidArgumentError("solve_heat_2d needs a 2D grid")
    return _solve(HeatScheme2D(grid, f, g), dW)


def solve_wave_1d(grid, f, g, dW):
    """Averaged implicit scheme for ``u_tt - u_xx = f g dW/dt``; levels ``0 .. N_t``."""
    if grid.dim != 1:
        raise InvalidArgumentError("solve_wave_1d needs a 1D grid")
    return _solve(WaveScheme1D(grid, f, g), dW)


def snap_to_grid(z, grid):
    """Move a 2D boundary point to the nearest boundary node strictly off the corners.

    Returns ``(snapped_point, node_index)`` where ``node_index`` counts along
    the side. 1D points are returned unchanged with ``None``.
    """
    if z.dim != grid.dim:
        raise InvalidArgumentError(f"point dimension {z.dim} != grid dimension {grid.dim}")
    if z.dim == 1:
        return z, None
    n = grid.n_y if z.side in ("x0", "x1") else grid.n_x
    k = int(np.clip(math.floor(z.offset * n + 0.5), 1, n - 1))
    s = k / n
    if z.side in ("x0", "x1"):
        return BoundaryPoint(z.x, s), k
    return BoundaryPoint(s, z.y), k


def _flux_from_interior(interior, z, k, grid):
    """One-sided outward flux read off interior values (boundary nodes are zero)."""
    if grid.dim == 1:
        if z.side == "left":
            return -interior[0] / grid.h_x
        return -interior[-1] / grid.h_x
    u = interior.reshape((grid.n_x - 1, grid.n_y - 1) + interior.shape[1:])
    if z.side == "x0":
        return -u[0, k - 1] / grid.h_x
    if z.side == "x1":
        return -u[-1, k - 1] / grid.h_x
    if z.side == "y0":
        return -u[k - 1, 0] / grid.h_y
    return -u[k - 1, -1] / grid.h_y


def boundary_flux(states, z, grid):
    """Outward normal flux at ``z`` for ``t_1 .. t_{N_t}``.

    One-sided difference between the boundary node and its inward neighbour,
    signed by the outward normal: ``-(u_1 - u_0)/h_x`` at x=0 and
    ``(u_N - u_{N-1})/h_x`` at x=1. In 2D the difference runs along the grid
    line through the snapped node.
    """
    if not isinstance(z, BoundaryPoint):
        raise InvalidArgumentError(f"expected a BoundaryPoint, got {z!r}")
    z, k = snap_to_grid(z, grid)
    out = []
    for state in states[1:]:
        v = np.asarray(state.values)
        if grid.dim == 1:
            flux = -(v[1] - v[0]) / grid.h_x if z.side == "left" else (v[-1] - v[-2]) / grid.h_x
        elif z.side == "x0":
            flux = -(v[1, k] - v[0, k]) / grid.h_x
        elif z.side == "x1":
            flux = (v[-1, k] - v[-2, k]) / grid.h_x
        elif z.side == "y0":
            flux = -(v[k, 1] - v[k, 0]) / grid.h_y
        else:
            flux = (v[k, -1] - v[k, -2]) / grid.h_y
        out.append(flux)
    return np.array(out)


@dataclass(frozen=True)
class ForwardProblem:
    """Everything the forward simulation needs except the random streams."""

    equation: str
    grid: GridSpec
    f: TemporalProfile
    g: SpatialProfile
    points: tuple

    def __post_init__(self):
        if self.equation == "wave" and self.grid.dim == 2:
            raise InvalidArgumentError("2D wave experiments are out of scope")
        if not self.points:
            raise InvalidArgumentError("at least one observation point is required")
        object.__setattr__(self, "points", tuple(self.points))

    def snapped_points(self):
        return tuple(snap_to_grid(z, self.grid)[0] for z in self.points)


@dataclass(frozen=True)
class FluxBatch:
    start: int
    clean: np.ndarray  # (B, n_points, N_t)
    noisy: np.ndarray


@dataclass
class FluxEnsemble:
    """Flux at ``t_1 .. t_{N_t}`` for every path and observation point."""

    requested_points: tuple
    observation_points: tuple
    clean: np.ndarray = field(repr=False)
    noisy: np.ndarray = field(repr=False)
    noise_level: float
    h_t: float
    master_seed: int

    @property
    def path_count(self):
        return self.clean.shape[0]

    @property
    def times(self):
        return np.arange(1, self.clean.shape[2] + 1) * self.h_t

    def point_index(self, z):
        for i, (req, obs) in enumerate(zip(self.requested_points, self.observation_points)):
            if z == req or z == obs:
                return i
        raise InvalidArgumentError(f"{z} is not an observation point of this ensemble")


def _simulate_batch(scheme, problem, snapped, paths, sigma, master_seed):
    grid = problem.grid
    dW = increment_matrix(master_seed, paths, grid.n_t, grid.h_t)
    clean = np.empty((len(paths), len(snapped), grid.n_t))
    for j, u in enumerate(scheme.march(dW)):
        for i, (z, k) in enumerate(snapped):
            clean[:, i, j] = _flux_from_interior(u, z, k, grid)
    if sigma > 0:
        noisy = clean + sigma * noise_matrix(master_seed, paths, clean.shape[1:])
    else:
        noisy = clean.copy()
    return FluxBatch(paths.start, clean, noisy)


def iter_flux_batches(problem, paths, sigma, master_seed=0, workers=1, batch_size=250):
    """Yield :class:`FluxBatch` objects in path order.

    Paths are grouped into fixed-size batches, so the batch layout (and every
    downstream sum) does not depend on ``workers``.
    """
    if paths < 1:
        raise InvalidArgumentError(f"path count must be >= 1, got {paths}")
    if sigma < 0:
        raise InvalidArgumentError(f"noise level must be >= 0, got {sigma}")
    scheme = make_scheme(problem.equation, problem.grid, problem.f, problem.g)
    snapped = [snap_to_grid(z, problem.grid) for z in problem.points]
    ranges = [range(s, min(s + batch_size, paths)) for s in range(0, paths, batch_size)]

    def run(r):
        return _simulate_batch(scheme, problem, snapped, r, sigma, master_seed)

    if workers <= 1:
        for r in ranges:
            yield run(r)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(run, ranges)


def synthesize_flux_ensemble(problem, paths, sigma, master_seed=0, workers=1, batch_size=250):
    """Simulate ``paths`` sample paths and return their (noisy) boundary flux.

    Noise ``sigma * U``, ``U ~ U[-1, 1]``, is drawn independently per point,
    time level and path from the path's measurement-noise stream.
    """
    clean, noisy = [], []
    for batch in iter_flux_batches(problem, paths, sigma, master_seed, workers, batch_size):
        clean.append(batch.clean)
        noisy.append(batch.noisy)
    return FluxEnsemble(
        requested_points=problem.points,
        observation_points=problem.snapped_points(),
        clean=np.concatenate(clean),
        noisy=np.concatenate(noisy),
        noise_level=float(sigma),
        h_t=problem.grid.h_t,
        master_seed=int(master_seed),
    )
