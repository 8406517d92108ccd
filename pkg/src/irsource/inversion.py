"""Discrete Volterra system and regularized block Kaczmarz inversion.

At each observation point ``z`` the variance data satisfy

    V_j = sum_{k=0}^{j-1} f_k^2 G_z^2(t_{j-k}),   j = 1 .. N_t,

a lower-triangular Toeplitz system ``G_z f = V_z`` with first column
``G_z^2(t_1) .. G_z^2(t_{N_t})``. Starting from zero, blocks are visited in
cyclic order with the update

    f <- f + (G^T G + alpha I)^{-1} G^T (V - G f)

until ``sum_z ||G_z f - V_z|| < epsilon``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .exceptions import InvalidArgumentError, NumericalFailureError

INNER_RTOL = 1e-12
DEFAULT_WINDOW = (0.05, 0.95)


@dataclass(frozen=True)
class VolterraBlock:
    """One observation point's Toeplitz block, stored by its first column."""

    z: object
    column: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)

    @property
    def size(self):
        return self.column.size

    def matvec(self, f):
        return np.convolve(self.column, f)[: self.size]

    def rmatvec(self, r):
        # G^T r: correlation of r with the column
        return np.convolve(r[::-1], self.column)[: self.size][::-1]

    def dense(self):
        return la.toeplitz(self.column, np.zeros(self.size))

    def residual(self, f):
        return float(np.linalg.norm(self.matvec(f) - self.rhs))


@dataclass(frozen=True)
class VolterraSystem:
    blocks: tuple
    h_t: float

    @property
    def size(self):
        return self.blocks[0].size

    def combined_residual(self, f):
        return sum(b.residual(f) for b in self.blocks)


def build_volterra_system(kernels, variances):
    """Pair each kernel table with the variance series at the same point."""
    kernels, variances = list(kernels), list(variances)
    if not kernels or len(kernels) != len(variances):
        raise InvalidArgumentError("need one variance series per kernel table (at least one)")
    h_t = kernels[0].h_t
    n = kernels[0].values.size
    blocks = []
    for ker, var in zip(kernels, variances):
        if ker.values.size != n or var.values.size != n:
            raise InvalidArgumentError("kernel and variance series lengths disagree")
        if not (math.isclose(ker.h_t, h_t, rel_tol=1e-12) and math.isclose(var.h_t, h_t, rel_tol=1e-12)):
            raise InvalidArgumentError("kernel and variance time steps disagree")
        if ker.z not in (var.z, getattr(var, "observed_z", None)):
            raise InvalidArgumentError(f"kernel point {ker.z} does not match variance point {var.z}")
        blocks.append(VolterraBlock(ker.z, np.asarray(ker.values, dtype=float) ** 2, np.asarray(var.values, dtype=float)))
    return VolterraSystem(tuple(blocks), h_t)


class _RegularizedSolve:
    """Cholesky factor of ``G^T G + alpha I`` kept for reuse across sweeps."""

    def __init__(self, matrix, alpha):
        if not alpha > 0:
            raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
        self.matrix = np.asarray(matrix, dtype=float)
        self.normal = self.matrix.T @ self.matrix + alpha * np.eye(self.matrix.shape[1])
        self.norm = np.linalg.norm(self.normal, 2)
        try:
            self.chol = la.cho_factor(self.normal, lower=True)
        except la.LinAlgError as exc:
            raise NumericalFailureError(
                f"regularized normal matrix is not positive definite: {exc}",
                float(np.linalg.cond(self.normal)),
            ) from exc

    def __call__(self, rhs):
        x = la.cho_solve(self.chol, rhs)
        if not np.any(rhs):
            return x
        for _ in range(3):
            r = rhs - self.normal @ x
            # normwise backward error of the computed solution
            scale = self.norm * np.linalg.norm(x) + np.linalg.norm(rhs)
            if np.linalg.norm(r) <= INNER_RTOL * scale:
                return x
            x = x + la.cho_solve(self.chol, r)
        raise NumericalFailureError(
            "inner solve stalled above the 1e-12 relative residual target",
            float(np.linalg.cond(self.normal)),
        )


def _block_arrays(block):
    if isinstance(block, VolterraBlock):
        return block.dense(), block.rhs
    matrix, rhs = block
    return np.atleast_2d(np.asarray(matrix, dtype=float)), np.atleast_1d(np.asarray(rhs, dtype=float))


def kaczmarz_step(state, block, alpha):
    """One regularized projection of ``state`` onto ``block = (G, V)``."""
    matrix, rhs = _block_arrays(block)
    state = np.atleast_1d(np.asarray(state, dtype=float))
    if matrix.shape[0] != rhs.size or matrix.shape[1] != state.size:
        raise InvalidArgumentError(f"block {matrix.shape} incompatible with state {state.size} / data {rhs.size}")
    solve = _RegularizedSolve(matrix, alpha)
    return state + solve(matrix.T @ (rhs - matrix @ state))


@dataclass(frozen=True)
class KaczmarzConfig:
    alpha: float
    epsilon: float
    max_iter: int = 500
    block_order: tuple | None = None

    def __post_init__(self):
        if not self.alpha > 0 or not self.epsilon > 0 or self.max_iter < 1:
            raise InvalidArgumentError("need alpha > 0, epsilon > 0 and max_iter >= 1")


@dataclass
class Reconstruction:
    """Recovered ``f^2`` at ``t_0 .. t_{N_t-1}`` and the derived strength ``|f|``."""

    times: np.ndarray = field(repr=False)
    f_squared: np.ndarray = field(repr=False)
    strength: np.ndarray = field(repr=False)
    iterations: int
    sweeps: int
    residual_history: list = field(repr=False)
    clamped_count: int
    converged: bool

    @property
    def final_residual(self):
        return self.residual_history[-1]


def kaczmarz_invert(system, config):
    """Run the block Kaczmarz sweep from ``f = 0``.

    ``iterations`` counts single block updates; ``max_iter`` bounds full
    sweeps. Hitting the bound is not an error: the iterate with the smallest
    combined residual is returned with ``converged=False``.
    """
    if not system.blocks:
        raise InvalidArgumentError("system has no blocks")
    order = config.block_order
    if order is None:
        order = tuple(range(len(system.blocks)))
    if sorted(set(order)) != list(range(len(system.blocks))):
        raise InvalidArgumentError(f"block order {order} must visit every block")
    solvers = {i: _RegularizedSolve(system.blocks[i].dense(), config.alpha) for i in set(order)}

    f = np.zeros(system.size)
    residual = system.combined_residual(f)
    history = [residual]
    best, best_residual = f, residual
    iterations = sweeps = 0
    converged = residual < config.epsilon
    while not converged and sweeps < config.max_iter:
        sweeps += 1
        for i in order:
            block = system.blocks[i]
            f = f + solvers[i](block.rmatvec(block.rhs - block.matvec(f)))
            iterations += 1
            residual = system.combined_residual(f)
            if not np.isfinite(residual):
                raise NumericalFailureError("Kaczmarz iterate diverged")
            history.append(residual)
            if residual < best_residual:
                best, best_residual = f, residual
            if residual < config.epsilon:
                converged = True
                break
    if converged:
        best = f
    clamped = int(np.count_nonzero(best < 0))
    strength = np.sqrt(np.maximum(best, 0.0))
    times = np.arange(system.size) * system.h_t
    return Reconstruction(times, best, strength, iterations, sweeps, history, clamped, converged)


def reconstruction_error(strength, truth, window=DEFAULT_WINDOW, times=None):
    """Relative l2 distance between ``strength`` and ``|truth(t_k)|`` on ``window``.

    ``strength`` may be a :class:`Reconstruction` (its own times are used)
    or an array sampled at ``times``.
    """
    if isinstance(strength, Reconstruction):
        times = strength.times
        strength = strength.strength
    if times is None:
        raise InvalidArgumentError("times are required for a bare strength array")
    strength = np.asarray(strength, dtype=float)
    times = np.asarray(times, dtype=float)
    a, b = window
    mask = (times >= a - 1e-12) & (times <= b + 1e-12)
    if not np.any(mask):
        raise InvalidArgumentError(f"window [{a}, {b}] contains no grid points")
    target = np.abs(np.asarray(truth(times[mask]), dtype=float))
    norm = np.linalg.norm(target)
    if norm == 0.0:
        raise InvalidArgumentError("truth vanishes on the window; relative error undefined")
    return float(np.linalg.norm(strength[mask] - target) / norm)
