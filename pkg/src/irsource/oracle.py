"""Spectral (mild-solution) simulator and the exact variance of the integrated flux.

This path never touches the finite-difference code. Each retained mode is
advanced exactly over a step with the forcing taken at the left end point:

    heat:  a <- exp(-lambda h) (a + g_n f(t_k) dW_k)
    wave:  v <- v + g_n f(t_k) dW_k, then rotate (a, v) by sqrt(lambda) h
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .exceptions import InvalidArgumentError
from .noise import IncrementSeries
from .spectral import (
    KernelTable,
    _normal_derivatives,
    _source_coefficients,
    kernel_table,
    kernel_value,
)

DEFAULT_MODES_1D = 64
DEFAULT_MODES_2D = 256


@dataclass(frozen=True)
class SpectralState:
    """Mode amplitudes (and velocities for the wave equation) at one time level."""

    coefficients: np.ndarray = field(repr=False)
    modes: tuple = field(repr=False)
    time_index: int
    velocities: np.ndarray | None = field(default=None, repr=False)

    def evaluate(self, x, y=None):
        """Sum the expansion at points ``x`` (and ``y``); batch axes trail."""
        basis = np.stack([np.asarray(mode(x, y)) for mode in self.modes], axis=-1)
        return np.tensordot(basis, self.coefficients, axes=([-1], [0]))

    def normal_flux(self, z):
        dn = _normal_derivatives(np.array([m.index for m in self.modes]), z)
        return np.tensordot(dn, self.coefficients, axes=([0], [0]))


def _unpack(modes, g, dW):
    if isinstance(dW, IncrementSeries):
        h_t, values = dW.h_t, dW.values
    else:
        raise InvalidArgumentError("dW must be an IncrementSeries (it carries h_t)")
    values = np.asarray(values, dtype=float)
    idx = np.array([m.index for m in modes])
    lams = np.array([m.eigenvalue for m in modes])
    g_n = _source_coefficients(g, idx)
    return h_t, values, lams, g_n


def _impulse(g_n, f_k, dw):
    if np.ndim(dw) == 0:
        return g_n * (f_k * dw)
    return np.outer(g_n, f_k * dw)


def _column(v, a):
    return v.reshape(v.shape + (1,) * (a.ndim - 1))


def spectral_heat_path(modes, f, g, dW):
    """Mode amplitudes at ``t_0 .. t_{N_t}`` for the stochastic heat equation.

    ``dW.values`` may be a single path or ``(N_t, B)`` stacked paths.
    """
    modes = tuple(modes)
    h_t, values, lams, g_n = _unpack(modes, g, dW)
    f_k = np.asarray(f(np.arange(values.shape[0]) * h_t), dtype=float)
    decay = np.exp(-lams * h_t)
    a = np.zeros((len(modes),) + values.shape[1:])
    states = [SpectralState(a, modes, 0)]
    for k in range(values.shape[0]):
        a = _column(decay, a) * (a + _impulse(g_n, f_k[k], values[k]))
        states.append(SpectralState(a, modes, k + 1))
    return states


def spectral_wave_path(modes, f, g, dW):
    """Positions and velocities at ``t_0 .. t_{N_t}`` for the stochastic wave equation."""
    modes = tuple(modes)
    h_t, values, lams, g_n = _unpack(modes, g, dW)
    f_k = np.asarray(f(np.arange(values.shape[0]) * h_t), dtype=float)
    omega = np.sqrt(lams)
    c, s = np.cos(omega * h_t), np.sin(omega * h_t)
    a = np.zeros((len(modes),) + values.shape[1:])
    v = np.zeros_like(a)
    states = [SpectralState(a, modes, 0, v)]
    for k in range(values.shape[0]):
        v = v + _impulse(g_n, f_k[k], values[k])
        a, v = (
            _column(c, a) * a + _column(s / omega, a) * v,
            -_column(omega * s, a) * a + _column(c, a) * v,
        )
        states.append(SpectralState(a, modes, k + 1, v))
    return states


def analytic_variance(z, g, f, m, t, kernel=None, T=None, refine=4):
    """``int_0^t f(tau)^2 G_z(t - tau)^2 dtau`` by composite Simpson quadrature.

    ``kernel`` is a :class:`KernelTable` (its truncation and step set the
    resolution and, unless given, ``T``) or an explicit truncation count.
    The quadrature uses at least ``refine`` points per kernel-table step.
    """
    if isinstance(kernel, KernelTable):
        truncation, h_t = kernel.truncation, kernel.h_t
        T = float(kernel.times[-1]) if T is None else T
    else:
        truncation, h_t = int(kernel or 256), None
    if T is None:
        raise InvalidArgumentError("T is required when no kernel table is given")
    if t < 0 or t > T * (1 + 1e-12):
        raise InvalidArgumentError(f"t={t} outside [0, {T}]")
    if t == 0:
        return 0.0
    step = (h_t or T / 128) / refine
    n = max(64, int(np.ceil(t / step)))
    n += n % 2
    tau = np.linspace(0.0, t, n + 1)
    integrand = np.asarray(f(tau), dtype=float) ** 2 * kernel_value(z, g, m, t - tau, truncation) ** 2
    return float(simpson(integrand, x=tau))


def variance_oracle(z, g, f, m, grid, tolerance=1e-8):
    """``analytic_variance`` at every ``t_j`` of ``grid`` using one adaptive kernel table."""
    table = kernel_table(z, g, m, grid, tolerance)
    return np.array([analytic_variance(z, g, f, m, t, table) for t in table.times])
