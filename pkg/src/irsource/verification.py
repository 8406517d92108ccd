"""Self-checks exposed through ``irsource verify``.

Each check returns a plain dict (name, passed, measured, tolerance, detail)
so reports serialize straight to JSON.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .config import preset
from .fdm import ForwardProblem, make_scheme, synthesize_flux_ensemble
from .grid import GridSpec
from .noise import IncrementSeries, increment_matrix
from .oracle import analytic_variance, spectral_heat_path
from .profiles import SpatialProfile, TemporalProfile
from .spectral import (
    BoundaryPoint,
    SpatialDomain,
    eigen_modes,
    kernel_table,
    kernel_value,
    simpson_weights,
)
from .synthesis import variance_series

SUITES = ("kernel", "isometry", "variance", "oracle")


def _check(name, measured, tolerance, passed, detail=""):
    return {
        "name": name,
        "passed": bool(passed),
        "measured": float(measured),
        "tolerance": float(tolerance),
        "detail": detail,
    }


def poisson_flux_1d(g, n=4000):
    """Brute-force ``v'(0)`` for ``-v'' = g``, ``v(0) = v(1) = 0`` (second-order FD)."""
    h = 1.0 / n
    x = np.linspace(0.0, 1.0, n + 1)
    m = n - 1
    ab = np.zeros((3, m))
    ab[0, 1:] = -1.0
    ab[1, :] = 2.0
    ab[2, :-1] = -1.0
    v = np.zeros(n + 1)
    v[1:-1] = solve_banded((1, 1), ab, h**2 * g(x[1:-1]))
    return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)


def kernel_suite():
    g = SpatialProfile.quadratic()
    z = BoundaryPoint(0.0)
    checks = []
    value = kernel_value(z, g, 1, 5.0, 200)
    checks.append(
        _check("heat steady state G_0(5) = 1/12", abs(value - 1 / 12), 1e-6, abs(value - 1 / 12) <= 1e-6)
    )
    limit = kernel_value(z, g, 1, 50.0, 2000)
    brute = poisson_flux_1d(g)
    rel = abs(limit - brute) / abs(brute)
    checks.append(
        _check("steady state vs Poisson solve", rel, 1e-4, rel <= 1e-4, f"series {limit:.10g}, FD {brute:.10g}")
    )
    modes = eigen_modes(SpatialDomain(1), 20)
    n = 4096
    x = np.linspace(0.0, 1.0, n + 1)
    w = simpson_weights(n)
    phi = np.array([mode(x) for mode in modes])
    gram = (phi * w) @ phi.T
    dev = np.max(np.abs(gram - np.eye(20)))
    checks.append(_check("orthonormality of first 20 modes", dev, 1e-6, dev <= 1e-6))
    cfg = preset("ex1")
    table = kernel_table(z, g, 1, cfg.grid())
    drop = float(np.min(np.diff(table.values)))
    checks.append(
        _check("heat kernel table nondecreasing", -min(drop, 0.0), 0.0, drop >= 0.0, f"truncation {table.truncation}")
    )
    return checks


def isometry_suite(paths=100_000, seed=0):
    grid = GridSpec.from_steps(2**-6, 2**-7)
    f = TemporalProfile("sine")(np.arange(grid.n_t) * grid.h_t)
    dW = increment_matrix(seed, range(paths), grid.n_t, grid.h_t)
    integrals = f @ dW
    sample = np.var(integrals, ddof=1)
    exact = grid.h_t * np.sum(f**2)
    se = exact * np.sqrt(2.0 / (paths - 1))
    return [
        _check(
            "Var(sum f dW) = h_t sum f^2",
            abs(sample - exact) / se,
            4.0,
            abs(sample - exact) <= 4.0 * se,
            f"sample {sample:.6g}, exact {exact:.6g}, measured in standard errors",
        )
    ]


def variance_suite(paths=5000, seed=0):
    cfg = preset("ex1").replace(paths=paths, noise=0.0, seed=seed)
    problem = cfg.problem()
    ens = synthesize_flux_ensemble(problem, paths, 0.0, seed, batch_size=cfg.batch_size)
    z = problem.points[0]
    series = variance_series(ens, z)
    table = kernel_table(z, problem.g, 1, problem.grid)
    checks = []
    for t in (0.5, 1.0):
        j = int(round(t / problem.grid.h_t))
        exact = analytic_variance(z, problem.g, problem.f, 1, t, table)
        rel = abs(series.integral_variance[j - 1] - exact) / exact
        checks.append(
            _check(f"h_t V_j vs convolution integral at t={t}", rel, 0.10, rel <= 0.10, f"P={paths}")
        )
    return checks


def fdm_spectral_discrepancy(paths=100, levels=((2**-6, 2**-7), (2**-7, 2**-8)), seed=0, modes=64):
    """Relative mean-square L2 gap between FDM and spectral heat solutions at T=1.

    Increments are drawn on the finest time grid and summed in pairs for
    coarser ones, so every level sees the same Brownian paths.
    """
    f = TemporalProfile("sine")
    g = SpatialProfile.quadratic()
    basis = eigen_modes(SpatialDomain(1), modes)
    finest = min(h_t for _, h_t in levels)
    n_fine = int(round(1.0 / finest))
    fine = increment_matrix(seed, range(paths), n_fine, finest)
    out = []
    for h_x, h_t in levels:
        grid = GridSpec.from_steps(h_x, h_t)
        dW = fine.reshape(grid.n_t, -1, paths).sum(axis=1)
        for u in make_scheme("heat", grid, f, g).march(dW):
            pass
        spectral = spectral_heat_path(basis, f, g, IncrementSeries(h_t, dW))[-1]
        reference = spectral.evaluate(grid.x_nodes()[1:-1])
        gap = np.sum((u - reference) ** 2, axis=0) * h_x
        norm = np.sum(reference**2, axis=0) * h_x
        out.append(float(np.mean(gap) / np.mean(norm)))
    return out


def oracle_suite(paths=100, seed=0):
    coarse, fine = fdm_spectral_discrepancy(paths, seed=seed)
    return [
        _check("FDM vs spectral L2 discrepancy", coarse, 0.10, coarse <= 0.10, f"{paths} shared paths"),
        _check(
            "discrepancy shrinks when steps halve",
            fine / coarse,
            1.0,
            fine < coarse,
            f"{coarse:.3e} -> {fine:.3e}",
        ),
    ]


def verify(suite="all"):
    """Run one suite (or all) and return ``{"passed": bool, "suites": {...}}``."""
    runners = {
        "kernel": kernel_suite,
        "isometry": isometry_suite,
        "variance": variance_suite,
        "oracle": oracle_suite,
    }
    names = SUITES if suite == "all" else (suite,)
    report = {"suites": {}}
    for name in names:
        if name not in runners:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
        report["suites"][name] = runners[name]()
    report["passed"] = all(c["passed"] for checks in report["suites"].values() for c in checks)
    return report
