"""End-to-end orchestration: synthesize -> variance -> kernel -> invert -> score."""

from __future__ import annotations

import datetime
import json
import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass, field

from .csvio import (
    FluxWriter,
    fmt,
    read_kernel_csv,
    read_variance_csv,
    write_kernel_csv,
    write_reconstruction_csv,
    write_variance_csv,
)
from .exceptions import StageError
from .fdm import iter_flux_batches
from .inversion import build_volterra_system, kaczmarz_invert, reconstruction_error
from .spectral import kernel_table
from .synthesis import variance_from_batches

log = logging.getLogger(__name__)

VARIANCE_CSV = "variance.csv"
KERNEL_CSV = "kernel.csv"
RECONSTRUCTION_CSV = "reconstruction.csv"
FLUX_CSV = "flux.csv"
SUMMARY_JSON = "summary.json"


@dataclass
class RunResult:
    out_dir: str
    files: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    variances: list = field(default_factory=list, repr=False)
    kernels: list = field(default_factory=list, repr=False)
    reconstruction: object = field(default=None, repr=False)


@contextmanager
def _stage(name, config, written):
    log.info("stage %s", name)
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise StageError(name, exc, config.to_dict()) from exc


def _prepare(out_dir, config):
    out_dir = out_dir or config.output
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def synthesize(config, out_dir=None, dump_flux=False, written=None):
    """Simulate the ensemble and write the variance CSV (and optionally raw flux)."""
    out_dir = _prepare(out_dir, config)
    written = [] if written is None else written
    problem = config.problem()
    grid = problem.grid
    observed = problem.snapped_points()
    with _stage("synthesize", config, written):
        batches = iter_flux_batches(
            problem, config.paths, config.noise, config.seed, config.workers, config.batch_size
        )
        if dump_flux:
            flux_path = os.path.join(out_dir, FLUX_CSV)
            written.append(flux_path)
            writer = FluxWriter(flux_path, {"noise_level": fmt(config.noise), "master_seed": config.seed})
            batches = _tee(batches, writer, grid.h_t)
        variances = variance_from_batches(
            batches, problem.points, observed, grid.n_t, grid.h_t, config.noise, config.seed, config.centered
        )
    with _stage("variance", config, written):
        path = os.path.join(out_dir, VARIANCE_CSV)
        written.append(path)
        write_variance_csv(path, variances, {"batch_size": config.batch_size})
    return variances, path


def _tee(batches, writer, h_t):
    with writer:
        for batch in batches:
            writer.write_batch(batch, h_t)
            yield batch


def simulate(config, out_dir=None):
    """Forward solves only: write per-path flux rows."""
    out_dir = _prepare(out_dir, config)
    problem = config.problem()
    path = os.path.join(out_dir, FLUX_CSV)
    with _stage("simulate", config, [path]):
        meta = {"noise_level": fmt(config.noise), "master_seed": config.seed}
        for i, (z, oz) in enumerate(zip(problem.points, problem.snapped_points())):
            meta[f"point_{i}"] = z.label()
            meta[f"observed_{i}"] = oz.label()
        with FluxWriter(path, meta) as writer:
            for batch in iter_flux_batches(
                problem, config.paths, config.noise, config.seed, config.workers, config.batch_size
            ):
                writer.write_batch(batch, problem.grid.h_t)
    return path


def kernels(config, out_dir=None, written=None):
    """Tabulate the recovery kernel at every (snapped) observation point."""
    out_dir = _prepare(out_dir, config)
    written = [] if written is None else written
    problem = config.problem()
    with _stage("kernel", config, written):
        tables = [
            kernel_table(z, problem.g, config.m, problem.grid, config.kernel_tolerance, config.max_modes)
            for z in problem.snapped_points()
        ]
        path = os.path.join(out_dir, KERNEL_CSV)
        written.append(path)
        write_kernel_csv(path, tables)
    return tables, path


def invert(config, variances, tables, out_dir=None, written=None):
    """Solve the Volterra system and write the reconstruction plus summary."""
    out_dir = _prepare(out_dir, config)
    written = [] if written is None else written
    with _stage("volterra", config, written):
        system = build_volterra_system(tables, variances)
    with _stage("invert", config, written):
        rec = kaczmarz_invert(system, config.kaczmarz())
    truth = config.temporal_profile()
    with _stage("error", config, written):
        error = reconstruction_error(rec, truth, config.window)
        path = os.path.join(out_dir, RECONSTRUCTION_CSV)
        written.append(path)
        write_reconstruction_csv(path, rec, truth)
        summary = {
            "schema": "irsource-summary/1",
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "config": config.to_dict(),
            "iterations": rec.iterations,
            "sweeps": rec.sweeps,
            "converged": rec.converged,
            "final_residual": rec.final_residual,
            "clamped_count": rec.clamped_count,
            "error": {"window": list(config.window), "relative_l2": error},
            "observation_points": [
                {"requested": v.z.label(), "observed": v.observed_z.label()} for v in variances
            ],
            "kernel_truncation": [t.truncation for t in tables],
            "variance_standard_error_at_T": [float(v.standard_error[-1]) for v in variances],
            "reproducibility": {"seed": config.seed, "batch_size": config.batch_size, "workers": config.workers},
        }
        spath = os.path.join(out_dir, SUMMARY_JSON)
        written.append(spath)
        with open(spath, "w") as fh:
            json.dump(summary, fh, indent=2)
    return rec, summary, path, spath


def invert_from_files(config, out_dir=None, variance_path=None, kernel_path=None):
    out_dir = _prepare(out_dir, config)
    variance_path = variance_path or os.path.join(out_dir, VARIANCE_CSV)
    kernel_path = kernel_path or os.path.join(out_dir, KERNEL_CSV)
    with _stage("load", config, []):
        variances = read_variance_csv(variance_path)
        tables = read_kernel_csv(kernel_path)
    return invert(config, variances, tables, out_dir)


def run_experiment(config, out_dir=None, dump_flux=False):
    """Full pipeline; every artifact is a pure function of ``config``.

    On failure the files written by this call are removed and a
    :class:`StageError` naming the stage is raised.
    """
    out_dir = _prepare(out_dir, config)
    written = []
    variances, vpath = synthesize(config, out_dir, dump_flux, written)
    tables, kpath = kernels(config, out_dir, written)
    rec, summary, rpath, spath = invert(config, variances, tables, out_dir, written)
    files = {"variance": vpath, "kernel": kpath, "reconstruction": rpath, "summary": spath}
    if dump_flux:
        files["flux"] = os.path.join(out_dir, FLUX_CSV)
    return RunResult(out_dir, files, summary, variances, tables, rec)
