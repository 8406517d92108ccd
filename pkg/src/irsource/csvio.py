"""Versioned CSV artifacts.

Each file opens with ``# irsource <kind> v1`` followed by ``# key=value``
metadata lines, then a plain CSV table. Floats are written with 17
significant digits so files round-trip exactly.
"""

from __future__ import annotations

import csv

import numpy as np

from .exceptions import InvalidArgumentError
from .spectral import BoundaryPoint, KernelTable
from .synthesis import VarianceSeries

SCHEMA_VERSION = 1


def fmt(x):
    return f"{float(x):.17g}"


def _write(path, kind, meta, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# irsource {kind} v{SCHEMA_VERSION}\n")
        for key, value in meta.items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read(path, kind):
    meta = {}
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"# irsource {kind} v{SCHEMA_VERSION}":
            raise InvalidArgumentError(f"{path} is not an irsource {kind} v{SCHEMA_VERSION} file")
        lines = []
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
            else:
                lines.append(line)
    rows = list(csv.DictReader(lines))
    return meta, rows


def _points_meta(series_points, observed):
    meta = {}
    for i, (z, oz) in enumerate(zip(series_points, observed)):
        meta[f"point_{i}"] = z.label()
        meta[f"observed_{i}"] = oz.label()
    return meta


def write_variance_csv(path, series, extra=None):
    first = series[0]
    meta = {
        "path_count": first.path_count,
        "noise_level": fmt(first.noise_level),
        "master_seed": first.master_seed,
        "h_t": fmt(first.h_t),
        "centered": str(first.centered).lower(),
    }
    meta.update(_points_meta([s.z for s in series], [s.observed_z for s in series]))
    for i, s in enumerate(series):
        meta[f"standard_error_{i}_at_T"] = fmt(s.standard_error[-1])
    meta.update(extra or {})
    rows = [
        (i, j + 1, fmt(t), fmt(v))
        for i, s in enumerate(series)
        for j, (t, v) in enumerate(zip(s.times, s.values))
    ]
    _write(path, "variance", meta, ("point_id", "j", "t_j", "V_j"), rows)


def read_variance_csv(path):
    meta, rows = _read(path, "variance")
    h_t = float(meta["h_t"])
    out = []
    ids = sorted({int(r["point_id"]) for r in rows})
    for i in ids:
        vals = np.array([float(r["V_j"]) for r in rows if int(r["point_id"]) == i])
        out.append(
            VarianceSeries(
                z=BoundaryPoint.parse(meta[f"point_{i}"]),
                observed_z=BoundaryPoint.parse(meta[f"observed_{i}"]),
                values=vals,
                path_count=int(meta["path_count"]),
                noise_level=float(meta["noise_level"]),
                h_t=h_t,
                master_seed=int(meta["master_seed"]) if meta.get("master_seed", "None") != "None" else None,
                centered=meta.get("centered") == "true",
            )
        )
    return out


def write_kernel_csv(path, tables, extra=None):
    meta = {"m": tables[0].m, "h_t": fmt(tables[0].h_t)}
    for i, tab in enumerate(tables):
        meta[f"point_{i}"] = tab.z.label()
        meta[f"truncation_{i}"] = tab.truncation
    meta.update(extra or {})
    rows = [
        (i, j + 1, fmt(t), fmt(v))
        for i, tab in enumerate(tables)
        for j, (t, v) in enumerate(zip(tab.times, tab.values))
    ]
    _write(path, "kernel", meta, ("point_id", "j", "t_j", "G"), rows)


def read_kernel_csv(path):
    meta, rows = _read(path, "kernel")
    m = int(meta["m"])
    out = []
    for i in sorted({int(r["point_id"]) for r in rows}):
        sel = [r for r in rows if int(r["point_id"]) == i]
        out.append(
            KernelTable(
                z=BoundaryPoint.parse(meta[f"point_{i}"]),
                m=m,
                times=np.array([float(r["t_j"]) for r in sel]),
                values=np.array([float(r["G"]) for r in sel]),
                truncation=int(meta[f"truncation_{i}"]),
            )
        )
    return out


def write_reconstruction_csv(path, rec, truth=None, extra=None):
    meta = {
        "iterations": rec.iterations,
        "sweeps": rec.sweeps,
        "converged": str(rec.converged).lower(),
        "clamped_count": rec.clamped_count,
        "final_residual": fmt(rec.final_residual),
    }
    meta.update(extra or {})
    header = ["j", "t_j", "f_squared", "strength"]
    truth_abs = None
    if truth is not None:
        header.append("truth_abs")
        truth_abs = np.abs(truth(rec.times))
    rows = []
    for k, (t, fs, s) in enumerate(zip(rec.times, rec.f_squared, rec.strength)):
        row = [k, fmt(t), fmt(fs), fmt(s)]
        if truth_abs is not None:
            row.append(fmt(truth_abs[k]))
        rows.append(row)
    _write(path, "reconstruction", meta, header, rows)


class FluxWriter:
    """Streams per-path flux rows ``(path, point_id, j, t_j, flux, flux_noisy)``."""

    def __init__(self, path, meta=None):
        self.fh = open(path, "w", newline="")
        self.fh.write(f"# irsource flux v{SCHEMA_VERSION}\n")
        for key, value in (meta or {}).items():
            self.fh.write(f"# {key}={value}\n")
        self.writer = csv.writer(self.fh, lineterminator="\n")
        self.writer.writerow(("path", "point_id", "j", "t_j", "flux", "flux_noisy"))

    def write_batch(self, batch, h_t):
        n_t = batch.clean.shape[2]
        times = [fmt((j + 1) * h_t) for j in range(n_t)]
        for b in range(batch.clean.shape[0]):
            for i in range(batch.clean.shape[1]):
                clean, noisy = batch.clean[b, i], batch.noisy[b, i]
                self.writer.writerows(
                    (batch.start + b, i, j + 1, times[j], fmt(clean[j]), fmt(noisy[j]))
                    for j in range(n_t)
                )

    def close(self):
        self.fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
