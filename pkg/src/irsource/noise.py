"""Reproducible per-path random streams.

Every stream is a Philox counter-based generator seeded from
``SeedSequence(master_seed, spawn_key=(path_index, tag))``. A path's draws
depend only on that triple, never on execution order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError

BROWNIAN = "brownian"
MEASUREMENT_NOISE = "measurement-noise"
_TAG_IDS = {BROWNIAN: 0, MEASUREMENT_NOISE: 1}


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    path_index: int
    stream_tag: str = BROWNIAN

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise InvalidArgumentError("master_seed must be an unsigned 64-bit integer")
        if int(self.path_index) < 0:
            raise InvalidArgumentError("path_index must be nonnegative")
        if self.stream_tag not in _TAG_IDS:
            raise InvalidArgumentError(f"unknown stream tag {self.stream_tag!r}")

    def generator(self):
        seq = np.random.SeedSequence(
            int(self.master_seed), spawn_key=(int(self.path_index), _TAG_IDS[self.stream_tag])
        )
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class IncrementSeries:
    """Brownian increments ``dW(t_j) = W(t_{j+1}) - W(t_j)``, ``j = 0 .. N_t-1``."""

    h_t: float
    values: np.ndarray

    def __len__(self):
        return len(self.values)


def brownian_increments(seed, n_t, h_t):
    if n_t < 1 or not h_t > 0:
        raise InvalidArgumentError("need n_t >= 1 and h_t > 0")
    rng = SeedSpec(seed.master_seed, seed.path_index, BROWNIAN).generator()
    return IncrementSeries(float(h_t), rng.normal(0.0, np.sqrt(h_t), int(n_t)))


def uniform_noise(seed, count):
    """``count`` i.i.d. draws from U[-1, 1] on the measurement-noise stream."""
    if count < 0:
        raise InvalidArgumentError("count must be nonnegative")
    rng = SeedSpec(seed.master_seed, seed.path_index, MEASUREMENT_NOISE).generator()
    return rng.uniform(-1.0, 1.0, int(count))


def increment_matrix(master_seed, paths, n_t, h_t):
    """Increments for several paths stacked column-wise, shape ``(n_t, len(paths))``."""
    out = np.empty((int(n_t), len(paths)))
    for col, p in enumerate(paths):
        out[:, col] = brownian_increments(SeedSpec(master_seed, p), n_t, h_t).values
    return out


def noise_matrix(master_seed, paths, shape):
    """Measurement noise per path, shape ``(len(paths), *shape)``."""
    count = int(np.prod(shape))
    out = np.empty((len(paths), count))
    for row, p in enumerate(paths):
        out[row] = uniform_noise(SeedSpec(master_seed, p, MEASUREMENT_NOISE), count)
    return out.reshape((len(paths),) + tuple(shape))
