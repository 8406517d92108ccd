"""Experiment configuration: sectioned key/value files and the shipped presets."""

from __future__ import annotations

import configparser
import dataclasses
import io
from dataclasses import dataclass, field
from importlib import resources

from .exceptions import InvalidArgumentError
from .fdm import ForwardProblem
from .grid import GridSpec
from .inversion import KaczmarzConfig
from .profiles import SpatialProfile, TemporalProfile
from .spectral import BoundaryPoint

PRESETS = ("ex1", "ex2", "ex3")

# (section, key, field name, type)
_LAYOUT = [
    ("experiment", "name", "name", str),
    ("experiment", "equation", "equation", str),
    ("experiment", "dim", "dim", int),
    ("grid", "h_x", "h_x", float),
    ("grid", "h_y", "h_y", float),
    ("grid", "h_t", "h_t", float),
    ("grid", "T", "T", float),
    ("source", "f", "f", str),
    ("source", "f_scale", "f_scale", float),
    ("source", "g", "g", str),
    ("source", "g_scale", "g_scale", float),
    ("observation", "points", "points", "points"),
    ("synthesis", "paths", "paths", int),
    ("synthesis", "noise", "noise", float),
    ("synthesis", "seed", "seed", int),
    ("synthesis", "workers", "workers", int),
    ("synthesis", "batch_size", "batch_size", int),
    ("synthesis", "centered", "centered", bool),
    ("kernel", "tolerance", "kernel_tolerance", float),
    ("kernel", "max_modes", "max_modes", int),
    ("inversion", "alpha", "alpha", float),
    ("inversion", "epsilon", "epsilon", float),
    ("inversion", "max_iter", "max_iter", int),
    ("inversion", "window", "window", "window"),
    ("output", "directory", "output", str),
]


@dataclass(frozen=True)
class ExperimentConfig:
    equation: str = "heat"
    dim: int = 1
    h_x: float = 2.0**-6
    h_t: float = 2.0**-7
    T: float = 1.0
    h_y: float | None = None
    f: str = "sine"
    f_scale: float = 1.0
    g: str = "quadratic"
    g_scale: float = 1.0
    points: tuple = field(default=("0", "1"))
    paths: int = 5000
    noise: float = 0.0
    alpha: float = 1e-2
    epsilon: float = 2e-3
    max_iter: int = 500
    seed: int = 0
    workers: int = 1
    batch_size: int = 250
    centered: bool = False
    kernel_tolerance: float = 1e-8
    max_modes: int = 100_000
    window: tuple = (0.05, 0.95)
    output: str = "out"
    name: str = "custom"

    def __post_init__(self):
        if self.equation not in ("heat", "wave"):
            raise InvalidArgumentError(f"equation must be heat or wave, got {self.equation!r}")
        if self.dim not in (1, 2):
            raise InvalidArgumentError(f"dim must be 1 or 2, got {self.dim}")
        if self.equation == "wave" and self.dim == 2:
            raise InvalidArgumentError("2D wave experiments are out of scope")
        for name in ("h_x", "h_t", "T", "alpha", "epsilon", "kernel_tolerance"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        for name in ("paths", "max_iter", "workers", "batch_size", "max_modes"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1")
        if self.noise < 0:
            raise InvalidArgumentError("noise must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        a, b = self.window
        if not 0 <= a < b <= self.T:
            raise InvalidArgumentError(f"window {self.window} must lie inside [0, T]")
        object.__setattr__(self, "points", tuple(_point_text(p) for p in self.points))
        object.__setattr__(self, "window", (float(a), float(b)))
        # validate eagerly so bad configs fail before any simulation
        self.boundary_points()
        self.grid()
        self.temporal_profile()
        self.spatial_profile()

    def grid(self):
        return GridSpec.from_steps(self.h_x, self.h_t, self.T, self.dim, self.h_y)

    def boundary_points(self):
        pts = tuple(BoundaryPoint.parse(p) for p in self.points)
        if not pts:
            raise InvalidArgumentError("at least one observation point is required")
        if any(p.dim != self.dim for p in pts):
            raise InvalidArgumentError("observation points must match the domain dimension")
        return pts

    def temporal_profile(self):
        return TemporalProfile(self.f, self.f_scale)

    def spatial_profile(self):
        g = SpatialProfile.named(self.g, self.g_scale)
        if g.dim != self.dim:
            raise InvalidArgumentError(f"profile {self.g!r} is {g.dim}D but dim={self.dim}")
        return g

    def problem(self):
        return ForwardProblem(
            self.equation, self.grid(), self.temporal_profile(), self.spatial_profile(), self.boundary_points()
        )

    def kaczmarz(self):
        return KaczmarzConfig(self.alpha, self.epsilon, self.max_iter)

    @property
    def m(self):
        return 1 if self.equation == "heat" else 2

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    # serialization

    def to_dict(self):
        out = {}
        for section, key, name, _ in _LAYOUT:
            value = getattr(self, name)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = list(value)
            out.setdefault(section, {})[key] = value
        return out

    @classmethod
    def from_dict(cls, data):
        kwargs = {}
        for section, key, name, kind in _LAYOUT:
            if key in data.get(section, {}):
                value = data[section][key]
                kwargs[name] = tuple(value) if kind in ("points", "window") else value
        return cls(**kwargs)

    def to_ini(self):
        parser = configparser.ConfigParser()
        parser.optionxform = str
        for section, key, name, kind in _LAYOUT:
            value = getattr(self, name)
            if value is None:
                continue
            if not parser.has_section(section):
                parser.add_section(section)
            if kind == "points":
                text = "; ".join(value)
            elif kind == "window":
                text = f"{value[0]!r}, {value[1]!r}"
            elif kind is bool:
                text = "true" if value else "false"
            else:
                text = repr(value) if isinstance(value, float) else str(value)
            parser.set(section, key, text)
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text):
        parser = configparser.ConfigParser()
        parser.optionxform = str
        parser.read_string(text)
        kwargs = {}
        for section, key, name, kind in _LAYOUT:
            if not parser.has_option(section, key):
                continue
            raw = parser.get(section, key)
            if kind == "points":
                kwargs[name] = tuple(p.strip() for p in raw.split(";") if p.strip())
            elif kind == "window":
                kwargs[name] = tuple(float(v) for v in raw.split(","))
            elif kind is bool:
                kwargs[name] = parser.getboolean(section, key)
            elif kind is int:
                kwargs[name] = int(raw)
            else:
                kwargs[name] = kind(raw)
        known = {(s, k) for s, k, _, _ in _LAYOUT}
        for section in parser.sections():
            for key in parser.options(section):
                if (section, key) not in known:
                    raise InvalidArgumentError(f"unknown config key [{section}] {key}")
        return cls(**kwargs)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_ini(fh.read())


def _point_text(p):
    if isinstance(p, BoundaryPoint):
        return ",".join(repr(c) for c in p.coords)
    if isinstance(p, (int, float)):
        return repr(float(p))
    if isinstance(p, (tuple, list)):
        return ",".join(repr(float(c)) for c in p)
    return str(p).strip()


def preset(name):
    """Load one of the shipped presets (``ex1``, ``ex2``, ``ex3``)."""
    if name not in PRESETS:
        raise InvalidArgumentError(f"unknown preset {name!r}; choose from {PRESETS}")
    text = resources.files("irsource").joinpath("presets", f"{name}.ini").read_text()
    return ExperimentConfig.from_ini(text)
