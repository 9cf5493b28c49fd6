"""
Grid paths, Brownian sampling and the one-sided Skorohod map.

Everything here is a pure function of its inputs: a :class:`GridPath` is
immutable once built and randomness only enters through an explicit
:class:`RngStream`.

The running minimum used throughout is

.. math:: m(t_k) = \\max\\big(0, \\max_{j \\le k} -q(t_j)\\big),

i.e. the supremum is taken over grid points only and includes ``t_0``.
For paths with ``q(0) >= 0`` the inclusion of ``t_0`` makes no difference.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TimeGrid",
    "GridPath",
    "RngStream",
    "sample_brownian",
    "running_signed_min",
    "skorohod_map",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform mesh ``t_k = k * dt`` for ``k = 0..num_steps`` on ``[0, t_max]``."""

    t_max: float
    num_steps: int

    def __post_init__(self):
        if not isinstance(self.num_steps, (int, np.integer)) or self.num_steps < 1:
            raise ValueError(f"num_steps must be a positive integer, got {self.num_steps!r}")
        if not np.isfinite(self.t_max) or self.t_max <= 0:
            raise ValueError(f"t_max must be positive and finite, got {self.t_max!r}")

    @property
    def dt(self) -> float:
        return self.t_max / self.num_steps

    @property
    def size(self) -> int:
        return self.num_steps + 1

    def times(self) -> np.ndarray:
        return np.arange(self.size) * self.dt

    def coarsen(self, factor: int) -> "TimeGrid":
        if factor < 1 or self.num_steps % factor:
            raise ValueError(f"cannot coarsen {self.num_steps} steps by {factor}")
        return TimeGrid(self.t_max, self.num_steps // factor)


@dataclass(frozen=True)
class GridPath:
    """Real-valued path sampled on a :class:`TimeGrid`."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 1 or vals.shape[0] != self.grid.size:
            raise ValueError(
                f"expected {self.grid.size} values for {self.grid}, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("path values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.grid.times()

    @property
    def end(self) -> float:
        return float(self.values[-1])

    def subsample(self, factor: int) -> "GridPath":
        return GridPath(self.grid.coarsen(factor), self.values[::factor])

    def with_values(self, values) -> "GridPath":
        return GridPath(self.grid, values)


@dataclass(frozen=True)
class RngStream:
    """Seed plus stream id naming one independent Philox stream.

    The pair feeds a :class:`numpy.random.SeedSequence` with the stream id as
    spawn key, so distinct ids give independent streams derived from the
    same seed, and a given pair always reproduces the same draws.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            val = getattr(self, name)
            if not 0 <= int(val) < 2**64:
                raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {val}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def sample_brownian(grid: TimeGrid, rng, sigma: float = 1.0) -> GridPath:
    """Brownian motion ``sigma * B`` on ``grid`` started at 0, exact Gaussian increments."""
    if grid.num_steps < 1:
        raise ValueError("num_steps must be >= 1")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    gen = _as_generator(rng)
    incr = gen.standard_normal(grid.num_steps) * (sigma * np.sqrt(grid.dt))
    values = np.empty(grid.size)
    values[0] = 0.0
    np.cumsum(incr, out=values[1:])
    return GridPath(grid, values)


def _signed_min(q: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(np.maximum(-q, 0.0))


def running_signed_min(q: GridPath) -> GridPath:
    """``m[k] = max(0, max_{j<=k} -q[j])``; nondecreasing and nonnegative."""
    return GridPath(q.grid, _signed_min(q.values))


def skorohod_map(f: GridPath) -> tuple[GridPath, GridPath]:
    """Reflect ``f`` at zero: returns ``(x, m)`` with ``x = f + m >= 0``.

    ``f[0] < 0`` is accepted; the same formula then lifts the start to 0.
    """
    m = _signed_min(f.values)
    x = f.values + m
    return GridPath(f.grid, x), GridPath(f.grid, m)
