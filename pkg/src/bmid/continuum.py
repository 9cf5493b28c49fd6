"""
Limit-side constructions of Brownian motion with inert drift.

All three constructions are driven by a path on a uniform grid and share
one forward-stepping kernel.  Within a step the update order is

1. advance the displacement ``I`` with the velocity of the previous grid point
   (left-endpoint rectangle rule),
2. form ``x = f + I``,
3. push the running minimum ``m = max(m, -x)``,
4. recompute the velocity from ``m``.

With this ordering ``x + m`` is exactly zero at every step where ``m``
increases, and the velocity identity holds bit-for-bit.

Two sign conventions coexist:

* :func:`white_map` uses ``V = v + K m``.
* :func:`bmid_from_path` uses ``V = -v + K m`` (``v`` is the initial
  *inward* speed of the inert particle).

``white_map(f, K, -v)`` and ``bmid_from_path(f, K, v)`` therefore share
``m`` exactly.  The running minimum is read as ``sup (-x v 0)``, the same
object as :func:`bmid.paths.running_signed_min`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numba as nb
import numpy as np

from .paths import GridPath, TimeGrid, _as_generator

__all__ = [
    "ModelParams",
    "WhiteMapOutput",
    "BmidOutput",
    "KnightOutput",
    "RefinementReport",
    "white_map",
    "bmid_from_path",
    "knight_system",
    "refine_and_compare",
    "bmid_functionals",
]


@dataclass(frozen=True)
class ModelParams:
    K: float
    v: float
    t_max: float = 1.0

    def __post_init__(self):
        _check_k(self.K)
        if not np.isfinite(self.v):
            raise ValueError(f"v must be finite, got {self.v!r}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max!r}")


class WhiteMapOutput(NamedTuple):
    x: GridPath
    m: GridPath
    big_i: GridPath
    vel: GridPath


class BmidOutput(NamedTuple):
    u: GridPath
    vel: GridPath
    m: GridPath
    x: GridPath
    local_drive: GridPath


class KnightOutput(NamedTuple):
    X: GridPath
    Y: GridPath
    V: GridPath
    L: GridPath


class RefinementReport(NamedTuple):
    steps_coarse: int
    steps_fine: int
    dist_x: float
    dist_m: float
    dist_v: float


def _check_k(K):
    if not (np.isfinite(K) and K >= 0):
        raise ValueError(f"K must be a finite nonnegative number, got {K!r}")


@nb.njit(cache=True, nogil=True)
def _inert_kernel(f, dt, K, v0):
    n = f.shape[0]
    x = np.empty(n)
    m = np.empty(n)
    big_i = np.empty(n)
    vel = np.empty(n)
    big_i[0] = 0.0
    x[0] = f[0]
    m[0] = max(0.0, -x[0])
    vel[0] = v0 + K * m[0]
    for k in range(n - 1):
        big_i[k + 1] = big_i[k] + vel[k] * dt
        x[k + 1] = f[k + 1] + big_i[k + 1]
        m[k + 1] = max(m[k], -x[k + 1])
        vel[k + 1] = v0 + K * m[k + 1]
    return x, m, big_i, vel


@nb.njit(cache=True, nogil=True)
def _inert_observe(incr, dt, K, v0, obs_idx, out):
    # Same recursion as _inert_kernel for a Brownian path given by its
    # increments; writes (X, U, V, M) at each observed grid index.
    b = 0.0
    big_i = 0.0
    m = 0.0
    vel = v0
    j = 0
    n_obs = obs_idx.shape[0]
    while j < n_obs and obs_idx[j] == 0:
        out[j, 0] = 0.0
        out[j, 1] = 0.0
        out[j, 2] = vel
        out[j, 3] = 0.0
        j += 1
    for k in range(incr.shape[0]):
        b += incr[k]
        big_i += vel * dt
        u = b + big_i
        if -u > m:
            m = -u
        vel = v0 + K * m
        while j < n_obs and obs_idx[j] == k + 1:
            out[j, 0] = u + m
            out[j, 1] = u
            out[j, 2] = vel
            out[j, 3] = m
            j += 1


def white_map(f: GridPath, K: float, v: float) -> WhiteMapOutput:
    """Forward-stepped coupled Skorohod map with velocity ``V = v + K m``.

    Returns ``(x, m, I, V)`` where ``x = f + I`` and ``x + m >= 0``.
    """
    _check_k(K)
    x, m, big_i, vel = _inert_kernel(f.values, f.grid.dt, float(K), float(v))
    g = f.grid
    return WhiteMapOutput(GridPath(g, x), GridPath(g, m), GridPath(g, big_i), GridPath(g, vel))


def bmid_from_path(b: GridPath, K: float, v: float) -> BmidOutput:
    """Solve ``U = b + int V``, ``V = -v + K M^U`` on the grid of ``b``.

    ``x = U + M^U`` is the reflected process (BMID when ``b`` is Brownian).
    """
    _check_k(K)
    u, m, big_i, vel = _inert_kernel(b.values, b.grid.dt, float(K), -float(v))
    g = b.grid
    return BmidOutput(
        u=GridPath(g, u),
        vel=GridPath(g, vel),
        m=GridPath(g, m),
        x=GridPath(g, u + m),
        local_drive=GridPath(g, big_i),
    )


def knight_system(b: GridPath, K: float, v: float) -> KnightOutput:
    """Brownian particle ``X = b + L`` reflecting off an inert particle ``Y``.

    ``Y`` moves with velocity ``V = v - K L``; the gap ``X - Y`` is the
    reflected process of :func:`bmid_from_path` with the same arguments.
    """
    out = bmid_from_path(b, K, v)
    g = b.grid
    big_x = b.values + out.m.values
    big_y = -out.local_drive.values
    vel = -out.vel.values
    return KnightOutput(GridPath(g, big_x), GridPath(g, big_y), GridPath(g, vel), out.m)


def bmid_functionals(
    grid: TimeGrid, K: float, v: float, rng, obs_times, sigma: float = 1.0
) -> np.ndarray:
    """Sample one Brownian path and return ``(X, U, V, M)`` at ``obs_times``.

    Equivalent to ``bmid_from_path(sample_brownian(grid, rng, sigma), K, v)``
    evaluated at the grid points nearest to ``obs_times`` (which must lie
    on the grid), without materialising the paths.
    """
    _check_k(K)
    obs_idx = _grid_indices(grid, obs_times)
    order = np.argsort(obs_idx, kind="stable")
    gen = _as_generator(rng)
    incr = gen.standard_normal(grid.num_steps) * (sigma * np.sqrt(grid.dt))
    out = np.empty((obs_idx.shape[0], 4))
    _inert_observe(incr, grid.dt, float(K), -float(v), obs_idx[order], out)
    res = np.empty_like(out)
    res[order] = out
    return res


def _grid_indices(grid: TimeGrid, times) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=np.float64))
    idx = np.rint(t / grid.dt).astype(np.int64)
    if np.any(idx < 0) or np.any(idx > grid.num_steps) or not np.allclose(idx * grid.dt, t, atol=1e-12):
        raise ValueError(f"observation times {t} are not points of {grid}")
    return idx


def refine_and_compare(
    f_generator: Callable[[TimeGrid], GridPath],
    K: float,
    v: float,
    steps_coarse: int,
    steps_fine: int,
    t_max: float = 1.0,
    construction: str = "bmid",
) -> RefinementReport:
    """Sup-distance between coarse and fine solutions on the coarse grid.

    ``f_generator`` is called once on the fine grid; the coarse driver is
    its subsample, so both runs see the same randomness.
    """
    if steps_coarse < 1 or steps_fine % steps_coarse:
        raise ValueError(
            f"steps_fine ({steps_fine}) must be a positive multiple of steps_coarse ({steps_coarse})"
        )
    fine_grid = TimeGrid(t_max, steps_fine)
    f_fine = f_generator(fine_grid)
    if f_fine.grid != fine_grid:
        raise ValueError("f_generator returned a path on a different grid")
    factor = steps_fine // steps_coarse
    f_coarse = f_fine.subsample(factor)

    if construction == "white":
        fine = white_map(f_fine, K, v)
        coarse = white_map(f_coarse, K, v)
        xs = coarse.x.values, fine.x.values[::factor]
    elif construction == "bmid":
        fine = bmid_from_path(f_fine, K, v)
        coarse = bmid_from_path(f_coarse, K, v)
        xs = coarse.x.values, fine.x.values[::factor]
    else:
        raise ValueError(f"unknown construction {construction!r}")

    def sup(a, b):
        return float(np.max(np.abs(a - b)))

    return RefinementReport(
        steps_coarse=steps_coarse,
        steps_fine=steps_fine,
        dist_x=sup(*xs),
        dist_m=sup(coarse.m.values, fine.m.values[::factor]),
        dist_v=sup(coarse.vel.values, fine.vel.values[::factor]),
    )
