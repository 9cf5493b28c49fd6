"""
Replica ensembles shared by experiments and the acceptance suite.

Every builder returns arrays stacked in replica order; replica ``i`` always
draws from the stream ``stream_id(tag, n, i)`` of the run seed.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..continuum import bmid_functionals
from ..lattice import LatticeParams, build_coupling, szu_functionals, xn_functionals
from ..paths import RngStream, TimeGrid
from .ensemble import TAG_CONTINUUM, TAG_COUPLING, TAG_SZU, TAG_XN, run_ensemble, stream_id

# S_n moves 2**-n at rate 4**n each way, so Var S_n(t) = 2t: the lattice
# processes converge to the system driven by sqrt(2) times a standard
# Brownian motion.
LATTICE_SIGMA = math.sqrt(2.0)

SZU_FIELDS = {"S": 0, "Z": 1, "U": 2, "M": 3, "L": 4, "V": 5, "X": 6}
XN_FIELDS = {"X": 0, "L": 1, "V": 2}
CONTINUUM_FIELDS = {"X": 0, "U": 1, "V": 2, "M": 3, "L": 3}


def _szu_row(params, rng, obs):
    out, n_ev = szu_functionals(params, rng, obs, return_events=True)
    return np.append(out.ravel(), n_ev)


def _xn_row(params, rng, obs):
    out, n_ev = xn_functionals(params, rng, obs, return_events=True)
    return np.append(out.ravel(), n_ev)


def lattice_sample(
    which: str, params: LatticeParams, seed: int, obs_times, count: int, *,
    threads=None, chunk_size=500, store=None,
):
    """Run ``count`` replicas of a lattice simulator.

    Returns ``(values, events)``: ``values`` has shape ``(count, len(obs), k)``
    with the simulator's columns, ``events`` the per-replica event counts.
    """
    obs = np.asarray(obs_times, dtype=np.float64)
    order = np.argsort(obs, kind="stable")
    obs_sorted = obs[order]
    if which == "szu":
        tag, row, k = TAG_SZU, _szu_row, 7
    elif which == "xn":
        tag, row, k = TAG_XN, _xn_row, 3
    else:
        raise ValueError(f"unknown simulator {which!r}")

    def task(i):
        return row(params, RngStream(seed, stream_id(tag, params.n, i)), obs_sorted)

    key = f"{which}_n{params.n}"
    arr = run_ensemble(task, count, threads=threads, chunk_size=chunk_size, store=store, key=key)
    vals = arr[:, :-1].reshape(count, obs.shape[0], k)
    out = np.empty_like(vals)
    out[:, order, :] = vals
    return out, arr[:, -1]


def continuum_sample(
    K: float, v: float, t_max: float, steps: int, seed: int, obs_times, count: int, *,
    sigma: float = LATTICE_SIGMA, threads=None, chunk_size=500, store=None, tag: int = TAG_CONTINUUM,
):
    """``count`` replicas of the grid BMID oracle; shape ``(count, len(obs), 4)``."""
    grid = TimeGrid(t_max, steps)
    obs = np.asarray(obs_times, dtype=np.float64)

    def task(i):
        return bmid_functionals(grid, K, v, RngStream(seed, stream_id(tag, 0, i)), obs, sigma).ravel()

    arr = run_ensemble(task, count, threads=threads, chunk_size=chunk_size, store=store,
                       key=f"continuum_{tag}_{steps}")
    return arr.reshape(count, obs.shape[0], 4)


def coupling_sample(params: LatticeParams, seed: int, count: int, *, threads=None, chunk_size=500,
                    store=None):
    """Full coupled paths; rows ``(z, l, order violations, L(T), L'(T), M'(T), events)``."""

    def task(i):
        b = build_coupling(params, RngStream(seed, stream_id(TAG_COUPLING, params.n, i)))
        viol = b.violations()
        return np.array([
            viol["z_increment"], viol["l_sandwich"], viol["reflected_order"],
            b.L[-1], b.L_prime[-1], b.events[-1, 6] * params.step, b.n_events,
        ])

    return run_ensemble(task, count, threads=threads, chunk_size=chunk_size, store=store,
                        key=f"coupling_n{params.n}")


def half_normal_cdf(scale: float):
    """CDF of ``|N(0, scale**2)|``."""

    def F(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(x > 0, special.erf(np.maximum(x, 0) / (scale * math.sqrt(2.0))), 0.0)

    return F
