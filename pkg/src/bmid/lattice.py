"""
Exact event-driven simulation of lattice walks whose drift intensity grows
with the time spent at the running minimum.

Three simulators share the same clock discipline:

* :func:`simulate_szu` builds ``U = S + Z`` from a symmetric walk ``S``
  (rate ``4**n`` per direction, step ``2**-n``) and a drift channel ``Z``
  jumping in direction ``sign(V)`` at rate ``2**n * |V|``.  ``V`` grows at
  rate ``K * 2**n`` while ``U`` sits on its running minimum ``-M``.
* :func:`simulate_xn_direct` simulates the reflected walk ``X`` on
  ``2**-n * N`` directly from its transition rates.  Downward moves at 0
  are kept as zero-to-zero self transitions.
* :func:`build_coupling` runs ``(S, Z)`` alongside a primed walk
  ``U' = S + Z'`` where ``Z'`` is a constant-rate Poisson channel, sharing
  randomness so that the domination inequalities hold path by path.

Clock discipline: after every event all clocks are redrawn.  Constant-rate
channels are memoryless.  The velocity-dependent channel has a
deterministic intensity until the next event, so its next firing is the
first passage of the integrated intensity over a fresh ``Exp(1)`` draw
(:func:`bmid.clocks.invert_integrated_intensity`).  While the walk is away
from its minimum ``V`` is frozen and everything is a plain exponential race.

Positions are carried as integer multiples of ``2**-n``.  ``L`` is the
occupation time at the minimum scaled by ``2**n`` and ``V = -v + K L``.
When ``V == 0`` the drift channel has rate zero; its direction is only read
off at the instant it fires.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numba as nb
import numpy as np

from .clocks import _invert, _invert_positive_part
from .paths import _as_generator

__all__ = [
    "LatticeParams",
    "JumpTrajectory",
    "LinearTrajectory",
    "SystemState",
    "SzuResult",
    "XnResult",
    "CouplingBundle",
    "EventCapExceeded",
    "simulate_szu",
    "simulate_xn_direct",
    "build_coupling",
    "szu_functionals",
    "xn_functionals",
    "coupling_functionals",
    "SZU_COLUMNS",
    "XN_COLUMNS",
    "COUPLING_COLUMNS",
]

DEFAULT_EVENT_CAP = 10**8

_OK = 0
_CAP = 1


class EventCapExceeded(RuntimeError):
    """A single path needed more events than the configured cap."""


@dataclass(frozen=True)
class LatticeParams:
    """Lattice exponent ``n`` (step ``2**-n``), coupling ``K``, initial speed ``v``."""

    n: int
    K: float
    v: float
    t_max: float = 1.0
    event_cap: int = DEFAULT_EVENT_CAP

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 0:
            raise ValueError(f"n must be a nonnegative integer, got {self.n!r}")
        if self.n > 20:
            raise ValueError(f"n={self.n} is far beyond any practical event budget")
        if not (np.isfinite(self.K) and self.K >= 0):
            raise ValueError(f"K must be a finite nonnegative number, got {self.K!r}")
        if not np.isfinite(self.v):
            raise ValueError(f"v must be finite, got {self.v!r}")
        if not (np.isfinite(self.t_max) and self.t_max > 0):
            raise ValueError(f"t_max must be positive, got {self.t_max!r}")
        if self.event_cap < 1:
            raise ValueError("event_cap must be positive")

    @property
    def step(self) -> float:
        return 2.0**-self.n

    @property
    def walk_rate(self) -> float:
        """Rate of the symmetric walk per direction."""
        return 4.0**self.n

    @property
    def drift_scale(self) -> float:
        return 2.0**self.n


class SystemState(NamedTuple):
    """Snapshot of the ``(S, Z, U, M, L, V)`` system; lattice values in units of length."""

    time: float
    s_val: float
    z_val: float
    u_val: float
    m_val: float
    l_accum: float
    vel: float


# --------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class JumpTrajectory:
    """Piecewise-constant cadlag path given by its jump times and post-jump values.

    ``self_loops`` marks recorded events that left the value unchanged
    (zero-to-zero moves of a reflected walk).
    """

    event_times: np.ndarray
    values: np.ndarray
    initial_value: float
    t_max: float
    self_loops: np.ndarray | None = None

    def __post_init__(self):
        et = np.asarray(self.event_times, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if et.shape != vals.shape:
            raise ValueError("event_times and values must have equal length")
        if et.size and (np.any(np.diff(et) <= 0) or et[0] < 0 or et[-1] > self.t_max):
            raise ValueError("event times must be strictly increasing within [0, t_max]")
        object.__setattr__(self, "event_times", et)
        object.__setattr__(self, "values", vals)
        if self.self_loops is not None:
            object.__setattr__(self, "self_loops", np.asarray(self.self_loops, dtype=bool))

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.event_times, t, side="right")
        padded = np.concatenate(([self.initial_value], self.values))
        out = padded[idx]
        return float(out) if out.ndim == 0 else out

    def __len__(self):
        return self.event_times.shape[0]

    @property
    def terminal(self) -> float:
        return float(self.values[-1]) if len(self) else float(self.initial_value)

    def increments(self) -> np.ndarray:
        return np.diff(np.concatenate(([self.initial_value], self.values)))


@dataclass(frozen=True)
class LinearTrajectory:
    """Continuous piecewise-linear path through ``(knot_times, knot_values)``."""

    knot_times: np.ndarray
    knot_values: np.ndarray

    def __call__(self, t):
        out = np.interp(t, self.knot_times, self.knot_values)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def terminal(self) -> float:
        return float(self.knot_values[-1])


def _compress(times, vals, init, t_max, keep_zero_moves=None):
    # Keep only events where this component moved (or flagged self loops).
    prev = np.concatenate(([init], vals[:-1]))
    moved = vals != prev
    keep = moved if keep_zero_moves is None else moved | keep_zero_moves
    loops = None if keep_zero_moves is None else (~moved)[keep]
    return JumpTrajectory(times[keep], vals[keep], float(init), t_max, loops)


# --------------------------------------------------------------------------
# kernels


@nb.njit(cache=True, nogil=True)
def _grow(rec, used):
    out = np.empty((rec.shape[0] * 2, rec.shape[1]))
    out[:used] = rec[:used]
    return out


# S/Z/U record columns
_R_T, _R_S, _R_Z, _R_M, _R_L, _R_CH = 0, 1, 2, 3, 4, 5
# channel codes
_CH_SUP, _CH_SDN, _CH_ZUP, _CH_ZDN = 0, 1, 2, 3

SZU_COLUMNS = ("S", "Z", "U", "M", "L", "V", "X")


@nb.njit(cache=True, nogil=True)
def _szu_kernel(rng, n, K, v, t_max, obs, record, cap):
    r = 4.0**n
    two_r = 2.0 * r
    scale = 2.0**n
    slope = K * scale * scale
    s = 0
    z = 0
    mm = 0
    at_min = True
    l_raw = 0.0
    vel = -v
    t = 0.0
    n_ev = 0
    status = _OK
    n_obs = obs.shape[0]
    obs_out = np.empty((n_obs, 5))
    j = 0
    rec = np.empty((1024 if record else 1, 6))

    while True:
        tau_s = 0.0
        tau_z = 0.0
        total = 0.0
        if at_min:
            tau_s = rng.standard_exponential() / two_r
            tau_z = _invert(scale * vel, slope, 0.0, rng.standard_exponential())
            tau = min(tau_s, tau_z)
        else:
            total = two_r + scale * abs(vel)
            tau = rng.standard_exponential() / total
        t_next = t + tau
        while j < n_obs and obs[j] < t_next:
            l_o = l_raw + (obs[j] - t if at_min else 0.0)
            obs_out[j, 0] = s
            obs_out[j, 1] = z
            obs_out[j, 2] = mm
            obs_out[j, 3] = l_o
            obs_out[j, 4] = -v + K * scale * l_o
            j += 1
        if t_next > t_max:
            if at_min:
                l_raw += t_max - t
            vel = -v + K * scale * l_raw
            t = t_max
            break
        if at_min:
            l_raw += tau
            vel = -v + K * scale * l_raw
        t = t_next

        if at_min:
            if tau_s <= tau_z:
                ch = _CH_SUP if rng.random() < 0.5 else _CH_SDN
            else:
                ch = _CH_ZUP if vel > 0.0 else _CH_ZDN
        else:
            pick = rng.random() * total
            if pick < r:
                ch = _CH_SUP
            elif pick < two_r:
                ch = _CH_SDN
            else:
                ch = _CH_ZUP if vel > 0.0 else _CH_ZDN
        if ch == _CH_SUP:
            s += 1
        elif ch == _CH_SDN:
            s -= 1
        elif ch == _CH_ZUP:
            z += 1
        else:
            z -= 1
        u = s + z
        if -u > mm:
            mm = -u
        at_min = u == -mm

        if record:
            if n_ev >= rec.shape[0]:
                rec = _grow(rec, n_ev)
            rec[n_ev, _R_T] = t
            rec[n_ev, _R_S] = s
            rec[n_ev, _R_Z] = z
            rec[n_ev, _R_M] = mm
            rec[n_ev, _R_L] = l_raw
            rec[n_ev, _R_CH] = ch
        n_ev += 1
        if n_ev >= cap:
            status = _CAP
            break

    final = np.array([t, s, z, mm, l_raw, vel])
    return status, n_ev, final, obs_out, rec[: n_ev if record else 0]


XN_COLUMNS = ("X", "L", "V")


@nb.njit(cache=True, nogil=True)
def _xn_kernel(rng, n, K, v, t_max, obs, record, cap):
    r = 4.0**n
    two_r = 2.0 * r
    scale = 2.0**n
    slope = K * scale * scale
    i = 0
    l_raw = 0.0
    vel = -v
    t = 0.0
    n_ev = 0
    status = _OK
    n_obs = obs.shape[0]
    obs_out = np.empty((n_obs, 3))
    j = 0
    # columns: time, state, l_raw, self-loop flag
    rec = np.empty((1024 if record else 1, 4))

    while True:
        if i == 0:
            tau = _invert(scale * vel, slope, two_r, rng.standard_exponential())
        else:
            tau = rng.standard_exponential() / (two_r + scale * abs(vel))
        t_next = t + tau
        while j < n_obs and obs[j] < t_next:
            l_o = l_raw + (obs[j] - t if i == 0 else 0.0)
            obs_out[j, 0] = i
            obs_out[j, 1] = l_o
            obs_out[j, 2] = -v + K * scale * l_o
            j += 1
        if t_next > t_max:
            if i == 0:
                l_raw += t_max - t
            vel = -v + K * scale * l_raw
            t = t_max
            break
        if i == 0:
            l_raw += tau
            vel = -v + K * scale * l_raw
        t = t_next

        up_rate = r + scale * max(vel, 0.0)
        total = two_r + scale * abs(vel)
        loop = False
        if rng.random() * total < up_rate:
            i += 1
        elif i > 0:
            i -= 1
        else:
            loop = True

        if record:
            if n_ev >= rec.shape[0]:
                rec = _grow(rec, n_ev)
            rec[n_ev, 0] = t
            rec[n_ev, 1] = i
            rec[n_ev, 2] = l_raw
            rec[n_ev, 3] = 1.0 if loop else 0.0
        n_ev += 1
        if n_ev >= cap:
            status = _CAP
            break

    final = np.array([t, i, l_raw, vel])
    return status, n_ev, final, obs_out, rec[: n_ev if record else 0]


COUPLING_COLUMNS = ("S", "Z", "M", "L", "V", "Zp", "Mp", "Lp")
# coupling record columns
_C_T, _C_S, _C_Z, _C_M, _C_L, _C_ZP, _C_MP, _C_LP, _C_DUR, _C_AT, _C_ATP = range(11)


@nb.njit(cache=True, nogil=True)
def _coupling_kernel(rng, n, K, v, t_max, obs, record, cap):
    r = 4.0**n
    two_r = 2.0 * r
    scale = 2.0**n
    slope = K * scale * scale
    # Z' is Poisson at rate |v| 2^n.  For v >= 0 it jumps down and Z's down
    # jumps are its thinning; for v < 0 it jumps up and is part of Z's up
    # jumps.  The remaining up-intensity of Z is 2^n max(0, V - c).
    a = abs(v) * scale
    zp_dir = -1 if v >= 0.0 else 1
    c = 0.0 if v >= 0.0 else -v
    base_rate = two_r + a

    s = 0
    z = 0
    zp = 0
    mm = 0
    mmp = 0
    at_min = True
    at_minp = True
    l_raw = 0.0
    lp_raw = 0.0
    vel = -v
    t = 0.0
    n_ev = 0
    status = _OK
    n_obs = obs.shape[0]
    obs_out = np.empty((n_obs, 8))
    j = 0
    rec = np.empty((1024 if record else 1, 11))

    while True:
        tau_b = rng.standard_exponential() / base_rate
        if at_min:
            tau_e = _invert_positive_part(scale * (vel - c), slope, rng.standard_exponential())
        else:
            extra = scale * max(0.0, vel - c)
            tau_e = rng.standard_exponential() / extra if extra > 0.0 else np.inf
        tau = min(tau_b, tau_e)
        t_next = t + tau
        while j < n_obs and obs[j] < t_next:
            dt_o = obs[j] - t
            l_o = l_raw + (dt_o if at_min else 0.0)
            obs_out[j, 0] = s
            obs_out[j, 1] = z
            obs_out[j, 2] = mm
            obs_out[j, 3] = l_o
            obs_out[j, 4] = -v + K * scale * l_o
            obs_out[j, 5] = zp
            obs_out[j, 6] = mmp
            obs_out[j, 7] = lp_raw + (dt_o if at_minp else 0.0)
            j += 1
        if t_next > t_max:
            dur = t_max - t
            if at_min:
                l_raw += dur
            if at_minp:
                lp_raw += dur
            vel = -v + K * scale * l_raw
            if record:
                # closing interval, no jump
                if n_ev >= rec.shape[0]:
                    rec = _grow(rec, n_ev)
                rec[n_ev, _C_T] = t_max
                rec[n_ev, _C_S] = s
                rec[n_ev, _C_Z] = z
                rec[n_ev, _C_M] = mm
                rec[n_ev, _C_L] = l_raw
                rec[n_ev, _C_ZP] = zp
                rec[n_ev, _C_MP] = mmp
                rec[n_ev, _C_LP] = lp_raw
                rec[n_ev, _C_DUR] = dur
                rec[n_ev, _C_AT] = 1.0 if at_min else 0.0
                rec[n_ev, _C_ATP] = 1.0 if at_minp else 0.0
            t = t_max
            break
        was_at = at_min
        was_atp = at_minp
        if at_min:
            l_raw += tau
            vel = -v + K * scale * l_raw
        if at_minp:
            lp_raw += tau
        t = t_next

        if tau_b <= tau_e:
            pick = rng.random() * base_rate
            if pick < r:
                s += 1
            elif pick < two_r:
                s -= 1
            else:
                zp += zp_dir
                if zp_dir > 0:
                    z += 1
                elif vel < 0.0 and rng.random() * v < -vel:
                    z -= 1
        else:
            z += 1
        u = s + z
        if -u > mm:
            mm = -u
        at_min = u == -mm
        up = s + zp
        if -up > mmp:
            mmp = -up
        at_minp = up == -mmp

        if record:
            if n_ev >= rec.shape[0]:
                rec = _grow(rec, n_ev)
            rec[n_ev, _C_T] = t
            rec[n_ev, _C_S] = s
            rec[n_ev, _C_Z] = z
            rec[n_ev, _C_M] = mm
            rec[n_ev, _C_L] = l_raw
            rec[n_ev, _C_ZP] = zp
            rec[n_ev, _C_MP] = mmp
            rec[n_ev, _C_LP] = lp_raw
            rec[n_ev, _C_DUR] = tau
            rec[n_ev, _C_AT] = 1.0 if was_at else 0.0
            rec[n_ev, _C_ATP] = 1.0 if was_atp else 0.0
        n_ev += 1
        if n_ev >= cap:
            status = _CAP
            break

    final = np.array([t, s, z, mm, l_raw, vel, zp, mmp, lp_raw])
    n_rec = n_ev + 1 if (record and status == _OK) else (n_ev if record else 0)
    return status, n_ev, final, obs_out, rec[:n_rec]


# --------------------------------------------------------------------------
# public API


def _obs_array(params: LatticeParams, obs_times) -> np.ndarray:
    obs = np.atleast_1d(np.asarray(obs_times, dtype=np.float64))
    if obs.ndim != 1 or np.any(obs < 0) or np.any(obs > params.t_max):
        raise ValueError(f"observation times must lie in [0, {params.t_max}]")
    if np.any(np.diff(obs) < 0):
        raise ValueError("observation times must be sorted")
    return obs


def _check_status(status, params):
    if status == _CAP:
        raise EventCapExceeded(
            f"path exceeded {params.event_cap} events (n={params.n}, K={params.K}, v={params.v})"
        )


def _run(kernel, params, rng, obs, record):
    gen = _as_generator(rng)
    status, n_ev, final, obs_out, rec = kernel(
        gen, params.n, float(params.K), float(params.v), float(params.t_max), obs, record,
        int(params.event_cap),
    )
    _check_status(status, params)
    return n_ev, final, obs_out, rec


def szu_functionals(params: LatticeParams, rng, obs_times, return_events: bool = False):
    """Streaming run of the ``(S, Z)`` system.

    Returns an array of shape ``(len(obs_times), 7)`` with columns
    :data:`SZU_COLUMNS` = ``(S, Z, U, M, L, V, X)`` in units of length,
    plus the event count when ``return_events`` is set.
    """
    obs = _obs_array(params, obs_times)
    n_ev, _, raw, _ = _run(_szu_kernel, params, rng, obs, False)
    h = params.step
    out = np.empty((obs.shape[0], 7))
    out[:, 0] = raw[:, 0] * h
    out[:, 1] = raw[:, 1] * h
    out[:, 2] = (raw[:, 0] + raw[:, 1]) * h
    out[:, 3] = raw[:, 2] * h
    out[:, 4] = raw[:, 3] * params.drift_scale
    out[:, 5] = raw[:, 4]
    out[:, 6] = (raw[:, 0] + raw[:, 1] + raw[:, 2]) * h
    return (out, n_ev) if return_events else out


def xn_functionals(params: LatticeParams, rng, obs_times, return_events: bool = False):
    """Streaming run of the direct reflected walk; columns ``(X, L, V)``."""
    obs = _obs_array(params, obs_times)
    n_ev, _, raw, _ = _run(_xn_kernel, params, rng, obs, False)
    out = np.empty((obs.shape[0], 3))
    out[:, 0] = raw[:, 0] * params.step
    out[:, 1] = raw[:, 1] * params.drift_scale
    out[:, 2] = raw[:, 2]
    return (out, n_ev) if return_events else out


def coupling_functionals(params: LatticeParams, rng, obs_times) -> np.ndarray:
    """Streaming coupled run; columns :data:`COUPLING_COLUMNS`."""
    obs = _obs_array(params, obs_times)
    _, _, raw, _ = _run(_coupling_kernel, params, rng, obs, False)
    out = raw.copy()
    h = params.step
    for col in (0, 1, 2, 5, 6):
        out[:, col] *= h
    out[:, 3] *= params.drift_scale
    out[:, 7] *= params.drift_scale
    return out


class SzuResult(NamedTuple):
    S: JumpTrajectory
    Z: JumpTrajectory
    U: JumpTrajectory
    M: JumpTrajectory
    X: JumpTrajectory
    L: LinearTrajectory
    V: LinearTrajectory
    final_state: SystemState
    n_events: int
    events: np.ndarray
    sojourns: np.ndarray


def _linear_from_events(times, l_raw, t_max, final_l, scale, v, K):
    knots_t = np.concatenate(([0.0], times, [t_max]))
    l_vals = np.concatenate(([0.0], l_raw, [final_l])) * scale
    return (
        LinearTrajectory(knots_t, l_vals),
        LinearTrajectory(knots_t, -v + K * l_vals),
    )


def simulate_szu(params: LatticeParams, rng) -> SzuResult:
    """Simulate ``(S, Z, U, M, L, V)`` on ``[0, t_max]`` recording every event.

    ``X = U + M`` is included; zero-to-zero moves of ``X`` (down jumps of
    ``U`` from its minimum) are kept and flagged.  ``sojourns`` holds the
    length of every stretch spent at the running minimum.
    """
    n_ev, final, _, rec = _run(_szu_kernel, params, rng, np.empty(0), True)
    h = params.step
    times = rec[:, _R_T]
    s = rec[:, _R_S]
    z = rec[:, _R_Z]
    mm = rec[:, _R_M]
    u = s + z
    x = u + mm
    T = params.t_max
    l_traj, v_traj = _linear_from_events(
        times, rec[:, _R_L], T, final[4], params.drift_scale, params.v, params.K
    )
    # interval i runs from the previous event (or 0) to event i, then a
    # closing interval up to t_max
    starts = np.concatenate(([0.0], times))
    ends = np.concatenate((times, [T]))
    at_min = np.concatenate(([True], u == -mm))
    sojourns = (ends - starts)[at_min]

    state = SystemState(
        time=float(final[0]),
        s_val=float(final[1] * h),
        z_val=float(final[2] * h),
        u_val=float((final[1] + final[2]) * h),
        m_val=float(final[3] * h),
        l_accum=float(final[4]),
        vel=float(final[5]),
    )
    return SzuResult(
        S=_compress(times, s * h, 0.0, T),
        Z=_compress(times, z * h, 0.0, T),
        U=_compress(times, u * h, 0.0, T),
        M=_compress(times, mm * h, 0.0, T),
        X=_compress(times, x * h, 0.0, T, keep_zero_moves=np.ones(len(times), bool)),
        L=l_traj,
        V=v_traj,
        final_state=state,
        n_events=n_ev,
        events=rec,
        sojourns=sojourns,
    )


class XnResult(NamedTuple):
    X: JumpTrajectory
    L: LinearTrajectory
    V: LinearTrajectory
    n_events: int
    n_self_loops: int


def simulate_xn_direct(params: LatticeParams, rng) -> XnResult:
    """Simulate the reflected walk ``X`` on ``2**-n * N`` from its rates.

    Away from 0 the move toward ``sign(V)`` has rate ``4**n + 2**n |V|`` and
    the opposite move ``4**n``.  At 0 the same total intensity applies with
    ``V`` growing at rate ``K 2**n``; moves that would go below 0 become
    zero-to-zero self transitions.
    """
    n_ev, final, _, rec = _run(_xn_kernel, params, rng, np.empty(0), True)
    times = rec[:, 0]
    loops = rec[:, 3] > 0
    x_traj = JumpTrajectory(times, rec[:, 1] * params.step, 0.0, params.t_max, loops)
    l_traj, v_traj = _linear_from_events(
        times, rec[:, 2], params.t_max, final[2], params.drift_scale, params.v, params.K
    )
    return XnResult(x_traj, l_traj, v_traj, n_ev, int(loops.sum()))


@dataclass(frozen=True)
class CouplingBundle:
    """Primary ``(S, Z, U, M, L)`` and primed ``(Z', U', M', L')`` built together.

    ``events`` holds one row per interval between consecutive events (the
    last row closes at ``t_max``); see :meth:`violations` for the pathwise
    inequalities checked on it.
    """

    params: LatticeParams
    events: np.ndarray
    n_events: int

    def _col(self, c):
        return self.events[:, c]

    @property
    def times(self):
        return self._col(_C_T)

    def _traj(self, vals):
        # drop the closing row: it carries no jump
        t = self.times[: self.n_events]
        return _compress(t, vals[: self.n_events], 0.0, self.params.t_max)

    @property
    def S(self):
        return self._traj(self._col(_C_S) * self.params.step)

    @property
    def Z(self):
        return self._traj(self._col(_C_Z) * self.params.step)

    @property
    def U(self):
        return self._traj((self._col(_C_S) + self._col(_C_Z)) * self.params.step)

    @property
    def M(self):
        return self._traj(self._col(_C_M) * self.params.step)

    @property
    def Z_prime(self):
        return self._traj(self._col(_C_ZP) * self.params.step)

    @property
    def U_prime(self):
        return self._traj((self._col(_C_S) + self._col(_C_ZP)) * self.params.step)

    @property
    def M_prime(self):
        return self._traj(self._col(_C_MP) * self.params.step)

    @property
    def L(self) -> np.ndarray:
        """Scaled occupation at the minimum, at each row's end time."""
        return self._col(_C_L) * self.params.drift_scale

    @property
    def L_prime(self) -> np.ndarray:
        return self._col(_C_LP) * self.params.drift_scale

    def violations(self) -> dict[str, int]:
        """Count event-wise failures of the three domination inequalities.

        * ``z_increment``: an interval where ``Z'`` rose relative to ``Z``.
        * ``l_sandwich``: an interval with ``dL < 0`` or ``dL > dL'``; the
          increments are ``duration * [at minimum]`` so the check is exact.
        * ``reflected_order``: a state with ``U+M < U'+M'`` or ``U'+M' < 0``.
        """
        ev = self.events
        z = np.concatenate(([0.0], ev[:, _C_Z]))
        zp = np.concatenate(([0.0], ev[:, _C_ZP]))
        z_bad = int(np.sum(np.diff(zp) > np.diff(z)))
        dl = ev[:, _C_DUR] * ev[:, _C_AT]
        dlp = ev[:, _C_DUR] * ev[:, _C_ATP]
        l_bad = int(np.sum((dl < 0) | (dl > dlp)))
        x = ev[:, _C_S] + ev[:, _C_Z] + ev[:, _C_M]
        xp = ev[:, _C_S] + ev[:, _C_ZP] + ev[:, _C_MP]
        order_bad = int(np.sum((x < xp) | (xp < 0)))
        return {"z_increment": z_bad, "l_sandwich": l_bad, "reflected_order": order_bad}


def build_coupling(params: LatticeParams, rng) -> CouplingBundle:
    """Simulate the primary system together with its primed comparison walk.

    ``Z'`` is a Poisson process of rate ``|v| 2**n`` stepping down when
    ``v >= 0`` and up when ``v < 0``.
    For ``v >= 0`` the down jumps of ``Z`` are obtained by thinning ``Z'``
    with probability ``V^- / v``; for ``v < 0`` every ``Z'`` jump is also a
    ``Z`` jump.  Either way ``Z - Z'`` is nondecreasing.
    """
    n_ev, _, _, rec = _run(_coupling_kernel, params, rng, np.empty(0), True)
    return CouplingBundle(params, rec, n_ev)
