"""
Exponential clocks: constant-rate Poisson events, first-passage inversion of
piecewise-linear-in-absolute-value intensities, and geometric sums of
exponentials.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

from .paths import _as_generator

__all__ = [
    "sample_poisson_events",
    "invert_integrated_intensity",
    "geometric_exponential_sum",
]


def sample_poisson_events(rate: float, t_max: float, rng) -> np.ndarray:
    """Event times in ``[0, t_max]`` of a rate-``rate`` Poisson process.

    Built from i.i.d. ``Exp(rate)`` gaps; ``rate == 0`` gives no events.
    """
    if not rate >= 0:
        raise ValueError(f"rate must be nonnegative, got {rate!r}")
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max!r}")
    if rate == 0:
        return np.empty(0)
    gen = _as_generator(rng)
    scale = 1.0 / rate
    chunk = max(16, int(rate * t_max + 4 * math.sqrt(rate * t_max)) + 1)
    parts = []
    t0 = 0.0
    while True:
        times = t0 + np.cumsum(gen.exponential(scale, size=chunk))
        if times[-1] > t_max:
            parts.append(times[: np.searchsorted(times, t_max, side="right")])
            break
        parts.append(times)
        t0 = times[-1]
    return np.concatenate(parts)


@nb.njit(cache=True, nogil=True)
def _invert(lambda0, slope, base, target):
    # Solve int_0^t (base + |lambda0 + slope*s|) ds = target for t.
    a0 = abs(lambda0)
    if slope == 0.0:
        rate = base + a0
        if rate <= 0.0:
            return np.inf
        return target / rate
    aslope = abs(slope)
    b = base + a0
    s_star = -lambda0 / slope
    if s_star <= 0.0:
        # |lambda0 + slope*s| = a0 + aslope*s on s > 0
        return 2.0 * target / (b + math.sqrt(b * b + 2.0 * aslope * target))
    area = s_star * (base + 0.5 * a0)
    if target <= area:
        disc = b * b - 2.0 * aslope * target
        if disc < 0.0:
            disc = 0.0
        return 2.0 * target / (b + math.sqrt(disc))
    rest = target - area
    if base == 0.0:
        return s_star + math.sqrt(2.0 * rest / aslope)
    return s_star + 2.0 * rest / (base + math.sqrt(base * base + 2.0 * aslope * rest))


@nb.njit(cache=True, nogil=True)
def _invert_positive_part(lambda0, slope, target):
    # Solve int_0^t max(0, lambda0 + slope*s) ds = target, slope >= 0.
    if lambda0 >= 0.0:
        return _invert(lambda0, slope, 0.0, target)
    if slope <= 0.0:
        return np.inf
    return -lambda0 / slope + _invert(0.0, slope, 0.0, target)


def invert_integrated_intensity(lambda0: float, slope: float, base: float, target: float) -> float:
    """First time the integrated intensity ``base + |lambda0 + slope*s|`` reaches ``target``.

    The integral is piecewise quadratic in ``t``; when ``lambda0 + slope*s``
    changes sign inside the interval the two branches are solved separately.
    Returns ``inf`` when the intensity is identically zero.
    """
    if not base >= 0:
        raise ValueError(f"base must be nonnegative, got {base!r}")
    if not target > 0:
        raise ValueError(f"target must be positive, got {target!r}")
    if not (np.isfinite(lambda0) and np.isfinite(slope) and np.isfinite(target)):
        raise ValueError("lambda0, slope and target must be finite")
    return float(_invert(float(lambda0), float(slope), float(base), float(target)))


def geometric_exponential_sum(p: float, lam: float, rng, size: int | None = None):
    """Sum of ``W ~ Geometric(p)`` (support 1, 2, ...) i.i.d. ``Exp(lam)`` draws.

    The result is ``Exp(p * lam)`` distributed.  With ``size`` an array of
    independent draws is returned.
    """
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p!r}")
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam!r}")
    gen = _as_generator(rng)
    count = 1 if size is None else int(size)
    w = gen.geometric(p, size=count)
    exps = gen.exponential(1.0 / lam, size=int(w.sum()))
    starts = np.concatenate(([0], np.cumsum(w)[:-1]))
    sums = np.add.reduceat(exps, starts)
    return float(sums[0]) if size is None else sums
