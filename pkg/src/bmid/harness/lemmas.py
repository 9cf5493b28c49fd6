"""
Monte Carlo checks of the auxiliary facts the lattice construction relies on:
geometric sums of exponentials, the scaled Poisson law of large numbers,
the moment bound on the running minimum, and exactness of clock inversion.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize

from ..clocks import _invert, geometric_exponential_sum, sample_poisson_events
from ..lattice import LatticeParams
from ..paths import RngStream
from ..stats import ks_one_sample, mean_with_ci
from .ensemble import TAG_LEMMA, stream_id
from .samples import SZU_FIELDS, lattice_sample

GEOMETRIC_CASES = ((0.5, 2.0), (0.25, 8.0))

# sub-stream ids under TAG_LEMMA, kept apart from lattice exponents
_GEOM_N = 200
_FLLN_N = 201
_CLOCK_N = 202


def geometric_sum_check(p: float, lam: float, count: int, seed: int) -> dict:
    """KS of ``count`` geometric sums of ``Exp(lam)`` against ``Exp(p * lam)``."""
    rng = RngStream(seed, stream_id(TAG_LEMMA, _GEOM_N, int(round(1000 * p))))
    x = geometric_exponential_sum(p, lam, rng, size=count)
    rate = p * lam
    ks = ks_one_sample(x, lambda t: -np.expm1(-rate * np.maximum(t, 0.0)))
    return {"p": p, "lam": lam, "draws": count, "ks": ks.statistic, "p_value": ks.pvalue,
            "mean": float(np.mean(x)), "oracle_mean": 1.0 / rate}


def poisson_sup_deviation(times: np.ndarray, n: int, alpha: float, t_max: float) -> float:
    """``sup_t |2**-n N(t) - alpha t|`` for a counting path with jumps at ``times``.

    The supremum of a piecewise-linear difference is attained just before or
    at a jump, or at ``t_max``.
    """
    h = 2.0**-n
    k = np.arange(1, times.size + 1)
    end = abs(times.size * h - alpha * t_max)
    if times.size == 0:
        return end
    before = np.abs((k - 1) * h - alpha * times)
    after = np.abs(k * h - alpha * times)
    return float(max(before.max(), after.max(), end))


def flln_deviations(n: int, alpha: float, t_max: float, runs: int, seed: int) -> np.ndarray:
    out = np.empty(runs)
    for i in range(runs):
        rng = RngStream(seed, stream_id(TAG_LEMMA, _FLLN_N, (n << 32) | i))
        out[i] = poisson_sup_deviation(sample_poisson_events(alpha * 2.0**n, t_max, rng), n, alpha, t_max)
    return out


def moment_bound(t_max: float, v: float) -> float:
    """Upper bound on the mean running minimum ``E M_n(T)``, uniform in ``n``."""
    a = abs(v)
    return 2.0 * math.sqrt(2 * t_max + t_max * a * math.sqrt(2 * t_max) + 2 * a * t_max)


def moment_check(n: int, K: float, v: float, t_max: float, count: int, seed: int, **opts) -> dict:
    vals, events = lattice_sample("szu", LatticeParams(n, K, v, t_max), seed, [t_max], count, **opts)
    m = vals[:, 0, SZU_FIELDS["M"]]
    mean = float(np.mean(m))
    se = float(np.std(m, ddof=1) / math.sqrt(m.size)) if m.size > 1 else None
    bound = moment_bound(t_max, v)
    return {"mean": mean, "se": se, "bound": bound,
            "mean_plus_3se": None if se is None else mean + 3 * se, "events_mean": float(np.mean(events))}


def quadrature_inverse(lambda0: float, slope: float, base: float, target: float) -> float:
    """Reference solution of ``int_0^t (base + |lambda0 + slope s|) ds = target``.

    Adaptive quadrature with the kink passed as a breakpoint, then Brent's
    method on a doubling bracket.
    """
    s_star = -lambda0 / slope if slope != 0 else -1.0

    def F(t):
        pts = [s_star] if 0 < s_star < t else None
        val, _ = integrate.quad(lambda s: base + abs(lambda0 + slope * s), 0.0, t, points=pts,
                                epsabs=1e-12, epsrel=1e-12, limit=200)
        return val - target

    hi = 1.0
    while F(hi) < 0:
        hi *= 2.0
    return optimize.brentq(F, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def clock_cases(count: int, seed: int) -> np.ndarray:
    """Random ``(lambda0, slope, base, target)`` rows covering every inversion branch."""
    gen = RngStream(seed, stream_id(TAG_LEMMA, _CLOCK_N, 0)).generator()
    lam0 = gen.uniform(-20, 20, count)
    slope = gen.uniform(-50, 50, count)
    base = np.where(gen.random(count) < 1 / 3, 0.0, gen.uniform(0, 10, count))
    target = gen.exponential(2.0, count) + 1e-6
    return np.column_stack((lam0, slope, base, target))


def clock_inversion_errors(count: int, seed: int) -> np.ndarray:
    cases = clock_cases(count, seed)
    err = np.empty(count)
    for i, (l0, sl, b, tg) in enumerate(cases):
        err[i] = abs(_invert(l0, sl, b, tg) - quadrature_inverse(l0, sl, b, tg))
    return err


def lemma_suite(seed: int, replicas: int, exponents, t_max: float, K: float, v: float, **opts):
    """Yield ``(name, stats)`` pairs; ``stats`` may carry the exponent under ``"n"``."""
    for p, lam in GEOMETRIC_CASES:
        yield f"geometric_sum(p={p:g},lam={lam:g})", geometric_sum_check(p, lam, replicas, seed)
    for n in exponents:
        dev = flln_deviations(n, 1.0, t_max, replicas, seed)
        yield "flln(alpha=1)", {"n": n, "runs": replicas, "frac_below_0.1": float(np.mean(dev < 0.1)),
                                "max_deviation": float(dev.max())}
    if replicas >= 2:
        for n in exponents:
            yield "moment_bound(M(T))", {"n": n, **moment_check(n, K, v, t_max, replicas, seed, **opts)}
    err = clock_inversion_errors(replicas, seed)
    yield "clock_inversion", {"cases": replicas, "max_abs_error": float(err.max())}
