"""
Distribution comparisons for Monte Carlo ensembles.

KS statistics are computed exactly from the pooled order statistics.  All
ECDFs are right-continuous, which matters here: lattice-valued samples
(multiples of ``2**-n``) are routinely compared with continuous ones and
ties are common.

Two-sample p-values come from label permutation.  The pooled sample is
sorted once; a permutation only reshuffles the labels, so each resample
costs one pass over the pooled array.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats as _sps

from .paths import _as_generator

__all__ = [
    "EmpiricalSample",
    "KSResult",
    "DegenerateSampleWarning",
    "ecdf",
    "ks_one_sample",
    "ks_two_sample",
    "mean_with_ci",
    "wasserstein1",
]


class DegenerateSampleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EmpiricalSample:
    """I.i.d. scalar draws plus the provenance needed to regenerate them."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


class KSResult(NamedTuple):
    statistic: float
    pvalue: float


def _values(sample) -> np.ndarray:
    vals = sample.values if isinstance(sample, EmpiricalSample) else np.asarray(sample, dtype=np.float64)
    vals = np.ravel(vals)
    if vals.size == 0:
        raise ValueError("sample is empty")
    return vals


def ecdf(sample) -> Callable:
    """Right-continuous empirical CDF of ``sample`` as a vectorised callable."""
    xs = np.sort(_values(sample))
    n = xs.size

    def F(x):
        out = np.searchsorted(xs, x, side="right") / n
        return float(out) if np.ndim(out) == 0 else out

    return F


def ks_one_sample(sample, cdf: Callable) -> KSResult:
    """Kolmogorov-Smirnov distance to a continuous ``cdf``.

    The p-value uses the asymptotic Kolmogorov distribution.
    """
    xs = np.sort(_values(sample))
    n = xs.size
    F = np.asarray(cdf(xs), dtype=np.float64)
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    d = float(min(max(d, 0.0), 1.0))
    if xs[0] == xs[-1]:
        warnings.warn("one-sample KS on a constant sample", DegenerateSampleWarning, stacklevel=2)
    return KSResult(d, float(_sps.kstwobign.sf(np.sqrt(n) * d)))


def _ks_from_labels(labels: np.ndarray, last_of_tie: np.ndarray, na: int, nb: int) -> float:
    ca = np.cumsum(labels)[last_of_tie]
    # positions counted from 1; labels are 1 for sample a
    cb = (last_of_tie + 1) - ca
    return float(np.max(np.abs(ca / na - cb / nb)))


def ks_two_sample(a, b, n_resamples: int = 999, rng=None) -> KSResult:
    """Two-sample KS distance with a permutation p-value.

    ``p = (1 + #{D_perm >= D_obs}) / (n_resamples + 1)``.  With
    ``n_resamples=0`` the asymptotic Kolmogorov p-value is reported instead.
    ``rng`` (an :class:`~bmid.paths.RngStream` or Generator) drives the
    permutations; it defaults to a fixed stream so results are reproducible.
    """
    xa = _values(a)
    xb = _values(b)
    na, nb = xa.size, xb.size
    pooled = np.concatenate((xa, xb))
    order = np.argsort(pooled, kind="stable")
    sorted_vals = pooled[order]
    last_of_tie = np.flatnonzero(np.append(sorted_vals[1:] != sorted_vals[:-1], True))
    labels = np.concatenate((np.ones(na, np.int64), np.zeros(nb, np.int64)))
    d_obs = _ks_from_labels(labels[order], last_of_tie, na, nb)

    if sorted_vals[0] == sorted_vals[-1]:
        warnings.warn("two-sample KS on constant, identical samples", DegenerateSampleWarning, stacklevel=2)
        return KSResult(0.0, 1.0)

    if n_resamples <= 0:
        en = np.sqrt(na * nb / (na + nb))
        return KSResult(d_obs, float(_sps.kstwobign.sf(en * d_obs)))

    gen = _as_generator(rng) if rng is not None else np.random.Generator(np.random.Philox(0))
    # a tiny slack keeps ties of equal statistics counted despite rounding
    thresh = d_obs - 1e-12
    hits = 0
    perm = labels.copy()
    for _ in range(n_resamples):
        gen.shuffle(perm)
        if _ks_from_labels(perm, last_of_tie, na, nb) >= thresh:
            hits += 1
    return KSResult(d_obs, (1 + hits) / (n_resamples + 1))


def mean_with_ci(sample, z: float = 1.96) -> tuple[float, float]:
    """Sample mean and ``z`` standard errors (``ddof=1``)."""
    x = _values(sample)
    if x.size < 2:
        raise ValueError("need at least two values for a standard error")
    return float(np.mean(x)), float(z * np.std(x, ddof=1) / np.sqrt(x.size))


def wasserstein1(a, b) -> float:
    """Exact W1 distance between two empirical distributions, ``int |F_a - F_b|``."""
    xa = np.sort(_values(a))
    xb = np.sort(_values(b))
    if xa.size == xb.size:
        return float(np.mean(np.abs(xa - xb)))
    pooled = np.sort(np.concatenate((xa, xb)))
    widths = np.diff(pooled)
    fa = np.searchsorted(xa, pooled[:-1], side="right") / xa.size
    fb = np.searchsorted(xb, pooled[:-1], side="right") / xb.size
    return float(np.sum(np.abs(fa - fb) * widths))
