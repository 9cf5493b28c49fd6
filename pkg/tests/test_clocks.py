import math

import numpy as np
import pytest

from bmid.clocks import (
    _invert_positive_part,
    geometric_exponential_sum,
    invert_integrated_intensity,
    sample_poisson_events,
)
from bmid.harness.lemmas import clock_cases, poisson_sup_deviation, quadrature_inverse
from bmid.paths import RngStream
from bmid.stats import ks_one_sample, ks_two_sample


def test_poisson_zero_rate_and_validation():
    assert sample_poisson_events(0.0, 1.0, RngStream(1)).size == 0
    with pytest.raises(ValueError):
        sample_poisson_events(-1.0, 1.0, RngStream(1))
    with pytest.raises(ValueError):
        sample_poisson_events(1.0, 0.0, RngStream(1))


def test_poisson_times_sorted_in_range():
    t = sample_poisson_events(500.0, 2.0, RngStream(2))
    assert np.all(np.diff(t) > 0)
    assert t[0] > 0 and t[-1] <= 2.0


def test_poisson_mean_count():
    rate = 4.0**3
    gen = RngStream(3).generator()
    counts = np.array([sample_poisson_events(rate, 1.0, gen).size for _ in range(10_000)])
    assert abs(counts.mean() - rate) < 3 * math.sqrt(rate / 10_000)


def test_flln_sup_deviation_is_exact():
    # N jumps at 0.25 and 0.5 with h = 1/2 and alpha = 1: the largest gap
    # is just before the first jump (0.25) or at the end (|1 - 1| = 0)
    assert poisson_sup_deviation(np.array([0.25, 0.5]), 1, 1.0, 1.0) == pytest.approx(0.5)
    assert poisson_sup_deviation(np.array([]), 1, 1.0, 1.0) == 1.0


def test_inversion_constant_rate():
    assert invert_integrated_intensity(0.0, 0.0, 4.0, 2.0) == 0.5
    assert invert_integrated_intensity(-3.0, 0.0, 1.0, 2.0) == 0.5


def test_inversion_linear_from_zero():
    c, target = 3.0, 1.7
    assert invert_integrated_intensity(0.0, c, 0.0, target) == pytest.approx(math.sqrt(2 * target / c), rel=1e-14)


def test_inversion_split_example():
    # split at s* = 1 with area 1.5; the remaining 0.5 solves t + t^2/2 = 0.5
    t = invert_integrated_intensity(-1.0, 1.0, 1.0, 2.0)
    assert t == pytest.approx(math.sqrt(2.0), abs=1e-14)
    assert abs(t - quadrature_inverse(-1.0, 1.0, 1.0, 2.0)) < 1e-10


def test_inversion_zero_intensity():
    assert invert_integrated_intensity(0.0, 0.0, 0.0, 1.0) == math.inf


def test_inversion_validation():
    with pytest.raises(ValueError):
        invert_integrated_intensity(1.0, 0.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        invert_integrated_intensity(1.0, 0.0, 1.0, 0.0)


def test_inversion_matches_quadrature():
    for l0, sl, b, tg in clock_cases(300, 5):
        assert abs(invert_integrated_intensity(l0, sl, b, tg) - quadrature_inverse(l0, sl, b, tg)) < 1e-10


def test_positive_part_inversion():
    # max(0, -1 + 2 s): zero until s = 1/2, then area (s - 1/2)^2
    assert _invert_positive_part(-1.0, 2.0, 0.25) == pytest.approx(1.0, abs=1e-14)
    assert _invert_positive_part(-1.0, 0.0, 1.0) == math.inf
    assert _invert_positive_part(2.0, 0.0, 1.0) == 0.5


def test_dominance_under_shared_uniform():
    # intensity a1 <= a2 pointwise with the same Exp(1) draw: the first
    # event under a1 never comes earlier
    gen = RngStream(6).generator()
    for _ in range(2000):
        l0, sl = gen.uniform(-5, 5, 2)
        b1 = gen.uniform(0, 2)
        b2 = b1 + gen.uniform(0, 2)
        e = gen.exponential()
        assert invert_integrated_intensity(l0, sl, b1, e) >= invert_integrated_intensity(l0, sl, b2, e)


def test_superposition_of_constant_channels():
    gen = RngStream(7).generator()
    first = lambda r: sample_poisson_events(r, 50.0, gen)[0]
    merged = np.array([min(first(1.5), first(2.5)) for _ in range(100_000)])
    single = np.array([first(4.0) for _ in range(100_000)])
    assert ks_two_sample(merged, single, n_resamples=0).pvalue > 0.001


def test_geometric_sum_p1_is_single_exponential():
    x = geometric_exponential_sum(1.0, 3.0, RngStream(8), size=20_000)
    assert ks_one_sample(x, lambda t: -np.expm1(-3.0 * t)).pvalue > 0.001
    assert isinstance(geometric_exponential_sum(1.0, 3.0, RngStream(8)), float)


def test_geometric_sum_law():
    x = geometric_exponential_sum(0.5, 2.0, RngStream(9), size=100_000)
    assert ks_one_sample(x, lambda t: -np.expm1(-t)).statistic < 0.006
    y = geometric_exponential_sum(0.25, 8.0, RngStream(10), size=100_000)
    assert abs(y.mean() - 0.5) < 0.01


@pytest.mark.parametrize("p,lam", [(0.0, 1.0), (1.5, 1.0), (0.5, 0.0)])
def test_geometric_sum_validation(p, lam):
    with pytest.raises(ValueError):
        geometric_exponential_sum(p, lam, RngStream(1))
