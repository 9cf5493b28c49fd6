import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from bmid.paths import RngStream
from bmid.stats import (
    DegenerateSampleWarning,
    EmpiricalSample,
    ecdf,
    ks_one_sample,
    ks_two_sample,
    mean_with_ci,
    wasserstein1,
)

samples = st.lists(st.integers(-5, 5).map(float), min_size=1, max_size=40)


def test_empirical_sample_validation():
    s = EmpiricalSample([1.0, 2.0], {"seed": 1})
    assert len(s) == 2 and np.asarray(s).sum() == 3.0
    with pytest.raises(ValueError):
        EmpiricalSample([1.0, np.inf])
    with pytest.raises(ValueError):
        EmpiricalSample([[1.0]])


def test_ecdf_right_continuous():
    F = ecdf([0.0, 1.0, 1.0, 2.0])
    assert F(-0.1) == 0.0
    assert F(0.0) == 0.25
    assert F(1.0) == 0.75
    assert F(1.999) == 0.75
    np.testing.assert_array_equal(F(np.array([2.0, 5.0])), [1.0, 1.0])


def test_ks_one_sample_exact_value():
    with pytest.warns(DegenerateSampleWarning):
        r = ks_one_sample([0.5], lambda x: np.clip(x, 0, 1))
    assert r.statistic == 0.5
    x = RngStream(1).generator().random(500)
    ours = ks_one_sample(x, lambda t: np.clip(t, 0, 1)).statistic
    assert ours == pytest.approx(sps.kstest(x, "uniform").statistic, abs=1e-14)


def test_ks_two_sample_separated_gaussians():
    gen = RngStream(2).generator()
    a = gen.normal(0, 1, 1000)
    b = gen.normal(3, 1, 1000)
    r = ks_two_sample(a, b, n_resamples=1999, rng=RngStream(3))
    assert r.statistic > 0.8
    assert r.pvalue < 0.001


def test_ks_two_sample_matches_scipy_with_ties():
    gen = RngStream(4).generator()
    a = np.round(gen.normal(size=300), 1)
    b = np.round(gen.normal(0.2, 1, size=450), 1)
    assert ks_two_sample(a, b, 0).statistic == pytest.approx(sps.ks_2samp(a, b).statistic, abs=1e-12)


def test_permutation_pvalue_reproducible_and_calibrated():
    gen = RngStream(5).generator()
    a, b = gen.normal(size=200), gen.normal(size=200)
    r1 = ks_two_sample(a, b, 199, rng=RngStream(6))
    r2 = ks_two_sample(a, b, 199, rng=RngStream(6))
    assert r1 == r2
    assert r1.pvalue > 0.01
    assert (r1.pvalue * 200) == pytest.approx(round(r1.pvalue * 200))


def test_degenerate_samples_flagged():
    with pytest.warns(DegenerateSampleWarning):
        r = ks_two_sample([1.0, 1.0], [1.0, 1.0, 1.0])
    assert r == (0.0, 1.0)
    with pytest.warns(DegenerateSampleWarning):
        ks_one_sample([2.0, 2.0], lambda x: np.clip(x / 4, 0, 1))
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


@pytest.mark.filterwarnings("ignore::bmid.stats.DegenerateSampleWarning", "ignore::RuntimeWarning")
@settings(max_examples=60, deadline=None)
@given(samples, samples)
def test_ks_two_sample_properties(a, b):
    d_ab = ks_two_sample(a, b, 0).statistic
    assert 0.0 <= d_ab <= 1.0
    assert d_ab == pytest.approx(ks_two_sample(b, a, 0).statistic, abs=1e-12)
    assert d_ab == pytest.approx(sps.ks_2samp(a, b).statistic, abs=1e-12)
    assert ks_two_sample(a, list(a), 0).statistic == 0.0


@settings(max_examples=60, deadline=None)
@given(samples, samples)
def test_wasserstein_matches_scipy(a, b):
    assert wasserstein1(a, b) == pytest.approx(sps.wasserstein_distance(a, b), abs=1e-9)
    assert wasserstein1(a, a) == 0.0


def test_wasserstein_shifted_gaussians():
    gen = RngStream(7).generator()
    w = wasserstein1(gen.normal(0, 1, 100_000), gen.normal(0.1, 1, 100_000))
    assert abs(w - 0.1) < 0.01


def test_mean_with_ci():
    m, hw = mean_with_ci([1.0, 2.0, 3.0, 4.0])
    assert m == 2.5
    assert hw == pytest.approx(1.96 * np.std([1, 2, 3, 4], ddof=1) / 2)
    with pytest.raises(ValueError):
        mean_with_ci([1.0])
