import math

import numpy as np
import pytest

from bmid.lattice import (
    EventCapExceeded,
    JumpTrajectory,
    LatticeParams,
    build_coupling,
    simulate_szu,
    simulate_xn_direct,
    szu_functionals,
    xn_functionals,
)
from bmid.paths import RngStream
from bmid.stats import ks_one_sample, ks_two_sample
from bmid.harness.samples import LATTICE_SIGMA, half_normal_cdf, lattice_sample


def test_params_validation():
    p = LatticeParams(3, 1.0, 0.5)
    assert p.step == 0.125 and p.walk_rate == 64 and p.drift_scale == 8
    for bad in [dict(n=-1, K=0, v=0), dict(n=2, K=-1, v=0), dict(n=2, K=0, v=math.nan),
                dict(n=2, K=0, v=0, t_max=0.0)]:
        with pytest.raises(ValueError):
            LatticeParams(**bad)


def test_jump_trajectory_is_cadlag():
    tr = JumpTrajectory(np.array([0.2, 0.5]), np.array([1.0, 0.0]), 0.0, 1.0)
    assert tr(0.0) == 0.0
    assert tr(0.2) == 1.0
    assert tr(0.4999) == 1.0
    assert tr(0.5) == 0.0
    np.testing.assert_array_equal(tr(np.array([0.1, 0.3, 0.9])), [0, 1, 0])
    assert tr.terminal == 0.0
    np.testing.assert_array_equal(tr.increments(), [1, -1])
    with pytest.raises(ValueError):
        JumpTrajectory(np.array([0.5, 0.2]), np.array([1.0, 0.0]), 0.0, 1.0)


def test_szu_without_drift():
    p = LatticeParams(3, 0.0, 0.0)
    res = simulate_szu(p, RngStream(1))
    assert len(res.Z) == 0
    np.testing.assert_array_equal(res.U.values, res.S.values)
    assert res.V(np.linspace(0, 1, 11)).max() == 0.0
    assert res.L.terminal > 0


def test_szu_constant_velocity_poisson():
    # n = 0, K = 0, v = 1: V = -1 forever, Z is a unit-rate Poisson process of -1 jumps
    p = LatticeParams(0, 0.0, 1.0, t_max=1.0)
    counts = []
    for i in range(4000):
        res = simulate_szu(p, RngStream(2, i))
        inc = res.Z.increments()
        assert np.all(inc == -1.0)
        counts.append(len(inc))
        assert res.final_state.vel == -1.0
    assert abs(np.mean(counts) - 1.0) < 3 * math.sqrt(1 / 4000)


@pytest.mark.parametrize("K,v", [(1.0, 0.0), (2.0, 1.0), (1.0, -1.0), (0.0, 0.5)])
def test_szu_invariants(K, v):
    p = LatticeParams(4, K, v)
    h = p.step
    for i in range(5):
        res = simulate_szu(p, RngStream(3, i))
        for tr in (res.S, res.Z, res.U):
            assert np.all(np.abs(np.abs(tr.increments()) - h) < 1e-15)
        u = np.concatenate(([0.0], res.U.values))
        m = np.maximum.accumulate(np.maximum(-u, 0.0))
        np.testing.assert_array_equal(res.M(res.U.event_times), m[1:])
        x = res.X.values
        assert np.all(x >= 0)
        np.testing.assert_allclose(x / h, np.round(x / h), atol=1e-9)
        knots = res.V.knot_values
        assert np.all(knots >= -v - 1e-12)
        assert np.all(np.diff(res.L.knot_values) >= 0)
        # occupation bookkeeping
        total = res.sojourns.sum()
        assert total == pytest.approx(res.L.terminal / p.drift_scale, rel=1e-12)
        assert res.final_state.vel == pytest.approx(-v + K * res.L.terminal, rel=1e-12, abs=1e-12)


def test_szu_event_cap():
    with pytest.raises(EventCapExceeded):
        simulate_szu(LatticeParams(4, 1.0, 0.0, event_cap=10), RngStream(4))


def test_xn_invariants_and_self_loops():
    p = LatticeParams(4, 1.0, 0.5)
    for i in range(5):
        res = simulate_xn_direct(p, RngStream(5, i))
        x = res.X.values
        assert np.all(x >= 0)
        loops = res.X.self_loops
        prev = np.concatenate(([0.0], x[:-1]))
        assert np.all(x[loops] == 0) and np.all(prev[loops] == 0)
        steps = np.abs(np.diff(np.concatenate(([0.0], x))))
        assert np.all((steps == p.step) | loops)
        assert res.n_self_loops == loops.sum() > 0
        assert np.all(res.V.knot_values >= -p.v - 1e-12)


def test_xn_exponential_race_direction():
    # K = 0, v = -3: V = 3 > 0 constant; moves from i > 0 go up with
    # probability (4^n + 2^n V) / (2 4^n + 2^n V)
    n, V = 2, 3.0
    p = LatticeParams(n, 0.0, -V, t_max=400.0)
    res = simulate_xn_direct(p, RngStream(6))
    x = np.concatenate(([0.0], res.X.values))
    src, dst = x[:-1], x[1:]
    away = src > 0
    ups = np.sum(dst[away] > src[away])
    total = away.sum()
    expect = (4**n + 2**n * V) / (2 * 4**n + 2**n * V)
    assert abs(ups / total - expect) < 4 * math.sqrt(expect * (1 - expect) / total)


def test_streaming_matches_recorded():
    p = LatticeParams(4, 1.0, 0.5)
    res = simulate_szu(p, RngStream(7))
    obs = szu_functionals(p, RngStream(7), [0.25, 1.0])
    for row, t in zip(obs, (0.25, 1.0)):
        assert row[0] == res.S(t) and row[1] == res.Z(t) and row[3] == res.M(t)
        assert row[4] == pytest.approx(res.L(t), rel=1e-12)
        assert row[5] == pytest.approx(res.V(t), rel=1e-12, abs=1e-12)
        assert row[6] == res.X(t)
    xres = simulate_xn_direct(p, RngStream(8))
    xo = xn_functionals(p, RngStream(8), [1.0])
    assert xo[0, 0] == xres.X.terminal
    assert xo[0, 1] == pytest.approx(xres.L.terminal, rel=1e-12)


def test_reflected_walk_half_normal():
    # K = 0, v = 0 at n = 6 over 10^5 paths; the walk has variance 2t
    vals, _ = lattice_sample("xn", LatticeParams(6, 0.0, 0.0), 1234, [1.0], 100_000)
    assert ks_one_sample(vals[:, 0, 0], half_normal_cdf(LATTICE_SIGMA)).statistic < 0.02


@pytest.mark.parametrize("v", [1.0, 0.0, -1.0, 2.5])
def test_coupling_inequalities(v):
    p = LatticeParams(4, 1.0, v)
    for i in range(10):
        b = build_coupling(p, RngStream(9, i))
        assert b.violations() == {"z_increment": 0, "l_sandwich": 0, "reflected_order": 0}
        # sandwich on arbitrary pairs of event times follows from monotone differences
        assert np.all(np.diff(b.L_prime - b.L) >= -1e-12)
        assert np.all(np.diff(b.L) >= 0)
        zdiff = b.Z(b.times) - b.Z_prime(b.times)
        assert np.all(np.diff(zdiff) >= 0)


def test_coupling_without_drift():
    b = build_coupling(LatticeParams(3, 1.0, 0.0), RngStream(10))
    assert len(b.Z_prime) == 0
    t = b.times
    np.testing.assert_array_equal(b.U_prime(t), b.S(t))
    m = np.maximum.accumulate(np.maximum(-b.S(t), 0))
    np.testing.assert_array_equal(b.M_prime(t), m)


def test_coupling_primary_matches_szu_law():
    # the primary part of the coupling is the (S, Z) system itself
    p = LatticeParams(3, 1.0, 1.0)
    a = np.array([build_coupling(p, RngStream(11, i)).U.terminal for i in range(3000)])
    b = np.array([simulate_szu(p, RngStream(12, i)).U.terminal for i in range(3000)])
    assert ks_two_sample(a, b, n_resamples=0).pvalue > 0.001
