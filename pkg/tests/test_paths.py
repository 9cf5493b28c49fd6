import numpy as np
import pytest

from bmid.paths import GridPath, RngStream, TimeGrid, running_signed_min, sample_brownian, skorohod_map


def path(values, t_max=1.0):
    values = np.asarray(values, dtype=float)
    return GridPath(TimeGrid(t_max, len(values) - 1), values)


def test_grid_basics():
    g = TimeGrid(2.0, 4)
    assert g.dt == 0.5
    assert g.size == 5
    np.testing.assert_array_equal(g.times(), [0, 0.5, 1, 1.5, 2])
    assert g.coarsen(2) == TimeGrid(2.0, 2)
    with pytest.raises(ValueError):
        g.coarsen(3)


@pytest.mark.parametrize("steps", [0, -1, 1.5])
def test_grid_rejects_bad_steps(steps):
    with pytest.raises(ValueError):
        TimeGrid(1.0, steps)


def test_gridpath_validation():
    g = TimeGrid(1.0, 2)
    with pytest.raises(ValueError):
        GridPath(g, [0.0, 1.0])
    with pytest.raises(ValueError):
        GridPath(g, [0.0, np.nan, 1.0])
    p = GridPath(g, [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        p.values[0] = 5.0


def test_rng_stream_determinism_and_independence():
    a = RngStream(7, 3).generator().standard_normal(100)
    b = RngStream(7, 3).generator().standard_normal(100)
    c = RngStream(7, 4).generator().standard_normal(100)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.4
    with pytest.raises(ValueError):
        RngStream(-1)


def test_brownian_single_step():
    g = TimeGrid(0.25, 1)
    p = sample_brownian(g, RngStream(1))
    assert p.values[0] == 0.0
    draws = np.array([sample_brownian(g, RngStream(1, i)).end for i in range(4000)])
    assert abs(draws.var() - 0.25) < 0.03


def test_brownian_repeatable():
    g = TimeGrid(1.0, 64)
    np.testing.assert_array_equal(sample_brownian(g, RngStream(5, 9)).values,
                                  sample_brownian(g, RngStream(5, 9)).values)


def test_brownian_terminal_variance():
    # 10^5 paths; the terminal value is N(0, 1) for any step count
    g = TimeGrid(1.0, 8)
    gen = RngStream(11).generator()
    ends = np.array([sample_brownian(g, gen).end for _ in range(100_000)])
    assert abs(ends.var(ddof=1) - 1.0) < 0.02


def test_running_signed_min_examples():
    np.testing.assert_array_equal(running_signed_min(path([0, 1, -1, 0.5])).values, [0, 0, 1, 1])
    assert np.all(running_signed_min(path([0, 2, 3, 0.1])).values == 0)
    g = TimeGrid(1.0, 10)
    m = running_signed_min(GridPath(g, -g.times()))
    np.testing.assert_array_equal(m.values, g.times())
    assert running_signed_min(path([-2.0, 1.0])).values[0] == 2.0


def test_skorohod_example():
    x, m = skorohod_map(path([0, 1, -1, 0.5]))
    np.testing.assert_array_equal(m.values, [0, 0, 1, 1])
    np.testing.assert_array_equal(x.values, [0, 1, 0, 1.5])
    f = path([0, 0.3, 2.0, 1.0])
    x, m = skorohod_map(f)
    np.testing.assert_array_equal(x.values, f.values)
    assert np.all(m.values == 0)


def test_skorohod_properties_on_brownian_paths():
    g = TimeGrid(1.0, 512)
    for i in range(20):
        f = sample_brownian(g, RngStream(3, i))
        x, m = skorohod_map(f)
        assert np.all(x.values >= 0)
        assert np.all(np.diff(m.values) >= 0)
        np.testing.assert_array_equal(x.values, f.values + m.values)
        rises = np.flatnonzero(np.diff(m.values) > 0) + 1
        assert np.all(x.values[rises] == 0.0)
        x2, m2 = skorohod_map(x)
        assert np.all(m2.values == 0)
        np.testing.assert_array_equal(x2.values, x.values)
