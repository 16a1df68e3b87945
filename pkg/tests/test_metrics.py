import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from tristat.errors import ContractError
from tristat.metrics import WarpingPath, all_metrics, dtw, dtw_batch, mse_mae, shape_metrics, tdi

from dtw_oracle import brute_costs, preferred_optimal_path, sequences

series = hnp.arrays(np.float64, st.integers(1, 7), elements=st.floats(-5, 5, allow_nan=False))


def test_identical_is_zero_and_diagonal():
    cost, path = dtw([1.0, 3.0, 2.0], [1.0, 3.0, 2.0])
    assert cost == 0.0
    assert path.pairs == ((0, 0), (1, 1), (2, 2))
    assert tdi(path, 3) == 0.0


def test_worked_example():
    cost, path = dtw([0, 1, 2], [0, 2])
    assert cost == 1.0
    assert path.pairs == ((0, 0), (1, 1), (2, 1))
    assert tdi(path, 3) == pytest.approx(1 / 9)


def test_empty_input():
    with pytest.raises(ContractError):
        dtw([], [1.0])


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cost_matches_enumeration(m, n):
    ys, yh = sequences(m), sequences(n)
    want = brute_costs(ys, yh)
    got = dtw_batch(np.repeat(ys, len(yh), axis=0), np.tile(yh, (len(ys), 1)), with_paths=False)
    np.testing.assert_array_equal(got, want)


@pytest.mark.parametrize("m, n", [(3, 2), (3, 3), (2, 4), (4, 3)])
def test_path_follows_tie_rule(m, n):
    for y in sequences(m):
        for yh in sequences(n):
            want, best = preferred_optimal_path(y, yh)
            cost, path = dtw(y, yh)
            assert cost == best
            assert path.pairs == want


@settings(max_examples=80, deadline=None)
@given(series, series)
def test_symmetry_and_validity(a, b):
    c1, p1 = dtw(a, b)
    c2, _ = dtw(b, a)
    assert c1 == pytest.approx(c2, rel=1e-12, abs=1e-12)
    assert p1.is_valid(len(a), len(b))
    assert c1 == pytest.approx(sum((a[i] - b[j]) ** 2 for i, j in p1), rel=1e-12, abs=1e-12)


def test_invalid_paths_detected():
    assert not WarpingPath(((0, 0), (2, 1))).is_valid(3, 2)
    assert not WarpingPath(((0, 1), (1, 1))).is_valid(2, 2)


def test_mse_mae():
    y = np.random.default_rng(0).normal(size=(3, 4, 2))
    assert mse_mae(y, y) == (0.0, 0.0)
    assert mse_mae(y + 1, y) == pytest.approx((1.0, 1.0))
    p = np.random.default_rng(1).normal(size=y.shape)
    se = ae = 0.0
    for v in np.nditer(p - y):
        se += float(v) ** 2
        ae += abs(float(v))
    assert mse_mae(p, y) == pytest.approx((se / y.size, ae / y.size), rel=1e-12)
    with pytest.raises(ContractError):
        mse_mae(y, y[:1])


def test_shape_metrics_loop_oracle():
    rng = np.random.default_rng(2)
    y, p = rng.normal(size=(3, 6, 2)), rng.normal(size=(3, 6, 2))
    dtws, tdis = [], []
    for s in range(3):
        for c in range(2):
            cost, path = dtw(y[s, :, c], p[s, :, c])
            dtws.append(cost)
            tdis.append(tdi(path, 6))
    got = shape_metrics(p, y, chunk=4)
    assert got == pytest.approx((np.mean(dtws), np.mean(tdis)), rel=1e-12)


def test_perfect_predictor_all_zero():
    y = np.random.default_rng(3).normal(size=(4, 5, 2))
    assert all(v == 0.0 for v in all_metrics(y, y).values())
