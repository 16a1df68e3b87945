import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tristat.data import (BENCHMARKS, DatasetSpec, benchmark_spec, few_shot_subset, load_csv, load_registry,
                          make_batches, split_and_normalize, split_borders, split_mode_for,
                          split_window_counts, synthetic_series, synthetic_split, write_csv)
from tristat.errors import DataLoadError, SplitError


def _spec(path, channels=3, mode="ratio_70_10_20", name="toy"):
    return DatasetSpec(name, str(path), channels, "1 hour", mode, "toy data")


def test_load_small_csv(tmp_path):
    p = tmp_path / "toy.csv"
    p.write_text("date,a,b,c\n2020-01-01 00:00,1,2,3\n2020-01-01 01:00,4,5,6\n2020-01-01 02:00,7,8,9.5\n")
    values, stamps = load_csv(_spec(p))
    assert values.shape == (3, 3)
    assert stamps[0] == "2020-01-01 00:00"
    assert values[2, 2] == 9.5


def test_non_numeric_cell_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("date,a,b,c\nt0,1,2,3\nt1,4,abc,6\n")
    with pytest.raises(DataLoadError, match=r"bad.csv:3"):
        load_csv(_spec(p))


@pytest.mark.parametrize("body, pattern", [
    ("date,a,b\nt0,1,2\n", "expected 3"),
    ("date,a,b,c\nt0,1,2,nan\n", "NaN"),
    ("date,a,b,c\nt0,1,2\n", "expected 3 values"),
])
def test_malformed_csv(tmp_path, body, pattern):
    p = tmp_path / "m.csv"
    p.write_text(body)
    with pytest.raises(DataLoadError, match=pattern):
        load_csv(_spec(p))


def test_missing_file(tmp_path):
    with pytest.raises(DataLoadError, match="not found"):
        load_csv(_spec(tmp_path / "nope.csv"))


def test_registry_roundtrip(tmp_path):
    write_csv(tmp_path / "s.csv", synthetic_series(50, 2))
    (tmp_path / "reg.csv").write_text("name,path,split_mode,description\nS,s.csv,ratio_70_10_20,two sines\n")
    reg = load_registry(tmp_path / "reg.csv")
    assert reg["S"].channels == 2
    assert load_csv(reg["S"])[0].shape == (50, 2)


def test_split_modes_by_name():
    assert split_mode_for("ETTh2") == "ett_hour"
    assert split_mode_for("ETTm1") == "ett_minute"
    assert split_mode_for("Weather") == "ratio_70_10_20"
    assert benchmark_spec("ETTh1").channels == 7


def test_ett_hour_borders():
    starts, ends = split_borders(17420, "ett_hour", 96)
    assert ends == [8640, 11520, 14400]
    assert starts == [0, 8544, 11424]


def test_exchange_counts_match_published():
    _, _, _, _, rows = BENCHMARKS["Exchange"]
    assert split_window_counts(rows, "ratio_70_10_20", 96, 96) == (5120, 665, 1422)


def test_constant_channel_is_guarded():
    raw = synthetic_series(400, 2)
    raw[:, 1] = 5.0
    split = split_and_normalize(raw, _spec("", 2), 24, 12)
    assert split.std_guarded.tolist() == [False, True]
    assert split.std[1] == 1.0
    assert np.all(split.test.values[:, 1] == 0.0)


def test_too_short_series():
    with pytest.raises(SplitError):
        split_and_normalize(np.zeros((100, 1)), _spec("", 1), 96, 96)


@settings(max_examples=25, deadline=None)
@given(st.integers(300, 900), st.integers(8, 48), st.integers(4, 32))
def test_no_leakage_and_counts(rows, L, T):
    raw = synthetic_series(rows, 2, seed=rows)
    spec = _spec("", 2)
    try:
        split = split_and_normalize(raw, spec, L, T)
    except SplitError:
        return
    counts = split_window_counts(rows, spec.split_mode, L, T)
    assert (len(split.train), len(split.val), len(split.test)) == counts
    _, ends = split_borders(rows, spec.split_mode, L)
    # the last target row of a region stays inside it
    assert split.train.origins.max() + L + T <= ends[0]
    assert split.val.origins.max() + L + T <= ends[1]
    assert split.test.origins.max() + L + T <= ends[2]
    # targets never reach back into an earlier region
    assert split.val.origins.min() + L >= ends[0]
    assert split.test.origins.min() + L >= ends[1]


def test_denormalize_roundtrip():
    raw = synthetic_series(600, 3, seed=4)
    split = split_and_normalize(raw, _spec(""), 48, 24)
    for ws in (split.train, split.val, split.test):
        for i in (0, len(ws) // 2, len(ws) - 1):
            w = ws[i]
            x, y = w.denormalize()
            o = w.origin_index
            np.testing.assert_allclose(x, raw[o:o + 48], atol=1e-9)
            np.testing.assert_allclose(y, raw[o + 48:o + 72], atol=1e-9)


def test_train_statistics_only():
    raw = synthetic_series(600, 2, seed=1)
    raw[450:] += 100.0                          # shift confined to val/test rows
    split = split_and_normalize(raw, _spec("", 2), 24, 12)
    np.testing.assert_allclose(split.mean, raw[:420].mean(axis=0))


@pytest.mark.parametrize("n, frac, keep", [(100, 0.10, 10), (7, 0.10, 1), (100, 1.0, 100), (30, 0.5, 15)])
def test_few_shot_prefix(n, frac, keep):
    _, split = synthetic_split(rows=2400, channels=1)
    sub = few_shot_subset(split.train.subset(np.arange(n)), frac)
    assert len(sub) == keep
    np.testing.assert_array_equal(sub.positions, split.train.positions[:keep])


def test_few_shot_rejects_bad_fraction():
    _, split = synthetic_split(rows=800, channels=1, lookback=24, horizon=12)
    with pytest.raises(ValueError):
        few_shot_subset(split.train, 0.0)


def test_batches():
    assert [len(b) for b in make_batches(70, 32)] == [32, 32, 6]
    assert np.concatenate(list(make_batches(70, 32))).tolist() == list(range(70))
    a = np.concatenate(list(make_batches(70, 32, shuffle=True, seed=5)))
    b = np.concatenate(list(make_batches(70, 32, shuffle=True, seed=5)))
    np.testing.assert_array_equal(a, b)
    assert sorted(a.tolist()) == list(range(70))


def test_synthetic_split_counts():
    spec, split = synthetic_split(rows=2400, channels=3)
    assert (len(split.train), len(split.val), len(split.test)) == split_window_counts(2400, spec.split_mode, 96, 96)
    assert split.train.arrays()[0].shape == (len(split.train), 96, 3)
