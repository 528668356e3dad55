import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultbench.datasets import SignalRecord, window_records
from faultbench.errors import ConfigurationError, EmptyDatasetError
from faultbench.evaluation import SplitPlan, random_indices, split, take_per_class


def make_records(lengths, classes):
    return [SignalRecord(np.arange(n, dtype=float) + 1e6 * i, 1000.0, "t", f"r{i}", "c",
                         class_id=c) for i, (n, c) in enumerate(zip(lengths, classes))]


def check_split(records, plan):
    res = split(records, plan)
    ds = res.dataset
    train, test = set(res.train.tolist()), set(res.test.tolist())
    assert not train & test
    assert train | test == set(range(len(ds)))
    # windows never overlap within a record
    for rid in np.unique(ds.record_index):
        offs = np.sort(ds.offsets[ds.record_index == rid])
        assert np.all(np.diff(offs) >= 1024)
        np.testing.assert_array_equal(ds.windows[ds.record_index == rid][:, 0] % 1e6,
                                      ds.offsets[ds.record_index == rid])
    if plan.strategy == "order":
        for rid in np.unique(ds.record_index):
            mine = ds.record_index == rid
            tr = ds.offsets[mine & np.isin(np.arange(len(ds)), res.train)]
            te = ds.offsets[mine & np.isin(np.arange(len(ds)), res.test)]
            if len(tr) and len(te):
                assert tr.max() + 1024 <= te.min()
                cut = int(np.floor(plan.train_fraction * len(records[rid]) + 1e-9))
                assert tr.max() + 1024 <= cut <= te.min()
    if plan.strategy == "random":
        assert len(ds) == sum(len(r) // 1024 for r in records)
        assert len(res.train) == int(np.floor(plan.train_fraction * len(ds) + 1e-9))
    return res


def test_thousand_randomized_trials():
    rng = np.random.default_rng(2024)
    done = 0
    while done < 1000:
        n_rec = rng.integers(1, 6)
        lengths = rng.integers(1024 * 3, 1024 * 30, n_rec)
        classes = rng.integers(0, 3, n_rec)
        plan = SplitPlan(rng.choice(["random", "order", "kfold_time"]),
                         float(rng.uniform(0.3, 0.9)), int(rng.integers(2, 5)),
                         seed=int(rng.integers(1 << 30)))
        try:
            check_split(make_records(lengths, classes), plan)
        except EmptyDatasetError:
            continue
        done += 1


def test_random_split_of_hundred():
    records = make_records([1024 * 100], [0])
    res = split(records, SplitPlan("random", seed=3))
    assert (len(res.train), len(res.test)) == (80, 20)
    res2 = split(records, SplitPlan("random", seed=3))
    np.testing.assert_array_equal(res.train, res2.train)
    assert not np.array_equal(split(records, SplitPlan("random", seed=4)).train, res.train)


def test_order_split_counts_and_straddle():
    # 10.5 windows: the cut at 80% falls inside window 8, which is dropped
    rec = make_records([int(1024 * 10.5)], [0])
    res = split(rec, SplitPlan("order"))
    cut = int(0.8 * 1024 * 10.5)
    assert res.dataset.offsets[res.train].max() + 1024 <= cut
    assert res.dataset.offsets[res.test].min() == cut
    assert len(res.train) == cut // 1024
    assert len(res.test) == (len(rec[0]) - cut) // 1024


def test_kfold_holds_out_last_fold_by_default():
    rec = make_records([1024 * 40], [0])
    res = split(rec, SplitPlan("kfold_time", fold_count=4))
    assert res.dataset.offsets[res.test].min() >= 30 * 1024
    res0 = split(rec, SplitPlan("kfold_time", fold_count=4, fold=0))
    assert res0.dataset.offsets[res0.test].max() < 10 * 1024


def test_missing_class_is_a_warning():
    recs = make_records([1024 * 10, 1024 * 2], [0, 1])
    res = split(recs, SplitPlan("order", train_fraction=0.6), class_names=("a", "b"))
    assert any("b" in w for w in res.warnings)


def test_too_few_windows():
    with pytest.raises(EmptyDatasetError):
        split(make_records([1024 * 5, 1024], [0, 1]), SplitPlan("random"))
    with pytest.raises(EmptyDatasetError):
        split(make_records([1500], [0]), SplitPlan("order"))
    with pytest.raises(EmptyDatasetError):
        split([], SplitPlan())


def test_plan_validation():
    for kwargs in ({"strategy": "stratified"}, {"train_fraction": 1.0},
                   {"train_fraction": 0.0}, {"fold_count": 1}, {"fold": 4}):
        with pytest.raises(ConfigurationError):
            SplitPlan(**kwargs)
    ds = window_records(make_records([4096], [0]))
    with pytest.raises(ConfigurationError):
        split(ds, SplitPlan("order"))


@settings(max_examples=200)
@given(st.integers(2, 500), st.floats(0.05, 0.95), st.integers(0, 2 ** 31))
def test_random_indices_partition(n, fraction, seed):
    tr, te = random_indices(n, fraction, seed)
    assert len(tr) + len(te) == n
    assert not set(tr) & set(te)
    assert np.all(np.diff(tr) > 0) and np.all(np.diff(te) > 0)


def test_take_per_class_earliest_and_shortfall():
    labels = np.array([0, 1, 0, 1, 0, 1, 0])
    offsets = np.array([6, 5, 4, 3, 2, 1, 0])
    got = take_per_class(labels, np.arange(7), (2, 1), order=offsets)
    np.testing.assert_array_equal(got, [4, 5, 6])
    with pytest.raises(EmptyDatasetError, match="class 1"):
        take_per_class(labels, np.arange(7), (1, 4))
