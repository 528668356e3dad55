import numpy as np
import pytest

from faultbench.autograd.tensor import Tensor
from faultbench.datasets import SynthSpec, generate_synthetic
from faultbench.errors import ConfigurationError, EmptyDatasetError, NonFiniteError
from faultbench.evaluation import (
    RunTask,
    SplitPlan,
    TrainConfig,
    batch_indices,
    evaluate,
    read_summary_csv,
    read_trace_csv,
    repeat_runs,
    split,
    summarize,
    train_run,
    write_summary_csv,
    write_trace_csv,
)
from faultbench.models import build_model
from faultbench.preprocessing import PipelineSpec, PreparedData


@pytest.fixture(scope="module")
def data():
    recs = generate_synthetic(SynthSpec.default(3, noise_std=0.3, record_length=1024 * 20))
    res = split(recs, SplitPlan(seed=0))
    ds = res.dataset
    spec = PipelineSpec("fft", "zscore")
    train = PreparedData.from_windows(ds.windows[res.train], ds.labels[res.train], spec)
    test = PreparedData.from_windows(ds.windows[res.test], ds.labels[res.test], spec)
    return train, test


SMALL = {"mlp_widths": (32, 16, 16, 8, 8)}


def test_batches_cover_everything_and_merge_singletons():
    rng = np.random.default_rng(0)
    for n in (2, 63, 64, 65, 129, 200):
        batches = batch_indices(n, 64, rng)
        assert sorted(np.concatenate(batches).tolist()) == list(range(n))
        assert min(len(b) for b in batches) >= 2
    assert [len(b) for b in batch_indices(65, 64, rng)] == [65]
    assert [len(b) for b in batch_indices(129, 64, rng)] == [64, 65]
    assert [len(b) for b in batch_indices(130, 64, rng)] == [64, 64, 2]
    with pytest.raises(EmptyDatasetError):
        batch_indices(1, 64, rng)


def test_train_config_validation():
    with pytest.raises(ConfigurationError):
        TrainConfig(epochs=0)
    with pytest.raises(ConfigurationError):
        TrainConfig(batch_size=1)
    assert TrainConfig() == TrainConfig(100, 64, 1e-3)


def test_trace_length_range_and_determinism(data):
    train, test = data
    cfg = TrainConfig(epochs=4)
    runs = []
    for _ in range(2):
        model = build_model("mlp", train.sample_shape, 3, seed=5, **SMALL)
        runs.append(train_run(model, train, test, seed=5, config=cfg))
    a, b = runs
    assert len(a.trace) == 4 and not a.failed
    assert np.all((a.trace >= 0) & (a.trace <= 1))
    assert a.trace.tobytes() == b.trace.tobytes()
    np.testing.assert_array_equal(a.confusion, b.confusion)
    np.testing.assert_array_equal(a.confusion.sum(axis=1), np.bincount(test.labels, minlength=3))


def test_eval_is_pure(data):
    train, test = data
    model = build_model("cnn5", train.sample_shape, 3, seed=0,
                        cnn5_channels=(4, 4, 4, 4, 4), cnn5_hidden=8)
    model.train()
    first = evaluate(model, test, 3)
    np.testing.assert_array_equal(first, evaluate(model, test, 3))
    assert model.training


def test_divergence_marks_failed_repeat(data, monkeypatch):
    train, test = data
    model = build_model("mlp", train.sample_shape, 3, seed=0, **SMALL)
    calls = {"n": 0}
    real = model.forward

    def flaky(x):
        calls["n"] += 1
        if calls["n"] > 3:
            raise NonFiniteError("forced")
        return real(x)

    monkeypatch.setattr(model, "forward", flaky)
    rep = train_run(model, train, test, seed=0, config=TrainConfig(epochs=5, batch_size=32))
    assert rep.failed and rep.failed_epoch >= 1 and "forced" in rep.error
    assert len(rep.trace) == rep.failed_epoch - 1


def test_serial_and_concurrent_reports_match(data):
    train, test = data
    task = RunTask("mlp", train, test, 3, TrainConfig(epochs=2), dict(SMALL))
    serial = repeat_runs(task, repeats=3, base_seed=10, workers=1)
    parallel = repeat_runs(task, repeats=3, base_seed=10, workers=3)
    assert serial.seeds == parallel.seeds == [10, 11, 12]
    for a, b in zip(serial.repeats, parallel.repeats):
        assert a.trace.tobytes() == b.trace.tobytes()


def test_autoencoder_run_covers_both_phases(data):
    train, test = data
    model = build_model("ae", train.sample_shape, 3, seed=0, epochs=4,
                        ae1d_widths=(16, 8, 4), ae_classifier_hidden=4)
    rep = train_run(model, train, test, seed=0, config=TrainConfig(epochs=4))
    assert len(rep.trace) == 4
    assert np.isnan(rep.train_trace[:2]).all() and np.isfinite(rep.train_trace[2:]).all()


def test_csv_round_trip(tmp_path, data):
    train, test = data
    task = RunTask("mlp", train, test, 3, TrainConfig(epochs=3), dict(SMALL))
    report = repeat_runs(task, repeats=2)
    write_trace_csv(report, tmp_path / "trace.csv")
    back = read_trace_csv(tmp_path / "trace.csv")
    for i, rep in enumerate(report.repeats):
        assert back[i].tobytes() == rep.trace.tobytes()
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "repeat,seed,epoch,test_accuracy" and len(lines) == 7
    summary = summarize(report)
    write_summary_csv(summary, tmp_path / "summary.csv")
    got = read_summary_csv(tmp_path / "summary.csv")
    assert got["last_mean"] == summary["last_mean"] and got["repeats_ok"] == 2


def test_empty_sets_rejected(data):
    train, test = data
    model = build_model("mlp", train.sample_shape, 3, **SMALL)
    with pytest.raises(EmptyDatasetError):
        train_run(model, train.subset(np.array([], dtype=int)), test, 0)
