import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultbench.datasets import (
    SignalRecord,
    SynthSpec,
    available_datasets,
    burst_train,
    generate_synthetic,
    get_registry,
    load_dataset,
    read_table,
    verify_dataset,
    window_records,
)
from faultbench.datasets.registry import parse_manifest, select_mat
from faultbench.errors import DataError, EmptyDatasetError, ManifestError, RegistryError
from faultbench.transforms import fft_halfspectrum
from matwriter import write_mat

scipy_io = pytest.importorskip("scipy.io")

CLASS_COUNTS = {"CWRU": 10, "MFPT": 15, "PU": 13, "UoC": 9, "XJTU-SY": 15, "SEU": 20, "JNU": 12}


# -- registries ---------------------------------------------------------------

@pytest.mark.parametrize("dataset_id,count", sorted(CLASS_COUNTS.items()))
def test_registry_class_counts(dataset_id, count):
    reg = get_registry(dataset_id)
    assert reg.class_count == count
    assert sorted(reg.class_table.values()) == list(range(count))
    assert len({e.path + e.selector for e in reg.entries}) == len(reg.entries)


def test_all_manifests_parse():
    assert set(CLASS_COUNTS) <= set(available_datasets())
    for dataset_id in available_datasets():
        assert get_registry(dataset_id).entries


def test_pu_excludes_ki04_and_uses_default_condition():
    reg = get_registry("PU")
    assert "KI04" not in reg.classes
    assert not any("KI04" in e.path for e in reg.entries)
    assert all("N15_M07_F10" in e.path for e in reg.select())


def test_sampling_rates():
    assert get_registry("CWRU").sampling_rate_hz == 12000
    assert get_registry("XJTU-SY").sampling_rate_hz == 25600
    mfpt = get_registry("MFPT")
    base = [e for e in mfpt.entries if "baseline" in e.path][0]
    assert mfpt.rate_for(base.path) == 97656
    assert mfpt.rate_for(mfpt.entries[-1].path) == 48828


def test_xjtu_uses_last_five_minutes_per_bearing():
    reg = get_registry("XJTU-SY")
    for label in reg.classes:
        files = [e.path for e in reg.entries if e.label == label]
        assert len(files) == 5


def test_unknown_dataset_and_label():
    with pytest.raises(RegistryError, match="NOPE"):
        get_registry("NOPE")
    with pytest.raises(RegistryError):
        get_registry("CWRU").class_id("cracked")


def test_manifest_grammar_errors():
    with pytest.raises(RegistryError):
        parse_manifest("# dataset: X\n# sampling_rate_hz: 10\na.csv\tonly-two\n")
    with pytest.raises(RegistryError):
        parse_manifest("a.csv\tl\tcol=0\n", "X")
    reg = parse_manifest("# sampling_rate_hz: 10\nb.csv\tz\tcol=0\na.csv\ty\tcol=1\n"
                         "c.csv\tz\tcol=0\n", "X")
    assert reg.classes == ("z", "y")


# -- loading from fake trees --------------------------------------------------

def _fake_tree(root, dataset_id, writer):
    reg = get_registry(dataset_id)
    base = root / reg.subdir
    for e in reg.entries:
        p = base / e.path
        p.parent.mkdir(parents=True, exist_ok=True)
        if not p.exists():
            writer(p, e)
    return reg


def test_seu_takes_column_one(tmp_path):
    def write(p, e):
        data = np.arange(2048 * 8, dtype=float).reshape(2048, 8) + 0.5
        pre = "Data file\nChannel info\n\n"
        p.write_text(pre + "\n".join("\t".join(f"{v:g}" for v in row) + "\t" for row in data))

    reg = _fake_tree(tmp_path, "SEU", write)
    records = load_dataset("SEU", tmp_path, condition={})
    assert len(records) == len(reg.entries)
    np.testing.assert_array_equal(records[0].samples, np.arange(2048) * 8 + 1.5)
    assert records[0].channel_name == "col1"
    assert {r.class_id for r in records} == set(range(20))


def test_pu_struct_selector(tmp_path):
    def write(p, e):
        y = np.zeros((1, 3), dtype=[("Name", object), ("Data", object)])
        y[0, 0] = ("force", np.zeros((1, 10)))
        y[0, 1] = ("vibration_1", np.full((1, 4096), float(len(e.label))))
        y[0, 2] = ("speed", np.ones((1, 10)))
        scipy_io.savemat(p, {p.stem: {"Y": y}}, do_compression=True)

    reg = _fake_tree(tmp_path, "PU", write)
    records = load_dataset("PU", tmp_path)
    assert len(records) == len(reg.select())
    r = records[0]
    assert r.samples.shape == (4096,) and r.sampling_rate_hz == 64000
    assert r.channel_name.endswith("Y[Name=vibration_1].Data")
    assert r.condition["setting"] == "N15_M07_F10" and r.condition["bearing"] == r.condition["label"]


def test_cwru_glob_selector_and_verify(tmp_path, monkeypatch):
    def write(p, e):
        write_mat(p, {f"X{p.stem}_DE_time": np.arange(3000.0)[:, None],
                      f"X{p.stem}_FE_time": -np.ones((3000, 1))})

    _fake_tree(tmp_path, "CWRU", write)
    monkeypatch.setenv("FAULTBENCH_DATA_ROOT", str(tmp_path))
    records = load_dataset("CWRU")
    assert len(records) == 10
    np.testing.assert_array_equal(records[3].samples, np.arange(3000.0))
    assert verify_dataset("CWRU") == (True, [])


def test_missing_files_listed(tmp_path):
    with pytest.raises(ManifestError) as info:
        load_dataset("CWRU", tmp_path)
    assert "97.mat" in str(info.value) and len(info.value.missing) == 10
    ok, problems = verify_dataset("JNU", tmp_path)
    assert not ok and all(p.startswith("missing") for p in problems)


def test_missing_root(monkeypatch):
    monkeypatch.delenv("FAULTBENCH_DATA_ROOT", raising=False)
    with pytest.raises(ManifestError, match="FAULTBENCH_DATA_ROOT"):
        load_dataset("CWRU")


def test_select_mat_errors():
    variables = {"a": np.ones((3, 2)), "s": {"t": "text"}}
    with pytest.raises(DataError):
        select_mat(variables, "b", "f.mat")
    with pytest.raises(DataError):
        select_mat(variables, "a[col=5]", "f.mat")
    with pytest.raises(DataError):
        select_mat(variables, "s.t", "f.mat")
    assert select_mat(variables, "a[col=1]", "f.mat")[1].shape == (3,)


def test_read_table(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("time,value\n0,1.5\n1,2.5\n")
    np.testing.assert_array_equal(read_table(p), [[0, 1.5], [1, 2.5]])
    p.write_text("1;2\n3\n")
    with pytest.raises(DataError):
        read_table(p)


# -- records and windows ------------------------------------------------------

def test_record_validation():
    with pytest.raises(DataError):
        SignalRecord(np.array([]), 10, "x", "f", "c")
    with pytest.raises(DataError):
        SignalRecord(np.ones(3), 0, "x", "f", "c")


@settings(max_examples=50)
@given(st.lists(st.integers(0, 6000), min_size=1, max_size=6))
def test_window_records_counts(lengths):
    recs = [SignalRecord(np.arange(n + 1.0), 1, "x", f"r{i}", "c", class_id=i)
            for i, n in enumerate(lengths)]
    expected = sum((n + 1) // 1024 for n in lengths)
    if expected == 0:
        with pytest.raises(EmptyDatasetError):
            window_records(recs)
        return
    ds = window_records(recs)
    assert len(ds) == expected
    for w, rid, off in zip(ds.windows, ds.record_index, ds.offsets):
        np.testing.assert_array_equal(w, recs[rid].samples[off:off + 1024])
        assert ds.labels[rid == ds.record_index][0] == rid


# -- synthetic ----------------------------------------------------------------

def test_synthetic_deterministic():
    spec = SynthSpec.default(4, noise_std=0.2, drift_slope=1e-5, record_length=5000)
    a, b = generate_synthetic(spec), generate_synthetic(spec)
    for ra, rb in zip(a, b):
        assert ra.samples.tobytes() == rb.samples.tobytes()
    c = generate_synthetic(SynthSpec.default(4, noise_std=0.2, record_length=5000, seed=1))
    assert a[0].samples.tobytes() != c[0].samples.tobytes()


def test_single_impulse_closed_form():
    fs, f_res, d = 12000.0, 1000.0, 500.0
    x = burst_train(600, fs, 20.0, f_res, d, t0=0.0, n_impulses=1)
    t = np.arange(600) / fs
    np.testing.assert_allclose(x, np.exp(-d * t) * np.sin(2 * np.pi * f_res * t), atol=1e-12)
    peak = np.argmax(np.abs(x))
    assert peak <= fs / f_res / 4 + 1
    env = np.exp(-d * t)
    assert np.all(np.abs(x) <= env + 1e-12)


def test_drift_is_per_sample_index():
    spec = SynthSpec.default(1, drift_slope=0.01, record_length=100, random_phase=False)
    base = generate_synthetic(SynthSpec.default(1, record_length=100, random_phase=False))
    np.testing.assert_allclose(generate_synthetic(spec)[0].samples - base[0].samples,
                               0.01 * np.arange(100), atol=1e-12)


def test_spec_validation():
    with pytest.raises(Exception):
        SynthSpec(2, (30, 30), (800, 800))
    with pytest.raises(Exception):
        SynthSpec.default(2, resonance_hz=(800, 7000))


def test_harmonic_combs_at_impulse_rates():
    fs, n = 12000.0, 12000
    spec = SynthSpec(2, (30.0, 60.0), (1000.0, 1000.0), record_length=n, random_phase=False)
    recs = generate_synthetic(spec)
    bins = np.fft.rfftfreq(n, 1 / fs)
    for rec, f_imp in zip(recs, (30.0, 60.0)):
        mag = np.abs(np.fft.rfft(rec.samples))
        band = (bins > 500) & (bins < 1500)
        on = np.isclose(bins % f_imp, 0) & band
        off = ~np.isclose(bins % f_imp, 0) & band
        assert mag[on].mean() > 100 * mag[off].mean()
    mag60 = np.abs(np.fft.rfft(recs[1].samples))
    odd30 = np.isclose(bins % 60, 30) & (bins > 500) & (bins < 1500)
    assert mag60[odd30].max() < 1e-6 * mag60.max()


def test_nearest_centroid_noiseless():
    spec = SynthSpec.default(5, records_per_class=2, record_length=1024 * 30)
    recs = generate_synthetic(spec)
    ds = window_records(recs)
    feats = fft_halfspectrum(ds.windows)
    train = ds.record_index % 2 == 0
    centroids = np.stack([feats[train & (ds.labels == c)].mean(0) for c in range(5)])
    test = feats[~train]
    pred = np.argmin(((test[:, None, :] - centroids[None]) ** 2).sum(-1), axis=1)
    assert np.mean(pred == ds.labels[~train]) >= 0.99
