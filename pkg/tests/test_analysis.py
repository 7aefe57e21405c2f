import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sgwn.analysis import (
    accuracy_is_monotone,
    analytic_signal,
    depth_sweep,
    feature_ses_report,
    hyperparam_sweep,
    line_plot,
    locate_fault_frequency,
    noise_sweep,
    read_csv,
    squared_envelope_spectrum,
    write_csv,
    write_json,
)
from sgwn.analysis.report import fmt
from sgwn.data import ClassSpec, SyntheticSpec, build_dataset, impulse_envelope, synthesize
from sgwn.errors import ValidationError
from sgwn.graph import Graph
from sgwn.nn import ModelConfig, SgwnModel, TrainConfig, make_model, train

FS = 20480.0


def _am(n=4096, fm=50.0, fc=3000.0):
    t = np.arange(n) / FS
    return (1 + 0.5 * np.cos(2 * np.pi * fm * t)) * np.cos(2 * np.pi * fc * t)


def test_analytic_signal_real_part():
    x = np.random.default_rng(0).standard_normal(101)
    np.testing.assert_allclose(analytic_signal(x).real, x, atol=1e-12)
    y = np.random.default_rng(1).standard_normal(100)
    np.testing.assert_allclose(analytic_signal(y).real, y, atol=1e-12)


def test_ses_axis():
    for n in (16, 17, 256):
        ses = squared_envelope_spectrum(np.ones(n) + np.arange(n) % 3, FS)
        assert ses.freqs.size == n // 2 + 1 == ses.magnitude.size
        assert np.all(ses.magnitude >= 0)
        assert ses.freqs[1] == pytest.approx(FS / n)


def test_ses_too_short():
    with pytest.raises(ValidationError):
        squared_envelope_spectrum(np.ones(15), FS)


def test_ses_pure_tone_flat():
    n = 2048
    t = np.arange(n) / FS
    # integer number of cycles keeps the envelope exactly constant
    ses = squared_envelope_spectrum(3.0 * np.cos(2 * np.pi * 100 * FS / n * t), FS)
    assert ses.magnitude.max() < 1e-12


def test_ses_am_peak():
    ses = squared_envelope_spectrum(_am(), FS)
    k = np.argmax(ses.magnitude)
    assert abs(ses.freqs[k] - 50.0) <= ses.resolution


def test_ses_impulse_train_peak():
    n = 8192
    env = impulse_envelope(FS, 518.03, 900.0, n)
    x = env * np.cos(2 * np.pi * 4200.0 * np.arange(n) / FS)
    ses = squared_envelope_spectrum(x, FS)
    k = np.argmax(ses.magnitude)
    assert k == int(round(518.03 / ses.resolution))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.integers(16, 200), elements=st.floats(-10, 10)))
def test_ses_sign_invariant(x):
    np.testing.assert_allclose(
        squared_envelope_spectrum(-x, FS).magnitude, squared_envelope_spectrum(x, FS).magnitude, rtol=1e-9, atol=1e-9
    )


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.integers(16, 200), elements=st.floats(-10, 10)), st.floats(0.01, 100))
def test_ses_quadratic_scaling(x, alpha):
    base = squared_envelope_spectrum(x, FS).magnitude
    scaled = squared_envelope_spectrum(alpha * x, FS).magnitude
    # roundoff floor scales with the squared amplitude, the natural unit of the SES
    floor = 1e-12 * alpha ** 2 * max(np.max(x ** 2), 1e-300)
    np.testing.assert_allclose(scaled, alpha ** 2 * base, rtol=1e-9, atol=floor)


def test_locate_am():
    rep = locate_fault_frequency(squared_envelope_spectrum(_am(), FS), 50.0)
    assert rep.located and rep.prominence > 10
    assert abs(rep.peak_hz - 50.0) <= FS / 4096


def test_locate_white_noise():
    misses = 0
    for seed in range(20):
        x = np.random.default_rng(seed).standard_normal(4096)
        misses += not locate_fault_frequency(squared_envelope_spectrum(x, FS), 50.0).located
    assert misses >= 18


def test_locate_zero_signal():
    rep = locate_fault_frequency(squared_envelope_spectrum(np.zeros(64), FS), 50.0)
    assert not rep.located and rep.magnitude == 0


def test_locate_target_above_nyquist():
    with pytest.raises(ValidationError):
        locate_fault_frequency(squared_envelope_spectrum(_am(), FS), FS / 2)


def test_synthetic_healthy_no_sideband_peak():
    raw = synthesize(SyntheticSpec())
    ses = squared_envelope_spectrum(raw[0, 0], FS)
    for f in (518.03, 760.0, 1090.0):
        assert not locate_fault_frequency(ses, f).located


def test_synthetic_faults_separable():
    spec = SyntheticSpec()
    raw = synthesize(spec)
    for i, c in enumerate(spec.classes):
        if c.fault_hz == 0:
            continue
        ses = squared_envelope_spectrum(raw[i, 0], FS)
        assert locate_fault_frequency(ses, c.fault_hz, kappa=5).located
        # and not at the other classes' frequencies
        for other in spec.classes:
            if other.fault_hz and abs(other.fault_hz - c.fault_hz) > 2 * ses.resolution:
                assert locate_fault_frequency(ses, other.fault_hz, kappa=5).prominence < locate_fault_frequency(
                    ses, c.fault_hz, kappa=5).prominence


def _path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def test_feature_report_structure():
    model = SgwnModel(_path(5), 64, 3, ModelConfig(J=3, hidden=8))
    rep = feature_ses_report(model, np.random.default_rng(0).random((5, 64)), 2, FS)
    assert [r.source for r in rep] == ["scaling", "wavelet1", "wavelet2", "wavelet3", "layer_output"]
    assert all(r.freqs.size == 33 for r in rep)


def test_feature_report_heat_kernel_has_no_scaling_band():
    model = SgwnModel(_path(4), 32, 2, ModelConfig(kernel="heat", J=2, hidden=8))
    rep = feature_ses_report(model, np.ones((4, 32)), 0, FS)
    assert [r.source for r in rep] == ["wavelet1", "wavelet2", "layer_output"]


def test_feature_report_constant_input():
    model = SgwnModel(_path(5), 64, 3, ModelConfig(J=2, hidden=8, exact=True))
    rep = feature_ses_report(model, np.ones((5, 64)), 1, FS)
    for r in rep[1:3]:
        assert r.magnitude.max() < 1e-20


def test_feature_report_bad_node():
    model = SgwnModel(_path(3), 32, 2, ModelConfig(hidden=8))
    with pytest.raises(ValidationError):
        feature_ses_report(model, np.ones((3, 32)), 3, FS)


def _small_ds():
    classes = (
        ClassSpec("healthy", 3000.0, 0.0, 0.0, (0.8, 0.8, 0.7), 0.15),
        ClassSpec("fault", 4200.0, 518.03, 900.0, (1.0, 0.7, 0.4), 0.15),
    )
    spec = SyntheticSpec(sensors=3, length=4096, classes=classes, sensor_phase=(0.0, 0.6, 1.2))
    return build_dataset(spec, window=64, samples_per_class=20)


CFG = TrainConfig(epochs=3, batch_size=10, hidden=16)


def test_depth_sweep_rows():
    rows = depth_sweep(_small_ds(), [2, 4], CFG)
    assert [(r["model"], r["depth"]) for r in rows] == [("sgwn", 2), ("lowpass", 2), ("sgwn", 4), ("lowpass", 4)]


def test_depth_sweep_matches_plain_run():
    ds = _small_ds()
    rows = depth_sweep(ds, [2], CFG)
    _, history = train(make_model(ds.graph, 64, 2, CFG), ds, CFG)
    assert rows[0]["test_acc"] == history[-1]["test_acc"]
    assert rows[0]["train_loss"] == history[-1]["train_loss"]


def test_depth_sweep_rejects_bad_depth():
    with pytest.raises(ValidationError):
        depth_sweep(_small_ds(), [0], CFG)


def test_hyperparam_sweep_grid_and_default_cell():
    ds = _small_ds()
    rows, timings = hyperparam_sweep(ds, [2, 3], [2, 4], CFG)
    assert [(r["J"], r["K"]) for r in rows] == [(2, 2), (2, 4), (3, 2), (3, 4)]
    assert all(t["wall_time_s"] > 0 for t in timings)
    _, history = train(make_model(ds.graph, 64, 2, CFG), ds, CFG)
    assert rows[0]["test_acc"] == history[-1]["test_acc"]


def test_sweeps_reproducible_and_parallel_equal():
    ds = _small_ds()
    a, _ = hyperparam_sweep(ds, [2, 3], [2], CFG)
    b, _ = hyperparam_sweep(ds, [2, 3], [2], CFG, jobs=2)
    assert a == b


def test_noise_sweep_rows():
    ds = _small_ds()
    rows = noise_sweep(ds, ["none", 0, -5], CFG)
    assert [r["snr_db"] for r in rows] == ["none", 0.0, -5.0]
    assert noise_sweep(ds, [], CFG) == rows[:1]


def test_noise_sweep_high_snr_near_clean():
    ds = _small_ds()
    rows = noise_sweep(ds, ["none", 60], TrainConfig(epochs=10, batch_size=10, hidden=16))
    assert abs(rows[0]["test_acc"] - rows[1]["test_acc"]) <= 0.02


def test_monotone_helper():
    rows = [{"snr_db": "none", "test_acc": 0.9}, {"snr_db": -5.0, "test_acc": 0.8}, {"snr_db": 0.0, "test_acc": 0.92}]
    assert accuracy_is_monotone(rows)
    rows[2]["test_acc"] = 0.95
    assert not accuracy_is_monotone(rows)


def test_fmt():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3" and fmt(True) == "true" and fmt(None) == ""
    assert float(fmt(np.pi)) == np.pi


def test_csv_roundtrip(tmp_path):
    rows = [{"a": 1.0 / 3, "b": "x,y"}, {"a": 2, "b": 'q"'}]
    path = write_csv(tmp_path / "t.csv", rows)
    raw = path.read_bytes()
    assert raw.startswith(b"a,b\r\n") and b'"x,y"' in raw and b'"q"""' in raw
    back = read_csv(path)
    assert float(back[0]["a"]) == 1.0 / 3 and back[1]["b"] == 'q"'


def test_json_and_svg(tmp_path):
    write_json(tmp_path / "m.json", {"x": np.arange(3), "y": np.float64(np.inf)})
    assert '"x": [' in (tmp_path / "m.json").read_text()
    svg = line_plot(tmp_path / "p.svg", [("a", [0, 1, 2], [1, 3, 2])], "x", "y", "t<1>").read_text()
    assert svg.startswith("<svg") and "polyline" in svg and "t&lt;1&gt;" in svg
