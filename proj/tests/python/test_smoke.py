import numpy as np
import pytest

import pulseradar as pr


def vib_config(snr_db=None):
    config = pr.default_config()
    config["scene"] = {
        "targets": [
            {"range0_m": 30.0, "motion": {"type": "sinusoid", "freq_hz": 12.0, "peak_amp_m": 0.005}}
        ],
        "channel": {"snr_db": snr_db, "noise_seed": 3},
    }
    return config


def test_default_config_round_trips():
    config = pr.default_config()
    assert config["prf_hz"] == 100.0
    assert config["engine"]["taps"] == 448
    again, warnings = pr.normalize_config(config)
    assert again == config
    assert warnings == []


def test_invalid_config_raises():
    config = pr.default_config()
    config["pack_size"] = 100
    with pytest.raises(pr.Error):
        pr.normalize_config(config)


def test_render_and_correlate_find_the_target():
    rx1, rx2, truth, saturated = pr.render(vib_config(), 0)
    assert rx1.shape == (448, 2) and rx1.dtype == np.int16
    assert rx2.shape == (3136, 2)
    assert truth == [0.0]
    assert saturated == 0
    lags = pr.cross_correlate(rx1, rx2)
    assert lags.shape == (2688, 2)
    assert pr.peak_bin(pr.magnitude(lags)) == 24


def test_correlation_matches_numpy():
    rng = np.random.default_rng(5)
    rx1 = rng.integers(-32768, 32768, size=(448, 2), dtype=np.int16)
    rx2 = rng.integers(-32768, 32768, size=(3136, 2), dtype=np.int16)
    a = rx1[:, 0].astype(np.float64) + 1j * rx1[:, 1]
    b = rx2[:, 0].astype(np.float64) + 1j * rx2[:, 1]
    expected = np.array([np.sum(np.conj(a) * b[m : m + 448]) for m in range(2688)])
    lags = pr.cross_correlate(rx1, rx2, threads=2)
    assert np.array_equal(lags[:, 0].astype(np.float64), expected.real)
    assert np.array_equal(lags[:, 1].astype(np.float64), expected.imag)


def test_unwrap_and_displacement():
    assert pr.unwrap([3.0, -3.0]) == pytest.approx([3.0, 2 * np.pi - 3.0])
    d = pr.displacement([0.0, -1.2062], 5.755e9)
    assert d[1] == pytest.approx(0.00500017075, abs=1e-9)


def test_spectrum_peak_for_12_hz():
    t = np.arange(256) / 100.0
    samples = np.exp(1j * 1.2 * np.sin(2 * np.pi * 12.0 * t))
    freqs, mags, peak = pr.vibration_spectrum(list(samples), 100.0, 256)
    assert len(freqs) == 129
    assert peak == 31
    assert freqs[peak] == pytest.approx(12.109375)


def test_batch_and_replay(tmp_path):
    summary = pr.run_batch(vib_config(13.0), 256, tmp_path / "run")
    assert summary["pulses"] == 256
    assert summary["selected_bin"] == 24
    assert summary["spectrum_peak_bins"] == [31]
    again = pr.run_replay(str(tmp_path / "run" / "recording.prrx"), str(tmp_path / "replay"))
    assert again == summary
    assert (tmp_path / "run" / "trace.csv").read_bytes() == (tmp_path / "replay" / "trace.csv").read_bytes()


def test_bench_reports_fpga_reference():
    r = pr.bench_xcorr(2)
    assert r["iterations"] == 2
    assert r["within_budget"]
    assert "121.63 us" in r["report"]


def test_decode_frame_rejects_garbage():
    with pytest.raises(pr.Error):
        pr.decode_frame(b"nonsense")
