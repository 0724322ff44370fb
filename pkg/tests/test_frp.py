import json

import numpy as np
import pytest

from treegaze import frp, synth
from treegaze.errors import DataError


def make_epochs(n_trials=20, n_channels=3, n_timepoints=40, seed=0, subject="s01"):
    rng = np.random.default_rng(seed)
    trials = tuple(
        frp.TrialInfo(f"sent{k}", 1, float(rng.lognormal(0, 0.5)), float(rng.lognormal(0, 0.5)))
        for k in range(n_trials)
    )
    data = rng.normal(0, 1, (n_trials, n_channels, n_timepoints))
    return frp.EpochSet(subject=subject, data=data, sfreq=500.0, tmin=-0.6, trials=trials)


# ---------------------------------------------------------------------------
# Binary file round trip and validation
# ---------------------------------------------------------------------------

def test_save_load_round_trip(tmp_path):
    epochs = make_epochs()
    sidecar = frp.save_epochs(epochs, tmp_path, "s01")
    loaded = frp.load_epochs(sidecar)
    assert loaded.subject == "s01"
    assert loaded.data.shape == epochs.data.shape
    # payload is float32, so compare at that precision
    assert np.allclose(loaded.data, epochs.data, atol=1e-6)
    assert loaded.trials == epochs.trials
    assert loaded.times()[0] == pytest.approx(-0.6)


def test_sidecar_dimension_example(tmp_path):
    epochs = make_epochs(n_trials=2, n_channels=3, n_timepoints=800)
    sidecar = frp.save_epochs(epochs, tmp_path, "dims")
    meta = json.loads(sidecar.read_text())
    assert (meta["n_trials"], meta["n_channels"], meta["n_timepoints"]) == (2, 3, 800)
    loaded = frp.load_epochs(sidecar)
    assert loaded.data.shape == (2, 3, 800)
    assert loaded.times()[-1] == pytest.approx(0.998)


def test_payload_size_mismatch(tmp_path):
    epochs = make_epochs()
    sidecar = frp.save_epochs(epochs, tmp_path, "s01")
    payload = tmp_path / "s01.dat"
    payload.write_bytes(payload.read_bytes()[:-1])
    with pytest.raises(DataError, match="payload"):
        frp.load_epochs(sidecar)


def test_nan_payload_rejected(tmp_path):
    epochs = make_epochs()
    data = epochs.data.copy()
    data[0, 0, 0] = np.nan
    bad = frp.EpochSet("s01", data, 500.0, -0.6, epochs.trials)
    sidecar = frp.save_epochs(bad, tmp_path, "s01")
    with pytest.raises(DataError, match="NaN"):
        frp.load_epochs(sidecar)


def test_metadata_row_count_mismatch(tmp_path):
    epochs = make_epochs(n_trials=2)
    sidecar = frp.save_epochs(epochs, tmp_path, "s01")
    trials_csv = tmp_path / "s01.trials.csv"
    trials_csv.write_text(trials_csv.read_text() + "extra,1,0.5,0.5\n")
    with pytest.raises(DataError, match="trials"):
        frp.load_epochs(sidecar)


def test_wrong_dtype_or_order_rejected(tmp_path):
    epochs = make_epochs()
    sidecar = frp.save_epochs(epochs, tmp_path, "s01")
    meta = json.loads(sidecar.read_text())
    meta["order"] = "time_first"
    sidecar.write_text(json.dumps(meta))
    with pytest.raises(DataError, match="order"):
        frp.load_epochs(sidecar)


# ---------------------------------------------------------------------------
# Time-resolved regression
# ---------------------------------------------------------------------------

def epochs_from_arrays(y, x):
    """One channel, one timepoint, len(y) trials with surprisal x."""
    trials = tuple(frp.TrialInfo(f"t{k}", 1, float(v), float(v)) for k, v in enumerate(x))
    data = np.asarray(y, dtype=float).reshape(len(y), 1, 1)
    return frp.EpochSet("sub", data, 500.0, -0.6, trials)


def test_exact_line_is_recovered():
    epochs = epochs_from_arrays([1.0, 3.0, 5.0], [0.0, 1.0, 2.0])
    series = frp.regress_timewise(epochs, standardize=False)
    intercept, slope = series.beta[0, 0]
    assert intercept == pytest.approx(1.0, abs=1e-10)
    assert slope == pytest.approx(2.0, abs=1e-10)


def test_all_zero_amplitudes_give_zero_betas():
    epochs = epochs_from_arrays([0.0, 0.0, 0.0, 0.0], [0.1, 0.9, 0.4, 0.7])
    series = frp.regress_timewise(epochs, standardize=False)
    assert np.allclose(series.beta, 0.0, atol=1e-12)


def test_monte_carlo_slope_recovery():
    rng = np.random.default_rng(3)
    x = rng.lognormal(0, 0.5, 200)
    y = 0.5 * x + rng.normal(0, 0.1, 200)
    series = frp.regress_timewise(epochs_from_arrays(y, x), standardize=False)
    assert series.beta[0, 0, 1] == pytest.approx(0.5, abs=0.05)


def test_matches_normal_equations():
    rng = np.random.default_rng(4)
    for _ in range(25):
        n = int(rng.integers(3, 40))
        epochs = make_epochs(n_trials=n, n_channels=2, n_timepoints=5, seed=int(rng.integers(1e6)))
        series = frp.regress_timewise(epochs, standardize=False)
        x = epochs.surprisal("syntactic")
        design = np.column_stack([np.ones(n), x])
        direct = np.linalg.inv(design.T @ design) @ design.T @ epochs.data.reshape(n, -1)
        direct = direct.T.reshape(2, 5, 2)
        assert np.allclose(series.beta, direct, rtol=1e-8, atol=1e-10)


def test_residuals_orthogonal_to_design():
    epochs = make_epochs(n_trials=50, n_channels=2, n_timepoints=6, seed=5)
    series = frp.regress_timewise(epochs, standardize=True)
    x = epochs.surprisal("syntactic")
    x = (x - x.mean()) / x.std(ddof=1)
    design = np.column_stack([np.ones(50), x])
    y = epochs.data.reshape(50, -1)
    fitted = design @ series.beta.reshape(-1, 2).T
    residuals = y - fitted
    scale = np.abs(y).max()
    assert np.max(np.abs(design.T @ residuals)) / scale < 1e-6


def test_slope_invariant_to_amplitude_shift():
    epochs = make_epochs(n_trials=30, n_channels=1, n_timepoints=4, seed=6)
    shifted = frp.EpochSet(
        epochs.subject, epochs.data + 11.5, epochs.sfreq, epochs.tmin, epochs.trials
    )
    a = frp.regress_timewise(epochs, standardize=False)
    b = frp.regress_timewise(shifted, standardize=False)
    assert np.allclose(a.beta[..., 1], b.beta[..., 1], atol=1e-9)
    assert np.allclose(b.beta[..., 0] - a.beta[..., 0], 11.5, atol=1e-9)


def test_standardized_slope_relation():
    epochs = make_epochs(n_trials=40, n_channels=2, n_timepoints=3, seed=7)
    raw = frp.regress_timewise(epochs, standardize=False)
    std = frp.regress_timewise(epochs, standardize=True)
    sd = epochs.surprisal("syntactic").std(ddof=1)
    assert np.allclose(std.beta[..., 1], raw.beta[..., 1] * sd, atol=1e-9)


def test_timepoint_permutation_equivariance():
    epochs = make_epochs(n_trials=25, n_channels=2, n_timepoints=10, seed=8)
    perm = np.random.default_rng(9).permutation(10)
    permuted = frp.EpochSet(
        epochs.subject, epochs.data[:, :, perm], epochs.sfreq, epochs.tmin, epochs.trials
    )
    a = frp.regress_timewise(epochs)
    b = frp.regress_timewise(permuted)
    assert np.allclose(a.beta[:, perm, :], b.beta, atol=1e-12)


def test_regression_input_validation():
    epochs = epochs_from_arrays([1.0, 2.0], [0.0, 1.0])
    with pytest.raises(DataError, match="3 trials"):
        frp.regress_timewise(epochs)
    flat = epochs_from_arrays([1.0, 2.0, 3.0], [0.5, 0.5, 0.5])
    with pytest.raises(DataError, match="zero variance"):
        frp.regress_timewise(flat)


# ---------------------------------------------------------------------------
# ROI averaging
# ---------------------------------------------------------------------------

def beta_series(slopes):
    """slopes: channels x timepoints."""
    slopes = np.asarray(slopes, dtype=float)
    beta = np.stack([np.zeros_like(slopes), slopes], axis=-1)
    return frp.BetaSeries("sub", beta, 500.0, -0.6, "syntactic")


def test_roi_single_channel_and_cancellation():
    series = beta_series([[1.0, 2.0], [-1.0, -2.0]])
    assert list(frp.roi_average(series, [0])) == [1.0, 2.0]
    assert np.allclose(frp.roi_average(series, [0, 1]), 0.0)


def test_roi_constant_tensor():
    series = beta_series(np.full((4, 6), 0.75))
    assert np.allclose(frp.roi_average(series, range(4)), 0.75)


def test_roi_validation():
    series = beta_series([[1.0]])
    with pytest.raises(DataError):
        frp.roi_average(series, [])
    with pytest.raises(DataError):
        frp.roi_average(series, [3])


def test_beta_round_trip(tmp_path):
    series = beta_series([[0.25, -0.5], [1.5, 2.5]])
    sidecar = frp.save_beta(series, tmp_path, "sub_syntactic")
    loaded = frp.load_beta(sidecar)
    assert np.allclose(loaded.beta, series.beta)
    assert loaded.predictor == "syntactic"


# ---------------------------------------------------------------------------
# Synthetic FRP oracle
# ---------------------------------------------------------------------------

def test_zero_amplitude_gives_near_zero_slopes(tmp_path):
    sidecars = synth.gen_frp_dataset(
        tmp_path, n_subjects=2, n_trials=150, n_channels=2,
        effect_window_ms=(0.0, 200.0), amplitude=0.0, noise_sd=1.0, seed=3,
        tmin=-0.1, n_timepoints=200,
    )
    for sc in sidecars:
        series = frp.regress_timewise(frp.load_epochs(sc), standardize=False)
        assert np.abs(series.beta[..., 1]).mean() < 0.2


def test_noiseless_dataset_recovers_the_planted_slope(tmp_path):
    sidecars = synth.gen_frp_dataset(
        tmp_path, n_subjects=1, n_trials=50, n_channels=2,
        effect_window_ms=(100.0, 200.0), amplitude=1.0, noise_sd=0.0, seed=4,
        tmin=-0.2, n_timepoints=300,
    )
    epochs = frp.load_epochs(sidecars[0])
    series = frp.regress_timewise(epochs, standardize=False)
    expected = synth.expected_slope_series((100.0, 200.0), 1.0, tmin=-0.2, n_timepoints=300)
    for channel in range(2):
        # float32 storage bounds the recovery error
        assert np.allclose(series.beta[channel, :, 1], expected, atol=1e-4)


def test_sidecars_declare_the_default_grid(tmp_path):
    sidecars = synth.gen_frp_dataset(
        tmp_path, n_subjects=1, n_trials=10, n_channels=1,
        effect_window_ms=(100.0, 200.0), amplitude=0.5, noise_sd=1.0, seed=5,
    )
    meta = json.loads(sidecars[0].read_text())
    assert meta["n_timepoints"] == 800
    assert meta["sfreq"] == 500.0
    assert meta["tmin"] == -0.6


def test_window_outside_epoch_is_rejected(tmp_path):
    with pytest.raises(ValueError, match="outside"):
        synth.gen_frp_dataset(tmp_path, effect_window_ms=(900.0, 1200.0), n_subjects=1)
    with pytest.raises(ValueError, match="a < b"):
        synth.gen_frp_dataset(tmp_path, effect_window_ms=(300.0, 100.0), n_subjects=1)
