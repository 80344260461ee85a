import numpy as np
import pytest

from okidera.analysis import compare_frequency_responses, frequency_response, validate_kalman
from okidera.benchmark import (
    BenchmarkScenario,
    default_runout_filter,
    default_truth_plant,
    generate,
    seek_input,
)
from okidera.era import identify
from okidera.okid import OkidConfig
from okidera.state_space import StateSpaceModel


class TestSeekInput:
    def test_three_bipolar_pulses(self):
        u = seek_input(1000, amplitude=2.0)
        assert u.shape == (1000, 1)
        # each pulse integrates to zero (accel lobe cancels decel lobe)
        assert abs(u.sum()) < 1e-12
        assert u.max() <= 2.0 + 1e-12
        # three disjoint active regions
        active = np.flatnonzero(np.abs(u[:, 0]) > 0)
        gaps = np.sum(np.diff(active) > 1)
        assert gaps == 2

    def test_overrun_rejected(self):
        with pytest.raises(ValueError, match="overruns"):
            seek_input(20, lobe_lengths=(3, 5, 8))


class TestScenario:
    def test_truth_plant_is_stable_and_lightly_damped(self):
        truth = default_truth_plant()
        assert truth.is_stable
        mags = np.abs(np.linalg.eigvals(truth.A))
        assert np.all((mags >= 0.97 - 1e-12) & (mags <= 0.995))

    def test_generate_is_deterministic_per_seed(self):
        a = generate(BenchmarkScenario(length=500, seed=3))
        b = generate(BenchmarkScenario(length=500, seed=3))
        np.testing.assert_array_equal(a.data.y, b.data.y)
        c = generate(BenchmarkScenario(length=500, seed=4))
        assert np.any(c.data.y != a.data.y)

    def test_snr_is_exact_by_construction(self):
        run = generate(BenchmarkScenario(length=2000, seed=1, snr_db=20.0))
        clean = generate(BenchmarkScenario(length=2000, seed=1, snr_db=None))
        noise = run.data.y - clean.data.y
        snr = 10.0 * np.log10(np.var(clean.data.y) / np.var(noise))
        assert snr == pytest.approx(20.0, abs=1e-9)

    def test_unstable_truth_rejected(self):
        bad = StateSpaceModel(A=[[1.1]], B=[[1.0]], C=[[1.0]], D=[[0.0]])
        with pytest.raises(ValueError, match="stable"):
            generate(BenchmarkScenario(length=100), truth=bad)

    def test_zero_noise_identification_recovers_truth(self):
        run = generate(BenchmarkScenario(snr_db=None))
        model = identify(run.data, OkidConfig(p=100), order=4)
        fs = run.data.sample_rate
        grid = np.geomspace(0.01 * fs / 2, 0.8 * fs / 2, 100)
        report = compare_frequency_responses(
            frequency_response(model, grid, fs),
            frequency_response(run.truth, grid, fs),
        )
        assert report.max_mag_err_db < 1e-5

    def test_noisy_identification_within_benchmark_budget(self):
        run = generate(BenchmarkScenario(seed=1))
        model = identify(run.data, OkidConfig(p=100), order=4)
        fs = run.data.sample_rate
        grid = np.geomspace(0.01 * fs / 2, 0.8 * fs / 2, 100)
        report = compare_frequency_responses(
            frequency_response(model, grid, fs),
            frequency_response(run.truth, grid, fs),
        )
        assert report.max_mag_err_db < 4.0

    def test_predictor_whitens_residuals(self):
        run = generate(BenchmarkScenario(seed=2))
        model = identify(run.data, OkidConfig(p=100), order=4)
        report = validate_kalman(model, run.data, burn_in=100)
        assert abs(report.residual_autocorr[0, 0]) < abs(report.output_autocorr[0, 0])

    def test_runout_filter_is_colored(self):
        from okidera.state_space import generate_colored_noise

        filt = default_runout_filter()
        y = generate_colored_noise(filt, 200_000, seed=1)[:, 0]
        y = y - y.mean()
        r1 = np.dot(y[:-1], y[1:]) / np.dot(y, y)
        # colored component: 20% variance share shaped by a pole at -0.6
        assert r1 == pytest.approx(-0.12, abs=0.02)
