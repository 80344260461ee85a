import numpy as np
import pytest
from sklearn.base import clone
from sklearn.utils.validation import check_is_fitted

from okidera.estimator import OkidEra
from okidera.state_space import NoiseSpec, simulate

from conftest import random_minimal_siso


@pytest.fixture
def siso_data():
    rng = np.random.default_rng(0)
    sys = random_minimal_siso(2, rng)
    u = rng.standard_normal(1200)
    data = simulate(sys, u)
    return sys, data.u, data.y


class TestSklearnContract:
    def test_get_set_params_round_trip(self):
        est = OkidEra(p=30, order=2, sample_rate=100.0)
        params = est.get_params()
        assert params["p"] == 30 and params["order"] == 2
        est.set_params(p=40)
        assert est.p == 40

    def test_clone_preserves_configuration(self):
        est = OkidEra(p=25, threshold=1e-4, mean_removal=True)
        twin = clone(est)
        assert twin.get_params() == est.get_params()

    def test_fit_returns_self_and_sets_attributes(self, siso_data):
        _, u, y = siso_data
        est = OkidEra(p=16, order=2)
        assert est.fit(u, y) is est
        check_is_fitted(est, "model_")
        assert est.A_.shape == (2, 2)
        assert est.K_.shape == (2, 1)
        assert est.order_ == 2
        assert est.singular_values_.ndim == 1

    def test_unfitted_predict_raises(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            OkidEra().predict(np.ones((10, 1)))

    def test_order_and_threshold_mutually_exclusive(self, siso_data):
        _, u, y = siso_data
        with pytest.raises(ValueError, match="at most one"):
            OkidEra(p=16, order=2, threshold=1e-3).fit(u, y)


class TestFitQuality:
    def test_noise_free_fit_recovers_dynamics(self, siso_data):
        sys, u, y = siso_data
        est = OkidEra(p=16, order=2).fit(u, y)
        np.testing.assert_allclose(
            np.sort_complex(np.linalg.eigvals(est.A_)),
            np.sort_complex(np.linalg.eigvals(sys.A)),
            atol=1e-6,
        )

    def test_default_threshold_selects_true_order(self, siso_data):
        _, u, y = siso_data
        est = OkidEra(p=16).fit(u, y)
        assert est.order_ == 2

    def test_predict_with_measurements_tracks_output(self, siso_data):
        _, u, y = siso_data
        est = OkidEra(p=16, order=2).fit(u, y)
        yhat = est.predict(u, y)
        assert yhat.shape == y.shape
        assert np.sqrt(np.mean((yhat[50:] - y[50:]) ** 2)) < 1e-6

    def test_predict_open_loop_matches_simulation(self, siso_data):
        sys, u, y = siso_data
        est = OkidEra(p=16, order=2).fit(u, y)
        open_loop = est.predict(u)
        assert np.sqrt(np.mean((open_loop[50:] - y[50:]) ** 2)) < 1e-5

    def test_score_near_one_on_clean_data(self, siso_data):
        _, u, y = siso_data
        est = OkidEra(p=16, order=2).fit(u, y)
        assert est.score(u, y) > 0.999999

    def test_mean_removal_handles_offsets(self):
        # sensor-bias use case: noisy record with constant offsets on u and y
        from okidera.analysis import compare_frequency_responses, frequency_response

        rng = np.random.default_rng(1)
        sys = random_minimal_siso(2, rng)
        u = rng.standard_normal(3000)
        data = simulate(sys, u, NoiseSpec(measurement_white_std=0.05, seed=7))
        u_off = data.u + 3.0
        y_off = data.y - 2.0
        est = OkidEra(p=16, order=2, mean_removal=True).fit(u_off, y_off)
        grid = np.linspace(0.005, 0.45, 50)
        report = compare_frequency_responses(
            frequency_response(est.model_, grid, 1.0),
            frequency_response(sys, grid, 1.0),
        )
        assert report.max_mag_err_db < 1.5
        yhat = est.predict(u_off, y_off)
        assert np.sqrt(np.mean((yhat[100:] - y_off[100:]) ** 2)) < 0.15

    def test_noisy_fit_reasonable(self):
        rng = np.random.default_rng(2)
        sys = random_minimal_siso(2, rng)
        u = rng.standard_normal(4000)
        data = simulate(sys, u, NoiseSpec(measurement_white_std=0.05, seed=5))
        est = OkidEra(p=24, order=2).fit(data.u, data.y)
        assert est.score(data.u, data.y) > 0.9

    def test_frequency_response_helper(self, siso_data):
        _, u, y = siso_data
        est = OkidEra(p=16, order=2, sample_rate=200.0).fit(u, y)
        resp = est.frequency_response()
        assert resp.sample_rate == 200.0
        assert resp.frequencies.shape == (200,)
        assert resp.frequencies[-1] <= 100.0
