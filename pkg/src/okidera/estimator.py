"""Estimator-style front end so the identification pipeline composes with
scikit-learn tooling (`get_params`/`set_params`, clone, pipelines)."""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .analysis import FrequencyResponse, default_frequency_grid, frequency_response
from .era import identify
from .okid import OkidConfig
from .state_space import TimeSeriesDataset


class OkidEra(BaseEstimator):
    """Identify a discrete state-space model and its steady-state Kalman gain
    from input/output time series.

    The estimator regresses the measured output on lagged input/output pairs
    to obtain observer Markov parameters, then realizes a model of the chosen
    order from their Hankel matrix.  It tolerates colored measurement noise:
    the noise dynamics are absorbed by the identified observer while the
    input/output transfer function stays that of the plant.

    Parameters
    ----------
    p : int, default=100
        Observer horizon in samples (regression memory).  Choose well above
        the expected system order.
    order : int, optional
        Realized model order (retained singular values).  Mutually exclusive
        with `threshold`; when neither is set, a relative threshold of 1e-3
        is used.
    threshold : float, optional
        Relative singular-value cutoff for automatic order selection.
    alpha, beta : int, optional
        Block rows/columns of the Hankel matrix; default floor(p/2) each.
    mean_removal : bool, default=False
        Subtract the training means of u and y before fitting.
    solver_tolerance : float, default=1e-10
        Relative cutoff for the least-squares pseudo-inverse.
    sample_rate : float, default=1.0
        Sample rate in Hz, used by `frequency_response`.

    Attributes
    ----------
    model_ : IdentifiedModel
        Full identification result (state-space model, gain, diagnostics).
    A_, B_, C_, D_, K_ : ndarray
        Realized matrices and Kalman gain.
    order_ : int
        Realized order.
    singular_values_ : ndarray
        Hankel singular values, for order diagnostics.

    Examples
    --------
    >>> est = OkidEra(p=20, order=2)
    >>> est.fit(u, y)                        # doctest: +SKIP
    >>> y_pred = est.predict(u, y)           # doctest: +SKIP
    """

    def __init__(
        self,
        p: int = 100,
        order: Optional[int] = None,
        threshold: Optional[float] = None,
        alpha: Optional[int] = None,
        beta: Optional[int] = None,
        mean_removal: bool = False,
        solver_tolerance: float = 1e-10,
        sample_rate: float = 1.0,
    ):
        self.p = p
        self.order = order
        self.threshold = threshold
        self.alpha = alpha
        self.beta = beta
        self.mean_removal = mean_removal
        self.solver_tolerance = solver_tolerance
        self.sample_rate = sample_rate

    def _validate_series(self, X, name):
        X = check_array(X, ensure_2d=False, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ValueError(f"{name} must be a 1- or 2-D array, got {X.ndim}-D")
        return X

    def fit(self, X, y):
        """Fit from an input series X of shape (n_samples, m) and an output
        series y of shape (n_samples, q).

        Returns
        -------
        self
        """
        if self.order is not None and self.threshold is not None:
            raise ValueError("set at most one of order and threshold")
        U = self._validate_series(X, "X")
        Y = self._validate_series(y, "y")
        if self.mean_removal:
            self.u_mean_ = U.mean(axis=0)
            self.y_mean_ = Y.mean(axis=0)
        else:
            self.u_mean_ = np.zeros(U.shape[1])
            self.y_mean_ = np.zeros(Y.shape[1])
        data = TimeSeriesDataset(
            u=U - self.u_mean_, y=Y - self.y_mean_, sample_rate=self.sample_rate
        )
        threshold = self.threshold
        if self.order is None and threshold is None:
            threshold = 1e-3
        self.model_ = identify(
            data,
            OkidConfig(p=self.p, solver_tolerance=self.solver_tolerance),
            order=self.order,
            threshold=threshold,
            alpha=self.alpha,
            beta=self.beta,
        )
        self.A_ = self.model_.A
        self.B_ = self.model_.B
        self.C_ = self.model_.C
        self.D_ = self.model_.D
        self.K_ = self.model_.K
        self.order_ = self.model_.order
        self.singular_values_ = self.model_.singular_values
        return self

    def predict(self, X, y=None):
        """One-step-ahead output predictions.

        With `y` given, runs the identified observer (measurement feedback
        through the Kalman gain); without it, simulates the model open loop.
        Returns an array of shape (n_samples, q).
        """
        check_is_fitted(self, "model_")
        U = self._validate_series(X, "X") - self.u_mean_
        A, B, C, D, K = self.A_, self.B_, self.C_, self.D_, self.K_
        if y is None:
            F, H = A, B
        else:
            Y = self._validate_series(y, "y") - self.y_mean_
            F, H = A - K @ C, B - K @ D
        yhat = np.empty((U.shape[0], C.shape[0]))
        x = np.zeros(A.shape[0])
        for k in range(U.shape[0]):
            yhat[k] = C @ x + D @ U[k]
            x = F @ x + H @ U[k] + (K @ Y[k] if y is not None else 0.0)
        return yhat + self.y_mean_

    def score(self, X, y):
        """Coefficient of determination of the one-step-ahead prediction."""
        check_is_fitted(self, "model_")
        Y = self._validate_series(y, "y")
        resid = Y - self.predict(X, y)
        ss_res = float(np.sum(resid**2))
        ss_tot = float(np.sum((Y - Y.mean(axis=0)) ** 2))
        return 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0

    def frequency_response(self, frequencies=None) -> FrequencyResponse:
        """Frequency response of the fitted model on `frequencies` (Hz),
        defaulting to a 200-point log grid below Nyquist."""
        check_is_fitted(self, "model_")
        if frequencies is None:
            frequencies = default_frequency_grid(self.sample_rate)
        return frequency_response(self.model_, frequencies, self.sample_rate)
