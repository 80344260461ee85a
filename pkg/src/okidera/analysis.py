"""Frequency-response evaluation and model validation metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .era import IdentifiedModel
from .exceptions import DimensionMismatchError, GridMismatchError, SingularFrequencyError
from .state_space import StateSpaceModel, TimeSeriesDataset


def default_frequency_grid(sample_rate: float, points: int = 200) -> np.ndarray:
    """Log-spaced evaluation grid over [fs/1e4, 0.95 * fs/2]."""
    return np.geomspace(sample_rate / 1e4, 0.95 * sample_rate / 2.0, points)


@dataclass(frozen=True, eq=False)
class FrequencyResponse:
    """Complex response matrices on a frequency grid.

    ``response`` has shape (n_frequencies, q, m).
    """

    frequencies: np.ndarray
    response: np.ndarray
    sample_rate: float

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float).copy()
        r = np.asarray(self.response, dtype=complex).copy()
        if r.ndim != 3 or r.shape[0] != f.shape[0]:
            raise DimensionMismatchError(
                f"response must be (n_freq, q, m) with n_freq={f.shape[0]}, got {r.shape}"
            )
        if np.any(f < 0) or np.any(f > self.sample_rate / 2.0):
            bad = f[(f < 0) | (f > self.sample_rate / 2.0)][0]
            raise ValueError(
                f"frequency {bad} Hz outside the Nyquist band [0, {self.sample_rate / 2.0}] Hz"
            )
        f.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "response", r)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))


def frequency_response(
    model: Union[StateSpaceModel, IdentifiedModel],
    frequencies,
    sample_rate: float,
) -> FrequencyResponse:
    """Evaluate C (zI - A)^{-1} B + D on z = exp(j 2 pi f / fs).

    Each point is computed by a linear solve rather than an explicit inverse.
    A frequency whose z lands within 1e-12 of an eigenvalue of A is rejected.
    """
    if isinstance(model, IdentifiedModel):
        model = model.model
    f = np.asarray(frequencies, dtype=float).ravel()
    if np.any(f < 0) or np.any(f > sample_rate / 2.0):
        bad = f[(f < 0) | (f > sample_rate / 2.0)][0]
        raise ValueError(
            f"frequency {bad} Hz outside the Nyquist band [0, {sample_rate / 2.0}] Hz"
        )
    eig = np.linalg.eigvals(model.A)
    z = np.exp(2j * np.pi * f / sample_rate)
    resp = np.empty((f.size, model.q, model.m), dtype=complex)
    I = np.eye(model.n)
    B = model.B.astype(complex)
    for i, zi in enumerate(z):
        if eig.size and np.min(np.abs(zi - eig)) < 1e-12:
            raise SingularFrequencyError(
                f"frequency {f[i]} Hz coincides with a pole of the model"
            )
        X = np.linalg.solve(zi * I - model.A, B)
        resp[i] = model.C @ X + model.D
    return FrequencyResponse(frequencies=f, response=resp, sample_rate=sample_rate)


def dc_gain(model: StateSpaceModel) -> np.ndarray:
    """C (I - A)^{-1} B + D."""
    return model.C @ np.linalg.solve(np.eye(model.n) - model.A, model.B) + model.D


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """Elementwise magnitude/phase deviation between two responses.

    Magnitude errors are 20*log10(|a|/|b|); phase errors are wrapped to
    (-180, 180] degrees.  Points where b vanishes are reported non-finite,
    flagged in ``excluded``, and left out of the aggregates.
    """

    frequencies: np.ndarray
    mag_err_db: np.ndarray
    phase_err_deg: np.ndarray
    max_mag_err_db: float
    mean_mag_err_db: float
    max_phase_err_deg: float
    excluded: np.ndarray


def compare_frequency_responses(a: FrequencyResponse, b: FrequencyResponse) -> ComparisonReport:
    """Quantify how far response ``a`` deviates from reference ``b``."""
    if a.frequencies.shape != b.frequencies.shape or not np.array_equal(
        a.frequencies, b.frequencies
    ):
        raise GridMismatchError("frequency grids differ between the two responses")
    if a.response.shape != b.response.shape:
        raise DimensionMismatchError(
            f"response shapes differ: {a.response.shape} vs {b.response.shape} (a vs b)"
        )
    mag_a = np.abs(a.response)
    mag_b = np.abs(b.response)
    with np.errstate(divide="ignore", invalid="ignore"):
        mag_err = 20.0 * np.log10(mag_a / mag_b)
    phase_err = np.angle(a.response) - np.angle(b.response)
    # Wrap to (-180, 180]; the negated-remainder form keeps +180 (not -180).
    phase_err = -np.degrees(np.remainder(-phase_err + np.pi, 2 * np.pi) - np.pi)
    excluded = ~np.isfinite(mag_err)
    phase_err = np.where(excluded, np.nan, phase_err)
    ok = ~excluded
    if np.any(ok):
        max_mag = float(np.max(np.abs(mag_err[ok])))
        mean_mag = float(np.mean(np.abs(mag_err[ok])))
        max_phase = float(np.max(np.abs(phase_err[ok])))
    else:
        max_mag = mean_mag = max_phase = float("nan")
    return ComparisonReport(
        frequencies=a.frequencies,
        mag_err_db=mag_err,
        phase_err_deg=phase_err,
        max_mag_err_db=max_mag,
        mean_mag_err_db=mean_mag,
        max_phase_err_deg=max_phase,
        excluded=excluded,
    )


@dataclass(frozen=True, eq=False)
class PredictionReport:
    """One-step-ahead prediction quality of an identified model."""

    one_step_rmse: float
    residual_autocorr: np.ndarray  # (n_lags, q), lag 1 first
    output_autocorr: np.ndarray  # same for the raw measured output
    observer_spectral_radius: float
    divergent: bool
    predicted: np.ndarray = field(repr=False, default=None)


def _normalized_autocorr(x: np.ndarray, n_lags: int) -> np.ndarray:
    """Per-channel autocorrelation of a (l, q) sequence at lags 1..n_lags."""
    x = x - x.mean(axis=0)
    denom = np.sum(x * x, axis=0)
    denom = np.where(denom == 0.0, 1.0, denom)
    out = np.empty((n_lags, x.shape[1]))
    for lag in range(1, n_lags + 1):
        if lag >= x.shape[0]:
            out[lag - 1] = 0.0
        else:
            out[lag - 1] = np.sum(x[:-lag] * x[lag:], axis=0) / denom
    return out


def validate_kalman(
    model: IdentifiedModel,
    data: TimeSeriesDataset,
    burn_in: int = 0,
    n_lags: int = 20,
) -> PredictionReport:
    """Run the one-step predictor and score its residuals.

    The predictor

        x(k+1) = (A - K C) x(k) + (B - K D) u(k) + K y(k)
        yhat(k) = C x(k) + D u(k)

    starts from a zero state.  RMSE and residual autocorrelation are computed
    after discarding ``burn_in`` samples; an observer spectral radius at or
    above one flags the report divergent but the metrics are still computed.
    """
    if data.m != model.model.m or data.q != model.model.q:
        raise DimensionMismatchError(
            f"model is {model.model.q}x{model.model.m} (q x m) but data is "
            f"{data.q}x{data.m} (model vs data)"
        )
    if not 0 <= burn_in < data.length:
        raise ValueError(f"burn_in must lie in [0, {data.length}), got {burn_in}")
    A, B, C, D, K = model.A, model.B, model.C, model.D, model.K
    F = A - K @ C
    H = B - K @ D
    yhat = np.empty_like(data.y)
    x = np.zeros(model.model.n)
    for k in range(data.length):
        yhat[k] = C @ x + D @ data.u[k]
        x = F @ x + H @ data.u[k] + K @ data.y[k]

    resid = data.y[burn_in:] - yhat[burn_in:]
    rmse = float(np.sqrt(np.mean(resid**2)))
    rho = model.observer_spectral_radius
    return PredictionReport(
        one_step_rmse=rmse,
        residual_autocorr=_normalized_autocorr(resid, n_lags),
        output_autocorr=_normalized_autocorr(data.y[burn_in:], n_lags),
        observer_spectral_radius=rho,
        divergent=bool(rho >= 1.0),
        predicted=yhat,
    )
