"""Discrete LTI state-space types, noisy simulation, and colored-noise synthesis.

The central objects are a plant

    x(k+1) = A x(k) + B u(k) + w_p(k)
    y(k)   = C x(k) + D u(k) + w_m(k)

and a stable coloring filter that shapes white noise into the colored
measurement disturbance w_m.  ``build_augmented_system`` stacks the two into a
single model whose input/output transfer function is identical to the plant's,
which is what makes identification from colored-noise data possible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DimensionMismatchError

# Spectral radii inside [1 - STABILITY_TOL, 1 + STABILITY_TOL] are treated as
# unstable: a borderline filter must not pass the stability gate.
STABILITY_TOL = 1e-9


def spectral_radius(A: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(value, dtype=float))
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _as_std_vector(value, size: int, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (size,)).copy()
    if np.any(arr < 0):
        raise ValueError(f"{name} must be non-negative, got {arr}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Discrete-time LTI quadruple (A, B, C, D).

    Parameters
    ----------
    A : (n, n) array_like
        State transition matrix.
    B : (n, m) array_like
        Input map.
    C : (q, n) array_like
        Output map.
    D : (q, m) array_like
        Feedthrough.

    All four matrices are validated for mutually consistent dimensions on
    construction and stored read-only.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        C = _as_matrix(self.C, "C")
        D = _as_matrix(self.D, "D")
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatchError(f"A must be square, got {A.shape}")
        n = A.shape[0]
        if B.shape[0] != n:
            raise DimensionMismatchError(
                f"A is {n}x{n} but B has {B.shape[0]} rows (A vs B)"
            )
        if C.shape[1] != n:
            raise DimensionMismatchError(
                f"A is {n}x{n} but C has {C.shape[1]} columns (A vs C)"
            )
        if D.shape != (C.shape[0], B.shape[1]):
            raise DimensionMismatchError(
                f"D must be {C.shape[0]}x{B.shape[1]} to match C and B, got {D.shape} (D vs C/B)"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def q(self) -> int:
        return self.C.shape[0]

    @property
    def spectral_radius(self) -> float:
        return spectral_radius(self.A)

    @property
    def is_stable(self) -> bool:
        """True only when the spectral radius is strictly below 1 - 1e-9."""
        return self.spectral_radius < 1.0 - STABILITY_TOL


@dataclass(frozen=True, eq=False)
class ColoringFilter:
    """Stable noise-shaping filter driven by white noise.

    The white noise enters the state additively with identity gain,

        x_c(k+1) = A_c x_c(k) + w(k)
        y_c(k)   = C_c x_c(k) + D_c w(k)

    so w lives in the state space: ``sigma_w`` gives its per-state-channel
    standard deviation and D_c maps it directly to the output (D_c therefore
    has one column per state channel; it is square whenever the filter order
    equals the output dimension).

    Construction rejects an A_c whose spectral radius is not strictly inside
    the unit circle.
    """

    A_c: np.ndarray
    C_c: np.ndarray
    D_c: np.ndarray
    sigma_w: np.ndarray = 1.0

    def __post_init__(self):
        A_c = _as_matrix(self.A_c, "A_c")
        C_c = _as_matrix(self.C_c, "C_c")
        D_c = _as_matrix(self.D_c, "D_c")
        if A_c.shape[0] != A_c.shape[1]:
            raise DimensionMismatchError(f"A_c must be square, got {A_c.shape}")
        n_c = A_c.shape[0]
        if C_c.shape[1] != n_c:
            raise DimensionMismatchError(
                f"A_c is {n_c}x{n_c} but C_c has {C_c.shape[1]} columns (A_c vs C_c)"
            )
        if D_c.shape != (C_c.shape[0], n_c):
            raise DimensionMismatchError(
                f"D_c must be {C_c.shape[0]}x{n_c} to match C_c and the "
                f"state-channel noise, got {D_c.shape} (D_c vs C_c/A_c)"
            )
        rho = spectral_radius(A_c)
        if rho >= 1.0 - STABILITY_TOL:
            raise ValueError(
                f"coloring filter must be stable: spectral radius {rho:.12g} >= {1.0 - STABILITY_TOL}"
            )
        object.__setattr__(self, "A_c", A_c)
        object.__setattr__(self, "C_c", C_c)
        object.__setattr__(self, "D_c", D_c)
        object.__setattr__(self, "sigma_w", _as_std_vector(self.sigma_w, n_c, "sigma_w"))

    @property
    def n_c(self) -> int:
        return self.A_c.shape[0]

    @property
    def q(self) -> int:
        return self.C_c.shape[0]


@dataclass(frozen=True, eq=False)
class TimeSeriesDataset:
    """Paired input/output sequences sampled at a fixed rate.

    ``u`` is (l, m) and ``y`` is (l, q), one row per sample.
    """

    u: np.ndarray
    y: np.ndarray
    sample_rate: float = 1.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        if y.ndim == 1:
            y = y[:, None]
        if u.ndim != 2 or y.ndim != 2:
            raise DimensionMismatchError(
                f"u and y must be 1- or 2-D, got shapes {u.shape} and {y.shape}"
            )
        if u.shape[0] != y.shape[0]:
            raise DimensionMismatchError(
                f"u has {u.shape[0]} samples but y has {y.shape[0]} (u vs y)"
            )
        if u.shape[0] < 1:
            raise ValueError("dataset must contain at least one sample")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        u = u.copy()
        y = y.copy()
        u.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    @property
    def length(self) -> int:
        return self.u.shape[0]

    @property
    def m(self) -> int:
        return self.u.shape[1]

    @property
    def q(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Zero-mean Gaussian noise configuration for :func:`simulate`.

    ``process_std`` is the per-state-channel standard deviation of the white
    process noise, ``coloring`` (optional) shapes the colored measurement
    disturbance, and ``measurement_white_std`` adds a plain white term to the
    output.  Everything is derived deterministically from ``seed``.
    """

    process_std: float = 0.0
    coloring: Optional[ColoringFilter] = None
    measurement_white_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        proc = np.asarray(self.process_std, dtype=float)
        meas = np.asarray(self.measurement_white_std, dtype=float)
        if np.any(proc < 0) or np.any(meas < 0):
            raise ValueError("noise standard deviations must be non-negative")


def _colored_noise_from_rng(filt: ColoringFilter, length: int, rng: np.random.Generator) -> np.ndarray:
    """Run the coloring recursion from a zero state, drawing w from ``rng``."""
    w = rng.standard_normal((length, filt.n_c)) * filt.sigma_w
    out = np.empty((length, filt.q))
    x = np.zeros(filt.n_c)
    for k in range(length):
        out[k] = filt.C_c @ x + filt.D_c @ w[k]
        x = filt.A_c @ x + w[k]
    return out


def generate_colored_noise(filt: ColoringFilter, length: int, seed: int) -> np.ndarray:
    """Synthesize a colored-noise sequence of shape (length, q).

    The filter state starts at zero and the driving noise is i.i.d. zero-mean
    Gaussian with the filter's per-channel standard deviation.  The output is
    reproducible bit-for-bit for a fixed seed on one platform.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    return _colored_noise_from_rng(filt, length, rng)


def simulate(
    model: StateSpaceModel,
    u: np.ndarray,
    noise: NoiseSpec = NoiseSpec(),
    x0: Optional[np.ndarray] = None,
    sample_rate: float = 1.0,
) -> TimeSeriesDataset:
    """Simulate the model under the configured process/measurement noise.

    Parameters
    ----------
    model : StateSpaceModel
    u : (l, m) array_like
        Input sequence, one row per sample.  A 1-D array is accepted for
        single-input models.
    noise : NoiseSpec
        Noise configuration; the default is noise-free.
    x0 : (n,) array_like, optional
        Initial state, zero when omitted.
    sample_rate : float
        Stored on the returned dataset.

    Returns
    -------
    TimeSeriesDataset
        With y(k) = C x(k) + D u(k) + w_m(k) and the state advanced by
        x(k+1) = A x(k) + B u(k) + w_p(k).
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[0] < 1:
        raise ValueError("input sequence must be non-empty")
    if u.shape[1] != model.m:
        raise DimensionMismatchError(
            f"model expects m={model.m} inputs but u has {u.shape[1]} columns (model vs u)"
        )
    if x0 is None:
        x0 = np.zeros(model.n)
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape[0] != model.n:
        raise DimensionMismatchError(
            f"model has n={model.n} states but x0 has dimension {x0.shape[0]} (model vs x0)"
        )
    if noise.coloring is not None and noise.coloring.q != model.q:
        raise DimensionMismatchError(
            f"model has q={model.q} outputs but coloring filter produces "
            f"{noise.coloring.q} (model vs coloring)"
        )

    l = u.shape[0]
    rng = np.random.default_rng(noise.seed)
    # Fixed draw order (process, colored, white measurement) keeps runs
    # reproducible per seed regardless of downstream consumption.
    w_p = rng.standard_normal((l, model.n)) * noise.process_std
    if noise.coloring is not None:
        w_m = _colored_noise_from_rng(noise.coloring, l, rng)
    else:
        w_m = np.zeros((l, model.q))
    w_m = w_m + rng.standard_normal((l, model.q)) * noise.measurement_white_std

    y = np.empty((l, model.q))
    x = x0
    for k in range(l):
        y[k] = model.C @ x + model.D @ u[k] + w_m[k]
        x = model.A @ x + model.B @ u[k] + w_p[k]
    return TimeSeriesDataset(u=u, y=y, sample_rate=sample_rate)


def build_augmented_system(actual: StateSpaceModel, coloring: ColoringFilter) -> StateSpaceModel:
    """Stack a plant and its coloring filter into one block-diagonal model.

    The result has state [x_a; x_c], A = blkdiag(A_a, A_c), B = [B_a; 0],
    C = [C_a, C_c] and D = D_a.  Because the coloring states are unreachable
    from the input, the augmented input/output transfer function equals the
    plant's.
    """
    if coloring.q != actual.q:
        raise DimensionMismatchError(
            f"plant has q={actual.q} outputs but coloring filter has q={coloring.q} (plant vs coloring)"
        )
    n_a, n_c = actual.n, coloring.n_c
    A = np.zeros((n_a + n_c, n_a + n_c))
    A[:n_a, :n_a] = actual.A
    A[n_a:, n_a:] = coloring.A_c
    B = np.vstack([actual.B, np.zeros((n_c, actual.m))])
    C = np.hstack([actual.C, coloring.C_c])
    return StateSpaceModel(A=A, B=B, C=C, D=actual.D)
