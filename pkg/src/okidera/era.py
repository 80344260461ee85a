"""Realization of (A, B, C, D) and the Kalman gain from observer Markov parameters.

The observer blocks C F^i L fill two block-Hankel matrices H0 (= O Ctrl) and
H1 (= O F Ctrl).  A truncated SVD of H0 splits the factors as
O = U+ S+^{1/2} and Ctrl = S+^{1/2} V+^T, after which

    F = S+^{-1/2} U+^T H1 V+ S+^{-1/2}

and L, C are read off the leading columns/rows of the factors.  Splitting
L = [H G] finally gives the plant and gain:  K = G, A = F + G C, B = H + G D.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import (
    DegenerateRealizationError,
    DimensionMismatchError,
    InsufficientHorizonError,
    OrderError,
)
from .okid import MarkovParameterSet, OkidConfig, build_regressors, estimate_markov_parameters
from .state_space import StateSpaceModel, TimeSeriesDataset, spectral_radius


@dataclass(frozen=True, eq=False)
class HankelPair:
    """Block-Hankel matrix H0 and its one-step shift H1.

    Block (i, j) of H0 is observer block i+j, and of H1 block i+j+1, so the
    pair requires alpha + beta <= p source blocks.
    """

    H0: np.ndarray
    H1: np.ndarray
    alpha: int
    beta: int
    m: int
    q: int

    def __post_init__(self):
        H0 = np.asarray(self.H0, dtype=float).copy()
        H1 = np.asarray(self.H1, dtype=float).copy()
        if H0.shape != H1.shape:
            raise DimensionMismatchError(
                f"H0 has shape {H0.shape} but H1 has {H1.shape} (H0 vs H1)"
            )
        H0.setflags(write=False)
        H1.setflags(write=False)
        object.__setattr__(self, "H0", H0)
        object.__setattr__(self, "H1", H1)


@dataclass(frozen=True, eq=False)
class EraRealization:
    """Output of :func:`era_realize`: the observer triple plus its SVD factors."""

    F: np.ndarray
    L: np.ndarray
    C_matrix: np.ndarray
    observability: np.ndarray
    controllability: np.ndarray
    singular_values: np.ndarray
    order: int


@dataclass(frozen=True, eq=False)
class IdentifiedModel:
    """A realized plant, its steady-state Kalman gain, and diagnostics.

    The observer matrix A - K C equals the realized F, so its spectral
    radius below one certifies a usable one-step predictor.  Construction
    warns (but does not fail) when that radius exceeds 1 + 1e-6, since a
    divergent realization must still be inspectable downstream.
    """

    model: StateSpaceModel
    K: np.ndarray
    order: int
    singular_values: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        K = np.atleast_2d(np.asarray(self.K, dtype=float)).copy()
        if K.shape != (self.model.n, self.model.q):
            raise DimensionMismatchError(
                f"K must be {self.model.n}x{self.model.q}, got {K.shape} (K vs model)"
            )
        K.setflags(write=False)
        sv = np.asarray(self.singular_values, dtype=float).copy()
        sv.setflags(write=False)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "singular_values", sv)
        object.__setattr__(self, "diagnostics", dict(self.diagnostics))
        rho = self.observer_spectral_radius
        if rho >= 1.0 + 1e-6:
            _warnings.warn(
                f"identified observer is unstable: spectral radius(A - K C) = {rho:.6g}",
                RuntimeWarning,
                stacklevel=2,
            )

    @property
    def A(self) -> np.ndarray:
        return self.model.A

    @property
    def B(self) -> np.ndarray:
        return self.model.B

    @property
    def C(self) -> np.ndarray:
        return self.model.C

    @property
    def D(self) -> np.ndarray:
        return self.model.D

    @property
    def observer_spectral_radius(self) -> float:
        return spectral_radius(self.model.A - self.K @ self.model.C)


def build_hankel(params: MarkovParameterSet, alpha: int, beta: int) -> HankelPair:
    """Assemble H0 and the shifted H1 from the observer blocks.

    The feedthrough block D is never placed in the Hankel matrices.
    """
    if alpha < 1 or beta < 1:
        raise ValueError(f"alpha and beta must be >= 1, got alpha={alpha}, beta={beta}")
    if alpha + beta > params.p:
        raise InsufficientHorizonError(
            f"alpha + beta = {alpha + beta} exceeds the available horizon p = {params.p}"
        )
    q, mq = params.q, params.m + params.q
    H0 = np.empty((alpha * q, beta * mq))
    H1 = np.empty_like(H0)
    blocks = params.observer_blocks
    for i in range(alpha):
        for j in range(beta):
            H0[i * q : (i + 1) * q, j * mq : (j + 1) * mq] = blocks[i + j]
            H1[i * q : (i + 1) * q, j * mq : (j + 1) * mq] = blocks[i + j + 1]
    return HankelPair(H0=H0, H1=H1, alpha=alpha, beta=beta, m=params.m, q=params.q)


def era_realize(
    hankel: HankelPair,
    order: Optional[int] = None,
    threshold: Optional[float] = None,
) -> EraRealization:
    """Truncated-SVD realization of the observer triple (F, L, C).

    Exactly one of ``order`` (retained singular values) and ``threshold``
    (relative singular-value cutoff) must be given.  Columns of the retained
    left singular basis are sign-normalized so each column's
    largest-magnitude entry is positive, making realizations reproducible
    across SVD implementations.
    """
    if (order is None) == (threshold is None):
        raise ValueError("exactly one of order and threshold must be given")

    U, s, Vt = np.linalg.svd(hankel.H0, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise DegenerateRealizationError("Hankel matrix is identically zero")

    if order is not None:
        if order < 1 or order > s.size:
            raise OrderError(
                f"order {order} outside the available range 1..{s.size}"
            )
        r = int(order)
    else:
        r = int(np.sum(s >= threshold * s[0]))
        if r == 0:
            raise DegenerateRealizationError(
                f"no singular value above threshold {threshold} * {s[0]:.6g}"
            )
    if s[r - 1] == 0.0:
        raise DegenerateRealizationError(
            f"retained order {r} includes zero singular values"
        )

    Ur = U[:, :r]
    Vr = Vt[:r, :].T
    # Fix the SVD sign ambiguity: largest-|.| entry of each retained left
    # singular vector made positive, compensated on the right.
    flips = np.sign(Ur[np.abs(Ur).argmax(axis=0), np.arange(r)])
    flips[flips == 0] = 1.0
    Ur = Ur * flips
    Vr = Vr * flips

    sqrt_s = np.sqrt(s[:r])
    O = Ur * sqrt_s
    Ctrl = (Vr * sqrt_s).T
    F = (Ur / sqrt_s).T @ hankel.H1 @ (Vr / sqrt_s)
    L = Ctrl[:, : hankel.m + hankel.q]
    C_matrix = O[: hankel.q, :]
    return EraRealization(
        F=F, L=L, C_matrix=C_matrix,
        observability=O, controllability=Ctrl,
        singular_values=s, order=r,
    )


def recover_system(
    F: np.ndarray,
    L: np.ndarray,
    C_matrix: np.ndarray,
    D_block: np.ndarray,
    singular_values: Optional[np.ndarray] = None,
    diagnostics: Optional[dict] = None,
) -> IdentifiedModel:
    """Undo the observer substitution: split L = [H G], then A = F + G C, B = H + G D.

    The Kalman gain is the G block.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    L = np.atleast_2d(np.asarray(L, dtype=float))
    C_matrix = np.atleast_2d(np.asarray(C_matrix, dtype=float))
    D_block = np.atleast_2d(np.asarray(D_block, dtype=float))
    q, m = D_block.shape
    if L.shape[1] != m + q:
        raise DimensionMismatchError(
            f"L must have m+q = {m + q} columns, got {L.shape[1]} (L vs D)"
        )
    H = L[:, :m]
    G = L[:, m:]
    A = F + G @ C_matrix
    B = H + G @ D_block
    model = StateSpaceModel(A=A, B=B, C=C_matrix, D=D_block)
    return IdentifiedModel(
        model=model,
        K=G,
        order=F.shape[0],
        singular_values=np.zeros(0) if singular_values is None else singular_values,
        diagnostics={} if diagnostics is None else diagnostics,
    )


def identify(
    data: TimeSeriesDataset,
    cfg: OkidConfig,
    order: Optional[int] = None,
    threshold: Optional[float] = None,
    alpha: Optional[int] = None,
    beta: Optional[int] = None,
) -> IdentifiedModel:
    """End-to-end identification: regressors, least squares, Hankel SVD, recovery.

    ``alpha``/``beta`` default to floor(p/2) each, which exposes the maximum
    rank the p estimated blocks can support.  Errors from the individual
    stages are re-raised with the stage name prefixed.
    """
    Y, V = _stage("build_regressors", build_regressors, data, cfg)
    params = _stage("estimate_markov_parameters", estimate_markov_parameters, Y, V, cfg)
    if alpha is None:
        alpha = cfg.p // 2
    if beta is None:
        beta = cfg.p // 2
    hankel = _stage("build_hankel", build_hankel, params, alpha, beta)
    realization = _stage("era_realize", era_realize, hankel, order, threshold)

    # Residual of the regression, for diagnostics.
    Phi = np.hstack([params.D_block, *params.observer_blocks])
    residual = Y - Phi @ V
    diagnostics = {
        "residual_norm": float(np.linalg.norm(residual)),
        "output_norm": float(np.linalg.norm(Y)),
        "observer_spectral_radius": spectral_radius(realization.F),
        "okid_warnings": list(params.warnings),
        "alpha": alpha,
        "beta": beta,
        "p": cfg.p,
    }
    return _stage(
        "recover_system",
        recover_system,
        realization.F,
        realization.L,
        realization.C_matrix,
        params.D_block,
        realization.singular_values,
        diagnostics,
    )


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except (ValueError, np.linalg.LinAlgError) as exc:
        if str(exc).startswith(f"{name}:"):
            raise
        raise type(exc)(f"{name}: {exc}") from exc
