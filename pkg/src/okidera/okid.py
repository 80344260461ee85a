"""Observer Markov-parameter estimation by stacked least squares.

Writing the steady-state observer in predictor form with F = A - KC,
H = B - KD, G = K and L = [H G], the measured output obeys

    y(k) ~= D u(k) + sum_{i=1..p} C F^{i-1} L nu(k-i),   nu(k) = [u(k); y(k)]

once the observer transient F^p has decayed.  Collecting the outputs for
k = p .. l-1 into Y and the regressors into V, the block row
Phi = [D, CL, CFL, ..., CF^{p-1}L] is estimated as Y @ pinv(V).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, HorizonError, InsufficientDataError
from .state_space import TimeSeriesDataset


@dataclass(frozen=True, eq=False)
class OkidConfig:
    """Regression configuration.

    Parameters
    ----------
    p : int
        Observer horizon in samples.  Must satisfy p >= 1 and p < l for the
        dataset it is applied to; choose p well above the expected system
        order so the observer transient is negligible.
    min_rows : int
        Minimum number of usable regression equations (columns of V).
    solver_tolerance : float
        Relative singular-value cutoff for the pseudo-inverse.
    """

    p: int
    min_rows: int = 1
    solver_tolerance: float = 1e-10

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"observer horizon p must be >= 1, got {self.p}")
        if self.min_rows < 1:
            raise ValueError(f"min_rows must be >= 1, got {self.min_rows}")
        if not self.solver_tolerance > 0:
            raise ValueError(f"solver_tolerance must be > 0, got {self.solver_tolerance}")


@dataclass(frozen=True, eq=False)
class MarkovParameterSet:
    """Estimated observer Markov parameters.

    ``D_block`` is the q x m feedthrough estimate and ``observer_blocks`` the
    p matrices C F^i L (i = 0..p-1), each q x (m+q).  ``warnings`` carries
    non-fatal solver diagnostics (rank deficiency, underdetermined fit).
    """

    D_block: np.ndarray
    observer_blocks: tuple
    p: int
    m: int
    q: int
    warnings: tuple = ()

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D_block, dtype=float)).copy()
        D.setflags(write=False)
        blocks = []
        for i, blk in enumerate(self.observer_blocks):
            b = np.atleast_2d(np.asarray(blk, dtype=float)).copy()
            if b.shape != (self.q, self.m + self.q):
                raise DimensionMismatchError(
                    f"observer block {i} must be {self.q}x{self.m + self.q}, got {b.shape}"
                )
            b.setflags(write=False)
            blocks.append(b)
        if len(blocks) != self.p:
            raise DimensionMismatchError(
                f"expected p={self.p} observer blocks, got {len(blocks)}"
            )
        if D.shape != (self.q, self.m):
            raise DimensionMismatchError(
                f"D block must be {self.q}x{self.m}, got {D.shape}"
            )
        object.__setattr__(self, "D_block", D)
        object.__setattr__(self, "observer_blocks", tuple(blocks))
        object.__setattr__(self, "warnings", tuple(self.warnings))


def build_regressors(data: TimeSeriesDataset, cfg: OkidConfig) -> tuple[np.ndarray, np.ndarray]:
    """Stack the outputs and lagged input/output regressors.

    Returns
    -------
    Y : (q, l-p) ndarray
        Column t is y(p+t).
    V : (m + p*(m+q), l-p) ndarray
        Column t is [u(p+t); u(p+t-1); y(p+t-1); ...; u(t); y(t)], i.e. the
        current input followed by p lagged input/output pairs, most recent
        lag first.
    """
    l, m, q = data.length, data.m, data.q
    p = cfg.p
    if l <= p:
        raise HorizonError(f"need more samples than the horizon: l={l} <= p={p}")
    cols = l - p
    if cols < cfg.min_rows:
        raise InsufficientDataError(
            f"only {cols} usable equations (l-p) but min_rows={cfg.min_rows}"
        )

    u = data.u.T  # (m, l)
    y = data.y.T  # (q, l)
    Y = y[:, p:].copy()
    V = np.empty((m + p * (m + q), cols))
    V[:m] = u[:, p:]
    nu = np.vstack([u, y])  # (m+q, l)
    for lag in range(1, p + 1):
        r = m + (lag - 1) * (m + q)
        V[r : r + m + q] = nu[:, p - lag : l - lag]
    return Y, V


def estimate_markov_parameters(Y: np.ndarray, V: np.ndarray, cfg: OkidConfig) -> MarkovParameterSet:
    """Least-squares estimate Phi_hat = Y @ pinv(V), split into blocks.

    The pseudo-inverse uses an SVD with relative cutoff
    ``cfg.solver_tolerance``: overdetermined full-rank systems get the unique
    least-squares solution, underdetermined ones the minimum-Frobenius-norm
    solution.

    Exactly rank-deficient overdetermined systems (noise-free data always
    produce them once p exceeds the system order) admit a whole family of
    optimal solutions; the plain minimum-norm member smears weight onto deep
    lags and realizes poorly.  In that case the estimate is refined, at
    unchanged residual, to the family member whose deep blocks are smallest,
    which matches the decay a stable observer imposes on the true blocks.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if Y.shape[1] != V.shape[1]:
        raise DimensionMismatchError(
            f"Y has {Y.shape[1]} columns but V has {V.shape[1]} (Y vs V)"
        )
    q = Y.shape[0]
    rows = V.shape[0]
    p = cfg.p
    # rows = m + p*(m+q) with q known from Y and p from the config.
    m, rem = divmod(rows - p * q, p + 1)
    if rem != 0 or m < 1:
        raise DimensionMismatchError(
            f"V has {rows} rows, which does not match m + {p}*(m+{q}) for any m >= 1 (V vs cfg.p)"
        )

    notes = []
    U, svals, _ = np.linalg.svd(V, full_matrices=False)
    smax = svals[0] if svals.size else 0.0
    rank = int(np.sum(svals > cfg.solver_tolerance * smax)) if smax > 0 else 0
    if smax == 0.0:
        notes.append("rank-deficient regressor matrix: V is identically zero")
    elif rank < min(V.shape):
        notes.append(f"rank-deficient regressor matrix: rank {rank} < {min(V.shape)}")
    underdetermined = V.shape[1] < rows
    if underdetermined:
        notes.append(
            f"underdetermined fit: {V.shape[1]} equations for {rows} unknown columns; "
            f"minimum-norm solution returned (recommend l >= 4*p*(m+q) = {4 * p * (m + q)})"
        )

    Phi = Y @ np.linalg.pinv(V, rcond=cfg.solver_tolerance)
    if not underdetermined and 0 < rank < rows:
        Phi = _truncate_to_shallowest_member(Phi, U[:, rank:], m, q, p)

    D_block = Phi[:, :m]
    blocks = [Phi[:, m + i * (m + q) : m + (i + 1) * (m + q)] for i in range(p)]
    return MarkovParameterSet(
        D_block=D_block, observer_blocks=tuple(blocks), p=p, m=m, q=q,
        warnings=tuple(notes),
    )


def _truncate_to_shallowest_member(Phi, null_basis, m, q, p, rtol=1e-8):
    """Move Phi within its optimal family onto the shortest-memory member.

    ``null_basis`` spans the left null space of V, so any shift along it
    leaves Phi @ V unchanged.  Scanning depths from the shallowest, the first
    depth whose tail blocks can be zeroed exactly identifies the
    finite-memory (deadbeat-style) representation; deeper-only corrections
    would leave junk in the blocks the Hankel consumes.
    """
    scale = np.linalg.norm(Phi)
    if scale == 0.0:
        return Phi
    for depth in range(1, p):
        tail = slice(m + depth * (m + q), Phi.shape[1])
        Nd = null_basis[tail]
        target = Phi[:, tail].T
        coeffs, *_ = np.linalg.lstsq(Nd, target, rcond=None)
        if np.linalg.norm(Nd @ coeffs - target) <= rtol * scale:
            return Phi - (null_basis @ coeffs).T
    return Phi
