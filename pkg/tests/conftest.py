"""Shared construction helpers for the test suite."""

import numpy as np

from okidera.state_space import StateSpaceModel


def random_stable_system(n, m, q, rng, radius=0.9):
    """Random state-space model rescaled to the requested spectral radius."""
    A = rng.standard_normal((n, n))
    rho = np.max(np.abs(np.linalg.eigvals(A)))
    if rho > 0:
        A *= radius / rho
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((q, n))
    D = rng.standard_normal((q, m))
    return StateSpaceModel(A=A, B=B, C=C, D=D)


def random_minimal_siso(n, rng, radius=0.9, min_sv=1e-3):
    """Stable SISO system that is safely controllable and observable."""
    while True:
        sys = random_stable_system(n, 1, 1, rng, radius)
        ctrb = np.hstack([np.linalg.matrix_power(sys.A, i) @ sys.B for i in range(n)])
        obsv = np.vstack([sys.C @ np.linalg.matrix_power(sys.A, i) for i in range(n)])
        if (
            np.linalg.svd(ctrb, compute_uv=False)[-1] > min_sv
            and np.linalg.svd(obsv, compute_uv=False)[-1] > min_sv
        ):
            return sys


def deadbeat_observer_gain(A, C):
    """Gain K placing all eigenvalues of A - K C at zero (SISO output).

    Ackermann's formula on the dual system: K = A^n O^{-1} e_n with O the
    observability matrix.
    """
    n = A.shape[0]
    obsv = np.vstack([C @ np.linalg.matrix_power(A, i) for i in range(n)])
    e_n = np.zeros((n, 1))
    e_n[-1, 0] = 1.0
    return np.linalg.matrix_power(A, n) @ np.linalg.solve(obsv, e_n)


def observer_markov_blocks(A, B, C, D, K, p):
    """True observer Markov parameters C F^i [H G], i = 0..p-1."""
    F = A - K @ C
    L = np.hstack([B - K @ D, K])
    blocks = []
    M = np.eye(A.shape[0])
    for _ in range(p):
        blocks.append(C @ M @ L)
        M = F @ M
    return blocks
