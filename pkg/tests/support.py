"""Shared helpers for the test suite."""

import numpy as np
import scipy.sparse as sp

from gevrey_evp.fem import SparseSystem


def system_from_dense(A, M):
    A = np.asarray(A, dtype=float)
    M = np.asarray(M, dtype=float)
    return SparseSystem(sp.csr_matrix(A), sp.csr_matrix(M), A.shape[0])


def random_spd_pair(rng, n):
    """SPD pair with well-separated low eigenvalues."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sort(rng.uniform(1.0, 50.0, n))
    d[1] = d[0] * rng.uniform(1.6, 3.0)  # keep the first gap healthy
    A = q @ np.diag(d) @ q.T
    A = (A + A.T) / 2
    r = rng.standard_normal((n, n)) * 0.2
    M = r @ r.T + np.eye(n)
    return system_from_dense(A, M)
