"""Inverse power iteration for the smallest generalized eigenpairs.

Solves A u = lambda M u for symmetric positive definite sparse A, M.  The
smallest pair comes from plain inverse iteration with M-normalization; the
second from the same iteration with M-orthogonal deflation against the first
eigenvector.  Convergence is declared when successive Rayleigh quotients
differ by at most ``tol`` AND the scaled residual ||Au - lambda Mu|| / ||u||
has dropped below 10 * tol * lambda (with a stagnation fallback, so the
solver terminates even when that floor is unreachable).

Inner solves use either a sparse LU factorization (default; factorized once
and reused) or Jacobi-preconditioned conjugate gradients with the inner
tolerance slaved to tol/100.  Both sit behind the same contract and agree to
solver accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem import Assembler, SparseSystem, build_mesh

__all__ = [
    "EigenPair",
    "GapReport",
    "EigenSolveError",
    "smallest_eigenpair",
    "second_eigenpair",
    "estimate_gap",
]


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalue, M-normalized eigenvector, scaled residual, iteration count."""

    value: float
    vector: np.ndarray
    residual: float
    iterations: int


@dataclass(frozen=True)
class GapReport:
    """Sampled minimum of the relative spectral gap 1 - lambda1/lambda2."""

    lambda1: float
    lambda2: float
    gap: float
    y_argmin: np.ndarray


class EigenSolveError(RuntimeError):
    """Raised on non-convergence or an unusable matrix pair.

    Carries the last iterate (if any) in ``last``.
    """

    def __init__(self, message: str, last: EigenPair | None = None):
        super().__init__(message)
        self.last = last


def _jacobi_pcg(A, b, x0, rtol, max_iter):
    """Conjugate gradients with diagonal preconditioning.

    Stops on relative residual <= rtol or on stagnation; raises on
    nonpositive curvature (matrix not positive definite).
    """
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise EigenSolveError("matrix has a nonpositive diagonal; not SPD")
    inv_diag = 1.0 / diag
    x = x0.copy()
    r = b - A @ x
    z = inv_diag * r
    p = z.copy()
    gamma = float(r @ z)
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        return np.zeros_like(b)
    best_x = x.copy()
    best_res = float(np.linalg.norm(r)) / norm_b
    stall = 0
    for _ in range(max_iter):
        Ap = A @ p
        curv = float(p @ Ap)
        if curv <= 0.0:
            raise EigenSolveError("nonpositive curvature in CG; matrix not SPD")
        alpha = gamma / curv
        x += alpha * p
        r -= alpha * Ap
        res = float(np.linalg.norm(r)) / norm_b
        if res < best_res:
            best_res = res
            best_x = x.copy()
            stall = 0
        else:
            stall += 1
        if res <= rtol or stall >= 20:
            break
        z = inv_diag * r
        gamma_new = float(r @ z)
        p = z + (gamma_new / gamma) * p
        gamma = gamma_new
    return best_x


def _make_inner_solver(A: sp.csr_matrix, tol: float, inner: str):
    if inner == "direct":
        lu = spla.splu(A.tocsc())
        return lambda b: lu.solve(b)
    if inner == "pcg":
        # tol/100 can undershoot the attainable floor; the CG loop stalls out
        # gracefully, so slave it but keep a rounding-level cushion.
        rtol = max(tol / 100.0, 1e-15)
        n = A.shape[0]
        max_iter = 20 * n + 200
        return lambda b: _jacobi_pcg(A, b, np.zeros_like(b), rtol, max_iter)
    raise ValueError(f"inner solver must be 'direct' or 'pcg', got {inner!r}")


def _check_system(sys: SparseSystem):
    for name, mat in (("A", sys.A), ("M", sys.M)):
        if mat.shape != (sys.n_dof, sys.n_dof):
            raise EigenSolveError(f"{name} has shape {mat.shape}, expected square")
        d = mat.diagonal()
        if d.size == 0 or np.any(d <= 0) or not np.all(np.isfinite(mat.data)):
            raise EigenSolveError(f"{name} is not usable (nonpositive diagonal or NaN)")


def _iterate(
    sys: SparseSystem,
    x0: np.ndarray,
    tol: float,
    max_iter: int,
    inner: str,
    project=None,
):
    """Shared inverse-iteration loop; ``project`` deflates after every step."""
    A, M = sys.A, sys.M
    solve = _make_inner_solver(A, tol, inner)

    def m_normalize(v):
        nrm2 = float(v @ (M @ v))
        if not np.isfinite(nrm2) or nrm2 <= 0.0:
            raise EigenSolveError("iterate collapsed (deflation or singular M)")
        return v / np.sqrt(nrm2)

    x = x0
    if project is not None:
        x = project(x)
    x = m_normalize(x)
    lam = np.inf
    history: list[float] = []  # trailing Rayleigh quotients
    best_res = np.inf
    stall = 0
    pair = None
    eps = float(np.finfo(float).eps)
    for it in range(1, max_iter + 1):
        z = solve(M @ x)
        if project is not None:
            z = project(project(z))
        x = m_normalize(z)
        Ax = A @ x
        Mx = M @ x
        lam = float(x @ Ax)
        if lam <= 0.0 or not np.isfinite(lam):
            raise EigenSolveError(f"nonpositive Rayleigh quotient {lam}")
        rvec = Ax - lam * Mx
        if project is not None:
            rvec = project(rvec)
        res = float(np.linalg.norm(rvec) / np.linalg.norm(x))
        pair = EigenPair(lam, x, res, it)
        # Near machine precision the iterate can settle into a short cycle of
        # floating-point fixed points whose one-step difference never drops
        # below an absolute tol; the two-step difference then vanishes.
        diffs = [abs(lam - old) for old in history[-2:]]
        lam_converged = bool(diffs) and min(diffs) <= tol
        if lam_converged and res <= 10.0 * tol * lam:
            return pair
        if res < best_res * (1.0 - 1e-3):
            best_res = res
            stall = 0
        else:
            stall += 1
        # residual floor reached: accept once lambda has settled
        if lam_converged and stall >= 8:
            return pair
        # hard rounding plateau: lambda confined to a band of a few dozen ulps
        history.append(lam)
        if stall >= 10 and len(history) >= 8:
            window = history[-8:]
            if max(window) - min(window) <= 100.0 * eps * abs(lam):
                return pair
    raise EigenSolveError(
        f"no convergence after {max_iter} iterations (last lambda {lam})", last=pair
    )


def smallest_eigenpair(
    sys: SparseSystem, tol: float = 1e-14, max_iter: int = 10000, inner: str = "direct"
) -> EigenPair:
    """Smallest eigenpair of A u = lambda M u by inverse power iteration.

    Starts from the constant all-ones interior vector; the eigenvector is
    returned M-normalized.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_system(sys)
    x0 = np.ones(sys.n_dof)
    return _iterate(sys, x0, tol, max_iter, inner)


def second_eigenpair(
    sys: SparseSystem,
    first: EigenPair,
    tol: float = 1e-14,
    max_iter: int = 10000,
    inner: str = "direct",
) -> EigenPair:
    """Second-smallest eigenpair via M-orthogonal deflation against ``first``.

    The projection is applied after every multiply and normalization; the
    residual is measured in the deflated subspace.  Fails if the deflated
    iterate collapses (near-degenerate gap).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_system(sys)
    u1 = first.vector
    Mu1 = sys.M @ u1

    def project(v):
        return v - (Mu1 @ v) * u1

    # deterministic start with no mesh symmetry, so all eigencomponents are hit
    n = sys.n_dof
    x0 = np.cos(1.2345 * np.arange(n)) + 0.5
    pair = _iterate(sys, x0, tol, max_iter, inner, project=project)
    if pair.value <= first.value * (1.0 + 1e-12):
        raise EigenSolveError(
            f"deflated eigenvalue {pair.value} did not separate from {first.value}",
            last=pair,
        )
    return pair


def estimate_gap(
    model,
    m: int,
    y_samples,
    tol: float = 1e-12,
    tol2: float = 1e-6,
    max_iter: int = 10000,
    inner: str = "direct",
) -> GapReport:
    """Minimum sampled relative spectral gap 1 - lambda1/lambda2.

    Solves both eigenpairs at every sample; the result is an upper estimate
    of the true uniform gap.  lambda2 uses its own tolerance ``tol2``:
    models can pass through near-degenerate lambda2/lambda3 clusters where
    the deflated eigenvector converges arbitrarily slowly although the
    eigenvalue itself (all the gap needs) settles quickly.  Solver failures
    are re-raised with the index of the offending sample attached.
    """
    samples = list(y_samples)
    if not samples:
        raise ValueError("need at least one parameter sample")
    asm = Assembler(build_mesh(m), model)
    best = None
    for k, y in enumerate(samples):
        try:
            system = asm.system(y)
            p1 = smallest_eigenpair(system, tol, max_iter, inner)
            p2 = second_eigenpair(system, p1, max(tol, tol2), max_iter, inner)
        except EigenSolveError as exc:
            raise EigenSolveError(f"sample {k} (y={y!r}): {exc}", last=exc.last) from exc
        gap = 1.0 - p1.value / p2.value
        if best is None or gap < best[0]:
            best = (gap, p1.value, p2.value, np.atleast_1d(np.asarray(y, dtype=float)))
    gap, l1, l2, y_argmin = best
    return GapReport(l1, l2, gap, y_argmin)
