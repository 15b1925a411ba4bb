"""Randomly shifted rank-1 lattice rules, CBC construction, and MC baseline.

The lattice rule with generating vector z and n points evaluates an
integrand F over [-1/2, 1/2]^s as the equal-weight average of
F({i z / n + Delta} - 1/2), i = 1..n, for a uniform random shift Delta.
Shift randomness comes from a counter-based PRNG (Philox) with an explicit
stream contract: shift r draws from stream (master_seed, r) and, inside a
study, the i-th Monte Carlo sample overall draws from stream
(master_seed, R + i), so every run is reproducible and parallel-safe.

Generating vectors are built by the component-by-component construction
minimizing the shift-averaged squared worst-case error

    e^2(z) = sum_{u nonempty} gamma_u (1/n) sum_k prod_{j in u} B2({k z_j / n})

in the weighted Sobolev space of mixed first derivatives, with the Bernoulli
polynomial B2(x) = x^2 - x + 1/6 and product-and-order-dependent weights
gamma_u = ((|u|!)^delta prod_{j in u} beta_j / sqrt(phi(theta)))^(2/(1+theta)).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.random import Generator, Philox

from .coefficients import CoefficientModel, zeta
from .eigensolver import EigenSolveError, smallest_eigenpair
from .fem import Assembler, build_mesh
from .util import ordered_map

__all__ = [
    "bernoulli_zeta_factor",
    "bernoulli2",
    "PODWeights",
    "pod_weight",
    "parse_beta_rule",
    "worst_case_error_sq",
    "cbc_construct",
    "LatticeRule",
    "make_lattice_rule",
    "lattice_points",
    "qmc_estimate",
    "mc_estimate",
    "ErrorRecord",
    "RmseStudyResult",
    "default_weights",
    "rmse_study",
    "truncation_study",
    "save_vector",
    "load_vector",
    "prng_stream",
]

_ORDER_CAP = 30
_THETA_FLOOR = 0.5 + 1e-6


def bernoulli2(x: np.ndarray) -> np.ndarray:
    """Bernoulli polynomial B2 on [0, 1): x^2 - x + 1/6."""
    return x * x - x + 1.0 / 6.0


def bernoulli_zeta_factor(theta: float) -> float:
    """phi(theta) = 2 zeta(2 theta) / (2 pi^2)^theta for theta in (1/2, 1]."""
    theta = float(theta)
    if theta < _THETA_FLOOR:
        raise ValueError(f"theta must exceed 1/2 (zeta pole), got {theta}")
    if theta > 1.0:
        raise ValueError(f"theta must be at most 1, got {theta}")
    return 2.0 * zeta(2.0 * theta) / (2.0 * math.pi**2) ** theta


@dataclass(frozen=True)
class PODWeights:
    """Product-and-order-dependent weight family gamma_u.

    ``beta`` holds the per-coordinate factors beta_j = 1/R~_j for
    j = 1..s; ``delta`` >= 1 is the Gevrey order driving the |u|! part.
    """

    delta: float
    theta: float
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))
        if self.delta < 1.0:
            raise ValueError("delta must be >= 1")
        bernoulli_zeta_factor(self.theta)  # validates theta
        if self.beta.ndim != 1 or self.beta.size == 0 or np.any(self.beta <= 0):
            raise ValueError("beta must be a nonempty positive sequence")

    @property
    def s(self) -> int:
        return int(self.beta.size)

    def phi(self) -> float:
        return bernoulli_zeta_factor(self.theta)

    def exponent(self) -> float:
        return 2.0 / (1.0 + self.theta)

    def order_factor(self, ell: int) -> float:
        """(ell!)^(2 delta / (1 + theta)), in log space for large ell."""
        power = self.exponent() * self.delta
        if ell <= 20:
            return float(math.factorial(ell)) ** power
        return math.exp(power * math.lgamma(ell + 1))

    def product_factor(self, j: int) -> float:
        """(beta_j / sqrt(phi))^(2/(1+theta)) for 1-based coordinate j."""
        return (self.beta[j - 1] / math.sqrt(self.phi())) ** self.exponent()


def pod_weight(w: PODWeights, u: Iterable[int]) -> float:
    """Weight gamma_u of a subset u of {1..s}; gamma_empty = 1."""
    u = sorted(set(int(j) for j in u))
    if any(j < 1 or j > w.s for j in u):
        raise ValueError(f"subset {u} not contained in 1..{w.s}")
    ell = len(u)
    if ell == 0:
        return 1.0
    if ell <= 20:
        prod = float(math.factorial(ell)) ** w.delta
        root_phi = math.sqrt(w.phi())
        for j in u:
            prod *= w.beta[j - 1] / root_phi
        return prod ** w.exponent()
    log_gamma = w.delta * math.lgamma(ell + 1)
    log_gamma += sum(math.log(w.beta[j - 1]) for j in u)
    log_gamma -= 0.5 * ell * math.log(w.phi())
    return math.exp(w.exponent() * log_gamma)


_BETA_RULE = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*\s*)?j\^(-?[0-9.eE+]+)\s*$")


def parse_beta_rule(rule: str, s: int) -> np.ndarray:
    """Per-coordinate factors from a power-law rule like 'j^-5' or '0.5*j^-2'."""
    m = _BETA_RULE.match(rule)
    if not m:
        raise ValueError(f"beta rule must look like 'j^-5' or 'c*j^-p', got {rule!r}")
    scale = float(m.group(1)) if m.group(1) else 1.0
    power = float(m.group(2))
    j = np.arange(1, s + 1, dtype=float)
    return scale * j**power


def _require_pow2(n: int) -> int:
    n = int(n)
    if n < 2 or n & (n - 1):
        raise ValueError(f"point count must be a power of 2 (>= 2), got {n}")
    return n


def worst_case_error_sq(
    z: Sequence[int], n: int, w: PODWeights, max_subset_dim: int = 16
) -> float:
    """Shift-averaged squared worst-case error by direct subset enumeration.

    Exponential in the dimension; intended as the small-case oracle for the
    CBC recursion.
    """
    z = np.asarray(z, dtype=np.int64)
    n = _require_pow2(n)
    s = z.size
    if s > max_subset_dim:
        raise ValueError(f"direct enumeration limited to {max_subset_dim} dims")
    k = np.arange(n)
    omega = bernoulli2(((k[None, :] * (z[:, None] % n)) % n) / n)  # (s, n)
    total = 0.0
    for ell in range(1, s + 1):
        for u in combinations(range(1, s + 1), ell):
            prod = np.ones(n)
            for j in u:
                prod = prod * omega[j - 1]
            total += pod_weight(w, u) * prod.mean()
    return total


def cbc_construct(
    s: int,
    n: int,
    w: PODWeights,
    order_cap: int = _ORDER_CAP,
    return_errors: bool = False,
):
    """Component-by-component generating vector minimizing the worst-case error.

    Each z_j is chosen greedily among the odd integers in [1, n); the POD
    order recursion keeps per-point accumulators P(k, ell) of the subset
    sums of order ell (capped at ``order_cap``).  Deterministic: ties break
    toward the smallest candidate.
    """
    n = _require_pow2(n)
    if s < 1 or s > w.s:
        raise ValueError(f"dimension must lie in 1..{w.s}, got {s}")
    cap = min(s, order_cap)
    k = np.arange(n)
    vals = bernoulli2(k / n)
    candidates = np.arange(1, n, 2, dtype=np.int64)
    gammas = np.array([w.order_factor(ell) for ell in range(cap + 1)])  # index 0 unused
    P = np.zeros((n, cap + 1))
    P[:, 0] = 1.0
    z = np.zeros(s, dtype=np.int64)
    errors = np.zeros(s)
    block = 2048
    for d in range(1, s + 1):
        b = w.product_factor(d)
        q = P[:, 0:cap] @ gammas[1 : cap + 1]  # q(k) = sum_l Gamma_l P(k, l-1)
        base = float((P[:, 1 : cap + 1] * gammas[1 : cap + 1]).sum()) / n
        best_score = np.inf
        best_z = None
        for lo in range(0, candidates.size, block):
            cand = candidates[lo : lo + block]
            omega = vals[(cand[:, None] * k[None, :]) % n]
            scores = base + (b / n) * (omega @ q)
            i = int(np.argmin(scores))
            if scores[i] < best_score:
                best_score = float(scores[i])
                best_z = int(cand[i])
        z[d - 1] = best_z
        omega_best = vals[(best_z * k) % n]
        for ell in range(min(d, cap), 0, -1):
            P[:, ell] += b * omega_best * P[:, ell - 1]
        errors[d - 1] = float((P[:, 1 : cap + 1] * gammas[1 : cap + 1]).sum()) / n
    if return_errors:
        return z, errors
    return z


def prng_stream(master_seed: int, index: int) -> Generator:
    """Counter-based PRNG stream keyed by (master_seed, index)."""
    return Generator(Philox(key=[int(master_seed) & (2**64 - 1), int(index)]))


@dataclass(frozen=True)
class LatticeRule:
    """Generating vector, point count (power of 2), and the shift set."""

    s: int
    n: int
    z: np.ndarray
    shifts: np.ndarray  # (R, s) in [0, 1)^s

    def __post_init__(self):
        n = _require_pow2(self.n)
        z = np.asarray(self.z, dtype=np.int64) % n
        if z.ndim != 1 or z.size != self.s:
            raise ValueError("generating vector length must equal the dimension")
        if np.any(z % 2 == 0):
            raise ValueError("components of z must be odd (coprime with 2^m)")
        shifts = np.asarray(self.shifts, dtype=float)
        if shifts.ndim != 2 or shifts.shape[1] != self.s:
            raise ValueError("shifts must have shape (R, s)")
        if np.any(shifts < 0) or np.any(shifts >= 1):
            raise ValueError("shifts must lie in [0, 1)")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "shifts", shifts)

    @property
    def n_shifts(self) -> int:
        return int(self.shifts.shape[0])


def make_lattice_rule(
    s: int,
    n: int,
    z: Sequence[int] | None = None,
    R: int = 8,
    master_seed: int = 0,
    weights: PODWeights | None = None,
) -> LatticeRule:
    """Lattice rule with R random shifts from streams (master_seed, 0..R-1).

    If no generating vector is supplied one is CBC-constructed with the
    given weights (required in that case).
    """
    n = _require_pow2(n)
    if z is None:
        if weights is None:
            raise ValueError("either a generating vector or weights must be given")
        z = cbc_construct(s, n, weights)
    shifts = np.stack([prng_stream(master_seed, r).random(s) for r in range(R)])
    return LatticeRule(s, n, np.asarray(z), shifts)


def lattice_points(rule: LatticeRule, shift_index: int) -> np.ndarray:
    """The n shifted lattice points in [-1/2, 1/2)^s for one shift."""
    if not 0 <= shift_index < rule.n_shifts:
        raise ValueError(f"shift index {shift_index} out of range")
    i = np.arange(1, rule.n + 1, dtype=np.int64)
    frac = ((i[:, None] * rule.z[None, :]) % rule.n) / rule.n
    return (frac + rule.shifts[shift_index]) % 1.0 - 0.5


def qmc_estimate(
    F: Callable[[np.ndarray], float], rule: LatticeRule
) -> tuple[float, np.ndarray]:
    """Mean over shifts of the per-shift equal-weight lattice averages.

    Point sums accumulate in index order within each shift and shifts reduce
    in shift order, so the result is reproducible.  Integrand failures are
    re-raised with (shift, point) indices attached.
    """
    per_shift = np.zeros(rule.n_shifts)
    for r in range(rule.n_shifts):
        pts = lattice_points(rule, r)

        def evaluate(i: int) -> float:
            try:
                return F(pts[i])
            except EigenSolveError as exc:
                raise EigenSolveError(
                    f"integrand failed at shift {r}, point {i + 1}: {exc}"
                ) from exc

        values = ordered_map(evaluate, range(rule.n))
        total = 0.0
        for v in values:  # fixed index order, independent of the worker pool
            total += v
        per_shift[r] = total / rule.n
    return float(per_shift.mean()), per_shift


def mc_estimate(
    F: Callable[[np.ndarray], float],
    s: int,
    n: int,
    seed: int,
    stream_offset: int = 0,
) -> tuple[float, np.ndarray]:
    """Plain Monte Carlo average of F over uniform points on [-1/2, 1/2]^s.

    Sample i draws from the counter-based stream (seed, stream_offset + i),
    so output is bitwise reproducible for a fixed seed.
    """
    if n < 1:
        raise ValueError("need at least one sample")

    def evaluate(i: int) -> float:
        y = prng_stream(seed, stream_offset + i).random(s) - 0.5
        return F(y)

    values = np.array(ordered_map(evaluate, range(n)))
    return float(values.mean()), values


@dataclass(frozen=True)
class ErrorRecord:
    """Relative RMSE of the randomized estimator at one point count."""

    n: int
    rmse: float
    per_shift: np.ndarray


@dataclass(frozen=True)
class RmseStudyResult:
    qmc: list[ErrorRecord]
    mc: list[ErrorRecord]
    reference: float
    z_by_level: dict[int, np.ndarray]
    provenance: str


def default_weights(model: CoefficientModel, s: int, theta: float = 0.6) -> PODWeights:
    """POD weights matched to a model: its Gevrey order and beta_j = j^-5."""
    return PODWeights(model.gevrey_order, theta, parse_beta_rule("j^-5", s))


def _relative_rmse(reference: float, estimates: np.ndarray) -> float:
    devs = (reference - estimates) / reference
    return float(np.sqrt(np.mean(devs * devs)))


def rmse_study(
    model: CoefficientModel,
    m: int,
    s: int,
    n_list: Sequence[int],
    R: int,
    master_seed: int,
    mc_replicates: int | None = None,
    weights: PODWeights | None = None,
    z_by_level: dict[int, Sequence[int]] | None = None,
    tol: float = 1e-14,
    inner: str = "direct",
    with_mc: bool = True,
) -> RmseStudyResult:
    """Relative RMSE of QMC and MC estimates of the mean smallest eigenvalue.

    The reference value is the shift-mean of the highest-level QMC estimate;
    per-level relative RMSE is taken over the R shifts (QMC) and over
    ``mc_replicates`` independent replicates (MC, default R).  Generating
    vectors are CBC-constructed per level unless supplied via ``z_by_level``.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or sorted(n_list) != n_list:
        raise ValueError("n_list must be nonempty and ascending")
    for n in n_list:
        _require_pow2(n)
    if mc_replicates is None:
        mc_replicates = R

    if weights is None:
        weights = default_weights(model, s)
    if z_by_level is None:
        vectors = {n: cbc_construct(s, n, weights) for n in n_list}
        provenance = (
            f"cbc(delta={weights.delta},theta={weights.theta},beta=j^-5)"
        )
    else:
        vectors = {n: np.asarray(z_by_level[n], dtype=np.int64) for n in n_list}
        provenance = "supplied"

    asm = Assembler(build_mesh(m), model)

    def F(y: np.ndarray) -> float:
        return smallest_eigenpair(asm.system(y), tol=tol, inner=inner).value

    shifts = np.stack([prng_stream(master_seed, r).random(s) for r in range(R)])
    per_level: dict[int, np.ndarray] = {}
    for n in n_list:
        rule = LatticeRule(s, n, vectors[n], shifts)
        per_level[n] = qmc_estimate(F, rule)[1]
    reference = float(per_level[n_list[-1]].mean())
    qmc_records = [
        ErrorRecord(n, _relative_rmse(reference, per_level[n]), per_level[n])
        for n in n_list
    ]

    mc_records: list[ErrorRecord] = []
    if with_mc:
        counter = 0  # global MC sample counter: sample i -> stream (seed, R + i)
        for n in n_list:
            reps = np.zeros(mc_replicates)
            for rep in range(mc_replicates):
                est, _ = mc_estimate(F, s, n, master_seed, stream_offset=R + counter)
                counter += n
                reps[rep] = est
            mc_records.append(ErrorRecord(n, _relative_rmse(reference, reps), reps))

    return RmseStudyResult(qmc_records, mc_records, reference, vectors, provenance)


def mc_study(
    model: CoefficientModel,
    m: int,
    s: int,
    n_list: Sequence[int],
    replicates: int,
    master_seed: int,
    tol: float = 1e-14,
    inner: str = "direct",
) -> list[ErrorRecord]:
    """MC-only convergence record: relative RMSE over independent replicates.

    The reference is the replicate mean at the highest level; the sample
    stream contract matches rmse_study with R = 0 lattice shifts.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or sorted(n_list) != n_list:
        raise ValueError("n_list must be nonempty and ascending")
    asm = Assembler(build_mesh(m), model)

    def F(y: np.ndarray) -> float:
        return smallest_eigenpair(asm.system(y), tol=tol, inner=inner).value

    counter = 0
    per_level: list[np.ndarray] = []
    for n in n_list:
        reps = np.zeros(replicates)
        for rep in range(replicates):
            reps[rep], _ = mc_estimate(F, s, n, master_seed, stream_offset=counter)
            counter += n
        per_level.append(reps)
    reference = float(per_level[-1].mean())
    return [
        ErrorRecord(n, _relative_rmse(reference, reps), reps)
        for n, reps in zip(n_list, per_level)
    ]


def truncation_study(
    model: CoefficientModel,
    m: int,
    s_list: Sequence[int],
    rule: LatticeRule,
    tol: float = 1e-14,
    inner: str = "direct",
) -> list[tuple[int, float]]:
    """Truncation-dimension errors |I_ref - I_s| of the mean eigenvalue.

    I_s applies the fixed high-accuracy reference rule to the s-truncated
    integrand (parameters beyond s set to zero); the reference is the
    estimate at the largest requested s.
    """
    s_list = [int(s) for s in s_list]
    if not s_list or sorted(s_list) != s_list:
        raise ValueError("s_list must be nonempty and ascending")
    if max(s_list) >= rule.s:
        raise ValueError("reference rule dimension must exceed max(s_list)")
    asm = Assembler(build_mesh(m), model)

    def lam(y: np.ndarray) -> float:
        return smallest_eigenpair(asm.system(y), tol=tol, inner=inner).value

    estimates = []
    for s in s_list:

        def F(y: np.ndarray, _s=s) -> float:
            yt = y.copy()
            yt[_s:] = 0.0
            return lam(yt)

        estimates.append(qmc_estimate(F, rule)[0])
    reference = estimates[-1]
    return [(s, abs(reference - est)) for s, est in zip(s_list, estimates)]


def save_vector(path, z: Sequence[int], s: int, n: int) -> None:
    """Write a generating vector: '# s n' header then one integer per line."""
    z = np.asarray(z, dtype=np.int64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {s} {n}\n")
        for v in z:
            fh.write(f"{int(v)}\n")


def load_vector(path) -> tuple[np.ndarray, int, int]:
    """Read a generating vector file; returns (z, s, n)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        m = re.match(r"^#\s+(\d+)\s+(\d+)\s*$", header)
        if not m:
            raise ValueError(f"{path}: expected '# s n' header, got {header!r}")
        s, n = int(m.group(1)), int(m.group(2))
        z = np.array([int(line) for line in fh if line.strip()], dtype=np.int64)
    if z.size != s:
        raise ValueError(f"{path}: expected {s} components, found {z.size}")
    return z, s, n
