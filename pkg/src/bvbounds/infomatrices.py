"""Chi-square divergence matrices, Hellinger affinity matrices and related linear algebra."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from . import divergences as dv
from .models import (
    BernoulliProduct,
    ExponentialProduct,
    Family,
    GammaProduct,
    GridFunction,
    GwnDiscrete,
    IsoNormal,
    ParameterDomainError,
    Params,
    ParamVector,
    PoissonProduct,
    PppBoundary,
    RngStream,
    log_ratio,
)


class DegenerateBaseError(ValueError):
    """A distribution has zero Hellinger affinity with the base measure."""


class ShapeError(ValueError):
    """Matrix has the wrong shape or is not symmetric."""


class KernelValidationError(ValueError):
    """Markov kernel rows are not probability vectors."""


@dataclass(frozen=True)
class DivMatrix:
    kind: str  # "chi2" or "hellinger_affinity"
    values: np.ndarray
    provenance: str
    base_index: int = 0
    se: np.ndarray | None = None

    def __post_init__(self) -> None:
        a = np.asarray(self.values, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeError("information matrix must be square")
        object.__setattr__(self, "values", a)

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def min_eigenvalue(self) -> float:
        if not self.finite:
            return math.nan
        return float(np.linalg.eigvalsh(_sym(self.values))[0]) if self.M else 0.0

    def is_psd(self, rtol: float = 1e-8) -> bool:
        if not self.finite:
            return False
        ev = np.linalg.eigvalsh(_sym(self.values))
        return bool(ev[0] >= -rtol * max(abs(ev[-1]), 1.0))

    def to_csv(self) -> str:
        return "\n".join(",".join(f"{x:.17g}" for x in row) for row in self.values) + "\n"


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


# --------------------------------------------------------------------------
# closed-form matrices


def _check_family_params(family: Family, params: Sequence[Params]) -> None:
    if len(params) < 2:
        raise ParameterDomainError("need P_0 and at least one alternative")
    grid = isinstance(family, (GwnDiscrete, PppBoundary))
    for p in params:
        if isinstance(p, GridFunction) != grid:
            raise TypeError("parameter types do not match the family")


def chi2_matrix(family: Family, params: Sequence[Params]) -> DivMatrix:
    """Entry ``(j, k) = int (dP_j/dP_0) dP_k - 1`` for ``params = [P_0, P_1, ..., P_M]``."""
    _check_family_params(family, params)
    p0, alts = params[0], list(params[1:])
    M = len(alts)
    out = np.empty((M, M))
    if isinstance(family, GwnDiscrete):
        fam, q0 = family.as_isonormal(p0)
        alts = [family.as_isonormal(p)[1] for p in alts]
        return chi2_matrix(fam, [q0] + alts)
    if isinstance(family, PppBoundary):
        f0 = family.validate(p0)
        for p in alts:
            if np.any(family.validate(p).values < f0.values):
                raise ParameterDomainError("boundary alternatives must lie above the base boundary")
        for j in range(M):
            for k in range(j, M):
                fj, fk = alts[j].cells, alts[k].cells
                out[j, k] = out[k, j] = math.expm1(family.n * float(np.mean(np.minimum(fj, fk) - f0.cells)))
        return DivMatrix("chi2", out, "closed-form")
    if isinstance(family, IsoNormal):
        d = np.array([family.validate(p).values - family.validate(p0).values for p in alts])
        out = np.expm1(d @ d.T / family.sigma**2)
        return DivMatrix("chi2", out, "closed-form")
    for j in range(M):
        for k in range(j, M):
            out[j, k] = out[k, j] = dv.cross_integral(family, alts[j], alts[k], p0) - 1.0
    return DivMatrix("chi2", out, "closed-form")


def affinity_matrix(family: Family, params: Sequence[Params], base_index: int = 0) -> DivMatrix:
    """Hellinger affinity matrix with base ``params[base_index]``; rows run over the others."""
    _check_family_params(family, params)
    if isinstance(family, GwnDiscrete):
        fam = family.as_isonormal(params[0])[0]
        return affinity_matrix(fam, [family.as_isonormal(p)[1] for p in params], base_index)
    if isinstance(family, PppBoundary):
        A = lambda a, b: 1.0 - dv.divergence("h2", family, a, b).value
    else:
        A = lambda a, b: dv.affinity(family, a, b)
    base = params[base_index]
    others = [p for i, p in enumerate(params) if i != base_index]
    with_base = np.array([A(p, base) for p in others])
    if np.any(with_base <= 0):
        raise DegenerateBaseError("zero Hellinger affinity with the base measure")
    M = len(others)
    out = np.empty((M, M))
    for j in range(M):
        for k in range(j, M):
            out[j, k] = out[k, j] = A(others[j], others[k]) / (with_base[j] * with_base[k]) - 1.0
    return DivMatrix("hellinger_affinity", out, "closed-form", base_index=base_index)


hellinger_affinity_matrix = affinity_matrix


def affinity_matrices_all_bases(family: Family, params: Sequence[Params]) -> list[DivMatrix]:
    """``rho(P_l | others)`` for every ``l``; each is ``(M-1) x (M-1)``."""
    return [affinity_matrix(family, params, base_index=l) for l in range(len(params))]


# The table of closed forms written out directly in the family parameters.
# These are used as a cross-check of the composed per-coordinate forms above.


def table_chi2_entry(family: Family, p0: Params, pj: Params, pk: Params) -> float:
    if isinstance(family, IsoNormal):
        a, b, c = (family.validate(x).values for x in (pj, pk, p0))
        return math.expm1(float(np.dot(a - c, b - c)) / family.sigma**2)
    if isinstance(family, PoissonProduct):
        a, b, c = (family.validate(x).values for x in (pj, pk, p0))
        return math.expm1(float(np.sum((a - c) * (b - c) / c)))
    if isinstance(family, ExponentialProduct):
        a, b, c = (family.validate(x).values for x in (pj, pk, p0))
        if np.any(a + b - c <= 0):
            return math.inf
        return float(np.prod(a * b / (c * (a + b - c)))) - 1.0
    if isinstance(family, BernoulliProduct):
        a, b, c = (family.validate(x).values for x in (pj, pk, p0))
        return float(np.prod((a - c) * (b - c) / (c * (1 - c)) + 1.0)) - 1.0
    if isinstance(family, GammaProduct):
        from scipy.special import gammaln

        (aj, bj), (ak, bk), (a0, b0) = (family.split(x) for x in (pj, pk, p0))
        s, t = aj + ak - a0, bj + bk - b0
        if np.any(s <= 0) or np.any(t <= 0):
            return math.inf
        log = gammaln(a0) + gammaln(s) - gammaln(aj) - gammaln(ak) + aj * np.log(bj) + ak * np.log(bk) - a0 * np.log(b0) - s * np.log(t)
        return math.expm1(float(np.sum(log)))
    raise ParameterDomainError(f"no table entry for {type(family).__name__}")


def table_affinity_entry(family: Family, p0: Params, pj: Params, pk: Params) -> float:
    if isinstance(family, IsoNormal):
        a, b, c = (family.validate(x).values for x in (pj, pk, p0))
        return math.expm1(float(np.dot(a - c, b - c)) / (4 * family.sigma**2))
    if isinstance(family, PoissonProduct):
        a, b, c = (np.sqrt(family.validate(x).values) for x in (pj, pk, p0))
        return math.expm1(float(np.sum((a - c) * (b - c))))
    if isinstance(family, ExponentialProduct):
        a, b, c = (family.validate(x).values for x in (pj, pk, p0))
        return float(np.prod((a + c) * (b + c) / (2 * c * (a + b)))) - 1.0
    if isinstance(family, BernoulliProduct):
        a, b, c = (family.validate(x).values for x in (pj, pk, p0))
        r = lambda t, s: np.sqrt(t * s) + np.sqrt((1 - t) * (1 - s))
        return float(np.prod(r(a, b) / (r(a, c) * r(b, c)))) - 1.0
    if isinstance(family, GammaProduct):
        from scipy.special import gammaln

        (aj, bj), (ak, bk), (a0, b0) = (family.split(x) for x in (pj, pk, p0))
        mjk, mj0, mk0 = (aj + ak) / 2, (aj + a0) / 2, (ak + a0) / 2
        log = (
            gammaln(a0) + gammaln(mjk) - gammaln(mj0) - gammaln(mk0)
            + mj0 * np.log(bj + b0) + mk0 * np.log(bk + b0)
            - a0 * np.log(2 * b0) - mjk * np.log(bj + bk)
        )
        return math.expm1(float(np.sum(log)))
    raise ParameterDomainError(f"no table entry for {type(family).__name__}")


# --------------------------------------------------------------------------
# Monte Carlo oracle


def mc_matrix_oracle(
    family: Family, params: Sequence[Params], reps: int, rng: RngStream, kind: str = "chi2", base_index: int = 0
) -> DivMatrix:
    """Monte Carlo estimate of the chi-square or affinity matrix with entrywise standard errors.

    chi2: for each ``k`` sample ``X ~ P_k`` and average ``dP_j/dP_0(X) - 1``;
    the two estimates of ``(j, k)`` and ``(k, j)`` are averaged.
    affinity: sample from the base and average ``sqrt(p_j p_k)/p_base``.
    """
    _check_family_params(family, params)
    if kind == "chi2":
        p0, alts = params[0], list(params[1:])
        M = len(alts)
        est, var = np.empty((M, M)), np.empty((M, M))
        for k in range(M):
            x = family.sample(alts[k], rng.generator(k), reps)
            for j in range(M):
                L = np.exp(log_ratio(family, alts[j], p0, x))
                est[j, k] = L.mean() - 1.0
                var[j, k] = L.var(ddof=1) / reps
        se = 0.5 * np.sqrt(var + var.T)
        # the diagonal is a single estimate, not an average of two independent ones
        np.fill_diagonal(se, np.sqrt(np.diag(var)))
        return DivMatrix("chi2", _sym(est), "monte-carlo", se=se)
    if kind == "hellinger_affinity":
        base = params[base_index]
        others = [p for i, p in enumerate(params) if i != base_index]
        x = family.sample(base, rng.generator(0), reps)
        h = np.array([np.exp(0.5 * log_ratio(family, p, base, x)) for p in others])
        norm_ = h.mean(axis=1)
        M = len(others)
        est, se = np.empty((M, M)), np.empty((M, M))
        for j in range(M):
            for k in range(M):
                z = h[j] * h[k] / (norm_[j] * norm_[k])
                est[j, k] = z.mean() - 1.0
                se[j, k] = z.std(ddof=1) / math.sqrt(reps)
        return DivMatrix("hellinger_affinity", est, "monte-carlo", base_index=base_index, se=se)
    raise ValueError(f"unknown matrix kind {kind!r}")


def numeric_matrix_oracle(family: Family, params: Sequence[Params], kind: str = "chi2", base_index: int = 0,
                          budget: dv.OracleBudget | None = None) -> tuple[DivMatrix, float]:
    """Entrywise quadrature / exact-sum oracle; returns the matrix and the largest error bound."""
    _check_family_params(family, params)
    prov = "exact-sum" if family.discrete else "quadrature"
    worst = 0.0
    if kind == "chi2":
        p0, alts = params[0], list(params[1:])
        M = len(alts)
        out = np.empty((M, M))
        for j in range(M):
            for k in range(j, M):
                v, e, _ = dv.numeric_cross_integral(family, alts[j], alts[k], p0, budget)
                out[j, k] = out[k, j] = v - 1.0
                worst = max(worst, e)
        return DivMatrix("chi2", out, prov), worst
    base = params[base_index]
    others = [p for i, p in enumerate(params) if i != base_index]
    wb = []
    for p in others:
        v, e, _ = dv.numeric_affinity(family, p, base, budget)
        wb.append(v)
        worst = max(worst, e)
    M = len(others)
    out = np.empty((M, M))
    for j in range(M):
        for k in range(j, M):
            v, e, _ = dv.numeric_affinity(family, others[j], others[k], budget)
            out[j, k] = out[k, j] = v / (wb[j] * wb[k]) - 1.0
            worst = max(worst, e)
    return DivMatrix("hellinger_affinity", out, prov, base_index=base_index), worst


# --------------------------------------------------------------------------
# linear algebra


def _require_symmetric(a: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    a = np.asarray(a.values if isinstance(a, DivMatrix) else a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError("matrix must be square")
    scale = max(float(np.max(np.abs(a))) if a.size else 0.0, 1.0)
    if not np.allclose(a, a.T, atol=rtol * scale, rtol=0):
        raise ShapeError("matrix must be symmetric")
    return _sym(a)


def pseudo_inverse(matrix, tol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric matrix via eigendecomposition.

    Eigenvalues with ``|lambda| <= tol * max|lambda|`` are treated as zero.
    """
    a = _require_symmetric(matrix)
    if a.size == 0:
        return a.copy()
    w, V = np.linalg.eigh(a)
    cut = tol * max(float(np.max(np.abs(w))), 0.0)
    inv = np.zeros_like(w)
    keep = np.abs(w) > cut
    inv[keep] = 1.0 / w[keep]
    return (V * inv) @ V.T


def spectral_norm(matrix) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    a = _require_symmetric(matrix)
    return float(np.linalg.eigvalsh(a)[-1])


def row_sum_norm(matrix) -> float:
    a = np.asarray(matrix.values if isinstance(matrix, DivMatrix) else matrix, dtype=float)
    return float(np.max(np.sum(np.abs(a), axis=1)))


# --------------------------------------------------------------------------
# data processing


@dataclass(frozen=True)
class MarkovKernelMatrix:
    values: np.ndarray

    def __post_init__(self) -> None:
        k = np.asarray(self.values, dtype=float)
        if k.ndim != 2:
            raise KernelValidationError("kernel must be a matrix")
        if np.any(k < 0) or not np.allclose(k.sum(axis=1), 1.0, atol=1e-12, rtol=0):
            raise KernelValidationError("kernel rows must be probability vectors")
        object.__setattr__(self, "values", k)

    def push(self, q: np.ndarray) -> np.ndarray:
        return np.asarray(q, dtype=float) @ self.values


def discrete_chi2_matrix(dists: Sequence[np.ndarray]) -> np.ndarray:
    """Chi-square matrix of finite distributions ``[Q_0, Q_1, ..., Q_M]``."""
    q = np.asarray(dists, dtype=float)
    q0, alt = q[0], q[1:]
    pos = q0 > 0
    if np.any(alt[:, ~pos] > 0):
        raise ParameterDomainError("Q_0 must dominate the alternatives")
    r = alt[:, pos] / q0[pos]
    return (r * q0[pos]) @ r.T - 1.0


@dataclass(frozen=True)
class DataProcessingReport:
    chi2_q: np.ndarray
    chi2_kq: np.ndarray
    min_eigenvalue: float
    tolerance: float
    passed: bool


def data_processing_check(kernel: MarkovKernelMatrix, dists: Sequence[np.ndarray], tol: float = 1e-8) -> DataProcessingReport:
    q = np.asarray(dists, dtype=float)
    if q.ndim != 2 or q.shape[1] != kernel.values.shape[0]:
        raise ShapeError("distributions do not match the kernel's input space")
    if np.any(q < 0) or not np.allclose(q.sum(axis=1), 1.0, atol=1e-12):
        raise KernelValidationError("distributions must be probability vectors")
    a = discrete_chi2_matrix(q)
    b = discrete_chi2_matrix(kernel.push(q))
    ev = float(np.linalg.eigvalsh(_sym(a - b))[0])
    return DataProcessingReport(a, b, ev, tol, ev >= -tol)


# --------------------------------------------------------------------------
# Gamma first-order expansion


@dataclass(frozen=True)
class GammaExpansionReport:
    exact: np.ndarray  # log(1 + chi2 entries)
    quadratic: np.ndarray  # (b_j - b_0)^T Sigma^{-1} (b_k - b_0)
    abs_error: float
    rel_error: float


def gamma_first_order_check(shapes, base_rate, rates: Sequence) -> GammaExpansionReport:
    """Compare ``log(1 + chi2_jk)`` with the quadratic form in ``Sigma = diag(beta_0^2 / alpha)``."""
    a = np.asarray(shapes, dtype=float)
    b0 = np.asarray(base_rate, dtype=float)
    fam = GammaProduct(tuple(a))
    params = [ParamVector(b0)] + [ParamVector(np.asarray(r, dtype=float)) for r in rates]
    for r in params[1:]:
        if np.any(b0 >= 2 * r.values):
            raise ParameterDomainError("Gamma chi-square finiteness condition fails")
    exact = np.log1p(chi2_matrix(fam, params).values)
    D = np.array([p.values - b0 for p in params[1:]])
    quad = (D * (a / b0**2)) @ D.T
    err = float(np.max(np.abs(exact - quad)))
    scale = float(np.max(np.abs(quad)))
    return GammaExpansionReport(exact, quad, err, err / scale if scale > 0 else 0.0)


def gamma_expansion_convergence(shapes, base_rate, directions: Sequence, delta: float) -> tuple[float, float, float]:
    """Absolute errors at ``delta`` and ``delta/2`` and their ratio."""
    b0 = np.asarray(base_rate, dtype=float)
    e1 = gamma_first_order_check(shapes, b0, [b0 + delta * np.asarray(u) for u in directions]).abs_error
    e2 = gamma_first_order_check(shapes, b0, [b0 + 0.5 * delta * np.asarray(u) for u in directions]).abs_error
    return e1, e2, (e2 / e1 if e1 > 0 else 0.0)


# --------------------------------------------------------------------------
# sparse-design combinatorics


@dataclass(frozen=True)
class SparseRowSum:
    n: int
    s: int
    alpha: float
    b: tuple[int, ...]  # b[r-1] = b(n, s, r)
    total: int  # C(n-1, s-1)
    row_sum: float


def sparse_b_table(n: int, s: int) -> tuple[int, ...]:
    """``b(n, s, r) = C(s-1, r-1) C(n-s, s-r)`` for ``r = 1..s`` as exact integers."""
    if not (1 <= s and 2 * s <= n):
        raise ParameterDomainError("need 1 <= s <= n/2")
    return tuple(math.comb(s - 1, r - 1) * math.comb(n - s, s - r) for r in range(1, s + 1))


def sparse_chi2_row_sum(n: int, s: int, alpha: float) -> SparseRowSum:
    """Row sum of the chi-square matrix over all s-sparse supports containing a fixed index.

    The non-zero entries ``sqrt(alpha log(n/s^2))`` make the ``(j, k)`` entry
    ``(n/s^2)^{r alpha} - 1`` where ``r`` is the overlap of the supports.
    """
    if not alpha > 0:
        raise ParameterDomainError("alpha must be positive")
    b = sparse_b_table(n, s)
    total = math.comb(n - 1, s - 1)
    if sum(b) != total:
        raise ArithmeticError("b-table does not add up to C(n-1, s-1)")
    ratio = n / s**2
    terms = [bi * math.expm1(r * alpha * math.log(ratio)) for r, bi in enumerate(b, start=1)]
    return SparseRowSum(n, s, alpha, b, total, float(math.fsum(terms)))


def sparse_b_ratio(n: int, s: int, r: int) -> float:
    """``b(n, s, r+1) / b(n, s, r)`` from the closed recursion."""
    return (s - r) ** 2 / (r * (n - 2 * s + r + 1))


def sparse_supports(n: int, s: int, fixed: int = 0) -> list[tuple[int, ...]]:
    rest = [i for i in range(n) if i != fixed]
    return [tuple(sorted((fixed,) + c)) for c in combinations(rest, s - 1)]


def sparse_design(n: int, s: int, value: float, fixed: int = 0) -> list[ParamVector]:
    return [ParamVector.sparse(n, S, value) for S in sparse_supports(n, s, fixed)]
