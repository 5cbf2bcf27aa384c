"""Change-of-expectation inequalities and their verification reports.

Each check returns a :class:`BoundReport` holding the two sides of one
inequality ``lhs <= rhs``. Infinite divergences make a bound vacuous
(``lhs = 0``) instead of failing.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import divergences as dv
from . import infomatrices as im
from .models import (
    BernoulliProduct,
    ExponentialProduct,
    Family,
    GammaProduct,
    IsoNormal,
    Params,
    ParamVector,
    PoissonProduct,
)


class InconsistentInputError(ValueError):
    """Zero divergence paired with a non-zero mean difference."""


class ArityError(ValueError):
    """Wrong number of distributions for the inequality."""


@dataclass(frozen=True)
class StatMoments:
    means: np.ndarray
    variances: np.ndarray
    mads: np.ndarray | None = None
    centers: np.ndarray | None = None
    mean_se: np.ndarray | None = None
    var_se: np.ndarray | None = None
    mad_se: np.ndarray | None = None
    provenance: str = "closed-form"

    def __post_init__(self) -> None:
        for name in ("means", "variances", "mads", "centers", "mean_se", "var_se", "mad_se"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.atleast_1d(np.asarray(v, dtype=float)))
        if np.any(self.variances < 0):
            raise ValueError("variances must be non-negative")
        if self.means.shape != self.variances.shape:
            raise ValueError("means and variances differ in length")

    @property
    def count(self) -> int:
        return int(self.means.size)


@dataclass(frozen=True)
class BoundReport:
    inequality: str
    lhs: float
    rhs: float
    tolerance: float = 1e-8
    vacuous: bool = False
    extras: Mapping[str, float] = field(default_factory=dict)
    inputs_digest: str = ""

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        if math.isinf(self.rhs) and self.rhs > 0:
            return True
        return self.slack >= -self.tolerance

    def to_dict(self) -> dict:
        f = dv._json_float
        return {
            "inequality": self.inequality,
            "lhs": f(self.lhs),
            "rhs": f(self.rhs),
            "slack": f(self.slack) if not math.isnan(self.slack) else None,
            "holds": self.holds,
            "tolerance": self.tolerance,
            "vacuous": self.vacuous,
            "extras": {k: f(float(v)) for k, v in self.extras.items()},
            "inputs_digest": self.inputs_digest,
        }


def digest(*items) -> str:
    def conv(x):
        if isinstance(x, np.ndarray):
            return x.tolist()
        if isinstance(x, (dv.DivergenceValue,)):
            return x.to_dict()
        if isinstance(x, StatMoments):
            return {k: conv(v) for k, v in asdict(x).items()}
        if isinstance(x, float) and not math.isfinite(x):
            return str(x)
        return x

    blob = json.dumps([conv(i) for i in items], sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _val(d: dv.DivergenceValue | float) -> float:
    return d.value if isinstance(d, dv.DivergenceValue) else float(d)


def _mc_tol(*ses: float, base: float = 1e-8, k: float = 3.0) -> float:
    s = [x for x in ses if x is not None]
    if not s:
        return base
    return max(base, k * math.sqrt(sum(x * x for x in s)))


# --------------------------------------------------------------------------
# two-point bounds


def two_point_bounds(divs: Mapping[str, dv.DivergenceValue | float], moments: StatMoments, tol: float = 1e-8) -> list[BoundReport]:
    """The four two-point inequalities for ``P = moments[0]`` and ``Q = moments[1]``.

    ``divs`` holds ``tv, h2, kl_pq, kl_qp, chi2_pq, chi2_qp`` (see
    :func:`divergences.all_divergences`).
    """
    if moments.count != 2:
        raise ArityError("two-point bounds need moments of exactly two distributions")
    dE2 = float((moments.means[0] - moments.means[1]) ** 2)
    vp, vq = (float(v) for v in moments.variances)
    tv, h2 = _val(divs["tv"]), _val(divs["h2"])
    kl = _val(divs["kl_pq"]) + _val(divs["kl_qp"])
    chi_pq, chi_qp = _val(divs["chi2_pq"]), _val(divs["chi2_qp"])
    if dE2 > 0 and min(tv, h2, kl) == 0.0:
        raise InconsistentInputError("zero divergence with a non-zero mean difference")
    key = digest({k: _val(v) for k, v in divs.items()}, moments)
    dE_se = None
    if moments.mean_se is not None:
        dE_se = 2 * math.sqrt(dE2) * math.sqrt(float(np.sum(moments.mean_se**2)))
    var_se = float(np.sqrt(np.sum(moments.var_se**2))) if moments.var_se is not None else None
    t = _mc_tol(dE_se, var_se, base=tol) if (dE_se is not None or var_se is not None) else tol

    out = []
    # total variation
    if dE2 == 0.0:
        lhs, vac = 0.0, False
    else:
        lhs, vac = dE2 / 2 * (1.0 / tv - 1.0), tv >= 1.0
    out.append(BoundReport("two-point-tv", lhs, vp + vq, t, vac, {"tv": tv}, key))
    # Hellinger
    H = math.sqrt(h2)
    if dE2 == 0.0:
        lhs, vac = 0.0, False
    else:
        lhs, vac = dE2 / (4 - 2 * h2) * (1.0 / H - H) ** 2, h2 >= 1.0
    out.append(BoundReport("two-point-hellinger", lhs, vp + vq, t, vac, {"h2": h2}, key))
    # Kullback-Leibler; negative factor means the bound is vacuous
    if dE2 == 0.0 or math.isinf(kl):
        lhs, vac = 0.0, math.isinf(kl)
    else:
        raw = dE2 * (1.0 / kl - 0.25)
        lhs, vac = max(raw, 0.0), raw <= 0
    out.append(BoundReport("two-point-kl", lhs, max(vp, vq), t, vac, {"kl_sum": kl}, key))
    # chi-square
    rhs = min(chi_qp * vp if vp > 0 or math.isfinite(chi_qp) else math.inf,
              chi_pq * vq if vq > 0 or math.isfinite(chi_pq) else math.inf)
    if math.isnan(rhs):
        rhs = 0.0
    out.append(BoundReport("two-point-chi2", dE2, rhs, t, math.isinf(rhs), {"chi2_pq": chi_pq, "chi2_qp": chi_qp}, key))
    return out


def two_point_bound_values(divs: Mapping[str, dv.DivergenceValue | float], dE: float) -> dict[str, float]:
    """Lower bounds on the variance terms implied by each two-point inequality."""
    dE2 = dE * dE
    tv, h2 = _val(divs["tv"]), _val(divs["h2"])
    kl = _val(divs["kl_pq"]) + _val(divs["kl_qp"])
    H = math.sqrt(h2)
    out = {
        "tv": 0.0 if dE2 == 0 else dE2 / 2 * (1 / tv - 1),
        "hellinger": 0.0 if dE2 == 0 else dE2 / (4 - 2 * h2) * (1 / H - H) ** 2,
        "kl": 0.0 if dE2 == 0 or math.isinf(kl) else max(dE2 * (1 / kl - 0.25), 0.0),
        "chi2": 0.0 if dE2 == 0 else dE2 / _val(divs["chi2_qp"]),
    }
    return out


# --------------------------------------------------------------------------
# path limits


@dataclass(frozen=True)
class PathKappas:
    hellinger: float  # kappa_H^2
    kl: float  # kappa_K^2
    chi2: float  # kappa_chi^2
    steps: int


def path_kappas(family: Family, start: Params, end: Params, steps: int) -> PathKappas:
    """Discretised suprema of ``H/delta``, ``(KL+KL)/delta^2`` and ``chi2/delta^2`` along a straight path."""
    if steps < 2:
        raise ValueError("need at least two steps")
    a = np.asarray(family.validate(start).values, dtype=float)
    b = np.asarray(family.validate(end).values, dtype=float)
    delta = 1.0 / steps
    pts = [ParamVector(a + t * (b - a)) for t in np.linspace(0.0, 1.0, steps + 1)]
    kh = kk = kc = 0.0
    for p, q in zip(pts[:-1], pts[1:]):
        kh = max(kh, dv.divergence("h2", family, p, q).value / delta**2)
        kk = max(kk, (dv.divergence("kl", family, p, q).value + dv.divergence("kl", family, q, p).value) / delta**2)
        kc = max(kc, dv.divergence("chi2", family, p, q).value / delta**2, dv.divergence("chi2", family, q, p).value / delta**2)
    return PathKappas(kh, kk, kc, steps)


def path_limit_bounds(
    family: Family,
    start: Params,
    end: Params,
    moments: Callable[[float], tuple[float, float]],
    steps: int = 64,
    rel_tol: float = 0.02,
) -> list[BoundReport]:
    """``(E_1 - E_0)^2 <= c * kappa^2 * sup_t Var_t`` for the three path constants.

    ``moments(t)`` returns mean and variance of the statistic under ``P_t``.
    The reported tolerance is ``rel_tol * lhs`` to absorb the discretisation
    of the limsup; the two-grid diagnostic is recorded in ``extras``.
    """
    k1 = path_kappas(family, start, end, steps)
    k2 = path_kappas(family, start, end, 2 * steps)
    e0, _ = moments(0.0)
    e1, _ = moments(1.0)
    sup_var = max(moments(t)[1] for t in np.linspace(0.0, 1.0, steps + 1))
    lhs = (e1 - e0) ** 2
    key = digest(np.asarray(family.validate(start).values), np.asarray(family.validate(end).values), steps)
    out = []
    for name, c, v1, v2 in (
        ("path-hellinger", 8.0, k1.hellinger, k2.hellinger),
        ("path-kl", 1.0, k1.kl, k2.kl),
        ("path-chi2", 1.0, k1.chi2, k2.chi2),
    ):
        if not math.isfinite(v1):
            out.append(BoundReport(name, 0.0, math.inf, 0.0, True, {"kappa2": v1}, key))
            continue
        rhs = c * v1 * sup_var
        diag = abs(v2 - v1) / v1 if v1 > 0 else 0.0
        out.append(BoundReport(name, lhs, rhs, rel_tol * lhs, False, {"kappa2": c * v1, "kappa2_refined": c * v2, "two_grid_rel_change": diag}, key))
    return out


# --------------------------------------------------------------------------
# multi-point bounds


def multi_point_chi2_bound(delta: Sequence[float], chi2, var0: float, tol: float = 1e-10,
                           var0_se: float | None = None, delta_se: Sequence[float] | None = None) -> BoundReport:
    """``Delta^T (chi2)^+ Delta <= Var_{P_0}(X)`` with spectral and row-sum variants.

    ``delta[j] = E_j[X] - E_0[X]``.
    """
    A = chi2.values if isinstance(chi2, im.DivMatrix) else np.asarray(chi2, dtype=float)
    d = np.asarray(delta, dtype=float)
    if A.shape != (d.size, d.size):
        raise ArityError("mean-difference vector and matrix dimensions differ")
    if not np.all(np.isfinite(A)):
        return BoundReport("multi-point-chi2", 0.0, float(var0), 0.0, True, {}, digest(d, A))
    Ap = im.pseudo_inverse(A, tol)
    quad = float(d @ Ap @ d)
    # components of delta outside the range of A signal an inconsistent input
    resid = d - A @ (Ap @ d)
    n2 = float(d @ d)
    lam = im.spectral_norm(A)
    rs = im.row_sum_norm(A)
    lhs_spec = n2 / lam if lam > 0 else (0.0 if n2 == 0 else math.inf)
    lhs_row = n2 / rs if rs > 0 else (0.0 if n2 == 0 else math.inf)
    t = 1e-8
    if var0_se is not None or delta_se is not None:
        dse = 0.0
        if delta_se is not None:
            g = 2 * Ap @ d
            dse = float(np.sqrt(np.sum((g * np.asarray(delta_se)) ** 2)))
        t = _mc_tol(var0_se, dse)
    return BoundReport(
        "multi-point-chi2",
        quad,
        float(var0),
        t,
        False,
        {
            "lhs_spectral": lhs_spec,
            "lhs_row_sum": lhs_row,
            "ordering_ok": float(quad >= lhs_spec * (1 - tol) - tol and lhs_spec >= lhs_row * (1 - tol) - tol),
            "range_residual": float(np.linalg.norm(resid)),
        },
        digest(d, A, float(var0)),
    )


def multi_point_hellinger_bound(affinities: Sequence, moments: StatMoments, tol: float = 1e-8) -> BoundReport:
    """``sum_{j,k} (E_j - E_k)^2 <= 4 max_l lambda_1(A_l) sum_k Var_k``."""
    M = moments.count
    if M < 2:
        raise ArityError("the Hellinger multi-point bound needs at least two distributions")
    if len(affinities) != M:
        raise ArityError("need one affinity matrix per distribution")
    E = moments.means
    double = float(np.sum((E[:, None] - E[None, :]) ** 2))
    centered = float(2 * M * np.sum((E - E.mean()) ** 2))
    lam = max(im.spectral_norm(a) for a in affinities)
    rhs = 4 * lam * float(np.sum(moments.variances))
    scale = max(abs(double), 1.0)
    return BoundReport(
        "multi-point-hellinger",
        double,
        rhs,
        tol,
        False,
        {"centered_form": centered, "identity_gap": abs(double - centered) / scale, "lambda_max": lam},
        digest(moments, [np.asarray(a.values if isinstance(a, im.DivMatrix) else a) for a in affinities]),
    )


# --------------------------------------------------------------------------
# Cramer-Rao limits


@dataclass(frozen=True)
class CramerRaoReport:
    limit: float
    ladder: tuple[float, ...]
    values: Mapping[str, tuple[float, ...]]
    rel_errors: Mapping[str, tuple[float, ...]]
    rates: Mapping[str, tuple[float, ...]]  # successive error ratios
    passed: bool


def cramer_rao_limit_check(
    family: IsoNormal,
    theta: float,
    moments: Callable[[float], tuple[float, float]],
    dmean: float,
    ladder: Sequence[float] = (0.2, 0.1, 0.05, 0.025),
    max_ratio: float = 0.6,
) -> CramerRaoReport:
    """Two-point bounds at ``(theta, theta + h)`` converge to ``(dE/dtheta)^2 / F``.

    Each bound is turned into a lower bound on a single variance: the chi2
    bound gives ``Var_theta >= dE^2 / chi2``; the Hellinger bound controls
    ``Var_P + Var_Q`` and is halved; the KL bound controls ``max(Var)``.
    """
    if not isinstance(family, IsoNormal):
        raise TypeError("the Cramer-Rao check is implemented for the normal location family")
    F = 1.0 / family.sigma**2
    limit = dmean**2 / F
    vals: dict[str, list[float]] = {"hellinger": [], "kl": [], "chi2": []}
    for h in ladder:
        p, q = ParamVector([theta]), ParamVector([theta + h])
        divs = dv.all_divergences(family, p, q)
        dE = moments(theta + h)[0] - moments(theta)[0]
        bv = two_point_bound_values(divs, dE)
        vals["hellinger"].append(bv["hellinger"] / 2)
        vals["kl"].append(bv["kl"])
        vals["chi2"].append(bv["chi2"])
    errs, rates = {}, {}
    ok = True
    for k, v in vals.items():
        e = [abs(x - limit) / limit if limit > 0 else abs(x) for x in v]
        r = [(b / a if a > 0 else 0.0) for a, b in zip(e[:-1], e[1:])]
        errs[k], rates[k] = tuple(e), tuple(r)
        ok = ok and all(x <= max_ratio for x in r)
    return CramerRaoReport(limit, tuple(ladder), {k: tuple(v) for k, v in vals.items()}, errs, rates, ok)


@dataclass(frozen=True)
class MatrixFisherReport:
    ladder: tuple[float, ...]
    errors: tuple[float, ...]  # max entrywise |chi2/h^2 - I/sigma^2|
    ratios: tuple[float, ...]


def fisher_diagonal(family: Family, theta0: Sequence[float]) -> np.ndarray:
    """Per-coordinate Fisher information of a product family at ``theta0``."""
    t = np.asarray(theta0, dtype=float)
    if isinstance(family, IsoNormal):
        return np.full(t.size, 1.0 / family.sigma**2)
    if isinstance(family, PoissonProduct):
        return 1.0 / t
    if isinstance(family, BernoulliProduct):
        return 1.0 / (t * (1.0 - t))
    if isinstance(family, ExponentialProduct):
        return 1.0 / t**2
    if isinstance(family, GammaProduct) and family.shapes is not None:
        a, b = family.split(ParamVector(t))
        return a / b**2
    raise TypeError(f"no Fisher information for {type(family).__name__}")


def matrix_fisher_limit(family: Family, theta0: Sequence[float], ladder: Sequence[float] = (0.1, 0.05, 0.025)) -> MatrixFisherReport:
    """Entrywise convergence of ``chi2(P_0, P_0 + h e_1, ..., P_0 + h e_d) / h^2`` to the Fisher matrix."""
    t0 = np.asarray(theta0, dtype=float)
    d = t0.size
    F = np.diag(fisher_diagonal(family, t0))
    errs = []
    for h in ladder:
        params = [ParamVector(t0)] + [ParamVector(t0 + h * e) for e in np.eye(d)]
        A = im.chi2_matrix(family, params).values
        errs.append(float(np.max(np.abs(A / h**2 - F))))
    ratios = tuple(b / a for a, b in zip(errs[:-1], errs[1:]))
    return MatrixFisherReport(tuple(ladder), tuple(errs), ratios)


# --------------------------------------------------------------------------
# mean absolute deviation


def mad_bound(h2: dv.DivergenceValue | float, u: float, v: float, mad_p: float, mad_q: float,
              tol: float = 1e-8, mad_se: Sequence[float] | None = None) -> BoundReport:
    """``(1/5)(1 - H^2)^2 |u - v| <= max(E_P|X - u|, E_Q|X - v|)``."""
    h = _val(h2)
    if not 0.0 <= h <= 1.0:
        raise ValueError("squared Hellinger distance must lie in [0, 1]")
    lhs = 0.2 * (1.0 - h) ** 2 * abs(u - v)
    rhs = max(mad_p, mad_q)
    t = _mc_tol(*(mad_se or []), base=tol) if mad_se else tol
    return BoundReport("mad", lhs, rhs, t, h >= 1.0, {"h2": h}, digest(h, u, v, mad_p, mad_q))


def gaussian_mad(mu: float, sigma: float, center: float) -> float:
    """``E|X - c|`` for ``X ~ N(mu, sigma^2)``."""
    from scipy.stats import norm

    z = (mu - center) / sigma
    return float(sigma * (2 * norm.pdf(z) + z * (2 * norm.cdf(z) - 1)))
