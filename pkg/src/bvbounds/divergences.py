"""Pairwise information measures with closed forms and an independent numerical oracle.

Measures: total variation ``tv``, squared Hellinger ``h2`` (with the 1/2
normalisation, so that ``h2 = 1 - int sqrt(pq)``), Kullback-Leibler ``kl``
and chi-square ``chi2``. ``kl`` and ``chi2`` are ``+inf`` without
domination; the value carries ``dominated=False`` in that case.

Closed forms rely on two per-coordinate building blocks for product
families:

* ``cross_integral(a, b, c) = int p_a p_b / p_c``. With ``a = b = p`` and
  ``c = q`` this is ``1 + chi2(P, Q)``; with general ``a, b`` and ``c = P_0``
  it is ``1 +`` an entry of the chi-square matrix.
* ``affinity(a, b) = int sqrt(p_a p_b)``.

The oracle recomputes the same integrals by adaptive Gauss-Kronrod
quadrature (continuous coordinates) or exact truncated sums (discrete
coordinates), and falls back to importance-sampling Monte Carlo only where
neither applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate
from scipy.special import digamma, gammaln, pdtrc, xlogy
from scipy.stats import norm

from .models import (
    BernoulliProduct,
    DominationError,
    ExponentialProduct,
    Family,
    GammaProduct,
    GwnDiscrete,
    IsoNormal,
    ParameterDomainError,
    Params,
    PoissonProduct,
    PppBoundary,
    RngStream,
    log_ratio,
)

Kind = Literal["tv", "h2", "kl", "chi2"]
KINDS: tuple[str, ...] = ("tv", "h2", "kl", "chi2")


@dataclass(frozen=True)
class DivergenceValue:
    kind: str
    value: float
    provenance: str
    se: float | None = None
    dominated: bool = True
    converged: bool = True
    error_bound: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown divergence kind {self.kind!r}")
        if (self.se is not None) != (self.provenance == "monte-carlo"):
            raise ValueError("a standard error is present exactly for Monte Carlo values")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": _json_float(self.value),
            "provenance": self.provenance,
            "se": self.se,
            "dominated": self.dominated,
            "converged": self.converged,
            "error_bound": self.error_bound,
        }


def _json_float(x: float):
    if math.isnan(x):
        return None
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


# --------------------------------------------------------------------------
# per-coordinate parameter access


def coords(family: Family, p: Params) -> list[tuple[float, ...]]:
    """Per-coordinate parameter tuples of a product family."""
    if isinstance(family, GammaProduct):
        a, b = family.split(p)
        return list(zip(a.tolist(), b.tolist()))
    v = family.validate(p).values
    return [(float(t),) for t in v]


def _same_dim(family: Family, *ps: Params) -> list[list[tuple[float, ...]]]:
    cs = [coords(family, p) for p in ps]
    if len({len(c) for c in cs}) != 1:
        raise ParameterDomainError("parameters have different dimensions")
    return cs


# --------------------------------------------------------------------------
# closed-form building blocks (per coordinate)


def _cross_1d(family: Family, a: tuple, b: tuple, c: tuple) -> float:
    if isinstance(family, IsoNormal):
        return math.exp((a[0] - c[0]) * (b[0] - c[0]) / family.sigma**2)
    if isinstance(family, PoissonProduct):
        return math.exp((a[0] - c[0]) * (b[0] - c[0]) / c[0])
    if isinstance(family, BernoulliProduct):
        return 1.0 + (a[0] - c[0]) * (b[0] - c[0]) / (c[0] * (1.0 - c[0]))
    if isinstance(family, ExponentialProduct):
        s = a[0] + b[0] - c[0]
        return a[0] * b[0] / (c[0] * s) if s > 0 else math.inf
    if isinstance(family, GammaProduct):
        (aa, ba), (ab, bb), (ac, bc) = a, b, c
        sa, sb = aa + ab - ac, ba + bb - bc
        if sa <= 0 or sb <= 0:
            return math.inf
        log = (
            aa * math.log(ba) + ab * math.log(bb) - ac * math.log(bc)
            + gammaln(ac) - gammaln(aa) - gammaln(ab) + gammaln(sa) - sa * math.log(sb)
        )
        return math.exp(log)
    raise ParameterDomainError(f"no closed form for {type(family).__name__}")


def _affinity_1d(family: Family, a: tuple, b: tuple) -> float:
    if isinstance(family, IsoNormal):
        return math.exp(-((a[0] - b[0]) ** 2) / (8 * family.sigma**2))
    if isinstance(family, PoissonProduct):
        return math.exp(-0.5 * (math.sqrt(a[0]) - math.sqrt(b[0])) ** 2)
    if isinstance(family, BernoulliProduct):
        return bernoulli_r(a[0], b[0])
    if isinstance(family, ExponentialProduct):
        return 2 * math.sqrt(a[0] * b[0]) / (a[0] + b[0])
    if isinstance(family, GammaProduct):
        (aa, ba), (ab, bb) = a, b
        m = 0.5 * (aa + ab)
        log = gammaln(m) - 0.5 * (gammaln(aa) + gammaln(ab)) + 0.5 * (aa * math.log(ba) + ab * math.log(bb)) - m * math.log(0.5 * (ba + bb))
        return math.exp(log)
    raise ParameterDomainError(f"no closed form for {type(family).__name__}")


def _kl_1d(family: Family, a: tuple, b: tuple) -> float:
    if isinstance(family, IsoNormal):
        return (a[0] - b[0]) ** 2 / (2 * family.sigma**2)
    if isinstance(family, PoissonProduct):
        return a[0] * math.log(a[0] / b[0]) - a[0] + b[0]
    if isinstance(family, BernoulliProduct):
        p, q = a[0], b[0]
        return p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q))
    if isinstance(family, ExponentialProduct):
        return math.log(a[0] / b[0]) + b[0] / a[0] - 1.0
    if isinstance(family, GammaProduct):
        (aa, ba), (ab, bb) = a, b
        return (aa - ab) * digamma(aa) - gammaln(aa) + gammaln(ab) + ab * (math.log(ba) - math.log(bb)) + aa * (bb - ba) / ba
    raise ParameterDomainError(f"no closed form for {type(family).__name__}")


def bernoulli_r(t: float, s: float) -> float:
    return math.sqrt(t * s) + math.sqrt((1 - t) * (1 - s))


def cross_integral(family: Family, a: Params, b: Params, c: Params) -> float:
    """Closed form of ``int p_a p_b / p_c`` for product families (``+inf`` if divergent)."""
    ca, cb, cc = _same_dim(family, a, b, c)
    out = 1.0
    for x, y, z in zip(ca, cb, cc):
        out *= _cross_1d(family, x, y, z)
    return out


def affinity(family: Family, a: Params, b: Params) -> float:
    """Closed form of the Hellinger affinity ``int sqrt(p_a p_b)``."""
    ca, cb = _same_dim(family, a, b)
    out = 1.0
    for x, y in zip(ca, cb):
        out *= _affinity_1d(family, x, y)
    return out


# --------------------------------------------------------------------------
# closed forms per measure


def divergence(kind: str, family: Family, p: Params, q: Params) -> DivergenceValue:
    """``kind(P, Q)``; closed form when available, otherwise the numerical oracle."""
    if kind not in KINDS:
        raise ValueError(f"unknown divergence kind {kind!r}")
    if isinstance(family, GwnDiscrete):
        fam, a = family.as_isonormal(p)
        _, b = family.as_isonormal(q)
        return divergence(kind, fam, a, b)
    if isinstance(family, PppBoundary):
        return _ppp_divergence(kind, family, p, q)
    if isinstance(family, IsoNormal):
        a, b = _same_dim(family, p, q)
        D2 = sum((x[0] - y[0]) ** 2 for x, y in zip(a, b)) / family.sigma**2
        val = {
            "tv": 2 * norm.cdf(math.sqrt(D2) / 2) - 1,
            "h2": -math.expm1(-D2 / 8),
            "kl": D2 / 2,
            "chi2": math.expm1(D2),
        }[kind]
        return DivergenceValue(kind, float(val), "closed-form")
    cp, cq = _same_dim(family, p, q)
    if kind == "h2":
        return DivergenceValue(kind, _h2_from_affinity(affinity(family, p, q)), "closed-form")
    if kind == "kl":
        return DivergenceValue(kind, float(sum(_kl_1d(family, x, y) for x, y in zip(cp, cq))), "closed-form")
    if kind == "chi2":
        val = cross_integral(family, p, p, q) - 1.0
        return DivergenceValue(kind, val, "closed-form", dominated=math.isfinite(val))
    if len(cp) == 1:
        tv = _tv_1d_closed(family, cp[0], cq[0])
        if tv is not None:
            return DivergenceValue("tv", tv, "closed-form")
    return numeric_divergence_oracle(kind, family, p, q)


def _h2_from_affinity(bc: float) -> float:
    return float(min(max(1.0 - bc, 0.0), 1.0))


def _tv_1d_closed(family: Family, a: tuple, b: tuple) -> float | None:
    if a == b:
        return 0.0
    if isinstance(family, BernoulliProduct):
        return abs(a[0] - b[0])
    if isinstance(family, ExponentialProduct):
        x = math.log(a[0] / b[0]) / (a[0] - b[0])
        return abs(math.exp(-b[0] * x) - math.exp(-a[0] * x))
    return None


def _ppp_divergence(kind: str, family: PppBoundary, f: Params, g: Params) -> DivergenceValue:
    f, g = family.validate(f), family.validate(g)
    d = (f - g).cells
    above = float(np.mean(np.clip(d, 0, None)))  # area where f > g
    below = float(np.mean(np.clip(-d, 0, None)))  # area where g > f
    n = family.n
    if kind == "h2":
        return DivergenceValue(kind, -math.expm1(-n * (above + below) / 2), "closed-form")
    if kind == "tv":
        return DivergenceValue(kind, -math.expm1(-n * max(above, below)), "closed-form")
    # P_f << P_g iff g <= f everywhere
    if below > 0:
        return DivergenceValue(kind, math.inf, "closed-form", dominated=False)
    if kind == "chi2":
        return DivergenceValue(kind, math.expm1(n * above), "closed-form")
    return DivergenceValue(kind, n * above, "closed-form")


# --------------------------------------------------------------------------
# numerical oracle


@dataclass(frozen=True)
class OracleBudget:
    quad_limit: int = 200
    epsabs: float = 1e-13
    epsrel: float = 1e-11
    mc_reps: int = 200_000
    seed: int = 0
    tail_tol: float = 1e-10


def poisson_cutoff(lam_max: float) -> int:
    return int(math.ceil(lam_max + 40 * math.sqrt(lam_max) + 60))


def _quad(fun, lo, hi, budget: OracleBudget, points=None) -> tuple[float, float, bool]:
    kw = dict(limit=budget.quad_limit, epsabs=budget.epsabs, epsrel=budget.epsrel, full_output=1)
    if points is not None and math.isfinite(lo) and math.isfinite(hi):
        pts = sorted(p for p in points if lo < p < hi)
        kw["points"] = pts or None
    res = integrate.quad(fun, lo, hi, **kw)
    val, err = res[0], res[1]
    ok = len(res) < 4  # a fourth element is the warning message
    return float(val), float(err), ok


def _support_1d(family: Family, params: list[tuple]) -> tuple[float, float, list[float]]:
    if isinstance(family, IsoNormal):
        locs = [t[0] for t in params]
        s = family.sigma
        return min(locs) - 12 * s - (max(locs) - min(locs)), max(locs) + 12 * s + (max(locs) - min(locs)), locs
    return 0.0, math.inf, []


def _logpdf_1d(family: Family, t: tuple, x: np.ndarray) -> np.ndarray:
    if isinstance(family, IsoNormal):
        return family.log_density_1d(t[0], x)
    if isinstance(family, ExponentialProduct):
        return ExponentialProduct.log_density_1d(t[0], x)
    if isinstance(family, GammaProduct):
        return GammaProduct.log_density_1d(t[0], t[1], x)
    if isinstance(family, PoissonProduct):
        return PoissonProduct.log_pmf_1d(t[0], x)
    if isinstance(family, BernoulliProduct):
        return BernoulliProduct.log_pmf_1d(t[0], x)
    raise ParameterDomainError(f"no density for {type(family).__name__}")


def _discrete_grid(family: Family, params: list[tuple], extra: float = 0.0) -> np.ndarray:
    if isinstance(family, BernoulliProduct):
        return np.array([0.0, 1.0])
    lam = max([t[0] for t in params] + [extra])
    return np.arange(poisson_cutoff(lam) + 1, dtype=float)


def _integrate_1d(family: Family, params: list[tuple], logf, budget: OracleBudget) -> tuple[float, float, bool]:
    """Integrate ``exp(logf(x))`` against the coordinate's base measure."""
    if family.discrete:
        return _sum_1d(family, params, logf, budget)
    lo, hi, pts = _support_1d(family, params)

    def fun(x):
        # scalar path: quad calls this a few hundred times per integral
        v = float(logf(x))
        return math.exp(v) if v == v else 0.0

    if isinstance(family, IsoNormal):
        return _quad(fun, lo, hi, budget, points=pts)
    # split the half line at a scale point so singular/peaked parts are resolved
    scale = max(max(t[-2] if isinstance(family, GammaProduct) else 1.0 for t in params), 1.0) / min(t[-1] for t in params)
    v1, e1, ok1 = _quad(fun, 0.0, scale, budget)
    v2, e2, ok2 = _quad(fun, scale, math.inf, budget)
    return v1 + v2, e1 + e2, ok1 and ok2


def _sum_1d(family: Family, params: list[tuple], logf, budget: OracleBudget, eff_mean: float = 0.0):
    k = _discrete_grid(family, params, eff_mean)
    terms = np.exp(logf(k))
    val = float(math.fsum(terms))
    tail = 0.0
    if isinstance(family, PoissonProduct):
        lam = max([t[0] for t in params] + [eff_mean])
        tail = float(pdtrc(k[-1], lam))
    return val, tail, True


def _cross_numeric_1d(family: Family, a: tuple, b: tuple, c: tuple, budget: OracleBudget):
    def logf(x):
        if isinstance(x, float):
            lc = _logpdf_1d(family, c, x)
            return -math.inf if lc == -math.inf else _logpdf_1d(family, a, x) + _logpdf_1d(family, b, x) - lc
        with np.errstate(invalid="ignore"):
            return _logpdf_1d(family, a, x) + _logpdf_1d(family, b, x) - _logpdf_1d(family, c, x)

    if family.discrete:
        eff = a[0] * b[0] / c[0] if isinstance(family, PoissonProduct) else 0.0
        val, tail, ok = _sum_1d(family, [a, b, c], logf, budget, eff)
        if isinstance(family, PoissonProduct):
            tail *= math.exp((a[0] - c[0]) * (b[0] - c[0]) / c[0])
        return val, tail, ok and tail < budget.tail_tol * max(1.0, val)
    if isinstance(family, ExponentialProduct) and a[0] + b[0] - c[0] <= 0:
        return math.inf, 0.0, True
    if isinstance(family, GammaProduct) and (a[0] + b[0] - c[0] <= 0 or a[1] + b[1] - c[1] <= 0):
        return math.inf, 0.0, True
    return _integrate_1d(family, [a, b, c], logf, budget)


def _affinity_numeric_1d(family: Family, a: tuple, b: tuple, budget: OracleBudget):
    def logf(x):
        return 0.5 * (_logpdf_1d(family, a, x) + _logpdf_1d(family, b, x))

    return _integrate_1d(family, [a, b], logf, budget)


def _kl_numeric_1d(family: Family, a: tuple, b: tuple, budget: OracleBudget):
    def f(x):
        la, lb = _logpdf_1d(family, a, x), _logpdf_1d(family, b, x)
        pa = np.exp(la)
        with np.errstate(invalid="ignore"):
            return np.where(pa > 0, pa * (la - lb), 0.0)

    if family.discrete:
        k = _discrete_grid(family, [a, b])
        val = float(math.fsum(f(k)))
        tail = float(pdtrc(k[-1], max(a[0], b[0]))) * (1 + k[-1] * abs(math.log(a[0] / b[0]))) if isinstance(family, PoissonProduct) else 0.0
        return val, tail, True
    lo, hi, pts = _support_1d(family, [a, b])
    if isinstance(family, IsoNormal):
        return _quad(lambda x: float(f(np.array([x]))[0]), lo, hi, budget, points=pts)
    scale = max(a[0] if isinstance(family, GammaProduct) else 1.0, 1.0) / a[-1]
    v1, e1, o1 = _quad(lambda x: float(f(np.array([x]))[0]), 0.0, scale, budget)
    v2, e2, o2 = _quad(lambda x: float(f(np.array([x]))[0]), scale, math.inf, budget)
    return v1 + v2, e1 + e2, o1 and o2


def numeric_cross_integral(family: Family, a: Params, b: Params, c: Params, budget: OracleBudget | None = None):
    """Oracle for ``int p_a p_b / p_c``: returns ``(value, error_bound, converged)``."""
    budget = budget or OracleBudget()
    ca, cb, cc = _same_dim(family, a, b, c)
    val, err, ok = 1.0, 0.0, True
    for x, y, z in zip(ca, cb, cc):
        v, e, o = _cross_numeric_1d(family, x, y, z, budget)
        err = abs(val) * e + abs(v) * err + e * err
        val *= v
        ok = ok and o
    return val, err, ok


def numeric_affinity(family: Family, a: Params, b: Params, budget: OracleBudget | None = None):
    """Oracle for ``int sqrt(p_a p_b)``: returns ``(value, error_bound, converged)``."""
    budget = budget or OracleBudget()
    ca, cb = _same_dim(family, a, b)
    val, err, ok = 1.0, 0.0, True
    for x, y in zip(ca, cb):
        v, e, o = _affinity_numeric_1d(family, x, y, budget)
        err = abs(val) * e + abs(v) * err + e * err
        val *= v
        ok = ok and o
    return val, err, ok


def numeric_divergence_oracle(
    kind: str, family: Family, p: Params, q: Params, budget: OracleBudget | None = None
) -> DivergenceValue:
    """Independent evaluation of ``kind(P, Q)`` without the closed forms above."""
    budget = budget or OracleBudget()
    if kind not in KINDS:
        raise ValueError(f"unknown divergence kind {kind!r}")
    if isinstance(family, GwnDiscrete):
        fam, a = family.as_isonormal(p)
        _, b = family.as_isonormal(q)
        return numeric_divergence_oracle(kind, fam, a, b, budget)
    if isinstance(family, PppBoundary):
        return _ppp_mc_oracle(kind, family, p, q, budget)
    cp, cq = _same_dim(family, p, q)
    prov = "exact-sum" if family.discrete else "quadrature"
    if kind == "h2":
        bc, err, ok = numeric_affinity(family, p, q, budget)
        return DivergenceValue(kind, _h2_from_affinity(bc), prov, converged=ok, error_bound=err)
    if kind == "chi2":
        v, err, ok = numeric_cross_integral(family, p, p, q, budget)
        return DivergenceValue(kind, v - 1.0, prov, dominated=math.isfinite(v), converged=ok, error_bound=err)
    if kind == "kl":
        total, err, ok = 0.0, 0.0, True
        for x, y in zip(cp, cq):
            v, e, o = _kl_numeric_1d(family, x, y, budget)
            total, err, ok = total + v, err + e, ok and o
        return DivergenceValue(kind, total, prov, converged=ok, error_bound=err)
    return _tv_oracle(family, p, q, cp, cq, budget)


def _tv_oracle(family, p, q, cp, cq, budget: OracleBudget) -> DivergenceValue:
    if isinstance(family, IsoNormal):
        # rotation invariance: only the component along p - q matters
        a = np.array([t[0] for t in cp])
        b = np.array([t[0] for t in cq])
        D = float(np.linalg.norm(a - b))
        s = family.sigma
        f = lambda x: 0.5 * abs(math.exp(-0.5 * (x / s) ** 2) - math.exp(-0.5 * ((x - D) / s) ** 2)) / (s * math.sqrt(2 * math.pi))
        v, e, ok = _quad(f, -12 * s - D, D + 12 * s, budget, points=[0.0, D / 2, D])
        return DivergenceValue("tv", v, "quadrature", converged=ok, error_bound=e)
    if family.discrete:
        grids = [_discrete_grid(family, [x, y]) for x, y in zip(cp, cq)]
        if math.prod(g.size for g in grids) <= 4_000_000:
            lp = _joint_log_table(family, cp, grids)
            lq = _joint_log_table(family, cq, grids)
            v = 0.5 * float(np.sum(np.abs(np.exp(lp) - np.exp(lq))))
            tail = 0.0
            if isinstance(family, PoissonProduct):
                tail = sum(float(pdtrc(g[-1], max(x[0], y[0]))) for g, x, y in zip(grids, cp, cq))
            return DivergenceValue("tv", v, "exact-sum", error_bound=tail)
    if len(cp) == 1:
        f = lambda x: 0.5 * abs(math.exp(_logpdf_1d(family, cp[0], np.array([x]))[0]) - math.exp(_logpdf_1d(family, cq[0], np.array([x]))[0]))
        v1, e1, o1 = _quad(f, 0.0, 1.0 / min(cp[0][-1], cq[0][-1]), budget)
        v2, e2, o2 = _quad(f, 1.0 / min(cp[0][-1], cq[0][-1]), math.inf, budget)
        return DivergenceValue("tv", v1 + v2, "quadrature", converged=o1 and o2, error_bound=e1 + e2)
    # TV = E_Q[(1 - dP/dQ)_+]
    g = RngStream(budget.seed, 7).generator()
    x = family.sample(q, g, budget.mc_reps)
    lr = log_ratio(family, p, q, x)
    z = np.clip(1.0 - np.exp(lr), 0.0, None)
    return DivergenceValue("tv", float(z.mean()), "monte-carlo", se=float(z.std(ddof=1) / math.sqrt(z.size)))


def _joint_log_table(family, cs, grids) -> np.ndarray:
    out = np.zeros([g.size for g in grids])
    for i, (t, g) in enumerate(zip(cs, grids)):
        shape = [1] * len(grids)
        shape[i] = g.size
        out = out + _logpdf_1d(family, t, g).reshape(shape)
    return out


def _ppp_mc_oracle(kind: str, family: PppBoundary, f: Params, g: Params, budget: OracleBudget) -> DivergenceValue:
    f, g = family.validate(f), family.validate(g)
    fwd = bool(np.all(g.values <= f.values))
    bwd = bool(np.all(f.values <= g.values))
    if not (fwd or bwd):
        if kind in ("kl", "chi2"):
            return DivergenceValue(kind, math.inf, "monte-carlo", se=0.0, dominated=False)
        raise DominationError("Monte Carlo oracle for unordered boundaries is not available")
    if kind in ("kl", "chi2") and not fwd:
        return DivergenceValue(kind, math.inf, "monte-carlo", se=0.0, dominated=False)
    hi, lo = (f, g) if fwd else (g, f)
    rng = RngStream(budget.seed, 11).generator()
    sample = family.sample(lo, rng, budget.mc_reps)
    L = np.exp(family.log_ratio(hi, lo, sample))
    if kind == "h2":
        z = 1.0 - np.sqrt(L)
    elif kind == "tv":
        z = np.clip(1.0 - L, 0.0, None)
    elif kind == "chi2":
        z = L**2 - 1.0
    else:
        # KL(P_f, P_g) = E_g[L log L]
        z = xlogy(L, L)
    return DivergenceValue(kind, float(z.mean()), "monte-carlo", se=float(z.std(ddof=1) / math.sqrt(z.size)))


# --------------------------------------------------------------------------
# mixtures


def mixture_chi2_oracle(
    family: Family, p0: Params, params: list[Params], weights, budget: OracleBudget | None = None
) -> DivergenceValue:
    """``chi2(sum_j w_j P_j, P_0)`` by exact enumeration, 1-d quadrature, or Monte Carlo."""
    budget = budget or OracleBudget()
    w = np.asarray(weights, dtype=float)
    if w.size != len(params) or np.any(w < 0) or not math.isclose(float(w.sum()), 1.0, rel_tol=1e-12):
        raise ValueError("weights must be a probability vector matching the parameter list")
    cs = _same_dim(family, p0, *params)
    c0, cj = cs[0], cs[1:]
    if family.discrete:
        grids = [_discrete_grid(family, [c0[i]] + [c[i] for c in cj]) for i in range(len(c0))]
        l0 = _joint_log_table(family, c0, grids)
        mix = sum(wj * np.exp(_joint_log_table(family, c, grids) - l0 / 2) for wj, c in zip(w, cj))
        v = float(np.sum(mix**2)) - 1.0
        return DivergenceValue("chi2", v, "exact-sum")
    if len(c0) == 1:
        def f(x):
            xx = np.array([x])
            l0x = _logpdf_1d(family, c0[0], xx)[0]
            if not math.isfinite(l0x):
                return 0.0
            m = sum(wj * math.exp(_logpdf_1d(family, c[0], xx)[0] - 0.5 * l0x) for wj, c in zip(w, cj))
            return m * m

        if isinstance(family, IsoNormal):
            lo, hi, pts = _support_1d(family, [c0[0]] + [c[0] for c in cj])
            v, e, ok = _quad(f, lo, hi, budget, points=pts)
        else:
            v1, e1, o1 = _quad(f, 0.0, 1.0 / c0[0][-1], budget)
            v2, e2, o2 = _quad(f, 1.0 / c0[0][-1], math.inf, budget)
            v, e, ok = v1 + v2, e1 + e2, o1 and o2
        return DivergenceValue("chi2", v - 1.0, "quadrature", converged=ok, error_bound=e)
    rng = RngStream(budget.seed, 13).generator()
    x = family.sample(p0, rng, budget.mc_reps)
    L = sum(wj * np.exp(log_ratio(family, pj, p0, x)) for wj, pj in zip(w, params))
    z = L**2 - 1.0
    return DivergenceValue("chi2", float(z.mean()), "monte-carlo", se=float(z.std(ddof=1) / math.sqrt(z.size)))


def all_divergences(family: Family, p: Params, q: Params) -> dict[str, DivergenceValue]:
    """The six values needed by the two-point bounds, keyed ``tv, h2, kl_pq, kl_qp, chi2_pq, chi2_qp``."""
    return {
        "tv": divergence("tv", family, p, q),
        "h2": divergence("h2", family, p, q),
        "kl_pq": divergence("kl", family, p, q),
        "kl_qp": divergence("kl", family, q, p),
        "chi2_pq": divergence("chi2", family, p, q),
        "chi2_qp": divergence("chi2", family, q, p),
    }
