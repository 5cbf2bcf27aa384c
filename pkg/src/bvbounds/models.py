"""Distribution families, parameter containers, samplers and log-densities.

Every other module consumes the objects defined here. Families are small
frozen dataclasses; parameters are passed as :class:`ParamVector` (product
families) or :class:`GridFunction` (white noise and boundary models).

Conventions
-----------
* Product families are coordinatewise independent. ``IsoNormal`` is the
  product of ``N(theta_i, sigma^2)``.
* ``GwnDiscrete`` observes ``m`` increments ``dY_i = f_i/m + eps_i`` with
  ``eps_i ~ N(0, 1/(n m))`` where ``f_i`` is the value of ``f`` at the left
  end point of cell ``i``. All L2/L1 norms of grid functions are Riemann sums
  over those cell values, so the discrete divergences are exact.
* ``PppBoundary`` is a Poisson process of intensity ``n`` on the strip
  ``f(x) <= y <= f(x) + H`` with ``f`` piecewise constant on the cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln, xlogy


class ParameterDomainError(ValueError):
    """Parameter outside the family's natural domain."""


class ConfigurationError(ValueError):
    """Invalid model configuration (for example a non-positive height cap)."""


class DominationError(ValueError):
    """A likelihood ratio was requested where absolute continuity fails."""


# --------------------------------------------------------------------------
# random streams


@dataclass(frozen=True)
class RngStream:
    """Counter-based random substream keyed by ``(seed, stream)``.

    ``generator(index)`` returns a Philox generator whose key is derived from
    ``(seed, stream, index)``; equal triples give bit-identical draws and
    distinct triples give independent streams.
    """

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if int(self.stream) < 0:
            raise ConfigurationError("stream index must be non-negative")

    def generator(self, index: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream), int(index)))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, stream: int) -> "RngStream":
        # nested streams stay distinct from siblings by mixing the parent index in
        return RngStream(self.seed, self.stream * 1_000_003 + int(stream) + 1)


# --------------------------------------------------------------------------
# parameter containers


@dataclass(frozen=True)
class ParamVector:
    values: np.ndarray
    support: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        v = np.atleast_1d(np.asarray(self.values, dtype=float)).copy()
        if v.ndim != 1 or v.size < 1:
            raise ParameterDomainError("parameter vector must be one-dimensional and non-empty")
        if not np.all(np.isfinite(v)):
            raise ParameterDomainError("parameter vector must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.support is not None:
            s = tuple(sorted(int(i) for i in self.support))
            if len(set(s)) != len(s) or any(i < 0 or i >= v.size for i in s):
                raise ParameterDomainError("support indices out of range")
            mask = np.ones(v.size, dtype=bool)
            mask[list(s)] = False
            if np.any(v[mask] != 0.0):
                raise ParameterDomainError("values outside the declared support must be zero")
            object.__setattr__(self, "support", s)

    @property
    def d(self) -> int:
        return int(self.values.size)

    @classmethod
    def sparse(cls, n: int, support: Sequence[int], value: float | Sequence[float]) -> "ParamVector":
        v = np.zeros(n)
        v[list(support)] = value
        return cls(v, tuple(support))


@dataclass(frozen=True)
class GridFunction:
    """Function sampled at ``m + 1`` equispaced points of ``[0, 1]``."""

    values: np.ndarray
    smoothness: str = "holder"
    beta: float | None = None
    radius: float | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float).copy()
        if v.ndim != 1 or v.size < 3:
            raise ParameterDomainError("grid function needs at least m + 1 = 3 points")
        if not np.all(np.isfinite(v)):
            raise ParameterDomainError("grid function values must be finite")
        if self.smoothness not in ("holder", "sobolev"):
            raise ParameterDomainError("smoothness tag must be 'holder' or 'sobolev'")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, f, m: int, **kw) -> "GridFunction":
        x = np.linspace(0.0, 1.0, m + 1)
        return cls(np.asarray(f(x), dtype=float) * np.ones_like(x), **kw)

    @classmethod
    def constant(cls, c: float, m: int = 2) -> "GridFunction":
        return cls(np.full(m + 1, float(c)))

    @property
    def m(self) -> int:
        return self.values.size - 1

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m + 1)

    @property
    def cells(self) -> np.ndarray:
        return self.values[:-1]

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return GridFunction(self.values - other.values)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.mean(self.cells**2)))

    def l1_norm(self) -> float:
        return float(np.mean(np.abs(self.cells)))

    def integral(self) -> float:
        return float(np.mean(self.cells))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def holder_norm(self, beta: float | None = None) -> float:
        b = self.beta if beta is None else beta
        if b is None:
            raise ParameterDomainError("no smoothness index given")
        return holder_norm_on_grid(self.values, 1.0 / self.m, b)

    def to_csv(self) -> str:
        rows = ["x,f"] + [f"{x:.17g},{y:.17g}" for x, y in zip(self.grid, self.values)]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str, **kw) -> "GridFunction":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if lines and not _is_number(lines[0].split(",")[0]):
            lines = lines[1:]
        xs, ys = zip(*((float(a), float(b)) for a, b in (ln.split(",")[:2] for ln in lines)))
        xs = np.asarray(xs)
        if not np.allclose(xs, np.linspace(0.0, 1.0, len(xs)), atol=1e-9):
            raise ParameterDomainError("grid function CSV must be on an equispaced grid of [0, 1]")
        return cls(np.asarray(ys), **kw)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def _check_same_grid(f: GridFunction, g: GridFunction) -> None:
    if f.values.size != g.values.size:
        raise ParameterDomainError("grid functions live on different grids")


def holder_floor(beta: float) -> int:
    """Largest integer strictly smaller than ``beta``."""
    return int(math.ceil(beta) - 1)


def holder_norm_on_grid(values: np.ndarray, dx: float, beta: float) -> float:
    """Hölder norm from equispaced samples.

    Derivatives up to order ``floor(beta)`` are finite differences; the
    fractional part is the maximum difference quotient over all grid pairs.
    """
    k = holder_floor(beta)
    lam = beta - k
    total = 0.0
    d = np.asarray(values, dtype=float)
    for _ in range(k):
        total += float(np.max(np.abs(d)))
        d = np.diff(d) / dx
    total += float(np.max(np.abs(d)))
    total += holder_seminorm(d, dx, lam)
    return total


def holder_seminorm(values: np.ndarray, dx: float, lam: float, chunk: int = 2048) -> float:
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 2:
        return 0.0
    if lam == 1.0:
        return float(np.max(np.abs(np.diff(v))) / dx)
    best = 0.0
    for lo in range(0, n - 1, chunk):
        hi = min(lo + chunk, n - 1)
        i = np.arange(lo, hi)[:, None]
        j = np.arange(n)[None, :]
        gap = (j - i).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.abs(v[None, :] - v[lo:hi, None]) / (np.abs(gap) * dx) ** lam
        q[gap <= 0] = 0.0
        best = max(best, float(np.max(q)))
    return best


Params = Union[ParamVector, GridFunction]


# --------------------------------------------------------------------------
# samples


@dataclass(frozen=True)
class PppSample:
    """Batch of point-process realisations stored as flat arrays.

    Realisation ``r`` owns ``x[offsets[r]:offsets[r+1]]`` and the matching
    ``y`` slice.
    """

    x: np.ndarray
    y: np.ndarray
    offsets: np.ndarray
    top: np.ndarray  # upper edge of the observation strip, per realisation

    @property
    def reps(self) -> int:
        return self.offsets.size - 1

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def points(self, r: int) -> np.ndarray:
        a, b = self.offsets[r], self.offsets[r + 1]
        return np.column_stack([self.x[a:b], self.y[a:b]])

    def segment_min(self, values: np.ndarray, empty: np.ndarray | float) -> np.ndarray:
        out = np.broadcast_to(np.asarray(empty, dtype=float), (self.reps,)).copy()
        counts = self.counts
        nz = counts > 0
        if values.size:
            mins = np.minimum.reduceat(values, self.offsets[:-1][nz])
            out[nz] = mins
        return out


# --------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class IsoNormal:
    sigma: float = 1.0
    discrete = False

    def __post_init__(self) -> None:
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ParameterDomainError("sigma must be positive")

    def validate(self, p: Params) -> ParamVector:
        return _as_vector(p)

    def sample(self, p: Params, rng: RngStream | np.random.Generator, size: int = 1) -> np.ndarray:
        v = self.validate(p).values
        g = _gen(rng)
        return v + self.sigma * g.standard_normal((size, v.size))

    def log_density(self, p: Params, x: np.ndarray) -> np.ndarray:
        v = self.validate(p).values
        z = (np.atleast_2d(x) - v) / self.sigma
        return -0.5 * np.sum(z**2, axis=1) - v.size * (0.5 * math.log(2 * math.pi) + math.log(self.sigma))

    def log_density_1d(self, theta: float, x: np.ndarray) -> np.ndarray:
        z = (x - theta) / self.sigma
        return -0.5 * z**2 - 0.5 * math.log(2 * math.pi) - math.log(self.sigma)


@dataclass(frozen=True)
class PoissonProduct:
    discrete = True

    def validate(self, p: Params) -> ParamVector:
        v = _as_vector(p)
        if np.any(v.values <= 0):
            raise ParameterDomainError("Poisson intensities must be positive")
        return v

    def sample(self, p: Params, rng, size: int = 1) -> np.ndarray:
        v = self.validate(p).values
        return _gen(rng).poisson(v, size=(size, v.size)).astype(float)

    def log_density(self, p: Params, x: np.ndarray) -> np.ndarray:
        v = self.validate(p).values
        x = np.atleast_2d(x)
        return np.sum(xlogy(x, v) - v - gammaln(x + 1), axis=1)

    @staticmethod
    def log_pmf_1d(lam: float, k: np.ndarray) -> np.ndarray:
        return xlogy(k, lam) - lam - gammaln(k + 1)


@dataclass(frozen=True)
class BernoulliProduct:
    discrete = True

    def validate(self, p: Params) -> ParamVector:
        v = _as_vector(p)
        if np.any(v.values <= 0) or np.any(v.values >= 1):
            raise ParameterDomainError("Bernoulli parameters must lie in (0, 1)")
        return v

    def sample(self, p: Params, rng, size: int = 1) -> np.ndarray:
        v = self.validate(p).values
        return (_gen(rng).random((size, v.size)) < v).astype(float)

    def log_density(self, p: Params, x: np.ndarray) -> np.ndarray:
        v = self.validate(p).values
        x = np.atleast_2d(x)
        return np.sum(x * np.log(v) + (1 - x) * np.log1p(-v), axis=1)

    @staticmethod
    def log_pmf_1d(theta: float, k: np.ndarray) -> np.ndarray:
        return k * math.log(theta) + (1 - k) * math.log1p(-theta)


@dataclass(frozen=True)
class ExponentialProduct:
    """Product of exponential laws parametrised by their rates."""

    discrete = False

    def validate(self, p: Params) -> ParamVector:
        v = _as_vector(p)
        if np.any(v.values <= 0):
            raise ParameterDomainError("exponential rates must be positive")
        return v

    def sample(self, p: Params, rng, size: int = 1) -> np.ndarray:
        v = self.validate(p).values
        return _gen(rng).exponential(1.0 / v, size=(size, v.size))

    def log_density(self, p: Params, x: np.ndarray) -> np.ndarray:
        v = self.validate(p).values
        x = np.atleast_2d(x)
        out = np.sum(np.log(v) - v * x, axis=1)
        return np.where(np.all(x >= 0, axis=1), out, -np.inf)

    @staticmethod
    def log_density_1d(beta: float, x: np.ndarray) -> np.ndarray:
        if isinstance(x, float):
            return math.log(beta) - beta * x if x >= 0 else -math.inf
        return np.where(x >= 0, math.log(beta) - beta * x, -np.inf)


@dataclass(frozen=True)
class GammaProduct:
    """Product of Gamma laws in the shape/rate parametrisation.

    With ``shapes`` fixed the parameter is the rate vector. With
    ``shapes=None`` the parameter is ``(alpha_1..alpha_d, beta_1..beta_d)``
    so shapes may differ between distributions.
    """

    shapes: tuple[float, ...] | None = None
    discrete = False

    def __post_init__(self) -> None:
        if self.shapes is None:
            return
        s = tuple(float(a) for a in np.atleast_1d(self.shapes))
        if any(a <= 0 or not math.isfinite(a) for a in s):
            raise ParameterDomainError("Gamma shapes must be positive")
        object.__setattr__(self, "shapes", s)

    def split(self, p: Params) -> tuple[np.ndarray, np.ndarray]:
        v = _as_vector(p).values
        if self.shapes is None:
            if v.size % 2:
                raise ParameterDomainError("free-shape Gamma parameter must be (shapes, rates)")
            a, b = v[: v.size // 2], v[v.size // 2 :]
        else:
            b = v
            a = np.asarray(self.shapes)
            if a.size == 1:
                a = np.full(b.size, a[0])
            elif a.size != b.size:
                raise ParameterDomainError("rate vector and shape vector differ in length")
        if np.any(a <= 0) or np.any(b <= 0):
            raise ParameterDomainError("Gamma shapes and rates must be positive")
        return a, b

    def validate(self, p: Params) -> ParamVector:
        self.split(p)
        return _as_vector(p)

    def sample(self, p: Params, rng, size: int = 1) -> np.ndarray:
        a, b = self.split(p)
        return _gen(rng).gamma(a, 1.0 / b, size=(size, b.size))

    def log_density(self, p: Params, x: np.ndarray) -> np.ndarray:
        a, b = self.split(p)
        x = np.atleast_2d(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.sum(a * np.log(b) - gammaln(a) + xlogy(a - 1, x) - b * x, axis=1)
        return np.where(np.all(x > 0, axis=1), out, -np.inf)

    @staticmethod
    def log_density_1d(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
        if isinstance(x, float):
            if x <= 0:
                return -math.inf
            return alpha * math.log(beta) - math.lgamma(alpha) + (alpha - 1) * math.log(x) - beta * x
        with np.errstate(divide="ignore", invalid="ignore"):
            out = alpha * math.log(beta) - gammaln(alpha) + xlogy(alpha - 1, x) - beta * x
        return np.where(x > 0, out, -np.inf)


@dataclass(frozen=True)
class GwnDiscrete:
    """Gaussian white noise at level ``n`` observed through ``m`` increments."""

    m: int
    n: float
    discrete = False

    def __post_init__(self) -> None:
        if int(self.m) < 2:
            raise ConfigurationError("white-noise grid needs m >= 2 cells")
        if not self.n > 0:
            raise ConfigurationError("noise level n must be positive")

    @property
    def increment_sd(self) -> float:
        return 1.0 / math.sqrt(self.n * self.m)

    def validate(self, p: Params) -> GridFunction:
        if not isinstance(p, GridFunction):
            raise ParameterDomainError("white-noise model needs a GridFunction")
        if p.m != self.m:
            raise ParameterDomainError(f"grid function has {p.m} cells, model has {self.m}")
        return p

    def cell_means(self, p: Params) -> np.ndarray:
        return self.validate(p).cells / self.m

    def sample(self, p: Params, rng, size: int = 1) -> np.ndarray:
        mu = self.cell_means(p)
        return mu + self.increment_sd * _gen(rng).standard_normal((size, self.m))

    def log_ratio(self, p: Params, q: Params, dy: np.ndarray) -> np.ndarray:
        """``log dP_p/dP_q`` evaluated at increments ``dy``."""
        mp, mq = self.cell_means(p), self.cell_means(q)
        w = self.n * self.m
        return w * (np.atleast_2d(dy) @ (mp - mq)) - 0.5 * w * float(np.sum(mp**2 - mq**2))

    def log_density(self, p: Params, dy: np.ndarray) -> np.ndarray:
        mu = self.cell_means(p)
        z = (np.atleast_2d(dy) - mu) / self.increment_sd
        return -0.5 * np.sum(z**2, axis=1) - self.m * (0.5 * math.log(2 * math.pi) + math.log(self.increment_sd))

    def as_isonormal(self, p: Params) -> tuple[IsoNormal, ParamVector]:
        return IsoNormal(self.increment_sd), ParamVector(self.cell_means(p))


@dataclass(frozen=True)
class PppBoundary:
    """Poisson process with intensity ``n`` above a boundary, truncated at height ``H``."""

    n: float
    height: float | None = None
    discrete = False

    def __post_init__(self) -> None:
        if not self.n > 0:
            raise ConfigurationError("intensity n must be positive")
        if self.height is not None and not self.height > 0:
            raise ConfigurationError("height cap H must be positive")

    def cap_for(self, f: GridFunction) -> float:
        if self.height is not None:
            return float(self.height)
        return 10.0 / self.n + float(np.max(f.values) - np.min(f.values))

    def validate(self, p: Params) -> GridFunction:
        if not isinstance(p, GridFunction):
            raise ParameterDomainError("boundary model needs a GridFunction")
        return p

    def boundary_at(self, f: GridFunction, x: np.ndarray) -> np.ndarray:
        idx = np.minimum((x * f.m).astype(int), f.m - 1)
        return f.cells[idx]

    def sample(self, p: Params, rng, size: int = 1) -> PppSample:
        f = self.validate(p)
        H = self.cap_for(f)
        g = _gen(rng)
        counts = g.poisson(self.n * H, size=size)
        total = int(counts.sum())
        x = g.random(total)
        y = self.boundary_at(f, x) + H * g.random(total)
        offsets = np.concatenate([[0], np.cumsum(counts)])
        return PppSample(x, y, offsets, np.full(size, float(np.max(f.values)) + H))

    def log_ratio(self, f: Params, g: Params, sample: PppSample) -> np.ndarray:
        """``log dP_f/dP_g``; ``-inf`` where a point lies below ``f``."""
        f, g = self.validate(f), self.validate(g)
        _check_same_grid(f, g)
        if np.any(g.values > f.values + 1e-15):
            raise DominationError("dP_f/dP_g needs g <= f pointwise")
        base = self.n * (f - g).integral()
        below = (sample.y < self.boundary_at(f, sample.x)).astype(float)
        counts = sample.counts
        any_below = np.zeros(sample.reps, dtype=bool)
        nz = counts > 0
        if below.size:
            any_below[nz] = np.add.reduceat(below, sample.offsets[:-1][nz]) > 0
        return np.where(any_below, -np.inf, base)

    def log_density(self, p: Params, sample: PppSample) -> np.ndarray:
        raise DominationError("the boundary model has no common dominating measure; use log_ratio")

    def min_height(self, sample: PppSample) -> np.ndarray:
        # an empty strip means the minimum lies above the observed window
        return sample.segment_min(sample.y, sample.top)


Family = Union[IsoNormal, PoissonProduct, BernoulliProduct, ExponentialProduct, GammaProduct, GwnDiscrete, PppBoundary]
PRODUCT_FAMILIES = (IsoNormal, PoissonProduct, BernoulliProduct, ExponentialProduct, GammaProduct)


def _as_vector(p: Params | Sequence[float] | float) -> ParamVector:
    if isinstance(p, ParamVector):
        return p
    if isinstance(p, GridFunction):
        raise ParameterDomainError("product families need a ParamVector")
    return ParamVector(np.atleast_1d(np.asarray(p, dtype=float)))


def _gen(rng: RngStream | np.random.Generator) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def sample(family: Family, params: Params, rng: RngStream | np.random.Generator, size: int = 1):
    return family.sample(params, rng, size)


def log_density(family: Family, params: Params, x) -> np.ndarray:
    return family.log_density(params, x)


def log_ratio(family: Family, p: Params, q: Params, x) -> np.ndarray:
    """``log dP_p/dP_q`` at ``x``; defined for every family including GWN and PPP."""
    if isinstance(family, (GwnDiscrete, PppBoundary)):
        return family.log_ratio(p, q, x)
    with np.errstate(invalid="ignore"):
        lp, lq = family.log_density(p, x), family.log_density(q, x)
        out = lp - lq
    out = np.where(np.isneginf(lp), -np.inf, out)
    if np.any(np.isneginf(lq) & np.isfinite(lp)):
        raise DominationError("sample point outside the support of the reference law")
    return out


# --------------------------------------------------------------------------
# closed-form moments of separable quadratic statistics


def raw_moments_1d(family: Family, theta: float, k: int = 4, shape: float = 1.0) -> np.ndarray:
    """``E[x^j]`` for ``j = 0..k`` of one coordinate."""
    t = float(theta)
    if isinstance(family, IsoNormal):
        s2 = family.sigma**2
        mom = [1.0, t, t * t + s2, t**3 + 3 * t * s2, t**4 + 6 * t * t * s2 + 3 * s2 * s2]
    elif isinstance(family, PoissonProduct):
        mom = [1.0, t, t * t + t, t**3 + 3 * t * t + t, t**4 + 6 * t**3 + 7 * t * t + t]
    elif isinstance(family, BernoulliProduct):
        mom = [1.0, t, t, t, t]
    elif isinstance(family, ExponentialProduct):
        mom = [math.factorial(j) / t**j for j in range(5)]
    elif isinstance(family, GammaProduct):
        a = float(shape)
        mom = [math.exp(gammaln(a + j) - gammaln(a)) / t**j for j in range(5)]
    else:
        raise ParameterDomainError(f"no closed-form moments for {type(family).__name__}")
    return np.asarray(mom[: k + 1])


def quadratic_statistic_moments(
    family: Family, params: Params, linear: Sequence[float], quadratic: Sequence[float], const: float = 0.0
) -> tuple[float, float]:
    """Mean and variance of ``const + sum_i (a_i x_i + b_i x_i^2)``."""
    if isinstance(family, GammaProduct):
        shapes, v = family.split(params)
    else:
        v = family.validate(params).values
        shapes = np.ones_like(v)
    a = np.broadcast_to(np.asarray(linear, dtype=float), v.shape)
    b = np.broadcast_to(np.asarray(quadratic, dtype=float), v.shape)
    mean, var = const, 0.0
    for i, t in enumerate(v):
        m = raw_moments_1d(family, t, shape=shapes[i])
        e1 = a[i] * m[1] + b[i] * m[2]
        e2 = a[i] ** 2 * m[2] + 2 * a[i] * b[i] * m[3] + b[i] ** 2 * m[4]
        mean += e1
        var += max(e2 - e1 * e1, 0.0)
    return float(mean), float(var)
