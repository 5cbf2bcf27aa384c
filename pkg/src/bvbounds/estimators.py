"""Estimators, their exact moments where available, and Monte Carlo moment measurement.

All estimators act on a batch of observations (one row per replication)
and return one row of estimates per replication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import norm, ortho_group

from .models import (
    Family,
    GridFunction,
    GwnDiscrete,
    ParameterDomainError,
    Params,
    PppSample,
    RngStream,
)


class ArityError(ValueError):
    pass


class SupportViolationError(ValueError):
    pass


# --------------------------------------------------------------------------
# estimator specs


class Estimator:
    vector = True  # vector-valued (one output per coordinate) or scalar functional

    def apply(self, obs):
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(Estimator):
    def apply(self, obs):
        return np.zeros_like(np.atleast_2d(obs))


@dataclass(frozen=True)
class Identity(Estimator):
    def apply(self, obs):
        return np.array(np.atleast_2d(obs), dtype=float)


@dataclass(frozen=True)
class SoftThreshold(Estimator):
    T: float

    def __post_init__(self) -> None:
        if self.T < 0:
            raise ParameterDomainError("threshold must be non-negative")

    def apply(self, obs):
        x = np.atleast_2d(obs)
        return np.sign(x) * np.maximum(np.abs(x) - self.T, 0.0)


@dataclass(frozen=True)
class LinearShrinkage(Estimator):
    c: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.c <= 1.0:
            raise ParameterDomainError("shrinkage factor must lie in [0, 1]")

    def apply(self, obs):
        return self.c * np.atleast_2d(obs)


@dataclass(frozen=True)
class JamesStein(Estimator):
    """``(1 - (m-2)/(n |X - c|^2)) (X - c) + c``; returns ``c`` when ``X = c``."""

    n: float = 1.0
    center: tuple[float, ...] | None = None

    def apply(self, obs):
        x = np.atleast_2d(np.asarray(obs, dtype=float))
        m = x.shape[1]
        if m <= 2:
            raise ArityError("James-Stein needs dimension m > 2")
        c = np.zeros(m) if self.center is None else np.asarray(self.center, dtype=float)
        z = x - c
        r2 = np.sum(z * z, axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(r2 > 0, 1.0 - (m - 2) / (self.n * r2), 0.0)
        return f * z + c


@dataclass(frozen=True)
class UnbiasedQuadratic(Estimator):
    """``sum_i X_i^2 - m`` for unit-noise observations."""

    vector = False

    def apply(self, obs):
        x = np.atleast_2d(obs)
        return np.sum(x * x, axis=1) - x.shape[1]


@dataclass(frozen=True)
class QuadFunctionalThreshold(Estimator):
    """``sum_i ((X_i^2 - u)_+ - E(xi^2 - u)_+)`` with ``xi ~ N(0, 1)``."""

    u: float
    vector = False

    def __post_init__(self) -> None:
        if self.u < 0:
            raise ParameterDomainError("level must be non-negative")

    def apply(self, obs):
        x = np.atleast_2d(obs)
        return np.sum(np.maximum(x * x - self.u, 0.0) - positive_part_chi2_mean(self.u), axis=1)


@dataclass(frozen=True)
class KernelSmoother(Estimator):
    """Box-kernel smoother ``(2h)^{-1} int_{x0-h}^{x0+h} dY`` on the white-noise grid.

    The integral is the sum of increments over cells that overlap the window
    with positive length.
    """

    h: float
    x0: float
    vector = False

    def __post_init__(self) -> None:
        if not 0.0 < self.h <= 0.5:
            raise ParameterDomainError("bandwidth must lie in (0, 1/2]")

    def cells(self, m: int) -> np.ndarray:
        lo = np.arange(m) / m
        hi = (np.arange(m) + 1) / m
        overlap = np.minimum(hi, self.x0 + self.h) - np.maximum(lo, self.x0 - self.h)
        return np.nonzero(overlap > 1e-12 / m)[0]

    def apply(self, obs):
        dy = np.atleast_2d(obs)
        idx = self.cells(dy.shape[1])
        return dy[:, idx].sum(axis=1) / (2 * self.h)

    def exact_mean(self, f: GridFunction) -> float:
        idx = self.cells(f.m)
        return float(np.sum(f.cells[idx]) / f.m / (2 * self.h))

    def exact_variance(self, model: GwnDiscrete) -> float:
        return self.cells(model.m).size / (4 * self.h**2 * model.n * model.m)


@dataclass(frozen=True)
class PppMin(Estimator):
    """Minimum height of the observed points; ``corrected`` subtracts ``1/n``."""

    n: float
    corrected: bool = False
    vector = False

    def apply(self, obs: PppSample):
        m = obs.segment_min(obs.y, obs.top)
        return m - 1.0 / self.n if self.corrected else m


@dataclass(frozen=True)
class Symmetrized(Estimator):
    """Average of ``D^T est(D x)`` over a fixed set of orthogonal matrices."""

    inner: Estimator
    rotations: np.ndarray = field(repr=False)

    def apply(self, obs):
        x = np.atleast_2d(np.asarray(obs, dtype=float))
        out = np.zeros_like(x)
        for D in self.rotations:
            out += self.inner.apply(x @ D.T) @ D
        return out / len(self.rotations)


@dataclass(frozen=True)
class Projected(Estimator):
    """Coefficients ``int f_hat psi_i`` of a function estimator on the grid."""

    inner: Estimator
    basis: np.ndarray = field(repr=False)

    def apply(self, obs):
        fhat = np.atleast_2d(self.inner.apply(obs))
        return l2_project_to_sequence(fhat, self.basis)


def apply(spec: Estimator, observation):
    return spec.apply(observation)


# --------------------------------------------------------------------------
# function-level estimators on the white-noise grid


@dataclass(frozen=True)
class CellObservations(Estimator):
    """Raw cell averages ``m dY_c`` as a function estimate."""

    def apply(self, obs):
        dy = np.atleast_2d(obs)
        return dy * dy.shape[1]


@dataclass(frozen=True)
class OracleFunction(Estimator):
    """Returns the true cell values regardless of the data."""

    cells: tuple[float, ...]

    def apply(self, obs):
        dy = np.atleast_2d(obs)
        return np.broadcast_to(np.asarray(self.cells), dy.shape).copy()


@dataclass(frozen=True)
class SmootherFunction(Estimator):
    """Box smoother of the cell averages evaluated at every cell, window clipped to [0, 1]."""

    h: float

    def apply(self, obs):
        dy = np.atleast_2d(obs)
        m = dy.shape[1]
        w = max(int(round(self.h * m)), 0)
        c = np.concatenate([np.zeros((dy.shape[0], 1)), np.cumsum(dy, axis=1)], axis=1)
        lo = np.clip(np.arange(m) - w, 0, m)
        hi = np.clip(np.arange(m) + w + 1, 0, m)
        return (c[:, hi] - c[:, lo]) * m / (hi - lo)


@dataclass(frozen=True)
class JamesSteinFunction(Estimator):
    """James-Stein shrinkage of the cell averages (noise variance ``m/n`` per cell)."""

    n: float

    def apply(self, obs):
        dy = np.atleast_2d(obs)
        m = dy.shape[1]
        z = dy * m
        return JamesStein(self.n / m).apply(z)


# --------------------------------------------------------------------------
# exact Gaussian moments


def _tail_moments(L):
    """``int_L^inf y^k phi(y) dy`` for ``k = 0..4``."""
    L = np.asarray(L, dtype=float)
    sf, pdf = norm.sf(L), norm.pdf(L)
    Lp = np.where(np.isfinite(L), L, 0.0)
    return (
        sf,
        pdf,
        Lp * pdf + sf,
        (Lp * Lp + 2) * pdf,
        (Lp**3 + 3 * Lp) * pdf + 3 * sf,
    )


def exact_soft_threshold_moments(T: float, theta) -> tuple[np.ndarray, np.ndarray]:
    """Bias and variance of ``sign(X)(|X| - T)_+`` with ``X ~ N(theta, 1)``."""
    if T < 0:
        raise ParameterDomainError("threshold must be non-negative")
    th = np.asarray(theta, dtype=float)
    # upper part: X - T on {X > T}; with Y = X - theta, {Y > T - theta}
    a = T - th
    I0, I1, I2, _, _ = _tail_moments(a)
    m_up = I1 + (th - T) * I0
    s_up = I2 + 2 * (th - T) * I1 + (th - T) ** 2 * I0
    # lower part mirrors the upper one with theta -> -theta
    b = T + th
    J0, J1, J2, _, _ = _tail_moments(b)
    m_lo = J1 + (-th - T) * J0
    s_lo = J2 + 2 * (-th - T) * J1 + (-th - T) ** 2 * J0
    mean = m_up - m_lo
    var = s_up + s_lo - mean**2
    return mean - th, np.maximum(var, 0.0)


def soft_threshold_var0(T: float) -> float:
    return float(2 * ((1 + T * T) * norm.sf(T) - T * norm.pdf(T)))


def soft_threshold_var0_bound(T: float, corrected: bool = True) -> float:
    """Upper bound ``c sqrt(2/pi) T^{-3} exp(-T^2/2)`` on the variance at zero.

    The Laplace-type step gives ``int_0^inf y^2 e^{-y} dy = 2``, so ``c = 2``.
    ``corrected=False`` returns the ``c = 1`` expression, which is only valid
    for ``T`` up to about 2.37.
    """
    c = 2.0 if corrected else 1.0
    return c * math.sqrt(2 / math.pi) / T**3 * math.exp(-T * T / 2) if T > 0 else math.inf


def positive_part_chi2_mean(u: float) -> float:
    """``E(xi^2 - u)_+`` for standard normal ``xi``."""
    c = math.sqrt(u)
    return float(2 * ((1 - u) * norm.sf(c) + c * norm.pdf(c)))


def exact_functional_threshold_moments(u: float, theta) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate bias and variance of ``(X^2 - u)_+ - E(xi^2 - u)_+``, ``X ~ N(theta, 1)``.

    The bias is relative to ``theta^2``.
    """
    th = np.asarray(theta, dtype=float)
    c = math.sqrt(u)

    def side(t):
        I0, I1, I2, I3, I4 = _tail_moments(c - t)
        w = t * t - u
        m1 = I2 + 2 * t * I1 + w * I0
        m2 = I4 + 4 * t * I3 + (4 * t * t + 2 * w) * I2 + 4 * t * w * I1 + w * w * I0
        return m1, m2

    a1, a2 = side(th)
    b1, b2 = side(-th)
    mean = a1 + b1
    var = a2 + b2 - mean**2
    return mean - positive_part_chi2_mean(u) - th * th, np.maximum(var, 0.0)


# --------------------------------------------------------------------------
# Monte Carlo moments


@dataclass(frozen=True)
class MomentEstimate:
    mean: np.ndarray
    bias: np.ndarray
    bias_se: np.ndarray
    variances: np.ndarray
    sq_bias_norm: float
    sq_bias_se: float
    var_sum: float
    var_sum_se: float
    mse: float
    mse_se: float
    mad_mean: float
    mad_median: float
    mad_se: float
    reps: int
    seed: int

    def to_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


def moments_from_draws(est: np.ndarray, target, seed: int = 0) -> MomentEstimate:
    x = np.asarray(est, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    R = x.shape[0]
    t = np.broadcast_to(np.asarray(target, dtype=float), (x.shape[1],))
    mean = x.mean(axis=0)
    dev = x - mean
    var = np.sum(dev * dev, axis=0) / (R - 1)
    b = mean - t
    q = np.sum(dev * dev, axis=1) * R / (R - 1)
    var_sum = float(q.mean())
    var_sum_se = float(q.std(ddof=1) / math.sqrt(R))
    sq_raw = float(b @ b)
    sq = sq_raw - var_sum / R
    sq_se = float(math.sqrt(max(np.sum(4 * b * b * var) / R, 0.0) + 2 * float(np.sum(var * var)) / R**2))
    err = np.sum((x - t) ** 2, axis=1)
    med = np.median(x, axis=0)
    mad_m = np.sum(np.abs(dev), axis=1)
    mad_d = np.sum(np.abs(x - med), axis=1)
    return MomentEstimate(
        mean=mean,
        bias=b,
        bias_se=np.sqrt(var / R),
        variances=var,
        sq_bias_norm=sq,
        sq_bias_se=sq_se,
        var_sum=var_sum,
        var_sum_se=var_sum_se,
        mse=float(err.mean()),
        mse_se=float(err.std(ddof=1) / math.sqrt(R)),
        mad_mean=float(mad_m.mean()),
        mad_median=float(mad_d.mean()),
        mad_se=float(mad_m.std(ddof=1) / math.sqrt(R)),
        reps=R,
        seed=seed,
    )


def draw_estimates(spec: Estimator, family: Family, params: Params, reps: int, rng: RngStream, chunk: int = 50_000) -> np.ndarray:
    """Apply ``spec`` to ``reps`` independent observations; chunk ``i`` uses substream index ``i``."""
    parts = []
    done, i = 0, 0
    while done < reps:
        k = min(chunk, reps - done)
        obs = family.sample(params, rng.generator(i), k)
        parts.append(np.atleast_1d(spec.apply(obs)))
        done += k
        i += 1
    return np.concatenate(parts, axis=0)


def mc_moments(spec: Estimator, family: Family, params: Params, reps: int, rng: RngStream, target=None, chunk: int = 50_000) -> MomentEstimate:
    """Monte Carlo bias, variance and MAD of ``spec`` under ``P_params``.

    ``target`` defaults to the parameter vector for vector estimators.
    """
    if reps < 1000:
        raise ValueError("use at least 1000 replications")
    if target is None:
        if not spec.vector or isinstance(params, GridFunction):
            raise ValueError("scalar or function-level estimators need an explicit target")
        target = family.validate(params).values
    x = draw_estimates(spec, family, params, reps, rng, chunk)
    return moments_from_draws(x, target, rng.seed)


# --------------------------------------------------------------------------
# symmetrisation and projection


def haar_rotations(dim: int, K: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    g = rng.generator() if isinstance(rng, RngStream) else rng
    if dim == 1:
        return np.sign(g.standard_normal((K, 1, 1))) + 0.0
    return np.asarray(ortho_group.rvs(dim, size=K, random_state=g)).reshape(K, dim, dim)


def spherical_symmetrize(spec: Estimator, K: int, rng: RngStream | np.random.Generator, dim: int) -> Symmetrized:
    """Estimator averaging ``D^{-1} est(D X)`` over ``K`` Haar-distributed orthogonal ``D``."""
    if not spec.vector:
        raise ArityError("symmetrisation needs a vector-valued estimator")
    if K < 1:
        raise ValueError("need at least one rotation")
    return Symmetrized(spec, haar_rotations(dim, K, rng))


def quartic_bump(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 0.5, (1 - 4 * x * x) ** 2, 0.0)


def compact_basis(m: int, cells: int, kernel: Callable = quartic_bump) -> np.ndarray:
    """``psi_i(x) = sqrt(m) K(m x - (i - 1/2))`` on the left end points of ``cells`` grid cells.

    Rows are renormalised to unit discrete L2 norm.
    """
    if cells % m:
        raise ValueError("the number of grid cells must be a multiple of m")
    probe = np.array([-0.75, -0.5000001, 0.5000001, 0.75, 1.0, -1.0])
    if np.any(np.abs(np.asarray(kernel(probe), dtype=float)) > 0):
        raise SupportViolationError("kernel must vanish outside [-1/2, 1/2]")
    x = np.arange(cells) / cells
    B = np.array([math.sqrt(m) * kernel(m * x - (i + 0.5)) for i in range(m)], dtype=float)
    nrm = np.sqrt(np.mean(B * B, axis=1, keepdims=True))
    return B / nrm


def l2_project_to_sequence(fhat, basis: np.ndarray) -> np.ndarray:
    """Coefficients ``int f_hat psi_i`` (discrete inner product on the grid)."""
    f = np.atleast_2d(np.asarray(fhat, dtype=float))
    if f.shape[1] != basis.shape[1]:
        raise ValueError("function grid and basis grid differ")
    return f @ basis.T / basis.shape[1]


def sequence_to_grid_function(theta, basis: np.ndarray) -> GridFunction:
    cells = np.asarray(theta, dtype=float) @ basis
    return GridFunction(np.concatenate([cells, cells[-1:]]))
