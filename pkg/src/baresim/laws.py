"""Weight laws: simulable distributions whose cumulant function is the
convex conjugate of a divergence generator.

Every law has mean 1, a moment generating function that is finite on an
open interval around zero, closed-form n-fold convolutions, and
closed-form exponentially tilted versions together with the
importance-sampling factor ``ISF(x) = exp(n Lambda(tau) - x tau)``
(computed in log space throughout).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from . import stable
from .divergence import (
    AnchoredKL,
    BlendedWeightChiSq,
    CustomGenerator,
    GenAsymLaplace,
    Generator,
    GeneralizedKL,
    PowerGamma,
    TwoPoint,
)

__all__ = [
    "WeightLaw",
    "TiltedStable",
    "CompoundPoissonGamma",
    "DistortedStable",
    "Gaussian",
    "GammaLaw",
    "ScaledPoisson",
    "ShiftedPoisson",
    "ScaledNegBinomial",
    "ScaledBinomial",
    "ModTiltedStable",
    "TwoPointLaw",
    "GenAsymLaplaceLaw",
    "BlockSumLaw",
    "TiltedLaw",
    "sample",
    "sample_block_sum",
    "tilt",
    "sample_tilted",
    "log_mgf",
    "log_isf_block",
    "isf_block",
    "law_for_generator",
]

INF = math.inf


class WeightLaw:
    """Base class; subclasses are frozen dataclasses."""

    def mgf_dom(self) -> Tuple[float, float]:
        raise NotImplementedError

    def log_mgf(self, z):
        raise NotImplementedError

    def log_mgf_deriv(self, z: float) -> float:
        h = 1e-6 * max(1.0, abs(z))
        lo, hi = self.mgf_dom()
        z1, z2 = max(z - h, lo + 1e-12), min(z + h, hi - 1e-12 if math.isfinite(hi) else z + h)
        return float((self.log_mgf(z2) - self.log_mgf(z1)) / (z2 - z1))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.sample_block_sum(1, rng, size)

    def sample_block_sum(self, nk: int, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def sample_tilted_block(
        self, tau: float, nk: int, rng: np.random.Generator, size: int
    ) -> np.ndarray:
        raise NotImplementedError

    def check_tau(self, tau: float) -> float:
        lo, hi = self.mgf_dom()
        if not (lo < tau < hi):
            raise ValueError(f"tilt {tau} outside int(dom MGF) = ]{lo}, {hi}[")
        return float(tau)

    # discrete laws override these for exact enumeration
    is_discrete = False

    def block_support(self, nk: int, tail_log_mass: float):
        raise NotImplementedError("law has no countable support")


def _log_mgf_power(scale: float, gamma: float, z) -> np.ndarray:
    """Cumulant function shared by the power-family laws (gamma != 1):
    (c/g) * ((1 + (g-1) z / c)^(g/(g-1)) - 1) on its domain."""
    z = np.asarray(z, dtype=float)
    c, g = scale, gamma
    base = 1.0 + (g - 1.0) * z / c
    out = np.full(z.shape, INF)
    ok = base > 0
    out[ok] = c / g * (base[ok] ** (g / (g - 1.0)) - 1.0)
    return out


@dataclass(frozen=True)
class TiltedStable(WeightLaw):
    """Exponentially tilted positive stable law; matches the power
    generator with gamma < 0.  Strictly positive support."""

    gamma: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.gamma < 0):
            raise ValueError("gamma must be < 0")
        if not (self.scale > 0):
            raise ValueError("scale must be > 0")

    @property
    def alpha(self) -> float:
        return -self.gamma / (1.0 - self.gamma)

    @property
    def stable_d(self) -> float:
        g, c = self.gamma, self.scale
        return -(c ** (1.0 / (1.0 - g))) * (1.0 - g) ** (-g / (1.0 - g)) / g

    @property
    def tilt_rate(self) -> float:
        return self.scale / (1.0 - self.gamma)

    def mgf_dom(self) -> Tuple[float, float]:
        return (-INF, self.scale / (1.0 - self.gamma))

    def log_mgf(self, z):
        return _log_mgf_power(self.scale, self.gamma, z)

    def sample_block_sum(self, nk, rng, size):
        return stable.sample_tilted_positive_stable(
            self.alpha, nk * self.stable_d, self.tilt_rate, rng, size
        )

    def sample_tilted_block(self, tau, nk, rng, size):
        self.check_tau(tau)
        return stable.sample_tilted_positive_stable(
            self.alpha, nk * self.stable_d, self.tilt_rate - tau, rng, size
        )


@dataclass(frozen=True)
class CompoundPoissonGamma(WeightLaw):
    """Poisson(theta) many Gamma(shape, rate) summands; matches the power
    generator with gamma in ]0,1[.  Atom at zero, otherwise positive."""

    gamma: float
    scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in ]0,1[")
        if not (self.scale > 0):
            raise ValueError("scale must be > 0")

    @property
    def theta(self) -> float:
        return self.scale / self.gamma

    @property
    def rate(self) -> float:
        return self.scale / (1.0 - self.gamma)

    @property
    def shape(self) -> float:
        return self.gamma / (1.0 - self.gamma)

    def mgf_dom(self) -> Tuple[float, float]:
        return (-INF, self.rate)

    def log_mgf(self, z):
        return _log_mgf_power(self.scale, self.gamma, z)

    def _sample(self, theta, rate, rng, size):
        n = rng.poisson(theta, size=size)
        out = np.zeros(size)
        pos = n > 0
        if np.any(pos):
            out[pos] = rng.gamma(shape=self.shape * n[pos], scale=1.0 / rate)
        return out

    def sample_block_sum(self, nk, rng, size):
        return self._sample(nk * self.theta, self.rate, rng, size)

    def sample_tilted_block(self, tau, nk, rng, size):
        self.check_tau(tau)
        g, c = self.gamma, self.scale
        theta_t = c / g * (1.0 + (g - 1.0) * tau / c) ** (g / (g - 1.0))
        return self._sample(nk * theta_t, self.rate - tau, rng, size)


@dataclass(frozen=True)
class DistortedStable(WeightLaw):
    """Exponentially weighted spectrally negative stable law (index in
    ]1,2[); matches the power generator with gamma > 2.  Support is all
    of R: mass on negatives is positive."""

    gamma: float
    scale: float = 1.0
    rejection_floor: float = 1e-3

    def __post_init__(self):
        if not (self.gamma > 2):
            raise ValueError("gamma must be > 2")
        if not (self.scale > 0):
            raise ValueError("scale must be > 0")

    @property
    def alpha(self) -> float:
        return self.gamma / (self.gamma - 1.0)

    @property
    def stable_d(self) -> float:
        g, c = self.gamma, self.scale
        return c ** (1.0 / (1.0 - g)) * (g - 1.0) ** (g / (g - 1.0)) / g

    @property
    def weight_rate(self) -> float:
        return self.scale / (self.gamma - 1.0)

    def mgf_dom(self) -> Tuple[float, float]:
        return (-self.scale / (self.gamma - 1.0), INF)

    def log_mgf(self, z):
        return _log_mgf_power(self.scale, self.gamma, z)

    def _inverter(self, tau: float, nk: int) -> stable.LatticeFreeInverter:
        return _distorted_inverter(
            round(self.gamma, 12), round(self.scale, 12), round(tau, 12), nk
        )

    def sample_block_sum(self, nk, rng, size):
        if nk == 1:
            _, acc = stable.weighted_stable_acceptance(
                self.alpha, self.stable_d, self.weight_rate
            )
            if acc >= self.rejection_floor:
                return stable.sample_weighted_negative_stable(
                    self.alpha, self.stable_d, self.weight_rate, rng, size
                )
        return self._inverter(0.0, nk).sample(rng, size)

    def sample_tilted_block(self, tau, nk, rng, size):
        self.check_tau(tau)
        return self._inverter(tau, nk).sample(rng, size)


@lru_cache(maxsize=128)
def _distorted_inverter(gamma: float, scale: float, tau: float, nk: int):
    law = DistortedStable(gamma, scale)
    lo, hi = law.mgf_dom()

    def lam_total(z: float) -> float:
        val = float(law.log_mgf(z + tau)) - float(law.log_mgf(tau))
        return nk * val

    mean = nk * law.log_mgf_deriv(tau)
    h = 1e-5 * max(1.0, abs(tau))
    var = nk * (law.log_mgf_deriv(tau + h) - law.log_mgf_deriv(tau - h)) / (2 * h)
    sd = math.sqrt(max(var, 1e-12))
    x_lo, x_hi = stable.chernoff_quantile(
        lam_total, lo - tau, INF, mean, sd
    )
    span = x_hi - x_lo
    x_lo -= 0.05 * span
    x_hi += 0.05 * span

    g = gamma
    a = g / (g - 1.0)

    def log_cf(u: np.ndarray) -> np.ndarray:
        zc = tau + 1j * u
        base = 1.0 + (g - 1.0) * zc / scale
        lam = scale / g * (base**a - 1.0)
        lam0 = float(law.log_mgf(tau))
        return nk * (lam - lam0)

    return stable.LatticeFreeInverter.build(log_cf, x_lo, x_hi)


@dataclass(frozen=True)
class Gaussian(WeightLaw):
    """Normal with mean 1 and variance 1/scale; matches gamma = 2."""

    scale: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0):
            raise ValueError("scale must be > 0")

    def mgf_dom(self) -> Tuple[float, float]:
        return (-INF, INF)

    def log_mgf(self, z):
        z = np.asarray(z, dtype=float)
        return z**2 / (2.0 * self.scale) + z

    def sample_block_sum(self, nk, rng, size):
        return rng.normal(nk, math.sqrt(nk / self.scale), size=size)

    def sample_tilted_block(self, tau, nk, rng, size):
        mean = nk * (1.0 + tau / self.scale)
        return rng.normal(mean, math.sqrt(nk / self.scale), size=size)


@dataclass(frozen=True)
class GammaLaw(WeightLaw):
    """Gamma with rate = shape = scale (mean 1); matches gamma = 0.
    Strictly positive support."""

    scale: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0):
            raise ValueError("scale must be > 0")

    def mgf_dom(self) -> Tuple[float, float]:
        return (-INF, self.scale)

    def log_mgf(self, z):
        z = np.asarray(z, dtype=float)
        out = np.full(z.shape, INF)
        ok = z < self.scale
        out[ok] = -self.scale * np.log1p(-z[ok] / self.scale)
        return out

    def sample_block_sum(self, nk, rng, size):
        return rng.gamma(shape=nk * self.scale, scale=1.0 / self.scale, size=size)

    def sample_tilted_block(self, tau, nk, rng, size):
        self.check_tau(tau)
        return rng.gamma(shape=nk * self.scale, scale=1.0 / (self.scale - tau), size=size)


@dataclass(frozen=True)
class ScaledPoisson(WeightLaw):
    """Poisson(scale)/scale on the lattice {j/scale}; matches gamma = 1."""

    scale: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0):
            raise ValueError("scale must be > 0")

    def mgf_dom(self) -> Tuple[float, float]:
        return (-INF, INF)

    def log_mgf(self, z):
        z = np.asarray(z, dtype=float)
        return self.scale * np.expm1(z / self.scale)

    def sample_block_sum(self, nk, rng, size):
        return rng.poisson(nk * self.scale, size=size) / self.scale

    def sample_tilted_block(self, tau, nk, rng, size):
        lam = nk * self.scale * math.exp(tau / self.scale)
        return rng.poisson(lam, size=size) / self.scale

    is_discrete = True

    def block_support(self, nk, tail_log_mass):
        lam = nk * self.scale
        jmax = _poisson_tail_cut(lam, tail_log_mass)
        j = np.arange(jmax + 1)
        return j / self.scale, _poisson_pmf(lam, j)


@dataclass(frozen=True)
class ShiftedPoisson(WeightLaw):
    """Poisson(scale*e^anchor)/scale + (1 - e^anchor): admits negative
    values when anchor > 0; matches the anchored KL generator."""

    anchor: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0):
            raise ValueError("scale must be > 0")

    def mgf_dom(self) -> Tuple[float, float]:
        return (-INF, INF)

    def log_mgf(self, z):
        z = np.asarray(z, dtype=float)
        ec = math.exp(self.anchor)
        return self.scale * ec * np.expm1(z / self.scale) + z * (1.0 - ec)

    def sample_block_sum(self, nk, rng, size):
        ec = math.exp(self.anchor)
        return rng.poisson(nk * self.scale * ec, size=size) / self.scale + nk * (1.0 - ec)

    def sample_tilted_block(self, tau, nk, rng, size):
        ec = math.exp(self.anchor)
        lam = nk * self.scale * ec * math.exp(tau / self.scale)
        return rng.poisson(lam, size=size) / self.scale + nk * (1.0 - ec)

    is_discrete = True

    def block_support(self, nk, tail_log_mass):
        ec = math.exp(self.anchor)
        lam = nk * self.scale * ec
        jmax = _poisson_tail_cut(lam, tail_log_mass)
        j = np.arange(jmax + 1)
        return j / self.scale + nk * (1.0 - ec), _poisson_pmf(lam, j)


@dataclass(frozen=True)
class ScaledNegBinomial(WeightLaw):
    """NegBinomial(scale/alpha, 1/(1+alpha)) / scale; matches the
    generalized-KL generator with alpha > 0."""

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValueError("alpha must be > 0")
        if not (self.scale > 0):
            raise ValueError("scale must be > 0")

    def mgf_dom(self) -> Tuple[float, float]:
        return (-INF, self.scale * math.log1p(1.0 / self.alpha))

    def log_mgf(self, z):
        z = np.asarray(z, dtype=float)
        al, c = self.alpha, self.scale
        arg = (1.0 + al) - al * np.exp(z / c)
        out = np.full(z.shape, INF)
        ok = arg > 0
        out[ok] = -c / al * np.log(arg[ok])
        return out

    def _p_success(self, tau: float) -> float:
        return 1.0 - self.alpha / (1.0 + self.alpha) * math.exp(tau / self.scale)

    def sample_block_sum(self, nk, rng, size):
        r = nk * self.scale / self.alpha
        return rng.negative_binomial(r, 1.0 / (1.0 + self.alpha), size=size) / self.scale

    def sample_tilted_block(self, tau, nk, rng, size):
        self.check_tau(tau)
        r = nk * self.scale / self.alpha
        return rng.negative_binomial(r, self._p_success(tau), size=size) / self.scale

    is_discrete = True

    def block_support(self, nk, tail_log_mass):
        from scipy import stats

        r = nk * self.scale / self.alpha
        p = 1.0 / (1.0 + self.alpha)
        jmax = int(stats.nbinom.isf(math.exp(tail_log_mass) / 2.0, r, p)) + 2
        j = np.arange(jmax + 1)
        return j / self.scale, stats.nbinom.pmf(j, r, p)


@dataclass(frozen=True)
class ScaledBinomial(WeightLaw):
    """Binomial(m, scale/m) / scale with integer m > scale; matches the
    generalized-KL generator with alpha = -scale/m in ]-1,0[."""

    m: int
    scale: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.m, int) and self.m >= 1):
            raise ValueError("m must be a positive integer")
        if not (0 < self.scale < self.m):
            raise ValueError("need 0 < scale < m")

    def mgf_dom(self) -> Tuple[float, float]:
        return (-INF, INF)

    def log_mgf(self, z):
        z = np.asarray(z, dtype=float)
        c, m = self.scale, float(self.m)
        return m * np.log((1.0 - c / m) + (c / m) * np.exp(z / c))

    def _p_tilted(self, tau: float) -> float:
        c, m = self.scale, float(self.m)
        e = c * math.exp(tau / c)
        return e / (m - c + e)

    def sample_block_sum(self, nk, rng, size):
        return rng.binomial(self.m * nk, self.scale / self.m, size=size) / self.scale

    def sample_tilted_block(self, tau, nk, rng, size):
        return rng.binomial(self.m * nk, self._p_tilted(tau), size=size) / self.scale

    is_discrete = True

    def block_support(self, nk, tail_log_mass):
        from scipy import stats

        n = self.m * nk
        j = np.arange(n + 1)
        return j / self.scale, stats.binom.pmf(j, n, self.scale / self.m)


@dataclass(frozen=True)
class ModTiltedStable(WeightLaw):
    """Affinely modified tilted stable: W/beta - (1/beta - 1) with W the
    tilted-stable law of index parameter gamma = -1 and scale/beta^2;
    matches the blended-weight chi-square generator."""

    beta: float
    scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise ValueError("beta must lie in ]0,1]")
        if not (self.scale > 0):
            raise ValueError("scale must be > 0")

    @property
    def base(self) -> TiltedStable:
        return TiltedStable(gamma=-1.0, scale=self.scale / self.beta**2)

    def mgf_dom(self) -> Tuple[float, float]:
        return (-INF, self.scale / (2.0 * self.beta))

    def log_mgf(self, z):
        z = np.asarray(z, dtype=float)
        b, c = self.beta, self.scale
        out = np.full(z.shape, INF)
        ok = z < c / (2.0 * b)
        out[ok] = -(1.0 / b - 1.0) * z[ok] + c / b**2 * (
            1.0 - np.sqrt(1.0 - 2.0 * b * z[ok] / c)
        )
        return out

    def sample_block_sum(self, nk, rng, size):
        w = self.base.sample_block_sum(nk, rng, size)
        return w / self.beta - nk * (1.0 / self.beta - 1.0)

    def sample_tilted_block(self, tau, nk, rng, size):
        self.check_tau(tau)
        w = self.base.sample_tilted_block(tau / self.beta, nk, rng, size)
        return w / self.beta - nk * (1.0 / self.beta - 1.0)


@dataclass(frozen=True)
class TwoPointLaw(WeightLaw):
    """Law on {z1, z2} with P[W = z1] = (z2-1)/(z2-z1) (mean 1); with
    ``mult`` > 1 the law of the average of ``mult`` such draws, matching
    ``mult * phi``."""

    z1: float
    z2: float
    mult: int = 1

    def __post_init__(self):
        if not (self.z1 < 1.0 < self.z2):
            raise ValueError("need z1 < 1 < z2")
        if not (isinstance(self.mult, int) and self.mult >= 1):
            raise ValueError("mult must be a positive integer")

    @property
    def p(self) -> float:
        return (self.z2 - 1.0) / (self.z2 - self.z1)

    def mgf_dom(self) -> Tuple[float, float]:
        return (-INF, INF)

    def log_mgf(self, z):
        z = np.asarray(z, dtype=float) / self.mult
        a = np.log(self.p) + self.z1 * z
        b = np.log1p(-self.p) + self.z2 * z
        return self.mult * np.logaddexp(a, b)

    def _walk(self, steps: int, prob_z2: float, rng, size):
        ell = rng.binomial(steps, prob_z2, size=size)
        return (self.z1 * (steps - ell) + self.z2 * ell) / self.mult

    def sample_block_sum(self, nk, rng, size):
        return self._walk(nk * self.mult, 1.0 - self.p, rng, size)

    def sample_tilted_block(self, tau, nk, rng, size):
        t = tau / self.mult
        log_w1 = math.log(self.p) + self.z1 * t
        log_w2 = math.log1p(-self.p) + self.z2 * t
        prob_z2 = 1.0 / (1.0 + math.exp(log_w1 - log_w2))
        return self._walk(nk * self.mult, prob_z2, rng, size)

    is_discrete = True

    def block_support(self, nk, tail_log_mass):
        from scipy import stats

        steps = nk * self.mult
        ell = np.arange(steps + 1)
        vals = (self.z1 * (steps - ell) + self.z2 * ell) / self.mult
        return vals, stats.binom.pmf(ell, steps, 1.0 - self.p)


@dataclass(frozen=True)
class GenAsymLaplaceLaw(WeightLaw):
    """Shifted difference of two Gammas (generalized asymmetric Laplace);
    mass on negatives is positive.  Matches the bounded-derivative
    generator family."""

    alpha: float
    beta1: float
    beta2: float
    scale: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta1", "beta2", "scale"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be > 0")

    @property
    def theta(self) -> float:
        return 1.0 + self.alpha * (1.0 / self.beta2 - 1.0 / self.beta1)

    def mgf_dom(self) -> Tuple[float, float]:
        return (-self.scale * self.beta2, self.scale * self.beta1)

    def log_mgf(self, z):
        z = np.asarray(z, dtype=float)
        al, b1, b2, c = self.alpha, self.beta1, self.beta2, self.scale
        arg = 1.0 + z / c * (1.0 / b2 - 1.0 / b1) - z**2 / (c**2 * b1 * b2)
        out = np.full(z.shape, INF)
        ok = (z > -c * b2) & (z < c * b1) & (arg > 0)
        out[ok] = self.theta * z[ok] - c * al * np.log(arg[ok])
        return out

    def sample_block_sum(self, nk, rng, size):
        return self.sample_tilted_block(0.0, nk, rng, size)

    def sample_tilted_block(self, tau, nk, rng, size):
        self.check_tau(tau)
        c, al = self.scale, self.alpha
        shape = c * al * nk
        g1 = rng.gamma(shape=shape, scale=1.0 / (c * self.beta1 - tau), size=size)
        g2 = rng.gamma(shape=shape, scale=1.0 / (c * self.beta2 + tau), size=size)
        return self.theta * nk + g1 - g2


# block-sum and tilted views --------------------------------------------------


@dataclass(frozen=True)
class BlockSumLaw:
    """Law of the sum of ``count`` i.i.d. draws of ``base``."""

    base: WeightLaw
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")

    def sample(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        return self.base.sample_block_sum(self.count, rng, size)


@dataclass(frozen=True)
class TiltedLaw:
    """Exponentially tilted block-sum law dU propto exp(tau * v) dzeta."""

    base: WeightLaw
    tau: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        self.base.check_tau(self.tau)

    def sample(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        return self.base.sample_tilted_block(self.tau, self.count, rng, size)


def sample(law: WeightLaw, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """One (or ``size``) exact draw(s) of W under the law."""
    return law.sample(rng, size)


def sample_block_sum(law: WeightLaw, nk: int, rng: np.random.Generator, size: int = 1):
    """Draws from the nk-fold convolution, using the closed form."""
    if nk < 1:
        raise ValueError("nk must be >= 1")
    return law.sample_block_sum(nk, rng, size)


def tilt(law: WeightLaw, tau: float, nk: int) -> TiltedLaw:
    return TiltedLaw(base=law, tau=tau, count=nk)


def sample_tilted(tilted: TiltedLaw, rng: np.random.Generator, size: int = 1):
    return tilted.sample(rng, size)


def log_mgf(law: WeightLaw, z) -> float | np.ndarray:
    """Cumulant function Lambda(z); +inf outside the domain."""
    out = law.log_mgf(np.atleast_1d(np.asarray(z, dtype=float)))
    return float(out[0]) if np.ndim(z) == 0 else out


def log_isf_block(law: WeightLaw, tau: float, nk: int, x) -> np.ndarray:
    """log of the importance-sampling factor for block k:
    nk * Lambda(tau) - x * tau."""
    lam = float(log_mgf(law, tau))
    return nk * lam - np.asarray(x, dtype=float) * tau


def isf_block(law: WeightLaw, tau: float, nk: int, x):
    out = np.exp(log_isf_block(law, tau, nk, x))
    return float(out) if np.ndim(x) == 0 else out


# generator -> law dispatch ----------------------------------------------------


def law_for_generator(gen: Generator, extra_scale: float = 1.0) -> WeightLaw:
    """Weight law whose cumulant function is the conjugate of
    ``extra_scale * phi_gen``; raises for non-simulable combinations."""
    if extra_scale <= 0:
        raise ValueError("extra_scale must be > 0")
    if isinstance(gen, PowerGamma):
        c = gen.scale * extra_scale
        g = gen.gamma
        if g < 0:
            return TiltedStable(g, c)
        if g == 0:
            return GammaLaw(c)
        if 0 < g < 1:
            return CompoundPoissonGamma(g, c)
        if g == 1:
            return ScaledPoisson(c)
        if g == 2:
            return Gaussian(c)
        return DistortedStable(g, c)
    if isinstance(gen, GeneralizedKL):
        c = gen.scale * extra_scale
        if gen.alpha > 0:
            return ScaledNegBinomial(gen.alpha, c)
        m_real = -c / gen.alpha
        m = round(m_real)
        if abs(m_real - m) > 1e-9 or m <= c:
            raise ValueError(
                "generalized-KL with negative alpha is simulable only when "
                "-scale*M/alpha is an integer exceeding scale*M "
                f"(got {m_real})"
            )
        return ScaledBinomial(int(m), c)
    if isinstance(gen, AnchoredKL):
        return ShiftedPoisson(gen.anchor, gen.scale * extra_scale)
    if isinstance(gen, BlendedWeightChiSq):
        return ModTiltedStable(gen.beta, gen.scale * extra_scale)
    if isinstance(gen, TwoPoint):
        mult = round(extra_scale)
        if abs(extra_scale - mult) > 1e-9 or mult < 1:
            raise ValueError(
                "two-point generators are simulable only for integer total "
                f"reference mass (got {extra_scale}); normalize P first"
            )
        return TwoPointLaw(gen.z1, gen.z2, mult=int(mult))
    if isinstance(gen, GenAsymLaplace):
        return GenAsymLaplaceLaw(
            gen.alpha, gen.beta1, gen.beta2, gen.scale * extra_scale
        )
    if isinstance(gen, CustomGenerator):
        raise ValueError(
            "custom generators need a user-provided weight law; pass one "
            "explicitly to the estimator"
        )
    raise TypeError(f"no weight law known for {type(gen).__name__}")


# pmf helpers (exact enumeration) ----------------------------------------------


def _poisson_pmf(lam: float, j: np.ndarray) -> np.ndarray:
    from scipy import stats

    return stats.poisson.pmf(j, lam)


def _poisson_tail_cut(lam: float, tail_log_mass: float) -> int:
    from scipy import stats

    return int(stats.poisson.isf(math.exp(tail_log_mass) / 2.0, lam)) + 2
