"""Synthetic dataset generators with a cross-language deterministic RNG.

The random source is a splitmix64 sequence: starting from the 64-bit seed,
each output advances the state by the golden-gamma constant and applies the
standard two-round mix.  Uniforms take the top 53 bits; normal variates map
uniforms through Acklam's rational approximation of the inverse standard
normal CDF (relative error below 1.15e-9).  Any implementation of these two
published algorithms reproduces the streams bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidArgumentError
from .likelihood import Dataset

_MASK = (1 << 64) - 1


class CounterRng:
    """splitmix64 stream with uniform and inverse-CDF normal draws."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform in (0, 1): top 53 bits scaled, zero mapped up."""
        u = (self.next_u64() >> 11) * (2.0**-53)
        return u if u > 0.0 else 2.0**-53

    def normal(self) -> float:
        return _inv_normal_cdf(self.uniform())

    def bernoulli(self, prob: float) -> int:
        return 1 if self.uniform() < prob else 0


# Acklam's inverse normal CDF approximation coefficients.
_A = (
    -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
    1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00,
)
_B = (
    -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
    6.680131188771972e01, -1.328068155288572e01,
)
_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
    -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00,
)
_D = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
    3.754408661907416e00,
)
_P_LOW = 0.02425


def _inv_normal_cdf(p: float) -> float:
    """Acklam's rational approximation to the standard normal quantile."""
    if not 0.0 < p < 1.0:
        raise InvalidArgumentError("p must be in (0,1)")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (
            ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        ) / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(
            ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        ) / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (
        ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
    ) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    )


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of the Gaussian linear generator."""

    p: int
    T: int
    beta0: float
    beta: Tuple[float, ...]
    noise_sd: float = 1.0
    correlated_pair: Optional[Tuple[int, int, float]] = None  # (src, dst, corr)
    seed: int = 0

    def __post_init__(self):
        if len(self.beta) != self.p:
            raise InvalidArgumentError("beta length must equal p")
        if self.correlated_pair is not None:
            src, dst, corr = self.correlated_pair
            if not (1 <= src <= self.p and 1 <= dst <= self.p and src != dst):
                raise InvalidArgumentError("correlated pair indices out of range")
            if not abs(corr) < 1.0:
                raise InvalidArgumentError("|correlation| must be < 1")


EXAMPLE1_BETA = (
    -0.48, 8.72, -1.76, -1.87, 0.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0,
    0.0, 0.0,
)


def generate_gaussian(spec: GeneratorSpec) -> Dataset:
    """Gaussian linear data: centered normal covariates, y = b0 + Xb + eps."""
    rng = CounterRng(spec.seed)
    T, p = spec.T, spec.p
    X = np.empty((T, p))
    for j in range(p):
        for t in range(T):
            X[t, j] = rng.normal()
    if spec.correlated_pair is not None:
        src, dst, corr = spec.correlated_pair
        z = np.array([rng.normal() for _ in range(T)])
        X[:, dst - 1] = corr * X[:, src - 1] + math.sqrt(1.0 - corr * corr) * z
    X -= X.mean(axis=0)
    eps = np.array([rng.normal() for _ in range(T)])
    y = spec.beta0 + X @ np.asarray(spec.beta) + spec.noise_sd * eps
    return Dataset(y=y, X=X, family="gaussian")


def generate_example1(seed: int) -> Dataset:
    """T=100, p=15 Gaussian benchmark with one 0.99-correlated column pair."""
    spec = GeneratorSpec(
        p=15,
        T=100,
        beta0=2.0,
        beta=EXAMPLE1_BETA,
        noise_sd=1.0,
        correlated_pair=(2, 9, 0.99),
        seed=seed,
    )
    return generate_gaussian(spec)


def generate_small_fixture(
    p: int,
    T: int,
    structure: str = "gaussian",
    seed: int = 0,
    active: Optional[Sequence[int]] = None,
    beta: Optional[Sequence[float]] = None,
    beta0: float = 1.0,
    noise_sd: float = 1.0,
) -> Dataset:
    """Small deterministic fixtures for oracle tests.

    structure:
      gaussian - i.i.d. standard normal covariates, linear response
      binary   - Bernoulli(0.3) covariates with indices 1 and 2 correlated
                 through a shared latent threshold; linear response
      logistic - standard normal covariates, Bernoulli(logit) response
    """
    if p > 12:
        raise InvalidArgumentError("fixtures support p <= 12")
    if active is None:
        active = [1, min(5, p), min(8, p)]
    active = sorted(set(active))
    if any(not 1 <= j <= p for j in active):
        raise InvalidArgumentError("active indices out of range")
    b = np.zeros(p)
    if beta is None:
        defaults = [10.0, 1.43, 0.89, 1.2, -1.5]
        for i, j in enumerate(active):
            b[j - 1] = defaults[i % len(defaults)]
    else:
        if len(beta) != len(active):
            raise InvalidArgumentError("beta must match the active set length")
        for j, v in zip(active, beta):
            b[j - 1] = float(v)

    rng = CounterRng(seed)
    X = np.empty((T, p))
    if structure == "binary":
        for t in range(T):
            z = rng.normal()
            for j in range(p):
                if j < 2:
                    # Shared latent variable correlates the first two columns.
                    u = 0.7 * z + math.sqrt(1.0 - 0.49) * rng.normal()
                    X[t, j] = 1.0 if u < _inv_normal_cdf(0.3) else 0.0
                else:
                    X[t, j] = float(rng.bernoulli(0.3))
    elif structure in ("gaussian", "logistic"):
        for j in range(p):
            for t in range(T):
                X[t, j] = rng.normal()
    else:
        raise InvalidArgumentError(f"unknown structure {structure!r}")

    eta = beta0 + X @ b
    if structure == "logistic":
        y = np.array(
            [1.0 if rng.uniform() < 1.0 / (1.0 + math.exp(-e)) else 0.0 for e in eta]
        )
        return Dataset(y=y, X=X, family="binomial-logit")
    eps = np.array([rng.normal() for _ in range(T)])
    y = eta + noise_sd * eps
    return Dataset(y=y, X=X, family="gaussian")
