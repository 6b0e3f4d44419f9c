"""Log marginal likelihoods, GLM selection criteria, and model priors.

All quantities are computed and combined in log space (nats).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, InvalidArgumentError, SingularDesignError
from .models import ModelVector

FAMILIES = ("gaussian", "binomial-logit", "poisson-log")

_PROB_CLAMP = (1e-10, 1.0 - 1e-10)
_IRLS_MAX_ITER = 50
_IRLS_RTOL = 1e-9


@dataclass(frozen=True)
class Dataset:
    """Response, design matrix, family, and optional offset."""

    y: np.ndarray
    X: np.ndarray
    family: str = "gaussian"
    offset: Optional[np.ndarray] = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        if X.ndim != 2:
            raise InvalidArgumentError("X must be a 2-d matrix")
        T, p = X.shape
        if y.shape != (T,):
            raise InvalidArgumentError("y length must match rows of X")
        if T < 2 or p < 1:
            raise InvalidArgumentError("need T >= 2 and p >= 1")
        if not (np.isfinite(y).all() and np.isfinite(X).all()):
            raise InvalidArgumentError("non-finite entries in data")
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"unknown family {self.family!r}")
        if self.family == "binomial-logit" and not np.isin(y, (0.0, 1.0)).all():
            raise InvalidArgumentError("binomial responses must be in {0,1}")
        if self.family == "poisson-log":
            if (y < 0).any() or not np.array_equal(y, np.round(y)):
                raise InvalidArgumentError(
                    "poisson responses must be nonnegative integers"
                )
        if self.offset is not None:
            off = np.asarray(self.offset, dtype=float)
            if off.shape != (T,) or not np.isfinite(off).all():
                raise InvalidArgumentError("offset must be a finite length-T vector")
            object.__setattr__(self, "offset", off)

    @property
    def T(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


CRITERIA = ("gprior-exact", "aic-approx", "bic-approx")


@dataclass(frozen=True)
class PriorSpec:
    """Marginal-likelihood criterion plus model prior.

    model_prior is ("binomial", q) or ("beta-binomial", alpha, beta).
    """

    criterion: str = "gprior-exact"
    g: float = 100.0
    model_prior: tuple = ("binomial", 0.5)

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise InvalidArgumentError(f"unknown criterion {self.criterion!r}")
        if not self.g > 0:
            raise InvalidArgumentError("g must be positive")
        mp = tuple(self.model_prior)
        object.__setattr__(self, "model_prior", mp)
        if mp[0] == "binomial":
            if len(mp) != 2 or not 0 < mp[1] < 1:
                raise InvalidArgumentError("binomial prior needs 0 < q < 1")
        elif mp[0] == "beta-binomial":
            if len(mp) != 3 or mp[1] <= 0 or mp[2] <= 0:
                raise InvalidArgumentError("beta-binomial prior needs alpha, beta > 0")
        else:
            raise InvalidArgumentError(f"unknown model prior {mp[0]!r}")


def _selected(data: Dataset, gamma: ModelVector) -> np.ndarray:
    if gamma.p != data.p:
        raise InvalidArgumentError("gamma length does not match dataset p")
    cols = [j - 1 for j in gamma.indices()]
    return data.X[:, cols]


def r_squared(data: Dataset, gamma: ModelVector) -> float:
    """Coefficient of determination of OLS on intercept + selected columns."""
    if data.family != "gaussian":
        raise InvalidArgumentError("r_squared requires the gaussian family")
    k = gamma.size
    if k == 0:
        return 0.0
    Xs = _selected(data, gamma)
    yc = data.y - data.y.mean()
    Xc = Xs - Xs.mean(axis=0)
    G = Xc.T @ Xc
    c = Xc.T @ yc
    tss = float(yc @ yc)
    if tss <= 0.0:
        return 0.0
    try:
        cf = scipy.linalg.cho_factor(G, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as e:
        raise SingularDesignError(str(e)) from e
    diag = np.diag(cf[0])
    if not np.all(diag > math.sqrt(max(np.diag(G).max(), 1.0)) * 1e-12):
        raise SingularDesignError("near-singular selected design")
    b = scipy.linalg.cho_solve(cf, c, check_finite=False)
    r2 = float(c @ b) / tss
    if not math.isfinite(r2):
        raise SingularDesignError("non-finite R^2")
    return min(max(r2, 0.0), 1.0)


def log_mlik_gprior(data: Dataset, gamma: ModelVector, g: float) -> float:
    """Exact Gaussian log marginal likelihood under the g-prior.

    The null model scores exactly 0 (marginal likelihood 1).
    """
    k = gamma.size
    if k == 0:
        return 0.0
    T = data.T
    r2 = r_squared(data, gamma)
    return 0.5 * (T - k - 1) * math.log1p(g) - 0.5 * (T - 1) * math.log1p(
        g * (1.0 - r2)
    )


def _deviance(family: str, y: np.ndarray, mu: np.ndarray) -> float:
    if family == "binomial-logit":
        mu = np.clip(mu, *_PROB_CLAMP)
        return float(-2.0 * np.sum(y * np.log(mu) + (1.0 - y) * np.log(1.0 - mu)))
    # poisson-log
    mu = np.maximum(mu, 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(y > 0, y * np.log(y / mu), 0.0)
    return float(2.0 * np.sum(term - (y - mu)))


def irls_deviance(data: Dataset, gamma: ModelVector) -> float:
    """Deviance of the maximum-likelihood GLM fit on intercept + selection.

    Iteratively reweighted least squares with step halving so the deviance
    decreases monotonically; convergence when the relative deviance change
    drops below 1e-9 within 50 iterations.
    """
    if data.family not in ("binomial-logit", "poisson-log"):
        raise InvalidArgumentError("irls_deviance requires a GLM family")
    y = data.y
    T = data.T
    Xs = _selected(data, gamma)
    D = np.column_stack([np.ones(T), Xs])
    off = data.offset if data.offset is not None else 0.0
    binom = data.family == "binomial-logit"

    beta = np.zeros(D.shape[1])
    ybar = float(np.mean(y))
    if binom:
        ybar = min(max(ybar, _PROB_CLAMP[0]), _PROB_CLAMP[1])
        beta[0] = math.log(ybar / (1.0 - ybar))
    else:
        beta[0] = math.log(max(ybar, 1e-10))

    def fitted(b):
        eta = D @ b + off
        if binom:
            return 1.0 / (1.0 + np.exp(-np.clip(eta, -700, 700)))
        return np.exp(np.clip(eta, -700, 700))

    mu = fitted(beta)
    dev = _deviance(data.family, y, mu)
    for _ in range(_IRLS_MAX_ITER):
        if binom:
            mu_c = np.clip(mu, *_PROB_CLAMP)
            w = mu_c * (1.0 - mu_c)
            eta = D @ beta + off
            z = eta - off + (y - mu_c) / w
        else:
            w = np.maximum(mu, 1e-10)
            eta = D @ beta + off
            z = eta - off + (y - mu) / w
        Dw = D * w[:, None]
        A = D.T @ Dw
        b_rhs = Dw.T @ z
        try:
            beta_new = scipy.linalg.solve(A, b_rhs, assume_a="pos")
        except scipy.linalg.LinAlgError as e:
            raise SingularDesignError(str(e)) from e
        step = beta_new - beta
        new_dev = _deviance(data.family, y, fitted(beta + step))
        # Step halving keeps the deviance from increasing.
        halves = 0
        while new_dev > dev + 1e-12 and halves < 30:
            step *= 0.5
            new_dev = _deviance(data.family, y, fitted(beta + step))
            halves += 1
        if new_dev > dev + 1e-12:
            break
        beta = beta + step
        mu = fitted(beta)
        assert new_dev <= dev + 1e-12
        if abs(dev - new_dev) <= _IRLS_RTOL * (abs(dev) + 1e-12):
            return new_dev
        dev = new_dev
    raise ConvergenceError("IRLS did not converge", last_deviance=dev)


def log_criterion_glm(data: Dataset, gamma: ModelVector, criterion: str) -> float:
    """AIC/BIC-style log score -(deviance + penalty * |gamma|) / 2."""
    dev = irls_deviance(data, gamma)
    k = gamma.size
    if criterion == "aic-approx":
        return -0.5 * (dev + 2.0 * k)
    if criterion == "bic-approx":
        return -0.5 * (dev + math.log(data.T) * k)
    raise InvalidArgumentError(f"unknown GLM criterion {criterion!r}")


def log_model_prior(gamma: ModelVector, prior: PriorSpec) -> float:
    """Log prior probability of a model under the configured model prior."""
    k = gamma.size
    p = gamma.p
    mp = prior.model_prior
    if mp[0] == "binomial":
        q = mp[1]
        return k * math.log(q) + (p - k) * math.log(1.0 - q)
    a, b = mp[1], mp[2]
    return (
        math.lgamma(a + k)
        + math.lgamma(b + p - k)
        - math.lgamma(a + b + p)
        - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
    )


def log_mlik(data: Dataset, gamma: ModelVector, prior: PriorSpec) -> float:
    """Log marginal likelihood or criterion score for one model."""
    if prior.criterion == "gprior-exact":
        return log_mlik_gprior(data, gamma, prior.g)
    return log_criterion_glm(data, gamma, prior.criterion)


def log_target(data: Dataset, gamma: ModelVector, prior: PriorSpec) -> float:
    """Unnormalized log posterior; -inf for singular or non-convergent fits."""
    try:
        ml = log_mlik(data, gamma, prior)
    except (SingularDesignError, ConvergenceError):
        return float("-inf")
    return ml + log_model_prior(gamma, prior)


@dataclass
class _GramCache:
    """Precomputed centered cross-products for fast g-prior scoring."""

    G: np.ndarray
    c: np.ndarray
    tss: float


def make_scorer(
    data: Dataset, prior: PriorSpec
) -> Callable[[ModelVector], Tuple[float, float]]:
    """Build a scorer gamma -> (log_mlik, log_prior).

    For the exact g-prior the centered Gram matrix is precomputed once so
    per-model evaluation only solves a |gamma| x |gamma| system.  Failed
    evaluations (singular design, non-convergence) score -inf.
    """
    if prior.criterion == "gprior-exact":
        if data.family != "gaussian":
            raise InvalidArgumentError("gprior-exact requires the gaussian family")
        Xc = data.X - data.X.mean(axis=0)
        yc = data.y - data.y.mean()
        gram = _GramCache(G=Xc.T @ Xc, c=Xc.T @ yc, tss=float(yc @ yc))
        T = data.T
        g = prior.g
        lg1 = math.log1p(g)

        def scorer(gamma: ModelVector) -> Tuple[float, float]:
            k = gamma.size
            if k == 0:
                return 0.0, log_model_prior(gamma, prior)
            idx = [j - 1 for j in gamma.indices()]
            Gs = gram.G[np.ix_(idx, idx)]
            cs = gram.c[idx]
            try:
                cf = scipy.linalg.cho_factor(Gs, lower=True, check_finite=False)
                diag = np.diag(cf[0])
                if not np.all(
                    diag > math.sqrt(max(np.diag(Gs).max(), 1.0)) * 1e-12
                ):
                    raise SingularDesignError("near-singular selected design")
                b = scipy.linalg.cho_solve(cf, cs, check_finite=False)
            except (scipy.linalg.LinAlgError, SingularDesignError):
                return float("-inf"), log_model_prior(gamma, prior)
            r2 = float(cs @ b) / gram.tss if gram.tss > 0 else 0.0
            r2 = min(max(r2, 0.0), 1.0)
            ml = 0.5 * (T - k - 1) * lg1 - 0.5 * (T - 1) * math.log1p(
                g * (1.0 - r2)
            )
            return ml, log_model_prior(gamma, prior)

        return scorer

    def glm_scorer(gamma: ModelVector) -> Tuple[float, float]:
        try:
            ml = log_criterion_glm(data, gamma, prior.criterion)
        except (SingularDesignError, ConvergenceError):
            ml = float("-inf")
        return ml, log_model_prior(gamma, prior)

    return glm_scorer
