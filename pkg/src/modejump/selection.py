"""scikit-learn style feature selector backed by the mode jumping chain.

Optional facade: importing this module requires scikit-learn.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .configs import benchmark_config
from .estimators import rm_estimates
from .likelihood import Dataset, PriorSpec
from .sampler import run


class ModeJumpingSelector(SelectorMixin, BaseEstimator):
    """Select covariates whose posterior inclusion probability is high.

    Fits a Bayesian variable-selection posterior over all subsets of the
    columns of X with the mode jumping chain, then keeps the columns with
    renormalized inclusion probability at or above `threshold`.
    """

    def __init__(
        self,
        family: str = "gaussian",
        criterion: str = "gprior-exact",
        g: Optional[float] = None,
        q: float = 0.5,
        budget_proposals: int = 5000,
        threshold: float = 0.5,
        seed: int = 0,
    ):
        self.family = family
        self.criterion = criterion
        self.g = g
        self.q = q
        self.budget_proposals = budget_proposals
        self.threshold = threshold
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        data = Dataset(y=y, X=X, family=self.family)
        g = self.g if self.g is not None else float(data.T)
        prior = PriorSpec(
            criterion=self.criterion, g=g, model_prior=("binomial", self.q)
        )
        config = replace(
            benchmark_config(
                p=data.p,
                budget_proposals=self.budget_proposals,
                seed=self.seed,
            )
        )
        result = run(config, data, prior)
        est = rm_estimates(result.visited)
        self.inclusion_probabilities_ = np.asarray(est.inclusion)
        self.n_features_in_ = data.p
        self.support_ = self.inclusion_probabilities_ >= self.threshold
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_
