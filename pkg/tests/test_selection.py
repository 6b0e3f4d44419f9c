"""Tests for the scikit-learn selector facade."""

from __future__ import annotations

import numpy as np
import pytest

sklearn = pytest.importorskip("sklearn")

from sklearn.base import clone
from sklearn.utils.validation import check_is_fitted

from modejump.datagen import generate_small_fixture
from modejump.selection import ModeJumpingSelector


def _data():
    data = generate_small_fixture(
        p=8, T=150, seed=4, active=[2, 5], beta=[6.0, -4.0]
    )
    return data.X, data.y


class TestSelector:
    def test_get_set_params_and_clone(self):
        sel = ModeJumpingSelector(threshold=0.7, seed=3)
        params = sel.get_params()
        assert params["threshold"] == 0.7
        cloned = clone(sel)
        assert cloned.get_params() == params

    def test_fit_recovers_active_columns(self):
        X, y = _data()
        sel = ModeJumpingSelector(budget_proposals=2000, seed=1).fit(X, y)
        check_is_fitted(sel, "support_")
        support = np.flatnonzero(sel.support_)
        assert set(support) == {1, 4}  # zero-based columns 2 and 5
        assert sel.inclusion_probabilities_.shape == (8,)
        assert sel.inclusion_probabilities_[1] > 0.9
        assert sel.inclusion_probabilities_[4] > 0.9

    def test_transform_selects_columns(self):
        X, y = _data()
        sel = ModeJumpingSelector(budget_proposals=2000, seed=1).fit(X, y)
        Xt = sel.transform(X)
        assert Xt.shape == (150, int(sel.support_.sum()))

    def test_deterministic_in_seed(self):
        X, y = _data()
        a = ModeJumpingSelector(budget_proposals=1000, seed=7).fit(X, y)
        b = ModeJumpingSelector(budget_proposals=1000, seed=7).fit(X, y)
        assert np.array_equal(a.inclusion_probabilities_, b.inclusion_probabilities_)

    def test_unfitted_raises(self):
        X, _ = _data()
        with pytest.raises(Exception):
            ModeJumpingSelector().transform(X)
