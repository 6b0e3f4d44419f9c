"""Tests for model vectors, the model space, and the evaluation cache."""

from __future__ import annotations

import pytest

from modejump.errors import InvalidArgumentError, ResourceLimitError
from modejump.models import (
    ModelCache,
    ModelRecord,
    ModelVector,
    enumerate_all,
    hamming,
    swap,
)


class TestModelVector:
    def test_string_roundtrip(self):
        for s in ("0", "1", "10110", "000000", "111111", "1010110111"):
            assert ModelVector.from_string(s).to_string() == s

    def test_index_one_is_leftmost(self):
        g = ModelVector.from_string("10000")
        assert g.get(1) == 1
        assert g.get(5) == 0
        assert g.bits == 1  # little-endian integer encoding

    def test_from_indices(self):
        g = ModelVector.from_indices(5, [1, 3])
        assert g.to_string() == "10100"
        assert g.indices() == (1, 3)
        assert g.size == 2

    def test_zeros_ones(self):
        assert ModelVector.zeros(4).to_string() == "0000"
        assert ModelVector.ones(4).to_string() == "1111"

    def test_value_equality_and_hash(self):
        a = ModelVector.from_string("0101")
        b = ModelVector.from_indices(4, [2, 4])
        assert a == b
        assert hash(a) == hash(b)
        assert a != ModelVector.from_string("01010")
        assert len({a, b}) == 1

    def test_immutable(self):
        g = ModelVector.zeros(3)
        with pytest.raises(AttributeError):
            g.bits = 5

    def test_invalid_inputs(self):
        with pytest.raises(InvalidArgumentError):
            ModelVector(0, 0)
        with pytest.raises(InvalidArgumentError):
            ModelVector(8, 3)  # bit outside length
        with pytest.raises(InvalidArgumentError):
            ModelVector.from_string("01x1")
        with pytest.raises(InvalidArgumentError):
            ModelVector.from_string("")
        with pytest.raises(InvalidArgumentError):
            ModelVector.from_indices(3, [4])
        with pytest.raises(InvalidArgumentError):
            ModelVector.zeros(5).get(6)

    def test_len(self):
        assert len(ModelVector.zeros(7)) == 7


class TestSwapAndHamming:
    def test_swap_flips_exactly(self):
        g = ModelVector.from_string("10110")
        s = swap(g, (1, 2, 5))
        assert s.to_string() == "01111"
        # Swapping the same set again returns to the original state.
        assert swap(s, (1, 2, 5)) == g

    def test_swap_empty(self):
        g = ModelVector.from_string("101")
        assert swap(g, ()) == g

    def test_swap_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            swap(ModelVector.zeros(3), (0,))

    def test_hamming(self):
        a = ModelVector.from_string("10110")
        b = ModelVector.from_string("01110")
        assert hamming(a, b) == 2
        assert hamming(a, a) == 0

    def test_hamming_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            hamming(ModelVector.zeros(3), ModelVector.zeros(4))

    def test_hamming_equals_swap_size(self):
        g = ModelVector.from_string("0110010")
        for idx in [(1,), (2, 5), (1, 3, 7)]:
            assert hamming(g, swap(g, idx)) == len(idx)


class TestEnumerateAll:
    def test_counts_and_uniqueness(self):
        models = list(enumerate_all(5))
        assert len(models) == 32
        assert len(set(models)) == 32
        assert models[0] == ModelVector.zeros(5)
        assert models[-1] == ModelVector.ones(5)

    def test_limit(self):
        with pytest.raises(ResourceLimitError):
            list(enumerate_all(26))


class TestModelCache:
    def test_computes_once(self):
        cache = ModelCache()
        calls = []

        def scorer(g):
            calls.append(g)
            return 1.5, -0.5

        g = ModelVector.from_string("101")
        r1 = cache.get_or_compute(g, scorer)
        r2 = cache.get_or_compute(g, scorer)
        assert r1 is r2
        assert len(calls) == 1
        assert cache.compute_count == 1
        assert r1.visit_count == 2
        assert r1.log_target == pytest.approx(1.0)

    def test_distinct_models_distinct_records(self):
        cache = ModelCache()
        a = cache.get_or_compute(ModelVector.from_string("10"), lambda g: (1.0, 0.0))
        b = cache.get_or_compute(ModelVector.from_string("01"), lambda g: (2.0, 0.0))
        assert a is not b
        assert len(cache) == 2

    def test_scorer_failure_inserts_nothing(self):
        cache = ModelCache()

        def bad(g):
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError):
            cache.get_or_compute(ModelVector.zeros(2), bad)
        assert len(cache) == 0
        assert cache.compute_count == 0

    def test_contains_and_get(self):
        cache = ModelCache()
        g = ModelVector.zeros(3)
        assert g not in cache
        assert cache.get(g) is None
        cache.get_or_compute(g, lambda _: (0.0, 0.0))
        assert g in cache
        assert cache.get(g).visit_count == 1


class TestModelRecord:
    def test_log_target(self):
        rec = ModelRecord(log_mlik=-3.0, log_prior=-1.0)
        assert rec.log_target == -4.0
