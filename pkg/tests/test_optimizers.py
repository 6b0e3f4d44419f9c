"""Tests for the local optimizers and their marginal transition densities.

Oracles: brute-force checks of local optimality, Monte-Carlo endpoint
frequencies against the exactly enumerated one-try chain law, and direct
normalization of that law over all end states.
"""

from __future__ import annotations

import math
import random
from collections import Counter

import pytest

from modejump.errors import InvalidArgumentError, UnsupportedVariantError
from modejump.models import ModelVector, enumerate_all
from modejump.optimizers import (
    OptimizerSpec,
    OptimizerTrace,
    optimize,
    optimize_log_density,
)
from modejump.proposals import KernelMixture, ProposalKernel

NEG_INF = float("-inf")


def _target_factory(p, seed=0):
    """A deterministic rugged target over all 2^p models."""
    rnd = random.Random(seed)
    scores = {g: rnd.gauss(0.0, 3.0) for g in enumerate_all(p)}
    return lambda g: scores[g], scores


def _flip_mixture(p):
    return KernelMixture.single(ProposalKernel(4, p, size=1))


def _spec(kind, p, **kw):
    return OptimizerSpec(kind=kind, neighborhood=_flip_mixture(p), **kw)


class TestValidation:
    def test_unknown_kind(self):
        with pytest.raises(InvalidArgumentError):
            _spec("tabu", 4)

    def test_sa_schedule_checks(self):
        with pytest.raises(InvalidArgumentError):
            _spec("sa", 4, sa_t0=1.0, sa_tf=2.0)
        with pytest.raises(InvalidArgumentError):
            _spec("sa", 4, sa_cool=1.0)

    def test_counts(self):
        with pytest.raises(InvalidArgumentError):
            _spec("greedy", 4, greedy_steps=0)
        with pytest.raises(InvalidArgumentError):
            _spec("local-mtmcmc", 4, mt_tries=0)

    def test_width_check(self):
        target, _ = _target_factory(3)
        with pytest.raises(InvalidArgumentError):
            optimize(_spec("greedy", 3), ModelVector.zeros(3), target,
                     random.Random(0), width=0)

    def test_all_frozen_rejected(self):
        target, _ = _target_factory(2)
        spec = _spec("greedy", 2, frozen=(1, 2))
        with pytest.raises(InvalidArgumentError):
            optimize(spec, ModelVector.zeros(2), target, random.Random(0))


class TestFrozenInvariance:
    @pytest.mark.parametrize("kind", ["sa", "greedy", "local-mtmcmc"])
    def test_frozen_bits_never_change(self, kind):
        p = 6
        target, _ = _target_factory(p, seed=4)
        rnd = random.Random(11)
        kwargs = {"sa": dict(sa_t0=2.0, sa_tf=0.05, sa_cool=2.0),
                  "greedy": dict(greedy_steps=6),
                  "local-mtmcmc": dict(mt_tries=2, mt_steps=5)}[kind]
        for trial in range(200):
            frozen = tuple(
                sorted(rnd.sample(range(1, p + 1), rnd.randint(0, p - 1)))
            )
            mix = KernelMixture(
                (
                    (ProposalKernel(4, p, size=1), 0.4),
                    (ProposalKernel(3, p, size_range=(1, 2)), 0.3),
                    (ProposalKernel(2, p, size=p, rho=(0.4,) * p), 0.3),
                )
            )
            spec = OptimizerSpec(kind=kind, neighborhood=mix, frozen=frozen, **kwargs)
            start = ModelVector(rnd.randrange(1 << p), p)
            trace = optimize(spec, start, target, rnd, width=rnd.randint(1, 3))
            for j in frozen:
                assert trace.end.get(j) == start.get(j)
            assert trace.start == start
            assert trace.evaluations >= 0


class TestGreedy:
    def test_deterministic_reaches_local_optimum(self):
        p = 6
        target, scores = _target_factory(p, seed=7)
        spec = _spec("greedy", p, greedy_steps=50, deterministic=True,
                     first_improving=False)
        trace = optimize(spec, ModelVector.zeros(p), target, random.Random(0))
        end_score = target(trace.end)
        for i in range(p):
            neighbor = ModelVector(trace.end.bits ^ 1 << i, p)
            assert target(neighbor) <= end_score

    def test_deterministic_is_deterministic(self):
        p = 5
        target, _ = _target_factory(p, seed=3)
        spec = _spec("greedy", p, greedy_steps=20, deterministic=True)
        a = optimize(spec, ModelVector.zeros(p), target, random.Random(1))
        b = optimize(spec, ModelVector.zeros(p), target, random.Random(99))
        assert a.end == b.end  # independent of the random stream

    def test_stochastic_never_worsens(self):
        p = 6
        target, _ = _target_factory(p, seed=9)
        rnd = random.Random(5)
        for _ in range(50):
            start = ModelVector(rnd.randrange(1 << p), p)
            spec = _spec("greedy", p, greedy_steps=8,
                         first_improving=bool(rnd.getrandbits(1)),
                         local_stop=bool(rnd.getrandbits(1)))
            trace = optimize(spec, start, target, rnd)
            assert target(trace.end) >= target(start)

    def test_same_seed_reproducible(self):
        p = 6
        target, _ = _target_factory(p, seed=2)
        spec = _spec("greedy", p, greedy_steps=10)
        a = optimize(spec, ModelVector.zeros(p), target, random.Random(7))
        b = optimize(spec, ModelVector.zeros(p), target, random.Random(7))
        assert a.end == b.end
        assert a.evaluations == b.evaluations


class TestSimulatedAnnealing:
    def test_finds_global_optimum_on_smooth_target(self):
        p = 6
        best = ModelVector.from_string("101010")

        def target(g):
            # Smooth: negative hamming distance to the optimum.
            return -bin(g.bits ^ best.bits).count("1") * 2.0

        spec = _spec("sa", p, sa_t0=5.0, sa_tf=0.001, sa_cool=1.5,
                     sa_steps_per_temp=4)
        hits = 0
        for seed in range(10):
            trace = optimize(spec, ModelVector.zeros(p), target, random.Random(seed))
            hits += trace.end == best
        assert hits >= 8

    def test_evaluation_count_matches_schedule(self):
        p = 4
        target, _ = _target_factory(p)
        spec = _spec("sa", p, sa_t0=8.0, sa_tf=1.0, sa_cool=2.0,
                     sa_steps_per_temp=3)
        trace = optimize(spec, ModelVector.zeros(p), target, random.Random(0))
        # Temperatures 8, 4, 2 (stops at 1): 3 levels x 3 steps x width 1.
        assert trace.evaluations == 9
        trace2 = optimize(spec, ModelVector.zeros(p), target, random.Random(0),
                          width=2)
        assert trace2.evaluations == 18


class TestMarginalDensity:
    def _chain_spec(self, p, steps, frozen=()):
        mix = KernelMixture(
            (
                (ProposalKernel(4, p, size=1), 0.7),
                (ProposalKernel(6, p), 0.3),
            )
        )
        return OptimizerSpec(kind="local-mtmcmc", neighborhood=mix,
                             mt_tries=1, mt_steps=steps, frozen=frozen)

    def test_normalizes_over_end_states(self):
        p = 5
        target, _ = _target_factory(p, seed=6)
        spec = self._chain_spec(p, steps=3)
        start = ModelVector.from_string("01100")
        total = sum(
            math.exp(ld)
            for g in enumerate_all(p)
            if (ld := optimize_log_density(spec, start, g, target=target)) > NEG_INF
        )
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_matches_monte_carlo(self):
        p = 4
        target, _ = _target_factory(p, seed=8)
        spec = self._chain_spec(p, steps=2)
        start = ModelVector.from_string("0110")
        n = 30000
        counts = Counter(
            optimize(spec, start, target, random.Random(seed)).end
            for seed in range(n)
        )
        for g in enumerate_all(p):
            ld = optimize_log_density(spec, start, g, target=target)
            expected = 0.0 if ld == NEG_INF else math.exp(ld)
            observed = counts.get(g, 0) / n
            se = math.sqrt(max(expected * (1 - expected), 1e-12) / n)
            assert abs(observed - expected) < 4.5 * se + 1e-9, f"{g}"

    def test_respects_frozen(self):
        p = 4
        target, _ = _target_factory(p, seed=1)
        spec = self._chain_spec(p, steps=2, frozen=(2,))
        start = ModelVector.from_string("0100")
        moved = ModelVector.from_string("0000")  # frozen bit differs
        assert optimize_log_density(spec, start, moved, target=target) == NEG_INF

    def test_deterministic_greedy_density_is_zero(self):
        spec = _spec("greedy", 4, deterministic=True)
        start = ModelVector.zeros(4)
        assert optimize_log_density(spec, start, start) == 0.0

    def test_zero_step_chain(self):
        p = 3
        spec = self._chain_spec(p, steps=0)
        start = ModelVector.zeros(p)
        assert optimize_log_density(spec, start, start) == 0.0
        other = ModelVector.from_string("100")
        assert optimize_log_density(spec, start, other) == NEG_INF

    def test_unsupported_variants_raise(self):
        target, _ = _target_factory(3)
        start = ModelVector.zeros(3)
        with pytest.raises(UnsupportedVariantError):
            optimize_log_density(_spec("sa", 3), start, start, target=target)
        multi = OptimizerSpec(kind="local-mtmcmc", neighborhood=_flip_mixture(3),
                              mt_tries=2, mt_steps=2)
        with pytest.raises(UnsupportedVariantError):
            optimize_log_density(multi, start, start, target=target)
        chain = self._chain_spec(3, steps=2)
        with pytest.raises(UnsupportedVariantError):
            optimize_log_density(chain, start, start)  # target missing
