"""Tests for the flat key=value configuration format and presets."""

from __future__ import annotations

import pytest

from modejump.configs import (
    BENCH_JUMP_PROBABILITY,
    RunConfig,
    benchmark_config,
    build_sampler_config,
    emit_config,
    parse_config,
)
from modejump.errors import ConfigError
from modejump.likelihood import PriorSpec


class TestBenchmarkConfig:
    def test_defaults(self):
        cfg = benchmark_config()
        assert cfg.q_g.p == 15
        assert cfg.jump_probability == BENCH_JUMP_PROBABILITY
        assert cfg.budget_proposals == 3276
        assert len(cfg.q_o) == 3
        assert {s.kind for s, _ in cfg.q_o} == {"sa", "greedy", "local-mtmcmc"}
        assert sum(w for _, w in cfg.q_o) == pytest.approx(1.0)

    def test_scales_to_small_p(self):
        cfg = benchmark_config(p=4)
        assert cfg.q_g.p == 4
        # Large-jump swap size leaves at least one free index.
        for kernel, _ in cfg.q_l.entries:
            assert kernel.size < 4

    def test_algorithms(self):
        assert benchmark_config(algorithm="mc3").algorithm == "mc3"
        with pytest.raises(ConfigError):
            benchmark_config(algorithm="gibbs")


class TestRoundTrip:
    def _cfg(self):
        return RunConfig(
            algorithm="mjmcmc",
            data_generator="example1",
            data_seed=7,
            prior=PriorSpec(g=100.0, model_prior=("binomial", 0.5)),
            jump_probability=0.05,
            budget_proposals=500,
            seed=11,
            replications=3,
            kernel_keys=(("qg.type4.weight", "0.5"), ("qg.type4.size", "2")),
        )

    def test_parse_emit_roundtrip(self):
        cfg = self._cfg()
        assert parse_config(emit_config(cfg)) == cfg

    def test_beta_binomial_roundtrip(self):
        cfg = RunConfig(
            data_generator="small",
            prior=PriorSpec(model_prior=("beta-binomial", 1.5, 2.5)),
            iterations=10,
        )
        assert parse_config(emit_config(cfg)) == cfg

    def test_comments_and_blanks_ignored(self):
        text = "# comment\n\nalgorithm=mc3\ndata.generator=example1\n"
        assert parse_config(text).algorithm == "mc3"


class TestParseErrors:
    def test_missing_equals(self):
        with pytest.raises(ConfigError):
            parse_config("algorithm\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError):
            parse_config("algorithm=mc3\nalgorithm=rs\ndata.generator=example1\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            parse_config("data.generator=example1\nsampler.bogus=1\n")

    def test_bad_number(self):
        with pytest.raises(ConfigError):
            parse_config("data.generator=example1\nrun.seed=abc\n")

    def test_bad_boolean(self):
        with pytest.raises(ConfigError):
            parse_config("data.generator=example1\nsampler.adapt_rho=maybe\n")

    def test_needs_data_source(self):
        with pytest.raises(ConfigError):
            parse_config("algorithm=mjmcmc\n")

    def test_unknown_algorithm(self):
        with pytest.raises(ConfigError):
            parse_config("algorithm=gibbs\ndata.generator=example1\n")

    def test_bad_prior(self):
        with pytest.raises(ConfigError):
            parse_config("data.generator=example1\nprior.g=-5\n")


class TestBuildSamplerConfig:
    def test_kernel_override(self):
        cfg = parse_config(
            "data.generator=example1\n"
            "run.proposals=100\n"
            "qg.type4.weight=1\n"
            "qg.type4.size=3\n"
        )
        sc = build_sampler_config(cfg, p=15)
        assert len(sc.q_g.entries) == 1
        kernel = sc.q_g.entries[0][0]
        assert kernel.kind == 4
        assert kernel.size == 3

    def test_randomization_override(self):
        cfg = parse_config(
            "data.generator=example1\nrun.proposals=100\n"
            "qr.type2.weight=1\nqr.type2.size=15\nqr.type2.rho=0.01\n"
        )
        sc = build_sampler_config(cfg, p=15)
        assert sc.q_r.entries[0][0].rho == (0.01,) * 15

    def test_optimizer_override(self):
        cfg = parse_config(
            "data.generator=example1\nrun.proposals=100\n"
            "qo.sa.weight=0.5\nqo.sa.t0=8\nqo.sa.dt=2\nqo.sa.St=3\n"
            "qo.greedy.weight=0.5\nqo.greedy.S=7\nqo.greedy.LS=true\n"
        )
        sc = build_sampler_config(cfg, p=15)
        kinds = {s.kind: s for s, _ in sc.q_o}
        assert set(kinds) == {"sa", "greedy"}
        assert kinds["sa"].sa_t0 == 8.0
        assert kinds["sa"].sa_cool == 2.0
        assert kinds["sa"].sa_steps_per_temp == 3
        assert kinds["greedy"].greedy_steps == 7
        assert kinds["greedy"].local_stop is True

    def test_unknown_optimizer_section(self):
        cfg = parse_config(
            "data.generator=example1\nrun.proposals=100\nqo.tabu.weight=1\n"
        )
        with pytest.raises(ConfigError):
            build_sampler_config(cfg, p=15)

    def test_unknown_optimizer_key(self):
        cfg = parse_config(
            "data.generator=example1\nrun.proposals=100\nqo.sa.cooling=2\n"
        )
        with pytest.raises(ConfigError):
            build_sampler_config(cfg, p=15)

    def test_falls_back_to_benchmark_mixtures(self):
        cfg = parse_config("data.generator=example1\nrun.proposals=100\n")
        sc = build_sampler_config(cfg, p=15)
        base = benchmark_config(p=15, budget_proposals=100)
        assert sc.q_g == base.q_g
        assert sc.jump_probability == base.jump_probability

    def test_sampler_overrides_applied(self):
        cfg = parse_config(
            "data.generator=example1\nrun.proposals=100\n"
            "sampler.rho=0.2\nsampler.tries=3\nsampler.adapt_rho=false\n"
        )
        sc = build_sampler_config(cfg, p=15)
        assert sc.jump_probability == 0.2
        assert sc.mtmcmc_tries == 3
        assert sc.adapt_rho is False

    def test_invalid_combination_is_config_error(self):
        cfg = parse_config(
            "data.generator=example1\nrun.proposals=100\n"
            "sampler.variant=deterministic-optimizer\n"
        )
        with pytest.raises(ConfigError):
            build_sampler_config(cfg, p=15)
