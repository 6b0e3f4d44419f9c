"""The mode jumping MCMC chain, plain MH/MTMCMC steps, and baselines.

One chain iteration is either an ordinary (multiple-try) MH step via the
q_g mixture or, with probability `jump_probability`, a mode jump: a large
swap proposal (q_l), local optimization with the swapped indices frozen,
and a concentric randomization (q_r), accepted through a backward-kernel
ratio.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

from .errors import ConfigError, InvalidArgumentError
from .likelihood import Dataset, PriorSpec, make_scorer
from .models import ModelCache, ModelRecord, ModelVector, swap
from .optimizers import (
    OptimizerSpec,
    OptimizerTrace,
    optimize,
    optimize_log_density,
)
from .proposals import (
    KernelMixture,
    NEG_INF,
    mixture_log_density,
    mixture_propose,
    update_rho,
)

ACCEPTANCE_VARIANTS = (
    "last-randomization",
    "symmetric-randomization",
    "deterministic-optimizer",
)

ALGORITHMS = ("mjmcmc", "mc3", "rs")

Target = Callable[[ModelVector], float]


@dataclass(frozen=True)
class SamplerConfig:
    """Full configuration of one chain."""

    q_g: KernelMixture
    q_l: KernelMixture
    q_o: Tuple[Tuple[OptimizerSpec, float], ...]
    q_r: KernelMixture
    iterations: Optional[int] = None
    budget_proposals: Optional[int] = None
    budget_unique: Optional[int] = None
    jump_probability: float = 0.05
    acceptance_variant: str = "last-randomization"
    mtmcmc_tries: int = 1
    burn_in: Optional[int] = None
    adapt_rho: bool = True
    rho_bounds: Tuple[float, float] = (0.001, 0.999)
    seed: int = 0
    width: int = 1
    algorithm: str = "mjmcmc"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if not 0.0 <= self.jump_probability <= 1.0:
            raise ConfigError("jump_probability must be in [0,1]")
        if self.acceptance_variant not in ACCEPTANCE_VARIANTS:
            raise ConfigError(f"unknown variant {self.acceptance_variant!r}")
        if self.mtmcmc_tries < 1 or self.width < 1:
            raise ConfigError("mtmcmc_tries and width must be >= 1")
        if (
            self.iterations is None
            and self.budget_proposals is None
            and self.budget_unique is None
        ):
            raise ConfigError("need iterations or a proposal/unique budget")
        qo = tuple((s, float(w)) for s, w in self.q_o)
        if self.jump_probability > 0:
            if not qo or any(w <= 0 for _, w in qo):
                raise ConfigError("q_o needs positive optimizer weights")
            total = sum(w for _, w in qo)
            qo = tuple((s, w / total) for s, w in qo)
            for kernel, _ in self.q_l.entries:
                if kernel.kind not in (3, 4):
                    raise ConfigError("q_l must use swap kernels (kinds 3/4)")
                z, e, _ = kernel._sizes()
                if e >= kernel.p:
                    raise ConfigError("q_l swap size must leave free indices")
            if self.acceptance_variant == "last-randomization":
                if not self.q_r.everywhere_positive:
                    raise ConfigError(
                        "last-randomization needs an everywhere-positive q_r"
                    )
            elif self.acceptance_variant == "symmetric-randomization":
                if not self.q_r.is_symmetric:
                    raise ConfigError("symmetric-randomization needs symmetric q_r")
                for spec, _ in qo:
                    ok = (spec.kind == "local-mtmcmc" and spec.mt_tries == 1) or (
                        spec.kind == "greedy" and spec.deterministic
                    )
                    if not ok:
                        raise ConfigError(
                            "symmetric-randomization needs density-capable "
                            "optimizers (local-mtmcmc tries=1 or deterministic "
                            "greedy)"
                        )
            else:  # deterministic-optimizer
                if not self.q_r.is_symmetric:
                    raise ConfigError("deterministic-optimizer needs symmetric q_r")
                for spec, _ in qo:
                    if not (spec.kind == "greedy" and spec.deterministic):
                        raise ConfigError(
                            "deterministic-optimizer needs deterministic greedy"
                        )
        object.__setattr__(self, "q_o", qo)


@dataclass
class ChainSample:
    gamma: ModelVector
    step_kind: str  # mh | mtmcmc | mode-jump | mc3 | rs
    accepted: bool


@dataclass
class MJTrace:
    """Record of one mode-jump proposal."""

    jump_indices: Tuple[int, ...]
    forward: OptimizerTrace
    backward: Optional[OptimizerTrace]
    gamma_star: ModelVector


@dataclass
class RunResult:
    samples: List[ChainSample]
    visited: Dict[ModelVector, ModelRecord]
    counts: Dict[str, Tuple[int, int]]  # step_kind -> (attempts, accepted)
    tot: int
    burn_in_samples: int = 0

    @property
    def eff(self) -> int:
        return len(self.visited)


def mh_step(
    gamma: ModelVector,
    mixture: KernelMixture,
    target: Target,
    rng: random.Random,
    cur_score: Optional[float] = None,
) -> Tuple[ModelVector, bool, int]:
    """One Metropolis-Hastings step; returns (state, accepted, proposals)."""
    prop, _, _ = mixture_propose(mixture, gamma, rng)
    if prop == gamma:
        return gamma, True, 1
    s = target(prop)
    if s == NEG_INF:
        return gamma, False, 1
    if cur_score is None:
        cur_score = target(gamma)
    log_r = s - cur_score
    if not mixture.is_symmetric:
        bwd = mixture_log_density(mixture, prop, gamma)
        if bwd == NEG_INF:
            return gamma, False, 1
        log_r += bwd - mixture_log_density(mixture, gamma, prop)
    if log_r >= 0.0 or rng.random() < math.exp(log_r):
        return prop, True, 1
    return gamma, False, 1


def mtmcmc_step(
    gamma: ModelVector,
    mixture: KernelMixture,
    tries: int,
    target: Target,
    rng: random.Random,
    cur_score: Optional[float] = None,
) -> Tuple[ModelVector, bool, int]:
    """One multiple-try Metropolis step with S = tries trial proposals.

    Trial selection is proportional to w = target-density x backward
    proposal density; the reverse pool reuses gamma as its final member.
    """
    if tries < 1:
        raise InvalidArgumentError("tries must be >= 1")
    if cur_score is None:
        cur_score = target(gamma)
    n_prop = tries
    trials = [mixture_propose(mixture, gamma, rng)[0] for _ in range(tries)]
    logw = []
    for prop in trials:
        s = target(prop)
        if s == NEG_INF:
            logw.append(NEG_INF)
        else:
            logw.append(s + mixture_log_density(mixture, prop, gamma))
    fwd_total = _logsumexp(logw)
    if fwd_total == NEG_INF:
        return gamma, False, n_prop
    sel = _sample_index(logw, fwd_total, rng)
    chosen = trials[sel]
    if chosen == gamma:
        return gamma, True, n_prop
    rev_logw = []
    for _ in range(tries - 1):
        rev, _, _ = mixture_propose(mixture, chosen, rng)
        n_prop += 1
        s = target(rev)
        rev_logw.append(
            NEG_INF if s == NEG_INF else s + mixture_log_density(mixture, rev, chosen)
        )
    rev_logw.append(cur_score + mixture_log_density(mixture, gamma, chosen))
    log_r = fwd_total - _logsumexp(rev_logw)
    if log_r >= 0.0 or rng.random() < math.exp(log_r):
        return chosen, True, n_prop
    return gamma, False, n_prop


def mode_jump_step(
    gamma: ModelVector,
    q_l: KernelMixture,
    opt_spec: OptimizerSpec,
    q_r: KernelMixture,
    variant: str,
    target: Target,
    rng: random.Random,
    width: int = 1,
    cur_score: Optional[float] = None,
    law_cache: Optional[Dict] = None,
) -> Tuple[ModelVector, bool, MJTrace, int]:
    """One mode jump: large swap, frozen-index optimization, randomization."""
    if cur_score is None:
        cur_score = target(gamma)
    chi0_star, _, jump = mixture_propose(q_l, gamma, rng)
    n_prop = 1
    spec = replace(opt_spec, frozen=jump)
    fwd = optimize(spec, chi0_star, target, rng, width)
    n_prop += fwd.evaluations
    chik_star = fwd.end
    gamma_star, _, _ = mixture_propose(q_r, chik_star, rng)
    n_prop += 1
    if gamma_star == gamma:
        trace = MJTrace(jump, fwd, None, gamma_star)
        return gamma, True, trace, n_prop
    s_star = target(gamma_star)
    chi0 = swap(gamma_star, jump)
    if variant == "last-randomization":
        bwd = optimize(spec, chi0, target, rng, width)
        n_prop += bwd.evaluations
        trace = MJTrace(jump, fwd, bwd, gamma_star)
        if s_star == NEG_INF:
            return gamma, False, trace, n_prop
        log_r = (
            s_star
            + mixture_log_density(q_r, bwd.end, gamma)
            - cur_score
            - mixture_log_density(q_r, chik_star, gamma_star)
        )
    elif variant == "symmetric-randomization":
        # Backward pseudo-mode drawn from the symmetric randomization
        # kernel; the ratio then uses marginal optimizer densities.
        chik, _, _ = mixture_propose(q_r, gamma, rng)
        n_prop += 1
        trace = MJTrace(jump, fwd, None, gamma_star)
        if s_star == NEG_INF:
            return gamma, False, trace, n_prop
        fwd_d = optimize_log_density(
            spec, chi0_star, chik_star, target=target, law_cache=law_cache
        )
        bwd_d = optimize_log_density(
            spec, chi0, chik, target=target, law_cache=law_cache
        )
        if bwd_d == NEG_INF:
            return gamma, False, trace, n_prop
        log_r = s_star + bwd_d - cur_score - fwd_d
    elif variant == "deterministic-optimizer":
        bwd = optimize(spec, chi0, target, rng, width)
        n_prop += bwd.evaluations
        trace = MJTrace(jump, fwd, bwd, gamma_star)
        if s_star == NEG_INF:
            return gamma, False, trace, n_prop
        log_r = s_star - cur_score
    else:
        raise InvalidArgumentError(f"unknown variant {variant!r}")
    if log_r >= 0.0 or rng.random() < math.exp(log_r):
        return gamma_star, True, trace, n_prop
    return gamma, False, trace, n_prop


def mc3_step(
    gamma: ModelVector,
    target: Target,
    rng: random.Random,
    cur_score: Optional[float] = None,
) -> Tuple[ModelVector, bool, int]:
    """Flip one uniformly chosen coordinate (symmetric proposal)."""
    i = rng.randrange(gamma.p)
    prop = ModelVector(gamma.bits ^ 1 << i, gamma.p)
    s = target(prop)
    if s == NEG_INF:
        return gamma, False, 1
    if cur_score is None:
        cur_score = target(gamma)
    log_r = s - cur_score
    if log_r >= 0.0 or rng.random() < math.exp(log_r):
        return prop, True, 1
    return gamma, False, 1


def rs_step(
    gamma: ModelVector,
    target: Target,
    rng: random.Random,
    cur_score: Optional[float] = None,
) -> Tuple[ModelVector, bool, int]:
    """Reassign one uniformly chosen coordinate to a fresh Bernoulli(1/2)."""
    i = rng.randrange(gamma.p)
    new_bit = 1 if rng.random() < 0.5 else 0
    if (gamma.bits >> i & 1) == new_bit:
        return gamma, True, 1
    prop = ModelVector(gamma.bits ^ 1 << i, gamma.p)
    s = target(prop)
    if s == NEG_INF:
        return gamma, False, 1
    if cur_score is None:
        cur_score = target(gamma)
    log_r = s - cur_score
    if log_r >= 0.0 or rng.random() < math.exp(log_r):
        return prop, True, 1
    return gamma, False, 1


def _logsumexp(values: List[float]) -> float:
    best = max(values)
    if best == NEG_INF:
        return NEG_INF
    return best + math.log(sum(math.exp(v - best) for v in values))


def _sample_index(logw: List[float], total: float, rng: random.Random) -> int:
    u = rng.random()
    acc = 0.0
    last = 0
    for i, w in enumerate(logw):
        if w > NEG_INF:
            acc += math.exp(w - total)
            last = i
            if u < acc:
                return i
    return last


def run(
    config: SamplerConfig,
    data: Dataset,
    prior: PriorSpec,
    cache: Optional[ModelCache] = None,
) -> RunResult:
    """Run one chain to its iteration or budget stop condition."""
    p = data.p
    if config.q_g.p != p:
        raise ConfigError("kernel mixtures do not match the dataset's p")
    rng = random.Random(config.seed)
    scorer = make_scorer(data, prior)
    if cache is None:
        cache = ModelCache()
    visited: Dict[ModelVector, ModelRecord] = {}

    def target(g: ModelVector) -> float:
        rec = visited.get(g)
        if rec is None:
            rec = cache.get_or_compute(g, scorer)
            visited[g] = rec
        return rec.log_target

    gamma = ModelVector.zeros(p)
    cur_score = target(gamma)
    if cur_score == NEG_INF:
        gamma = ModelVector.ones(p)
        cur_score = target(gamma)

    q_g = config.q_g
    q_o = list(config.q_o)
    adapted = not (config.adapt_rho and config.algorithm == "mjmcmc")

    samples: List[ChainSample] = []
    counts: Dict[str, List[int]] = {}
    law_cache: Dict = {}
    tot = 0
    burn_in_samples = 0
    it = 0

    def past_burn_in() -> bool:
        if config.burn_in is not None:
            return it >= config.burn_in
        if config.iterations is not None:
            return it >= config.iterations // 10
        if config.budget_proposals is not None:
            return tot >= config.budget_proposals // 10
        return len(visited) >= (config.budget_unique or 0) // 10

    while True:
        if config.iterations is not None and it >= config.iterations:
            break
        if config.budget_proposals is not None and tot >= config.budget_proposals:
            break
        if config.budget_unique is not None and len(visited) >= config.budget_unique:
            break
        if not adapted and past_burn_in():
            from .estimators import rm_estimates

            incl = rm_estimates(visited).inclusion
            q_g = update_rho(q_g, incl, config.rho_bounds)
            q_o = [
                (replace(s, neighborhood=update_rho(s.neighborhood, incl,
                                                    config.rho_bounds)), w)
                for s, w in q_o
            ]
            burn_in_samples = len(samples)
            adapted = True

        if config.algorithm == "mc3":
            kind = "mc3"
            gamma, accepted, n = mc3_step(gamma, target, rng, cur_score)
        elif config.algorithm == "rs":
            kind = "rs"
            gamma, accepted, n = rs_step(gamma, target, rng, cur_score)
        elif (
            config.jump_probability > 0
            and rng.random() <= config.jump_probability
        ):
            kind = "mode-jump"
            spec = _sample_optimizer(q_o, rng)
            gamma, accepted, _, n = mode_jump_step(
                gamma,
                config.q_l,
                spec,
                config.q_r,
                config.acceptance_variant,
                target,
                rng,
                config.width,
                cur_score,
                law_cache,
            )
        elif config.mtmcmc_tries > 1:
            kind = "mtmcmc"
            gamma, accepted, n = mtmcmc_step(
                gamma, q_g, config.mtmcmc_tries, target, rng, cur_score
            )
        else:
            kind = "mh"
            gamma, accepted, n = mh_step(gamma, q_g, target, rng, cur_score)
        cur_score = target(gamma)
        tot += n
        samples.append(ChainSample(gamma, kind, accepted))
        c = counts.setdefault(kind, [0, 0])
        c[0] += 1
        c[1] += int(accepted)
        it += 1

    return RunResult(
        samples=samples,
        visited=visited,
        counts={k: (a, b) for k, (a, b) in counts.items()},
        tot=tot,
        burn_in_samples=burn_in_samples,
    )


def _sample_optimizer(
    q_o: List[Tuple[OptimizerSpec, float]], rng: random.Random
) -> OptimizerSpec:
    u = rng.random()
    acc = 0.0
    for spec, w in q_o:
        acc += w
        if u < acc:
            return spec
    return q_o[-1][0]
