"""Local combinatorial optimizers used inside mode jumps.

Three kinds: simulated annealing (sa), greedy hill climbing (greedy), and a
local multiple-try MCMC chain (local-mtmcmc).  All respect a frozen index
set by masking the neighborhood kernel onto the remaining coordinates, so
frozen bits never change.

Each stage draws `width` proposals from the stage-start state and applies
the acceptance rule to them sequentially in proposal-index order, which
makes runs reproducible for any width.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

from .errors import InvalidArgumentError, UnsupportedVariantError
from .models import ModelVector
from .proposals import (
    KernelMixture,
    NEG_INF,
    ProposalKernel,
    log_density,
    mixture_propose,
)

OPTIMIZER_KINDS = ("sa", "greedy", "local-mtmcmc")

_DENSITY_ENUM_LIMIT = 12


@dataclass(frozen=True)
class OptimizerSpec:
    """Configuration of one local optimizer."""

    kind: str
    neighborhood: KernelMixture
    frozen: Tuple[int, ...] = ()
    # simulated annealing
    sa_t0: float = 10.0
    sa_tf: float = 14e-5
    sa_cool: float = 3.0
    sa_steps_per_temp: int = 4
    # greedy
    greedy_steps: int = 15
    local_stop: bool = False
    first_improving: bool = True
    deterministic: bool = False
    # local multiple-try MCMC
    mt_tries: int = 4
    mt_steps: int = 15

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise InvalidArgumentError(f"unknown optimizer kind {self.kind!r}")
        if self.kind == "sa" and not (
            self.sa_t0 > self.sa_tf > 0 and self.sa_cool > 1
        ):
            raise InvalidArgumentError("need t0 > tf > 0 and cool > 1")
        if self.kind == "greedy" and self.greedy_steps < 1:
            raise InvalidArgumentError("greedy needs steps >= 1")
        if self.kind == "local-mtmcmc" and (self.mt_tries < 1 or self.mt_steps < 0):
            raise InvalidArgumentError("local-mtmcmc needs tries >= 1, steps >= 0")
        object.__setattr__(self, "frozen", tuple(sorted(self.frozen)))


@dataclass
class OptimizerTrace:
    """Outcome of one optimizer run."""

    start: ModelVector
    end: ModelVector
    evaluations: int
    frozen: Tuple[int, ...] = ()


def _free_positions(p: int, frozen: Tuple[int, ...]) -> List[int]:
    fz = set(frozen)
    for j in fz:
        if not 1 <= j <= p:
            raise InvalidArgumentError(f"frozen index {j} out of range 1..{p}")
    free = [i for i in range(p) if i + 1 not in fz]
    if not free:
        raise InvalidArgumentError("all indices frozen")
    return free


def _mask_kernel(kernel: ProposalKernel, free: List[int]) -> ProposalKernel:
    """Restrict a kernel to the free coordinates (sub-problem of size m)."""
    m = len(free)
    changes = {"p": m}
    if kernel.size is not None:
        changes["size"] = min(kernel.size, m)
    if kernel.size_range is not None:
        z, e = kernel.size_range
        changes["size_range"] = (min(z, m), min(e, m))
    if kernel.rho is not None:
        changes["rho"] = tuple(kernel.rho[i] for i in free)
    return replace(kernel, **changes)


def _mask_mixture(mix: KernelMixture, free: List[int]) -> KernelMixture:
    return KernelMixture(
        tuple((_mask_kernel(k, free), w) for k, w in mix.entries)
    )


def _extract(gamma: ModelVector, free: List[int]) -> ModelVector:
    bits = 0
    for j, i in enumerate(free):
        if gamma.bits >> i & 1:
            bits |= 1 << j
    return ModelVector(bits, len(free))


def _embed(sub_bits: int, base: ModelVector, free: List[int]) -> ModelVector:
    bits = base.bits
    for j, i in enumerate(free):
        if sub_bits >> j & 1:
            bits |= 1 << i
        else:
            bits &= ~(1 << i)
    return ModelVector(bits, base.p)


def optimize(
    spec: OptimizerSpec,
    start: ModelVector,
    target: Callable[[ModelVector], float],
    rng: random.Random,
    width: int = 1,
) -> OptimizerTrace:
    """Run the optimizer from `start`; frozen indices never change."""
    if width < 1:
        raise InvalidArgumentError("width must be >= 1")
    free = _free_positions(start.p, spec.frozen)
    mix = _mask_mixture(spec.neighborhood, free)
    sub = _extract(start, free)

    def full(sub_vec: ModelVector) -> ModelVector:
        return _embed(sub_vec.bits, start, free)

    evals = 0
    cur = sub
    cur_score = target(start)

    if spec.kind == "greedy" and spec.deterministic:
        end, evals = _greedy_deterministic(spec, start, free, target)
        return OptimizerTrace(start, end, evals, spec.frozen)

    if spec.kind == "sa":
        t = spec.sa_t0
        while t > spec.sa_tf:
            for _ in range(spec.sa_steps_per_temp):
                props = [mixture_propose(mix, cur, rng)[0] for _ in range(width)]
                for prop in props:
                    evals += 1
                    s = target(full(prop))
                    if s == NEG_INF:
                        continue
                    delta = s - cur_score
                    if delta >= 0 or rng.random() < math.exp(delta / t):
                        cur, cur_score = prop, s
            t /= spec.sa_cool
        return OptimizerTrace(start, full(cur), evals, spec.frozen)

    if spec.kind == "greedy":
        for _ in range(spec.greedy_steps):
            props = [mixture_propose(mix, cur, rng)[0] for _ in range(width)]
            evals += len(props)
            improved = False
            if spec.first_improving:
                for prop in props:
                    s = target(full(prop))
                    if s > cur_score:
                        cur, cur_score = prop, s
                        improved = True
                        break
            else:
                best, best_s = None, cur_score
                for prop in props:
                    s = target(full(prop))
                    if s > best_s:
                        best, best_s = prop, s
                if best is not None:
                    cur, cur_score = best, best_s
                    improved = True
            if spec.local_stop and not improved:
                break
        return OptimizerTrace(start, full(cur), evals, spec.frozen)

    # local-mtmcmc
    for _ in range(spec.mt_steps):
        trials = []
        for _ in range(spec.mt_tries):
            prop, _, _ = mixture_propose(mix, cur, rng)
            evals += 1
            trials.append(prop)
        logw = []
        for prop in trials:
            s = target(full(prop))
            if s == NEG_INF:
                logw.append(NEG_INF)
            else:
                logw.append(s + _mix_logq(mix, prop, cur))
        sel = _select_log_weights(logw, rng)
        if sel is None:
            continue
        chosen = trials[sel]
        rev_logw = []
        for _ in range(spec.mt_tries - 1):
            rev, _, _ = mixture_propose(mix, chosen, rng)
            evals += 1
            s = target(full(rev))
            rev_logw.append(
                NEG_INF if s == NEG_INF else s + _mix_logq(mix, rev, chosen)
            )
        rev_logw.append(cur_score + _mix_logq(mix, cur, chosen))
        log_r = _logsumexp(logw) - _logsumexp(rev_logw)
        if log_r >= 0 or rng.random() < math.exp(log_r):
            cur = chosen
            cur_score = target(full(cur))
    return OptimizerTrace(start, full(cur), evals, spec.frozen)


def _mix_logq(mix: KernelMixture, frm: ModelVector, to: ModelVector) -> float:
    from .proposals import mixture_log_density

    return mixture_log_density(mix, frm, to)


def _logsumexp(values: List[float]) -> float:
    best = max(values)
    if best == NEG_INF:
        return NEG_INF
    return best + math.log(sum(math.exp(v - best) for v in values))


def _select_log_weights(logw: List[float], rng: random.Random) -> Optional[int]:
    """Sample an index with probability proportional to exp(logw)."""
    total = _logsumexp(logw)
    if total == NEG_INF:
        return None
    u = rng.random()
    acc = 0.0
    for i, w in enumerate(logw):
        if w > NEG_INF:
            acc += math.exp(w - total)
            if u < acc:
                return i
    return max(range(len(logw)), key=lambda i: logw[i])


def _greedy_deterministic(
    spec: OptimizerSpec,
    start: ModelVector,
    free: List[int],
    target: Callable[[ModelVector], float],
) -> Tuple[ModelVector, int]:
    """Deterministic hill climb over single-bit flips of free coordinates.

    Scans neighbors in index order; first_improving jumps at the first
    strict improvement, otherwise the best strictly-improving neighbor is
    taken.  Stops when no neighbor improves (ties are not improvements).
    """
    cur = start
    cur_score = target(start)
    evals = 0
    for _ in range(spec.greedy_steps):
        best, best_s = None, cur_score
        for i in free:
            neighbor = ModelVector(cur.bits ^ 1 << i, cur.p)
            evals += 1
            s = target(neighbor)
            if s > best_s:
                best, best_s = neighbor, s
                if spec.first_improving:
                    break
        if best is None:
            break
        cur, cur_score = best, best_s
    return cur, evals


def _kernel_support(
    kernel: ProposalKernel, x: ModelVector
):
    """Yield every state reachable in one draw from kernel at x (excluding
    impossible moves), paired with its log density."""
    p = x.p
    kind = kernel.kind
    if kind in (3, 4):
        z, e, _ = kernel._sizes()
        for d in range(z, e + 1):
            for combo in itertools.combinations(range(p), d):
                mask = 0
                for i in combo:
                    mask |= 1 << i
                y = ModelVector(x.bits ^ mask, p)
                yield y, log_density(kernel, x, y)
        return
    if kind in (1, 2):
        _, e, _ = kernel._sizes()
        for d in range(0, e + 1):
            for combo in itertools.combinations(range(p), d):
                mask = 0
                for i in combo:
                    mask |= 1 << i
                y = ModelVector(x.bits ^ mask, p)
                yield y, log_density(kernel, x, y)
        return
    if kind == 5:
        zeros = [i for i in range(p) if not x.bits >> i & 1]
        if not zeros:
            yield x, 0.0
            return
        for i in zeros:
            yield ModelVector(x.bits | 1 << i, p), -math.log(len(zeros))
        return
    ones = [i for i in range(p) if x.bits >> i & 1]
    if not ones:
        yield x, 0.0
        return
    for i in ones:
        yield ModelVector(x.bits ^ 1 << i, p), -math.log(len(ones))


def _mixture_support(mix: KernelMixture, x: ModelVector) -> Dict[ModelVector, float]:
    out: Dict[ModelVector, float] = {}
    for kernel, w in mix.entries:
        for y, ld in _kernel_support(kernel, x):
            if ld == NEG_INF:
                continue
            out[y] = out.get(y, 0.0) + w * math.exp(ld)
    return out


def optimize_log_density(
    spec: OptimizerSpec,
    start: ModelVector,
    end: ModelVector,
    trace: Optional[OptimizerTrace] = None,
    target: Optional[Callable[[ModelVector], float]] = None,
    law_cache: Optional[Dict] = None,
) -> float:
    """log q_o(end | start): the marginal density of the optimizer run.

    Supported for deterministic greedy (probability 1 on its unique
    endpoint) and for local-mtmcmc with tries=1, whose per-step law is a
    plain Metropolis-Hastings transition that can be enumerated exactly.
    """
    if spec.kind == "greedy" and spec.deterministic:
        return 0.0
    if spec.kind == "local-mtmcmc":
        if spec.mt_steps == 0:
            return 0.0 if end == start else NEG_INF
        if spec.mt_tries != 1:
            raise UnsupportedVariantError(
                "marginal optimizer density needs tries=1; "
                "use the last-randomization acceptance instead"
            )
        if target is None:
            raise UnsupportedVariantError("marginal density needs the target")
        free = _free_positions(start.p, spec.frozen)
        if len(free) > _DENSITY_ENUM_LIMIT:
            raise UnsupportedVariantError(
                "free coordinate count too large to enumerate the optimizer law"
            )
        # The end state must agree with the start on frozen coordinates.
        fz_mask = 0
        for j in spec.frozen:
            fz_mask |= 1 << (j - 1)
        if (start.bits ^ end.bits) & fz_mask:
            return NEG_INF
        mix = _mask_mixture(spec.neighborhood, free)
        sub_start = _extract(start, free)
        sub_end = _extract(end, free)

        if law_cache is not None:
            key = (spec, start)
            dist = law_cache.get(key)
            if dist is None:
                dist = _chain_endpoint_law(spec, mix, free, start, target)
                law_cache[key] = dist
        else:
            dist = _chain_endpoint_law(spec, mix, free, start, target)
        prob = dist.get(sub_end, 0.0)
        return math.log(prob) if prob > 0.0 else NEG_INF
    raise UnsupportedVariantError(
        f"optimizer kind {spec.kind!r} has no tractable marginal density; "
        "use the last-randomization acceptance instead"
    )


def _chain_endpoint_law(
    spec: OptimizerSpec,
    mix: KernelMixture,
    free: List[int],
    start: ModelVector,
    target: Callable[[ModelVector], float],
) -> Dict[ModelVector, float]:
    """Endpoint distribution of the one-try local chain after mt_steps."""
    sub_start = _extract(start, free)

    def sub_target(sv: ModelVector) -> float:
        return target(_embed(sv.bits, start, free))

    dist: Dict[ModelVector, float] = {sub_start: 1.0}
    scores: Dict[ModelVector, float] = {}

    def score(sv: ModelVector) -> float:
        s = scores.get(sv)
        if s is None:
            s = sub_target(sv)
            scores[sv] = s
        return s

    for _ in range(spec.mt_steps):
        nxt: Dict[ModelVector, float] = {}
        for x, px in dist.items():
            sx = score(x)
            stay = 0.0
            for y, q in _mixture_support(mix, x).items():
                if y == x:
                    stay += q
                    continue
                sy = score(y)
                if sy == NEG_INF:
                    a = 0.0
                elif sx == NEG_INF:
                    a = 1.0
                else:
                    # Hastings ratio with the reverse mixture density;
                    # an impossible reverse move accepts with certainty.
                    log_qxy = _mix_logq(mix, y, x)
                    if log_qxy == NEG_INF:
                        a = 1.0
                    else:
                        log_r = sy + log_qxy - sx - math.log(q)
                        a = min(1.0, math.exp(min(log_r, 0.0)))
                move = q * a
                stay += q * (1.0 - a)
                if move > 0.0:
                    nxt[y] = nxt.get(y, 0.0) + px * move
            if stay > 0.0:
                nxt[x] = nxt.get(x, 0.0) + px * stay
        dist = nxt
    return dist
