"""The six move kernels with exact forward/backward log densities.

Kernel kinds:

1. random change, random neighborhood size S ~ Unif{zeta..eta}
2. random change, fixed neighborhood size S
3. swap, random size (symmetric)
4. swap, fixed size (symmetric)
5. uniform addition of a covariate
6. uniform deletion of a covariate

For kinds 1 and 2 a size-S index set is chosen uniformly and each chosen
index i is flipped independently with probability rho_i.  The exact density
of a realized change set D sums over all admissible sizes S and all size-S
supersets of D; the superset sum is an elementary symmetric polynomial in
the (1 - rho_j) of the unchanged indices and is evaluated by dynamic
programming.
"""

from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from .errors import InvalidArgumentError, StateError
from .models import ModelVector

NEG_INF = float("-inf")


def _elementary_symmetric(values: Sequence[float], m: int) -> List[float]:
    """e_0..e_m of the given values."""
    e = [0.0] * (m + 1)
    e[0] = 1.0
    n = 0
    for v in values:
        n += 1
        top = min(n, m)
        for k in range(top, 0, -1):
            e[k] += v * e[k - 1]
    return e


@dataclass(frozen=True)
class ProposalKernel:
    """One move distribution over models of length p (kinds 1-6 above)."""

    kind: int
    p: int
    size: Optional[int] = None
    size_range: Optional[Tuple[int, int]] = None
    rho: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in (1, 2, 3, 4, 5, 6):
            raise InvalidArgumentError(f"unknown kernel kind {self.kind}")
        if self.p < 1:
            raise InvalidArgumentError("p must be >= 1")
        if self.kind in (1, 3):
            if self.size_range is None:
                raise InvalidArgumentError("random-size kernel needs size_range")
            z, e = self.size_range
            if not 1 <= z <= e <= self.p:
                raise InvalidArgumentError("need 1 <= zeta <= eta <= p")
            object.__setattr__(self, "size_range", (int(z), int(e)))
        if self.kind in (2, 4):
            if self.size is None or not 1 <= self.size <= self.p:
                raise InvalidArgumentError("fixed-size kernel needs 1 <= S <= p")
        if self.kind in (1, 2):
            if self.rho is None:
                raise InvalidArgumentError("change kernel needs rho")
            rho = tuple(float(r) for r in self.rho)
            if len(rho) != self.p or any(not 0.0 < r < 1.0 for r in rho):
                raise InvalidArgumentError("rho must have length p, all in (0,1)")
            object.__setattr__(self, "rho", rho)

    def _sizes(self) -> Tuple[int, int, float]:
        """(zeta, eta, log weight per size)."""
        if self.kind in (1, 3):
            z, e = self.size_range
            return z, e, -math.log(e - z + 1)
        return self.size, self.size, 0.0

    @property
    def is_symmetric(self) -> bool:
        """Whether q(a|b) = q(b|a) for all pairs."""
        if self.kind in (3, 4):
            return True
        if self.kind in (1, 2) and len(set(self.rho)) == 1:
            # Constant rho with the whole vector eligible: density depends
            # only on the hamming distance.
            z, e, _ = self._sizes()
            return z == self.p and e == self.p
        return False

    @property
    def everywhere_positive(self) -> bool:
        """Whether q(b|a) > 0 for every pair (a, b)."""
        if self.kind in (1, 2):
            _, e, _ = self._sizes()
            return e == self.p
        return False


def propose(
    kernel: ProposalKernel, gamma: ModelVector, rng: random.Random
) -> Tuple[ModelVector, Tuple[int, ...]]:
    """Draw gamma* ~ q(.|gamma); returns (gamma*, changed 1-based indices)."""
    p = gamma.p
    if kernel.p != p:
        raise InvalidArgumentError("kernel p does not match gamma length")
    kind = kernel.kind
    if kind in (3, 4):
        z, e, _ = kernel._sizes()
        S = z if z == e else rng.randint(z, e)
        picked = rng.sample(range(p), S)
        mask = 0
        for i in picked:
            mask |= 1 << i
        return ModelVector(gamma.bits ^ mask, p), tuple(sorted(i + 1 for i in picked))
    if kind in (1, 2):
        z, e, _ = kernel._sizes()
        S = z if z == e else rng.randint(z, e)
        picked = rng.sample(range(p), S)
        mask = 0
        changed = []
        for i in picked:
            if rng.random() < kernel.rho[i]:
                mask |= 1 << i
                changed.append(i + 1)
        return ModelVector(gamma.bits ^ mask, p), tuple(sorted(changed))
    if kind == 5:
        zeros = [i for i in range(p) if not gamma.bits >> i & 1]
        if not zeros:
            return gamma, ()
        i = zeros[rng.randrange(len(zeros))]
        return ModelVector(gamma.bits | 1 << i, p), (i + 1,)
    # kind == 6
    ones = [i for i in range(p) if gamma.bits >> i & 1]
    if not ones:
        return gamma, ()
    i = ones[rng.randrange(len(ones))]
    return ModelVector(gamma.bits ^ 1 << i, p), (i + 1,)


@functools.lru_cache(maxsize=200_000)
def log_density(kernel: ProposalKernel, frm: ModelVector, to: ModelVector) -> float:
    """log q(to | frm); -inf when the move is impossible.

    Pure in its arguments and memoized: chains revisit the same
    (kernel, from, to) triples constantly.
    """
    if frm.p != to.p:
        raise InvalidArgumentError("length mismatch")
    p = frm.p
    if kernel.p != p:
        raise InvalidArgumentError("kernel p does not match gamma length")
    diff = frm.bits ^ to.bits
    d = bin(diff).count("1")
    kind = kernel.kind
    if kind in (3, 4):
        z, e, logw = kernel._sizes()
        if z <= d <= e:
            return -math.log(math.comb(p, d)) + logw
        return NEG_INF
    if kind in (1, 2):
        z, e, logw = kernel._sizes()
        if d > e:
            return NEG_INF
        rho = kernel.rho
        changed = [i for i in range(p) if diff >> i & 1]
        keep = [1.0 - rho[i] for i in range(p) if not diff >> i & 1]
        lo = max(z, d)
        es = _elementary_symmetric(keep, e - d)
        total = 0.0
        for S in range(lo, e + 1):
            total += es[S - d] / math.comb(p, S)
        if total <= 0.0:
            return NEG_INF
        log_prod = sum(math.log(rho[i]) for i in changed)
        return log_prod + math.log(total) + logw
    if kind == 5:
        n0 = p - frm.size
        if n0 == 0:
            return 0.0 if d == 0 else NEG_INF
        if d == 1 and diff & frm.bits == 0:
            return -math.log(n0)
        return NEG_INF
    # kind == 6
    n1 = frm.size
    if n1 == 0:
        return 0.0 if d == 0 else NEG_INF
    if d == 1 and diff & frm.bits == diff:
        return -math.log(n1)
    return NEG_INF


@dataclass(frozen=True)
class KernelMixture:
    """Weighted mixture of proposal kernels."""

    entries: Tuple[Tuple[ProposalKernel, float], ...]
    frozen: bool = False

    def __post_init__(self):
        entries = tuple((k, float(w)) for k, w in self.entries)
        if not entries:
            raise InvalidArgumentError("mixture needs at least one entry")
        total = sum(w for _, w in entries)
        if total <= 0 or any(w < 0 for _, w in entries):
            raise InvalidArgumentError("mixture weights must be positive")
        p = entries[0][0].p
        if any(k.p != p for k, _ in entries):
            raise InvalidArgumentError("all kernels must share the same p")
        object.__setattr__(
            self, "entries", tuple((k, w / total) for k, w in entries)
        )

    @classmethod
    def single(cls, kernel: ProposalKernel) -> "KernelMixture":
        return cls(((kernel, 1.0),))

    @property
    def p(self) -> int:
        return self.entries[0][0].p

    @property
    def is_symmetric(self) -> bool:
        return all(k.is_symmetric for k, _ in self.entries)

    @property
    def everywhere_positive(self) -> bool:
        return any(k.everywhere_positive for k, _ in self.entries)


def mixture_propose(
    mix: KernelMixture, gamma: ModelVector, rng: random.Random
) -> Tuple[ModelVector, int, Tuple[int, ...]]:
    """Sample a kernel by weight, then propose from it."""
    u = rng.random()
    acc = 0.0
    idx = len(mix.entries) - 1
    for i, (_, w) in enumerate(mix.entries):
        acc += w
        if u < acc:
            idx = i
            break
    gamma_star, changed = propose(mix.entries[idx][0], gamma, rng)
    return gamma_star, idx, changed


def mixture_log_density(mix: KernelMixture, frm: ModelVector, to: ModelVector) -> float:
    """log of the weight-sum of component densities."""
    best = NEG_INF
    terms = []
    for kernel, w in mix.entries:
        ld = log_density(kernel, frm, to)
        if ld > NEG_INF:
            t = math.log(w) + ld
            terms.append(t)
            if t > best:
                best = t
    if not terms:
        return NEG_INF
    return best + math.log(sum(math.exp(t - best) for t in terms))


DEFAULT_RHO_BOUNDS = (0.001, 0.999)


def update_rho(
    mix: KernelMixture,
    inclusion_estimates: Sequence[float],
    bounds: Tuple[float, float] = DEFAULT_RHO_BOUNDS,
) -> KernelMixture:
    """Set rho_i in all change kernels to the clamped inclusion estimates.

    Returns a frozen mixture; calling again on a frozen mixture raises.
    """
    if mix.frozen:
        raise StateError("rho already frozen after burn-in")
    lo, hi = bounds
    if not 0.0 < lo <= hi < 1.0:
        raise InvalidArgumentError("bounds must satisfy 0 < lo <= hi < 1")
    est = [min(max(float(v), lo), hi) for v in inclusion_estimates]
    if len(est) != mix.p:
        raise InvalidArgumentError("estimate length must equal p")
    new_entries = []
    for kernel, w in mix.entries:
        if kernel.kind in (1, 2):
            kernel = replace(kernel, rho=tuple(est))
        new_entries.append((kernel, w))
    return KernelMixture(tuple(new_entries), frozen=True)
