"""Renormalized and Monte-Carlo estimators, mass metrics, and replication.

All mass sums run in log space with the running-max trick so posterior
masses of astronomical magnitude remain representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError
from .likelihood import Dataset, PriorSpec, make_scorer
from .models import ENUMERATION_LIMIT, ModelRecord, ModelVector, enumerate_all

NEG_INF = float("-inf")


@dataclass
class Estimates:
    """Posterior model probabilities and marginal inclusion probabilities."""

    model_post: Dict[ModelVector, float]
    inclusion: Tuple[float, ...]
    method: str  # rm | mc


@dataclass
class MassReport:
    """Captured / unexplored unnormalized posterior mass.

    log_captured is always available; the linear I and the fraction C
    require the enumeration oracle's log total.
    """

    log_captured: float
    log_total: Optional[float] = None

    @property
    def C(self) -> Optional[float]:
        if self.log_total is None:
            return None
        if self.log_captured == NEG_INF:
            return 0.0
        return min(math.exp(self.log_captured - self.log_total), 1.0)

    @property
    def log_unexplored(self) -> Optional[float]:
        if self.log_total is None:
            return None
        ratio = self.log_captured - self.log_total
        if ratio >= 0.0:
            return NEG_INF
        return self.log_total + math.log1p(-math.exp(ratio))

    @property
    def I(self) -> Optional[float]:
        lu = self.log_unexplored
        if lu is None:
            return None
        try:
            return math.exp(lu)
        except OverflowError:
            return math.inf


def _normalize_log(pairs: List[Tuple[ModelVector, float]]):
    best = max(v for _, v in pairs)
    if best == NEG_INF:
        raise InvalidArgumentError("all log targets are -inf")
    total = best + math.log(sum(math.exp(v - best) for _, v in pairs if v > NEG_INF))
    return {g: math.exp(v - total) for g, v in pairs if v > NEG_INF}, total


def _inclusion_from_post(model_post: Mapping[ModelVector, float], p: int):
    incl = [0.0] * p
    for g, prob in model_post.items():
        bits = g.bits
        i = 0
        while bits:
            if bits & 1:
                incl[i] += prob
            bits >>= 1
            i += 1
    return tuple(min(v, 1.0) for v in incl)


def rm_estimates(visited: Mapping[ModelVector, ModelRecord]) -> Estimates:
    """Renormalized estimates over the visited model set V."""
    if not visited:
        raise InvalidArgumentError("visited set is empty")
    pairs = [(g, rec.log_target) for g, rec in visited.items()]
    p = pairs[0][0].p
    model_post, _ = _normalize_log(pairs)
    return Estimates(model_post, _inclusion_from_post(model_post, p), "rm")


def mc_estimates(samples: Sequence) -> Estimates:
    """Frequency estimates from post-burn-in chain samples.

    Accepts ModelVectors or objects with a `gamma` attribute.
    """
    gammas = [getattr(s, "gamma", s) for s in samples]
    if not gammas:
        raise InvalidArgumentError("no samples")
    p = gammas[0].p
    counts: Dict[ModelVector, int] = {}
    for g in gammas:
        counts[g] = counts.get(g, 0) + 1
    W = len(gammas)
    model_post = {g: c / W for g, c in counts.items()}
    return Estimates(model_post, _inclusion_from_post(model_post, p), "mc")


def log_mass(visited: Iterable) -> float:
    """log sum of exp(log_target) over records or (gamma, record) pairs."""
    values = []
    for item in visited:
        rec = item[1] if isinstance(item, tuple) else item
        values.append(rec.log_target if hasattr(rec, "log_target") else float(rec))
    if not values:
        return NEG_INF
    best = max(values)
    if best == NEG_INF:
        return NEG_INF
    return best + math.log(sum(math.exp(v - best) for v in values))


def mass_metrics(
    visited: Mapping[ModelVector, ModelRecord],
    oracle_log_total: Optional[float] = None,
) -> MassReport:
    """Captured-mass report for a visited set V."""
    lc = log_mass(visited.items()) if visited else NEG_INF
    return MassReport(log_captured=lc, log_total=oracle_log_total)


def enumerate_log_total(data: Dataset, prior: PriorSpec) -> float:
    """Exact log of the summed unnormalized posterior over the whole space."""
    scorer = make_scorer(data, prior)
    best = NEG_INF
    acc = 0.0
    # Streaming two-pass-free log-sum-exp with a running max.
    for g in enumerate_all(data.p):
        ml, lp = scorer(g)
        v = ml + lp
        if v == NEG_INF:
            continue
        if v <= best:
            acc += math.exp(v - best)
        else:
            acc = acc * math.exp(best - v) + 1.0 if best > NEG_INF else 1.0
            best = v
    if best == NEG_INF:
        return NEG_INF
    return best + math.log(acc)


def top_oracle(
    data: Dataset, prior: PriorSpec, budget: int
) -> Tuple[Dict[ModelVector, ModelRecord], float]:
    """The m best models by log target, plus the exact log total mass."""
    import heapq

    if data.p > ENUMERATION_LIMIT:
        raise ResourceLimitError(
            f"p={data.p} exceeds enumeration limit {ENUMERATION_LIMIT}"
        )
    if budget < 1:
        raise InvalidArgumentError("budget must be >= 1")
    scorer = make_scorer(data, prior)
    heap: List[Tuple[float, int, float, float]] = []
    best = NEG_INF
    acc = 0.0
    for g in enumerate_all(data.p):
        ml, lp = scorer(g)
        v = ml + lp
        if v > NEG_INF:
            if v <= best:
                acc += math.exp(v - best)
            else:
                acc = acc * math.exp(best - v) + 1.0 if best > NEG_INF else 1.0
                best = v
        entry = (v, g.bits, ml, lp)
        if len(heap) < budget:
            heapq.heappush(heap, entry)
        elif entry > heap[0]:
            heapq.heapreplace(heap, entry)
    log_total = best + math.log(acc) if best > NEG_INF else NEG_INF
    top = {
        ModelVector(bits, data.p): ModelRecord(ml, lp, 0)
        for _, bits, ml, lp in heap
    }
    return top, log_total


@dataclass
class ReplicationReport:
    """Bias/RMSE of inclusion estimates and unexplored mass over R runs.

    Inclusion rows are scaled by 1e2 and the I(gamma) row by 1e5, matching
    the conventional reporting scale.
    """

    quantities: List[str]
    bias: List[float]
    rmse: List[float]
    mean_tot: float
    mean_eff: float
    mean_C: Optional[float]

    INCLUSION_SCALE = 1e2
    MASS_SCALE = 1e5


def replicate(
    run_fn: Callable[[int], Tuple[Estimates, MassReport, int, int]],
    replications: int,
    truth_inclusion: Sequence[float],
    base_seed: int = 0,
) -> ReplicationReport:
    """Run `run_fn(seed)` R times and tabulate bias/RMSE against truth.

    run_fn returns (estimates, mass report, tot, eff) for one replication;
    per-replication seeds are base_seed + index.
    """
    if replications < 1:
        raise InvalidArgumentError("replications must be >= 1")
    p = len(truth_inclusion)
    incl_err = np.zeros((replications, p))
    mass_err = np.zeros(replications)
    tots = np.zeros(replications)
    effs = np.zeros(replications)
    cs: List[float] = []
    for r in range(replications):
        est, mass, tot, eff = run_fn(base_seed + r)
        incl_err[r] = np.asarray(est.inclusion) - np.asarray(truth_inclusion)
        mass_err[r] = mass.I if mass.I is not None else math.nan
        tots[r] = tot
        effs[r] = eff
        if mass.C is not None:
            cs.append(mass.C)
    quantities = [f"gamma_{j + 1}" for j in range(p)] + ["I(gamma)"]
    bias = [
        float(np.mean(incl_err[:, j])) * ReplicationReport.INCLUSION_SCALE
        for j in range(p)
    ]
    rmse = [
        float(np.sqrt(np.mean(incl_err[:, j] ** 2)))
        * ReplicationReport.INCLUSION_SCALE
        for j in range(p)
    ]
    bias.append(float(np.nanmean(mass_err)) * ReplicationReport.MASS_SCALE)
    rmse.append(
        float(np.sqrt(np.nanmean(mass_err**2))) * ReplicationReport.MASS_SCALE
    )
    return ReplicationReport(
        quantities=quantities,
        bias=bias,
        rmse=rmse,
        mean_tot=float(np.mean(tots)),
        mean_eff=float(np.mean(effs)),
        mean_C=float(np.mean(cs)) if cs else None,
    )
