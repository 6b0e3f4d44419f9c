"""Run configuration: flat key=value files and benchmark mixture presets.

The config format is plain text, one `key=value` per line, `#` comments,
with dotted section prefixes (e.g. `sampler.rho=0.05`,
`qg.type4.weight=0.3348`, `qo.sa.t0=10`).  Kernel sections are `qg`, `ql`,
`qr`, and `qo.<sa|greedy|mtmcmc>`; inside a kernel section each
`type<k>` sub-key configures one mixture component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .errors import ConfigError
from .likelihood import PriorSpec
from .optimizers import OptimizerSpec
from .proposals import KernelMixture, ProposalKernel
from .sampler import SamplerConfig

# Benchmark mixture frequencies: per-kernel weights for the ordinary
# proposal q_g, the optimizer neighborhoods, the large-jump and the
# randomization kernels of the p=15 Gaussian benchmark.
BENCH_QG_WEIGHTS = {1: 0.1176, 4: 0.3348, 3: 0.2772, 5: 0.0199, 6: 0.2453, 2: 0.0042}
BENCH_SA_WEIGHTS = {1: 0.0788, 4: 0.3942, 3: 0.1908, 5: 0.1928, 6: 0.1385, 2: 0.0040}
BENCH_GREEDY_WEIGHTS = {
    1: 0.0190, 4: 0.3661, 3: 0.2111, 5: 0.2935, 6: 0.1046, 2: 0.0044,
}
BENCH_MT_WEIGHTS = {1: 0.2866, 4: 0.1305, 3: 0.2329, 5: 0.1369, 6: 0.2087, 2: 0.0040}
BENCH_QO_WEIGHTS = {"sa": 0.5553, "greedy": 0.2404, "mtmcmc": 0.2043}
BENCH_JUMP_PROBABILITY = 0.0164
BENCH_QR_RHO = 0.001


def _bench_kernel(kind: int, p: int, rho_init: float) -> ProposalKernel:
    """One benchmark mixture component, sizes clamped to small p."""
    small = max(1, min(2, p - 1))
    if kind in (1, 3):
        return ProposalKernel(
            kind,
            p,
            size_range=(small, small),
            rho=(rho_init,) * p if kind == 1 else None,
        )
    if kind == 4:
        return ProposalKernel(kind, p, size=small)
    if kind == 2:
        return ProposalKernel(kind, p, size=p, rho=(rho_init,) * p)
    return ProposalKernel(kind, p)


def _bench_mixture(weights: Dict[int, float], p: int, rho_init: float) -> KernelMixture:
    return KernelMixture(
        tuple((_bench_kernel(k, p, rho_init), w) for k, w in weights.items())
    )


def benchmark_config(
    p: int = 15,
    budget_proposals: Optional[int] = 3276,
    budget_unique: Optional[int] = None,
    iterations: Optional[int] = None,
    seed: int = 0,
    rho_init: float = 0.5,
    width: int = 1,
    algorithm: str = "mjmcmc",
) -> SamplerConfig:
    """The full benchmark sampler configuration for the p=15 example.

    Ordinary steps are single-try Metropolis-Hastings through the q_g
    mixture; the
    large jump swaps 4 indices; local optimizers are simulated annealing,
    stochastic greedy, and local multiple-try MCMC with their own
    neighborhood mixtures; randomization is a full-width change kernel
    with rho = 0.001.
    """
    jump_size = max(1, min(4, p - 1))
    q_l = KernelMixture.single(ProposalKernel(4, p, size=jump_size))
    q_r = KernelMixture.single(
        ProposalKernel(2, p, size=p, rho=(BENCH_QR_RHO,) * p)
    )
    q_o = (
        (
            OptimizerSpec(
                kind="sa",
                neighborhood=_bench_mixture(BENCH_SA_WEIGHTS, p, rho_init),
                sa_t0=10.0,
                sa_tf=14e-5,
                sa_cool=3.0,
                sa_steps_per_temp=4,
            ),
            BENCH_QO_WEIGHTS["sa"],
        ),
        (
            OptimizerSpec(
                kind="greedy",
                neighborhood=_bench_mixture(BENCH_GREEDY_WEIGHTS, p, rho_init),
                greedy_steps=p,
                local_stop=False,
                first_improving=True,
            ),
            BENCH_QO_WEIGHTS["greedy"],
        ),
        (
            OptimizerSpec(
                kind="local-mtmcmc",
                neighborhood=_bench_mixture(BENCH_MT_WEIGHTS, p, rho_init),
                mt_tries=4,
                mt_steps=p,
            ),
            BENCH_QO_WEIGHTS["mtmcmc"],
        ),
    )
    return SamplerConfig(
        q_g=_bench_mixture(BENCH_QG_WEIGHTS, p, rho_init),
        q_l=q_l,
        q_o=q_o,
        q_r=q_r,
        iterations=iterations,
        budget_proposals=budget_proposals,
        budget_unique=budget_unique,
        jump_probability=BENCH_JUMP_PROBABILITY,
        acceptance_variant="last-randomization",
        mtmcmc_tries=1,
        seed=seed,
        width=width,
        algorithm=algorithm,
    )


@dataclass(frozen=True)
class RunConfig:
    """Parsed run configuration for the CLI."""

    algorithm: str = "mjmcmc"
    data_generator: Optional[str] = None
    data_path: Optional[str] = None
    data_seed: int = 1
    data_family: str = "gaussian"
    prior: PriorSpec = field(default_factory=PriorSpec)
    jump_probability: Optional[float] = None
    acceptance_variant: str = "last-randomization"
    mtmcmc_tries: int = 1
    width: int = 1
    iterations: Optional[int] = None
    budget_proposals: Optional[int] = None
    budget_unique: Optional[int] = None
    burn_in: Optional[int] = None
    adapt_rho: bool = True
    seed: int = 0
    replications: int = 1
    top_budget: Optional[int] = None
    top_k: int = 10
    output: Optional[str] = None
    kernel_keys: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.algorithm not in ("mjmcmc", "mc3", "rs", "top", "enumerate"):
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.data_generator is None and self.data_path is None:
            raise ConfigError("config needs data.generator or data.path")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        # Canonical key order makes parse(emit(cfg)) == cfg.
        object.__setattr__(self, "kernel_keys", tuple(sorted(self.kernel_keys)))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_config(cfg: RunConfig) -> str:
    """Canonical key=value text; parse(emit(cfg)) round-trips."""
    lines = [f"algorithm={cfg.algorithm}"]
    if cfg.data_generator is not None:
        lines.append(f"data.generator={cfg.data_generator}")
    if cfg.data_path is not None:
        lines.append(f"data.path={cfg.data_path}")
    lines.append(f"data.seed={cfg.data_seed}")
    lines.append(f"data.family={cfg.data_family}")
    lines.append(f"prior.criterion={cfg.prior.criterion}")
    lines.append(f"prior.g={_fmt(cfg.prior.g)}")
    mp = cfg.prior.model_prior
    lines.append(f"prior.model_prior={mp[0]}")
    if mp[0] == "binomial":
        lines.append(f"prior.q={_fmt(mp[1])}")
    else:
        lines.append(f"prior.alpha={_fmt(mp[1])}")
        lines.append(f"prior.beta={_fmt(mp[2])}")
    if cfg.jump_probability is not None:
        lines.append(f"sampler.rho={_fmt(cfg.jump_probability)}")
    lines.append(f"sampler.variant={cfg.acceptance_variant}")
    lines.append(f"sampler.tries={cfg.mtmcmc_tries}")
    lines.append(f"sampler.width={cfg.width}")
    if cfg.iterations is not None:
        lines.append(f"run.iterations={cfg.iterations}")
    if cfg.budget_proposals is not None:
        lines.append(f"run.proposals={cfg.budget_proposals}")
    if cfg.budget_unique is not None:
        lines.append(f"run.unique={cfg.budget_unique}")
    if cfg.burn_in is not None:
        lines.append(f"sampler.burn_in={cfg.burn_in}")
    lines.append(f"sampler.adapt_rho={_fmt(cfg.adapt_rho)}")
    lines.append(f"run.seed={cfg.seed}")
    lines.append(f"run.replications={cfg.replications}")
    if cfg.top_budget is not None:
        lines.append(f"top.budget={cfg.top_budget}")
    lines.append(f"report.top_k={cfg.top_k}")
    if cfg.output is not None:
        lines.append(f"output={cfg.output}")
    for k, v in cfg.kernel_keys:
        lines.append(f"{k}={v}")
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> RunConfig:
    """Parse the flat key=value format into a RunConfig."""
    kv: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in kv:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        kv[key] = value

    def take(key: str, default=None) -> Optional[str]:
        return kv.pop(key, default)

    def take_int(key: str, default=None) -> Optional[int]:
        v = take(key)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError as e:
            raise ConfigError(f"{key}: not an integer: {v!r}") from e

    def take_float(key: str, default=None) -> Optional[float]:
        v = take(key)
        if v is None:
            return default
        try:
            return float(v)
        except ValueError as e:
            raise ConfigError(f"{key}: not a number: {v!r}") from e

    def take_bool(key: str, default: bool) -> bool:
        v = take(key)
        if v is None:
            return default
        if v.lower() in ("true", "1", "yes"):
            return True
        if v.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key}: not a boolean: {v!r}")

    mp_kind = take("prior.model_prior", "binomial")
    if mp_kind == "binomial":
        model_prior = ("binomial", take_float("prior.q", 0.5))
    elif mp_kind == "beta-binomial":
        model_prior = (
            "beta-binomial",
            take_float("prior.alpha", 1.0),
            take_float("prior.beta", 1.0),
        )
    else:
        raise ConfigError(f"prior.model_prior: unknown value {mp_kind!r}")
    try:
        prior = PriorSpec(
            criterion=take("prior.criterion", "gprior-exact"),
            g=take_float("prior.g", 100.0),
            model_prior=model_prior,
        )
    except Exception as e:
        raise ConfigError(str(e)) from e

    cfg_kwargs = dict(
        algorithm=take("algorithm", "mjmcmc"),
        data_generator=take("data.generator"),
        data_path=take("data.path"),
        data_seed=take_int("data.seed", 1),
        data_family=take("data.family", "gaussian"),
        prior=prior,
        jump_probability=take_float("sampler.rho"),
        acceptance_variant=take("sampler.variant", "last-randomization"),
        mtmcmc_tries=take_int("sampler.tries", 1),
        width=take_int("sampler.width", 1),
        iterations=take_int("run.iterations"),
        budget_proposals=take_int("run.proposals"),
        budget_unique=take_int("run.unique"),
        burn_in=take_int("sampler.burn_in"),
        adapt_rho=take_bool("sampler.adapt_rho", True),
        seed=take_int("run.seed", 0),
        replications=take_int("run.replications", 1),
        top_budget=take_int("top.budget"),
        top_k=take_int("report.top_k", 10),
        output=take("output"),
    )
    kernel_keys = []
    unknown = []
    for key in sorted(kv):
        if key.split(".", 1)[0] in ("qg", "ql", "qr", "qo"):
            kernel_keys.append((key, kv[key]))
        else:
            unknown.append(key)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg_kwargs["kernel_keys"] = tuple(kernel_keys)
    return RunConfig(**cfg_kwargs)


def _parse_kernel_section(
    keys: Dict[str, str], section: str, p: int
) -> Optional[KernelMixture]:
    """Build a mixture from e.g. qg.type4.weight / qg.type4.size keys."""
    prefix = section + ".type"
    kinds: Dict[int, Dict[str, str]] = {}
    for key, value in keys.items():
        if not key.startswith(prefix):
            continue
        rest = key[len(prefix):]
        kind_s, _, attr = rest.partition(".")
        try:
            kind = int(kind_s)
        except ValueError as e:
            raise ConfigError(f"bad kernel key {key!r}") from e
        kinds.setdefault(kind, {})[attr or "weight"] = value
    if not kinds:
        return None
    entries = []
    for kind, attrs in sorted(kinds.items()):
        try:
            weight = float(attrs.get("weight", "1"))
        except ValueError as e:
            raise ConfigError(f"{section}.type{kind}.weight: bad number") from e
        if weight <= 0:
            continue
        kwargs: Dict[str, object] = {}
        if "size" in attrs:
            kwargs["size"] = int(attrs["size"])
        if "smin" in attrs or "smax" in attrs:
            z = int(attrs.get("smin", attrs.get("smax")))
            e = int(attrs.get("smax", attrs.get("smin")))
            kwargs["size_range"] = (z, e)
        if "rho" in attrs:
            kwargs["rho"] = (float(attrs["rho"]),) * p
        if kind in (1, 3) and "size_range" not in kwargs:
            if "size" in kwargs:
                s = kwargs.pop("size")
                kwargs["size_range"] = (s, s)
            else:
                kwargs["size_range"] = (1, max(1, min(2, p - 1)))
        if kind in (2, 4) and "size" not in kwargs:
            kwargs["size"] = p if kind == 2 else max(1, min(2, p - 1))
        if kind in (1, 2) and "rho" not in kwargs:
            kwargs["rho"] = (0.5,) * p
        try:
            entries.append((ProposalKernel(kind, p, **kwargs), weight))
        except Exception as e:
            raise ConfigError(f"{section}.type{kind}: {e}") from e
    if not entries:
        raise ConfigError(f"{section}: no positively weighted kernels")
    return KernelMixture(tuple(entries))


def _parse_optimizers(
    keys: Dict[str, str], p: int, rho_init: float
) -> Optional[Tuple[Tuple[OptimizerSpec, float], ...]]:
    names = {"sa", "greedy", "mtmcmc"}
    found = {k.split(".")[1] for k in keys if k.startswith("qo.")}
    if not found:
        return None
    bad = found - names
    if bad:
        raise ConfigError(f"unknown optimizer sections: {', '.join(sorted(bad))}")
    defaults = {
        "sa": _bench_mixture(BENCH_SA_WEIGHTS, p, rho_init),
        "greedy": _bench_mixture(BENCH_GREEDY_WEIGHTS, p, rho_init),
        "mtmcmc": _bench_mixture(BENCH_MT_WEIGHTS, p, rho_init),
    }
    out = []
    for name in ("sa", "greedy", "mtmcmc"):
        if name not in found:
            continue
        section = {k[len(f"qo.{name}."):]: v for k, v in keys.items()
                   if k.startswith(f"qo.{name}.")}
        weight = float(section.pop("weight", "1"))
        if weight <= 0:
            continue
        nested = {f"k.{k}": v for k, v in section.items() if k.startswith("type")}
        neighborhood = _parse_kernel_section(nested, "k", p) or defaults[name]
        for k in list(section):
            if k.startswith("type"):
                section.pop(k)
        if name == "sa":
            spec = OptimizerSpec(
                kind="sa",
                neighborhood=neighborhood,
                sa_t0=float(section.pop("t0", "10")),
                sa_tf=float(section.pop("tf", repr(14e-5))),
                sa_cool=float(section.pop("dt", "3")),
                sa_steps_per_temp=int(section.pop("St", section.pop("st", "4"))),
            )
        elif name == "greedy":
            spec = OptimizerSpec(
                kind="greedy",
                neighborhood=neighborhood,
                greedy_steps=int(section.pop("S", section.pop("s", str(p)))),
                local_stop=section.pop("LS", section.pop("ls", "false")).lower()
                in ("true", "1", "t"),
                first_improving=section.pop("FI", section.pop("fi", "true")).lower()
                in ("true", "1", "t"),
                deterministic=section.pop("deterministic", "false").lower()
                in ("true", "1"),
            )
        else:
            spec = OptimizerSpec(
                kind="local-mtmcmc",
                neighborhood=neighborhood,
                mt_tries=int(section.pop("size", "4")),
                mt_steps=int(section.pop("steps", str(p))),
            )
        if section:
            raise ConfigError(
                f"qo.{name}: unknown keys {', '.join(sorted(section))}"
            )
        out.append((spec, weight))
    if not out:
        raise ConfigError("qo: no positively weighted optimizers")
    return tuple(out)


def build_sampler_config(cfg: RunConfig, p: int, rho_init: float = 0.5) -> SamplerConfig:
    """Materialize the SamplerConfig for a dataset with p covariates.

    Kernel sections absent from the config fall back to the benchmark
    mixtures scaled to p.
    """
    keys = dict(cfg.kernel_keys)
    base = benchmark_config(
        p=p,
        budget_proposals=cfg.budget_proposals,
        budget_unique=cfg.budget_unique,
        iterations=cfg.iterations,
        seed=cfg.seed,
        rho_init=rho_init,
        width=cfg.width,
        algorithm=cfg.algorithm if cfg.algorithm in ("mjmcmc", "mc3", "rs") else "mjmcmc",
    )
    q_g = _parse_kernel_section(keys, "qg", p) or base.q_g
    q_l = _parse_kernel_section(keys, "ql", p) or base.q_l
    q_r = _parse_kernel_section(keys, "qr", p) or base.q_r
    q_o = _parse_optimizers(keys, p, rho_init) or base.q_o
    jump = (
        cfg.jump_probability
        if cfg.jump_probability is not None
        else BENCH_JUMP_PROBABILITY
    )
    try:
        return replace(
            base,
            q_g=q_g,
            q_l=q_l,
            q_r=q_r,
            q_o=q_o,
            jump_probability=jump,
            acceptance_variant=cfg.acceptance_variant,
            mtmcmc_tries=cfg.mtmcmc_tries,
            burn_in=cfg.burn_in,
            adapt_rho=cfg.adapt_rho,
        )
    except ConfigError:
        raise
    except Exception as e:
        raise ConfigError(str(e)) from e
