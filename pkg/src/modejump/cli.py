"""Batch command-line front end.

Verbs: gen-data, run, enumerate, compare, report.  All reports are
tab-separated text with fixed headers, floating point printed with 17
significant digits so repeated invocations are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 resource limit exceeded.  The MODEJUMP_THREADS environment variable
caps worker fan-out; it never changes the logical proposal sequence, so
results are identical at any setting.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .configs import RunConfig, build_sampler_config, parse_config
from .datagen import generate_example1, generate_small_fixture
from .errors import (
    ConfigError,
    DataError,
    InvalidArgumentError,
    ResourceLimitError,
)
from .estimators import (
    Estimates,
    MassReport,
    enumerate_log_total,
    mass_metrics,
    mc_estimates,
    replicate,
    rm_estimates,
    top_oracle,
)
from .likelihood import Dataset, make_scorer
from .models import ENUMERATION_LIMIT, ModelCache, ModelVector, enumerate_all
from .sampler import RunResult, run as run_chain

_G17 = "{:.17g}"
_TRUTH_ENUM_LIMIT = 16  # full enumeration for truth columns up to 2^16 models


def worker_cap() -> int:
    """Worker fan-out cap from MODEJUMP_THREADS (>= 1)."""
    raw = os.environ.get("MODEJUMP_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def load_csv(path: str) -> Dataset:
    """Load a dataset: header row, `y` response, optional `offset`."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    if "y" not in header:
        raise DataError(f"{path}: missing required column 'y'")
    y_col = header.index("y")
    off_col = header.index("offset") if "offset" in header else None
    x_cols = [i for i in range(len(header)) if i not in (y_col, off_col)]
    width = len(header)
    y, X, off = [], [], []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DataError(f"{path}: row {r} has {len(row)} cells, expected {width}")
        vals = []
        for c, cell in enumerate(row):
            try:
                vals.append(float(cell))
            except ValueError as e:
                raise DataError(
                    f"{path}: row {r}, column {header[c]!r}: "
                    f"non-numeric cell {cell!r}"
                ) from e
        y.append(vals[y_col])
        X.append([vals[i] for i in x_cols])
        if off_col is not None:
            off.append(vals[off_col])
    try:
        return Dataset(
            y=np.array(y),
            X=np.array(X),
            offset=np.array(off) if off else None,
        )
    except InvalidArgumentError as e:
        raise DataError(f"{path}: {e}") from e


def write_csv(data: Dataset, path: str) -> None:
    header = ["y"] + [f"x{j + 1}" for j in range(data.p)]
    if data.offset is not None:
        header.append("offset")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t in range(data.T):
            row = [_G17.format(data.y[t])]
            row += [_G17.format(v) for v in data.X[t]]
            if data.offset is not None:
                row.append(_G17.format(data.offset[t]))
            w.writerow(row)


def _make_dataset(cfg: RunConfig) -> Dataset:
    if cfg.data_path is not None:
        data = load_csv(cfg.data_path)
        if cfg.data_family != "gaussian":
            data = Dataset(
                y=data.y, X=data.X, family=cfg.data_family, offset=data.offset
            )
        return data
    gen = cfg.data_generator
    if gen == "example1":
        return generate_example1(cfg.data_seed)
    if gen == "small":
        return generate_small_fixture(
            p=10, T=1000, structure="binary", seed=cfg.data_seed
        )
    raise ConfigError(f"unknown generator {gen!r}")


def _truth(data: Dataset, cfg: RunConfig):
    """(exact inclusion probabilities, log total mass) when enumerable."""
    if data.p > _TRUTH_ENUM_LIMIT:
        return None, None
    scorer = make_scorer(data, cfg.prior)
    from .models import ModelRecord

    visited = {}
    for g in enumerate_all(data.p):
        ml, lp = scorer(g)
        visited[g] = ModelRecord(ml, lp, 0)
    est = rm_estimates(visited)
    from .estimators import log_mass

    return est, log_mass(visited.items())


def _write_tsv(path: Path, header: List[str], rows: List[List[str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


def _g(v: Optional[float]) -> str:
    if v is None:
        return "NA"
    return _G17.format(v)


def _write_reports(
    outdir: Path,
    algorithm: str,
    rm: Optional[Estimates],
    mc: Optional[Estimates],
    truth: Optional[Estimates],
    mass: MassReport,
    tot: int,
    eff: int,
    counts: Dict[str, Tuple[int, int]],
    top_k: int,
    records=None,
) -> None:
    p = len(rm.inclusion) if rm else (len(truth.inclusion) if truth else 0)
    rows = []
    for j in range(p):
        rows.append(
            [
                str(j + 1),
                _g(rm.inclusion[j] if rm else None),
                _g(mc.inclusion[j] if mc else None),
                _g(truth.inclusion[j] if truth else None),
            ]
        )
    _write_tsv(outdir / "inclusion.tsv", ["index", "rm", "mc", "truth"], rows)

    model_rows = []
    if rm is not None and records is not None:
        ranked = sorted(rm.model_post.items(), key=lambda kv: -kv[1])[:top_k]
        for g, prob in ranked:
            rec = records[g]
            model_rows.append(
                [
                    g.to_string(),
                    _g(rec.log_mlik),
                    _g(rec.log_prior),
                    _g(prob),
                ]
            )
    _write_tsv(
        outdir / "models.tsv",
        ["model", "log_mlik", "log_prior", "posterior"],
        model_rows,
    )

    srows = [
        ["algorithm", algorithm],
        ["tot", str(tot)],
        ["eff", str(eff)],
        ["C", _g(mass.C)],
        ["I", _g(mass.I)],
        ["log_captured", _g(mass.log_captured)],
        ["log_total", _g(mass.log_total)],
    ]
    for kind in sorted(counts):
        att, acc = counts[kind]
        srows.append([f"accept_rate.{kind}", _g(acc / att if att else 0.0)])
        srows.append([f"attempts.{kind}", str(att)])
    _write_tsv(outdir / "summary.tsv", ["key", "value"], srows)


def _single_run(
    cfg: RunConfig, data: Dataset, seed: int, cache: Optional[ModelCache] = None
) -> Tuple[RunResult, Estimates, Estimates]:
    sampler_cfg = replace(build_sampler_config(cfg, data.p), seed=seed)
    result = run_chain(sampler_cfg, data, cfg.prior, cache)
    rm = rm_estimates(result.visited)
    mc = mc_estimates(result.samples[result.burn_in_samples:])
    return result, rm, mc


def cmd_run(cfg: RunConfig, outdir: Path, report_only: bool = False) -> None:
    data = _make_dataset(cfg)
    truth, log_total = _truth(data, cfg)
    algorithm = cfg.algorithm

    if algorithm == "enumerate":
        if data.p > ENUMERATION_LIMIT:
            raise ResourceLimitError(
                f"p={data.p} exceeds enumeration limit {ENUMERATION_LIMIT}"
            )
        if truth is None:
            truth, log_total = _truth(
                data, replace(cfg)
            )  # pragma: no cover - gate above
        scorer = make_scorer(data, cfg.prior)
        from .models import ModelRecord

        records = {}
        for g in enumerate_all(data.p):
            ml, lp = scorer(g)
            records[g] = ModelRecord(ml, lp, 0)
        mass = mass_metrics(records, log_total)
        _write_reports(
            outdir, "enumerate", truth, None, truth, mass, 1 << data.p,
            1 << data.p, {}, cfg.top_k, records,
        )
        return

    if algorithm == "top":
        budget = cfg.top_budget or cfg.budget_proposals
        if budget is None:
            raise ConfigError("top needs top.budget or run.proposals")
        top, lt = top_oracle(data, cfg.prior, budget)
        rm = rm_estimates(top)
        mass = mass_metrics(top, lt)
        _write_reports(
            outdir, "top", rm, None, truth, mass, budget, len(top), {},
            cfg.top_k, top,
        )
        return

    # chain algorithms: mjmcmc | mc3 | rs
    result, rm, mc = _single_run(cfg, data, cfg.seed)
    mass = mass_metrics(result.visited, log_total)
    _write_reports(
        outdir, algorithm, rm, mc, truth, mass, result.tot, result.eff,
        result.counts, cfg.top_k, result.visited,
    )

    if cfg.replications > 1 and truth is not None:
        cache = ModelCache()

        def one(seed: int):
            res, rm_r, _ = _single_run(cfg, data, seed, cache)
            return (
                rm_r,
                mass_metrics(res.visited, log_total),
                res.tot,
                res.eff,
            )

        report = replicate(one, cfg.replications, truth.inclusion, cfg.seed)
        rows = [
            [q, _g(b), _g(r)]
            for q, b, r in zip(report.quantities, report.bias, report.rmse)
        ]
        rows.append(["mean_tot", _g(report.mean_tot), ""])
        rows.append(["mean_eff", _g(report.mean_eff), ""])
        rows.append(["mean_C", _g(report.mean_C), ""])
        _write_tsv(outdir / "biasrmse.tsv", ["quantity", "bias", "rmse"], rows)


def cmd_compare(cfg: RunConfig, outdir: Path) -> None:
    data = _make_dataset(cfg)
    _, log_total = _truth(data, cfg)
    rows = []
    for algorithm in ("mjmcmc", "mc3", "rs"):
        acfg = replace(cfg, algorithm=algorithm)
        cs, effs, tots = [], [], []
        cache = ModelCache()
        for r in range(cfg.replications):
            res, _, _ = _single_run(acfg, data, cfg.seed + r, cache)
            mass = mass_metrics(res.visited, log_total)
            if mass.C is not None:
                cs.append(mass.C)
            effs.append(res.eff)
            tots.append(res.tot)
        rows.append(
            [
                algorithm,
                _g(float(np.median(cs)) if cs else None),
                _g(float(np.median(effs))),
                _g(float(np.median(tots))),
                str(cfg.replications),
            ]
        )
    _write_tsv(
        outdir / "compare.tsv",
        ["algorithm", "median_C", "median_eff", "median_tot", "replications"],
        rows,
    )


def _load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text)


def _outdir(cfg: RunConfig, override: Optional[str]) -> Path:
    out = override or cfg.output or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="modejump",
        description="Mode jumping MCMC for Bayesian variable selection",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_gen = sub.add_parser("gen-data", help="write a generated dataset as CSV")
    p_gen.add_argument("--generator", required=True, choices=["example1", "small"])
    p_gen.add_argument("--seed", type=int, default=1)
    p_gen.add_argument("--out", required=True)

    for verb in ("run", "enumerate", "compare", "report"):
        sp = sub.add_parser(verb)
        sp.add_argument("--config", required=True)
        sp.add_argument("--output", default=None)

    args = parser.parse_args(argv)
    try:
        if args.verb == "gen-data":
            if args.generator == "example1":
                data = generate_example1(args.seed)
            else:
                data = generate_small_fixture(
                    p=10, T=1000, structure="binary", seed=args.seed
                )
            write_csv(data, args.out)
            return 0
        cfg = _load_config(args.config)
        outdir = _outdir(cfg, args.output)
        if args.verb == "enumerate":
            cfg = replace(cfg, algorithm="enumerate")
            cmd_run(cfg, outdir)
        elif args.verb == "compare":
            cmd_compare(cfg, outdir)
        elif args.verb == "report":
            if cfg.replications < 2:
                cfg = replace(cfg, replications=100)
            cmd_run(cfg, outdir)
        else:
            cmd_run(cfg, outdir)
        return 0
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except ResourceLimitError as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
