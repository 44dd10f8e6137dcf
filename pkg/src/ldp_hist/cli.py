"""Command line interface and Monte Carlo harness.

Subcommands:
    simulate    run repeated private-estimation experiments, write a CSV
    bounds      evaluate error-bound curves over an eps grid, write a CSV
    amplify     shuffle-amplification calculators
    protocols   list protocols with their per-message communication cost

The simulate output is one row per repeat with columns
run_id,protocol,eps,k,n,dist,alpha,sampling,seed,linf,l1,l2sq,wall_ms and is
byte-identical for identical configs and seeds at any parallelism level.
Repeat r always uses the seed streams (2r, 2r+1), so worker scheduling
cannot leak into results.  wall_ms is 0 unless timing is switched on, which
keeps the default output deterministic.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from ldp_hist.bounds import CURVE_NAMES, curve
from ldp_hist.core import Dataset, OutOfRegimeError, SeedSpec, derive_stream, empirical_frequencies
from ldp_hist.metrics import all_errors
from ldp_hist.protocols import IntersectionFamilyProtocol, LocalProtocol
from ldp_hist.shuffle import amplified_epsilon, local_epsilon_for
from ldp_hist.transform import make_protocol

THREADS_ENV = "LDP_HIST_THREADS"


def zipf_distribution(k: int, alpha: float) -> np.ndarray:
    """Power-law frequencies p_i proportional to (i + 1)^(-alpha).

    Computed in log space so that extreme exponents degrade gracefully:
    alpha = 0 is exactly uniform and very large alpha an exact point mass
    at symbol 0 rather than a 0/0 overflow.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if alpha < 0:
        raise ValueError(f"need alpha >= 0, got {alpha}")
    logw = -alpha * np.log(np.arange(1, k + 1, dtype=np.float64))
    with np.errstate(under="ignore"):
        w = np.exp(logw - logw.max())
    return w / w.sum()


@dataclass(frozen=True)
class DistributionSpec:
    """Parsed form of a --dist argument."""

    spec: str
    kind: str
    alpha: float | None
    probs: np.ndarray


def parse_distribution(spec: str, k: int) -> DistributionSpec:
    """Accepts uniform | point_mass[:index] | zipf:alpha | file:path."""
    head, _, arg = spec.partition(":")
    if head == "uniform":
        return DistributionSpec(spec, "uniform", 0.0, zipf_distribution(k, 0.0))
    if head == "point_mass":
        idx = int(arg) if arg else 0
        if not 0 <= idx < k:
            raise ValueError(f"point mass index {idx} outside [0, {k})")
        probs = np.zeros(k)
        probs[idx] = 1.0
        return DistributionSpec(spec, "point_mass", None, probs)
    if head == "zipf":
        if not arg:
            raise ValueError("zipf needs an exponent, e.g. zipf:1.5")
        alpha = float(arg)
        return DistributionSpec(spec, "zipf", alpha, zipf_distribution(k, alpha))
    if head == "file":
        probs = np.loadtxt(arg, dtype=np.float64).reshape(-1)
        if probs.size != k:
            raise ValueError(f"{arg} holds {probs.size} frequencies, expected {k}")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"{arg} is not a probability vector")
        return DistributionSpec(spec, "file", None, probs)
    raise ValueError(f"unknown distribution spec {spec!r}")


def rounded_counts(probs: np.ndarray, n: int) -> np.ndarray:
    """Integer histogram closest to n * probs, largest-remainder rounding.

    Ties in the fractional parts break toward smaller symbols so the result
    is deterministic.
    """
    scaled = probs * n
    counts = np.floor(scaled).astype(np.int64)
    short = n - int(counts.sum())
    if short:
        order = np.argsort(-(scaled - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def realize_dataset(dist: DistributionSpec, n: int, mode: str, rng: np.random.Generator | None) -> Dataset:
    k = dist.probs.size
    if mode == "fixed":
        items = np.repeat(np.arange(k, dtype=np.int64), rounded_counts(dist.probs, n))
    elif mode == "iid":
        items = rng.choice(k, size=n, p=dist.probs)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    return Dataset(items, k)


@dataclass
class ExperimentConfig:
    """Everything one simulate invocation depends on."""

    protocol: str = "rappor"
    eps: float = 1.0
    k: int = 16
    n: int = 100
    dist: str = "uniform"
    sampling: str = "auto"
    repeats: int = 1
    seed: int = 0
    parallelism: int = 1
    out: str = "runs.csv"
    include_padding: bool = False
    split_cap: int | None = None
    timing: bool = False

    def resolved_sampling(self, kind: str) -> str:
        if self.sampling != "auto":
            if self.sampling not in ("fixed", "iid"):
                raise ValueError(f"sampling must be auto, fixed or iid, got {self.sampling!r}")
            return self.sampling
        return "fixed" if kind in ("point_mass", "file") else "iid"


RUN_FIELDS = (
    "run_id",
    "protocol",
    "eps",
    "k",
    "n",
    "dist",
    "alpha",
    "sampling",
    "seed",
    "linf",
    "l1",
    "l2sq",
    "wall_ms",
)


@dataclass(frozen=True)
class RunRecord:
    """One Monte Carlo repeat."""

    run_id: int
    protocol: str
    eps: float
    k: int
    n: int
    dist: str
    alpha: float | None
    sampling: str
    seed: int
    linf: float
    l1: float
    l2sq: float
    wall_ms: int

    def row(self) -> list[str]:
        vals = []
        for name in RUN_FIELDS:
            v = getattr(self, name)
            if v is None:
                vals.append("")
            elif isinstance(v, float):
                vals.append(repr(v))
            else:
                vals.append(str(v))
        return vals


class _Runner:
    """Executes repeats; shared with forked workers via module state."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.protocol: LocalProtocol = make_protocol(config.protocol, config.k, config.eps, config.split_cap)
        self.dist = parse_distribution(config.dist, config.k)
        self.mode = config.resolved_sampling(self.dist.kind)
        if config.repeats < 1:
            raise ValueError(f"need repeats >= 1, got {config.repeats}")
        if config.n < 1:
            raise ValueError(f"need n >= 1, got {config.n}")
        self.fixed = (
            realize_dataset(self.dist, config.n, "fixed", None) if self.mode == "fixed" else None
        )
        if config.include_padding and not isinstance(self.protocol, IntersectionFamilyProtocol):
            raise ValueError(f"{self.protocol.name} has no padding symbols to include")

    def run_repeat(self, r: int) -> RunRecord:
        cfg = self.config
        data_rng = derive_stream(SeedSpec(cfg.seed, 2 * r))
        proto_rng = derive_stream(SeedSpec(cfg.seed, 2 * r + 1))
        dataset = self.fixed if self.fixed is not None else realize_dataset(self.dist, cfg.n, "iid", data_rng)
        start = time.perf_counter() if cfg.timing else 0.0
        messages = self.protocol.randomize_batch(dataset.items, proto_rng)
        if cfg.include_padding:
            estimate = self.protocol.aggregate_universe(messages)
            truth = np.zeros(estimate.k)
            truth[: cfg.k] = empirical_frequencies(dataset).values
        else:
            estimate = self.protocol.aggregate(messages)
            truth = empirical_frequencies(dataset).values
        linf, l1, l2sq = all_errors(truth, estimate.values)
        wall = int(round((time.perf_counter() - start) * 1000)) if cfg.timing else 0
        return RunRecord(
            run_id=r,
            protocol=self.protocol.name,
            eps=cfg.eps,
            k=cfg.k,
            n=cfg.n,
            dist=self.dist.spec,
            alpha=self.dist.alpha,
            sampling=self.mode,
            seed=cfg.seed,
            linf=linf,
            l1=l1,
            l2sq=l2sq,
            wall_ms=wall,
        )


_ACTIVE_RUNNER: _Runner | None = None


def _repeat_entry(r: int) -> RunRecord:
    return _ACTIVE_RUNNER.run_repeat(r)


def effective_parallelism(requested: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    workers = max(1, requested)
    if cap:
        workers = min(workers, max(1, int(cap)))
    return workers


def simulate(config: ExperimentConfig) -> list[RunRecord]:
    """All repeats of one experiment, in run_id order."""
    global _ACTIVE_RUNNER
    runner = _Runner(config)
    workers = effective_parallelism(config.parallelism)
    if workers == 1 or config.repeats == 1:
        records = [runner.run_repeat(r) for r in range(config.repeats)]
    else:
        _ACTIVE_RUNNER = runner
        try:
            import multiprocessing as mp

            ctx = mp.get_context("fork")
            chunk = max(1, config.repeats // (4 * workers))
            with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                records = list(pool.map(_repeat_entry, range(config.repeats), chunksize=chunk))
        finally:
            _ACTIVE_RUNNER = None
    records.sort(key=lambda rec: rec.run_id)
    return records


def write_run_csv(records: list[RunRecord], out) -> None:
    close = False
    if out == "-":
        handle = sys.stdout
    elif isinstance(out, (str, Path)):
        handle = open(out, "w", newline="")
        close = True
    else:
        handle = out
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(RUN_FIELDS)
    for rec in records:
        writer.writerow(rec.row())
    if close:
        handle.close()


def run_csv_bytes(records: list[RunRecord]) -> bytes:
    buf = io.StringIO()
    write_run_csv(records, buf)
    return buf.getvalue().encode()


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, steps = spec.split(":")
        grid = np.linspace(float(lo), float(hi), int(steps))
    except Exception as exc:
        raise ValueError(f"grid must look like lo:hi:steps, got {spec!r}") from exc
    if grid.size < 1:
        raise ValueError("grid needs at least one point")
    return grid


def bounds_rows(names: list[str], grid: np.ndarray, k: int, n: int, constant: float) -> list[list[str]]:
    rows = []
    for name in names:
        bc = curve(name, constant=constant)
        for eps in grid:
            rows.append([bc.name, repr(float(eps)), repr(bc.evaluate(float(eps), k, n)), str(bc.constant_known).lower()])
    return rows


def _cmd_simulate(args) -> int:
    config = _merge_config(args)
    try:
        records = simulate(config)
    except (ValueError, OutOfRegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"config: {json.dumps(asdict(config))}", file=sys.stderr)
        return 1
    write_run_csv(records, config.out)
    if config.out != "-":
        print(f"wrote {len(records)} rows to {config.out}", file=sys.stderr)
    return 0


def _merge_config(args) -> ExperimentConfig:
    """CLI flags override JSON config entries, which override defaults."""
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
        unknown = set(base) - {f.name for f in fields(ExperimentConfig)}
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    config = ExperimentConfig(**base)
    overrides = {
        name: getattr(args, name)
        for name in (f.name for f in fields(ExperimentConfig))
        if getattr(args, name, None) is not None
    }
    return replace(config, **overrides)


def _cmd_bounds(args) -> int:
    names = args.curve or list(CURVE_NAMES)
    try:
        grid = _parse_grid(args.eps_grid)
        rows = bounds_rows(names, grid, args.k, args.n, args.constant)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    handle = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(["curve", "eps", "value", "constant_known"])
    writer.writerows(rows)
    if handle is not sys.stdout:
        handle.close()
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def _cmd_amplify(args) -> int:
    try:
        if args.eps_local is not None:
            amplified = amplified_epsilon(args.eps_local, args.delta, args.n)
            print(f"eps_local={args.eps_local!r} delta={args.delta!r} n={args.n}")
            print(f"amplified_eps={amplified!r}")
        else:
            eps_local = local_epsilon_for(args.eps, args.delta, args.n)
            amplified = amplified_epsilon(eps_local, args.delta, args.n)
            print(f"eps_central={args.eps!r} delta={args.delta!r} n={args.n}")
            print(f"eps_local={eps_local!r}")
            print(f"round_trip_eps={amplified!r} (<= requested budget)")
    except (ValueError, OutOfRegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, OutOfRegimeError):
            for key, val in exc.limits.items():
                print(f"  {key} = {val!r}", file=sys.stderr)
        return 1
    return 0


def _cmd_protocols(args) -> int:
    names = ["krr", "rappor", "ss", "hr", "pgr", "split(krr)"]
    print(f"{'protocol':<12} {'bits/message':>12}   message space")
    for name in names:
        try:
            proto = make_protocol(name, args.k, args.eps, args.split_cap)
            print(f"{name:<12} {proto.message_bits:>12}   {proto.message_space}")
        except ValueError as exc:
            print(f"{name:<12} {'-':>12}   unavailable at these parameters: {exc}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldp-hist", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo experiment, write a CSV")
    sim.add_argument("--config", help="JSON file with config defaults; flags override")
    sim.add_argument("--protocol", help="krr | rappor | ss | hr | pgr | split(<base>)")
    sim.add_argument("--eps", type=float)
    sim.add_argument("--k", type=int)
    sim.add_argument("--n", type=int)
    sim.add_argument("--dist", help="uniform | point_mass[:i] | zipf:alpha | file:path")
    sim.add_argument("--sampling", choices=["auto", "fixed", "iid"])
    sim.add_argument("--repeats", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--parallelism", type=int)
    sim.add_argument("--out", help="output CSV path, - for stdout")
    sim.add_argument("--include-padding", dest="include_padding", action="store_const", const=True)
    sim.add_argument("--split-cap", dest="split_cap", type=int)
    sim.add_argument("--timing", action="store_const", const=True,
                     help="record wall_ms per repeat (breaks byte determinism)")
    sim.set_defaults(func=_cmd_simulate)

    bnd = sub.add_parser("bounds", help="evaluate error-bound curves on an eps grid")
    bnd.add_argument("--curve", action="append", help=f"one of {', '.join(CURVE_NAMES)}; repeatable")
    bnd.add_argument("--eps-grid", default="1:8:15", help="lo:hi:steps, inclusive")
    bnd.add_argument("--k", type=int, required=True)
    bnd.add_argument("--n", type=int, required=True)
    bnd.add_argument("--constant", type=float, default=1.0, help="multiplier for unknown-constant curves")
    bnd.add_argument("--out", default="-")
    bnd.set_defaults(func=_cmd_bounds)

    amp = sub.add_parser("amplify", help="shuffle-model amplification calculators")
    amp.add_argument("--eps", type=float, help="desired central budget (inverse direction)")
    amp.add_argument("--eps-local", dest="eps_local", type=float, help="known local budget (forward direction)")
    amp.add_argument("--delta", type=float, required=True)
    amp.add_argument("--n", type=int, required=True)
    amp.set_defaults(func=_cmd_amplify)

    pro = sub.add_parser("protocols", help="list protocols and message sizes")
    pro.add_argument("action", choices=["list"])
    pro.add_argument("--k", type=int, default=1024)
    pro.add_argument("--eps", type=float, default=1.0)
    pro.add_argument("--split-cap", dest="split_cap", type=int)
    pro.set_defaults(func=_cmd_protocols)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "amplify" and (args.eps is None) == (args.eps_local is None):
        print("error: pass exactly one of --eps or --eps-local", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
