"""Command-line entry point: ``spectomo {simulate,estimate,experiment,fisher-check}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import estimators as est
from .errors import SpectomoError
from .experiments import PRESETS, ExperimentConfig, aggregate, emit_outputs, run_experiment, with_overrides
from .fisher_bounds import fisher_check
from .model_selection import cv_penalty_constant, cv_rank, cv_threshold_constant
from .sampler import DEFAULT_BATCHES, _write_json, load_dataset, load_state, merge, save_dataset, save_state, split_batches
from .state_gen import StateSpec, random_rank_r_state

METHODS = ("ls", "pen", "phys", "cv-rank", "pen-cv", "phys-cv", "oracle")


def batch_path(data_out, j: int) -> Path:
    p = Path(data_out)
    return p.with_name(f"{p.stem}.batch{j}{p.suffix or '.json'}")


def cmd_simulate(args) -> dict:
    if args.state:
        rho = load_state(args.state)
    else:
        rho = random_rank_r_state(StateSpec(2**args.k, args.rank, args.seed))
    batches = split_batches(rho, args.n, args.seed, args.batches)
    pooled = merge(batches)
    out = {"k": pooled.k, "n": pooled.n, "batches": args.batches}
    if args.state_out:
        out["state"] = str(save_state(rho, args.state_out, rank=args.rank, seed=args.seed))
    if args.data_out:
        out["data"] = str(save_dataset(pooled, args.data_out))
        out["batch_files"] = [str(save_dataset(b, batch_path(args.data_out, j))) for j, b in enumerate(batches)]
    return out


def cmd_estimate(args) -> dict:
    batches = [load_dataset(p) for p in args.data]
    pooled = merge(batches)
    nu = est.noise_level(pooled.k, pooled.n, args.epsilon).nu
    lse = est.least_squares(pooled)
    info = {"method": args.method, "k": pooled.k, "n": pooled.n, "nu": nu}
    if args.method in ("cv-rank", "pen-cv", "phys-cv") and len(batches) < 2:
        raise ValueError(f"--method {args.method} needs at least two --data batch files")
    if args.method == "ls":
        estimate, rank = lse, pooled.d
    elif args.method == "pen":
        estimate, rank = est.penalised(lse, nu)
    elif args.method == "phys":
        estimate, rank = est.physical_threshold(est.trace_normalize(lse), nu)
    elif args.method == "oracle":
        if not args.state:
            raise ValueError("--method oracle needs the true state via --state")
        estimate, rank = est.oracle(lse, load_state(args.state))
    elif args.method == "cv-rank":
        rank, estimate, report = cv_rank(batches)
        info["criterion"] = report.criterion
    else:
        fn = cv_penalty_constant if args.method == "pen-cv" else cv_threshold_constant
        c, estimate, report = fn(batches, epsilon=args.epsilon)
        rank = report.final_rank
        info["constant"] = c
        info["criterion"] = report.criterion
    info["selected_rank"] = int(rank)
    if args.state:
        info["sq_error"] = est.frobenius_error(estimate, load_state(args.state))
    if args.out:
        extra = {key: v for key, v in info.items() if key not in ("method", "k", "nu", "selected_rank")}
        est.save_estimate(estimate, args.out, method=args.method, selected_rank=rank, nu=nu, **extra)
        info["out"] = args.out
    info.pop("criterion", None)
    return info


def cmd_experiment(args) -> dict:
    if args.config:
        config = ExperimentConfig.from_json(args.config)
    else:
        config = PRESETS[args.preset]
    config = with_overrides(config, seed=args.seed, replicates=args.replicates, workers=args.workers, out=args.out)
    out_dir = config.out or "experiment-out"

    def progress(i, total):
        if not args.quiet:
            print(f"\r{i}/{total} replicates", end="", file=sys.stderr, flush=True)

    records = run_experiment(config, progress)
    if not args.quiet:
        print(file=sys.stderr)
    summary = aggregate(records)
    paths = emit_outputs(summary, records, out_dir, svg=config.svg, config=config)
    return {
        "records": str(paths["records"]),
        "summary": str(paths["summary"]),
        "figures": len(paths["figures"]),
        "n_records": len(records),
    }


def cmd_fisher_check(args) -> dict:
    report = fisher_check(args.d, args.r, args.samples, args.seed)
    if args.out:
        _write_json(args.out, report)
    brief = {key: report[key] for key in ("d", "r", "samples", "seed", "blocks", "rr_vs_ii_max_rel_dev", "dd_mixed", "minimax_bound", "pass")}
    return brief


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spectomo", description="Low-rank Pauli tomography simulations.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a counts dataset (and its batches)")
    s.add_argument("--k", type=int, default=4, help="number of qubits")
    s.add_argument("--rank", type=int, default=2)
    s.add_argument("--n", type=int, default=100, help="repetitions per setting")
    s.add_argument("--batches", type=int, default=DEFAULT_BATCHES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--state", help="use this state file instead of a random one")
    s.add_argument("--state-out")
    s.add_argument("--data-out")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="estimate a state from one or more batch files")
    e.add_argument("--data", nargs="+", required=True, help="dataset files; several are used as CV batches")
    e.add_argument("--method", choices=METHODS, default="ls")
    e.add_argument("--epsilon", type=float, default=0.1)
    e.add_argument("--state", help="true state (required for oracle; adds sq_error)")
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    x = sub.add_parser("experiment", help="run the simulation study")
    g = x.add_mutually_exclusive_group()
    g.add_argument("--config", help="JSON config file")
    g.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    x.add_argument("--seed", type=int)
    x.add_argument("--replicates", type=int)
    x.add_argument("--workers", type=int)
    x.add_argument("--out", help="output directory")
    x.add_argument("--quiet", action="store_true")
    x.set_defaults(func=cmd_experiment)

    f = sub.add_parser("fisher-check", help="compare Monte Carlo and closed-form Fisher averages")
    f.add_argument("--d", type=int, default=4)
    f.add_argument("--r", type=int, default=2)
    f.add_argument("--samples", type=int, default=20000)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", help="write the full report as JSON")
    f.set_defaults(func=cmd_fisher_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except (SpectomoError, ValueError, OSError, ArithmeticError, RuntimeError) as exc:
        print(f"spectomo {args.command}: error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(result, indent=1))
    if args.command == "fisher-check" and not result["pass"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
