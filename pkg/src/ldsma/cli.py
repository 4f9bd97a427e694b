"""Command-line front end: experiments in, CSV/JSON out.

Subcommands: single-user (partitioning-scheme comparison on one link),
multiuser (one algorithm over Monte Carlo trials) and sweep (an
experiment file driving a parameter sweep). Every invocation requires an
explicit --seed (or a seed in the experiment file) and writes a manifest
before any trial runs; re-running with the same inputs reproduces the CSV
outputs byte for byte.
"""

import argparse
import csv
import dataclasses
import datetime
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import STREAM_GAINS, SystemConfig, substream
from .channel import fading_profile
from .harness import ExperimentSpec, _apply_point, run_experiment, run_trial
from .partitioning import (
    count_lds_partitions,
    partition_greedy,
    partition_lmv,
    partition_random,
)
from .singleuser import ENUMERATION_CAP, mrt_wf, partition_bruteforce

TRIAL_CSV_FIELDS = [
    "trial_id",
    "algorithm",
    "criterion",
    "K",
    "N",
    "d_c",
    "d_v",
    "seed",
    "spectral_efficiency_bps_hz",
    "outage_fraction",
    "weighted_sum_rate",
    "iterations",
]

SINGLE_USER_SCHEMES = ("greedy", "lmv", "random", "bruteforce")

SWEEP_KEYS = {
    "version": int,
    "parameter": str,
    "values": str,
    "algorithm": str,
    "criterion": str,
    "trials": int,
    "seed": int,
    "users": int,
    "subcarriers": int,
    "loading": int,
    "spreading": int,
    "bandwidth_hz": float,
    "max_power_dbm": float,
    "noise_psd_dbm_hz": float,
    "cell_inradius_m": float,
}


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, fields, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_json(path: Path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(outdir: Path, command: str, resolved: dict, seed: int, outputs: list):
    manifest = {
        "tool": "ldsma",
        "version": __version__,
        "command": command,
        "resolved": resolved,
        "master_seed": seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": outputs,
    }
    write_json(outdir / "manifest.json", manifest)
    return manifest


def cmd_single_user(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    for s in schemes:
        if s not in SINGLE_USER_SCHEMES:
            print(f"error: unknown scheme '{s}' (valid: {', '.join(SINGLE_USER_SCHEMES)})", file=sys.stderr)
            return 2
    if not schemes:
        print("error: empty scheme list", file=sys.stderr)
        return 2
    needs_divisible = {"lmv", "random", "bruteforce"}
    if needs_divisible.intersection(schemes) and args.subcarriers % args.spreading != 0:
        print("error: subcarrier count must be divisible by the spreading factor for lmv/random/bruteforce", file=sys.stderr)
        return 2
    if "bruteforce" in schemes:
        count = count_lds_partitions(args.subcarriers, args.spreading)
        if count > ENUMERATION_CAP:
            print(f"error: brute force refused, {count} partitions exceed the cap {ENUMERATION_CAP}", file=sys.stderr)
            return 2
    resolved = {
        "subcarriers": args.subcarriers,
        "spreading": args.spreading,
        "power": args.power,
        "trials": args.trials,
        "schemes": schemes,
    }
    write_manifest(
        outdir, "single-user", resolved, args.seed,
        ["single_user_trials.csv", "single_user_summary.json"],
    )
    rows = []
    sums = {s: 0.0 for s in schemes}
    for trial in range(args.trials):
        rng = substream(args.seed, STREAM_GAINS, trial)
        cfg = SystemConfig(
            num_users=1,
            num_subcarriers=args.subcarriers,
            spreading=min(args.spreading, args.subcarriers),
            rng_seed=int(rng.integers(0, 2**63 - 1)),
        )
        gains = np.abs(fading_profile(cfg, 0)) ** 2
        for scheme in schemes:
            if scheme == "greedy":
                rate = mrt_wf(partition_greedy(gains, args.spreading), gains, args.power).total_rate
            elif scheme == "lmv":
                rate = mrt_wf(partition_lmv(gains, args.spreading), gains, args.power).total_rate
            elif scheme == "random":
                part_seed = int(rng.integers(0, 2**63 - 1))
                rate = mrt_wf(partition_random(gains, args.spreading, part_seed), gains, args.power).total_rate
            else:
                _, rate = partition_bruteforce(gains, args.spreading, args.power)
            rows.append([trial, scheme, rate])
            sums[scheme] += rate
    write_csv(outdir / "single_user_trials.csv", ["trial_id", "scheme", "rate_bits"], rows)
    means = {s: sums[s] / args.trials for s in schemes}
    best = max(means, key=lambda s: means[s])
    summary = {
        "trials": args.trials,
        "subcarriers": args.subcarriers,
        "spreading": args.spreading,
        "power": args.power,
        "mean_rate_bits": means,
        "best_scheme": best,
        "ratio_vs_best": {s: means[s] / means[best] for s in schemes},
    }
    write_json(outdir / "single_user_summary.json", summary)
    print(f"wrote {len(rows)} rows to {outdir / 'single_user_trials.csv'}")
    for s in schemes:
        print(f"  {s:10s} mean rate {means[s]:.4f} bits  ratio vs {best}: {means[s] / means[best]:.3f}")
    return 0


def _trial_row(metrics, config: SystemConfig, seed: int):
    return [
        metrics.trial_index,
        metrics.algorithm,
        metrics.criterion or "",
        config.num_users,
        config.num_subcarriers,
        config.loading,
        config.spreading,
        seed,
        metrics.spectral_efficiency,
        metrics.outage_fraction,
        metrics.weighted_sum_rate,
        metrics.iterations,
    ]


def _run_point_trials(config, algorithm, criterion, n_trials, workers):
    if workers <= 1:
        return [run_trial(config, algorithm, criterion, t) for t in range(n_trials)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(run_trial, config, algorithm, criterion, t)
            for t in range(n_trials)
        ]
        results = [f.result() for f in futures]
    results.sort(key=lambda m: m.trial_index)
    return results


def cmd_multiuser(args) -> int:
    if args.algorithm not in ("mumrt", "muwf", "static", "ofdma", "macref"):
        print(f"error: unknown algorithm '{args.algorithm}' (valid: mumrt, muwf, static, ofdma, macref)", file=sys.stderr)
        return 2
    if args.criterion is not None and args.algorithm not in ("mumrt", "muwf"):
        print(f"error: --criterion applies only to mumrt/muwf, not {args.algorithm}", file=sys.stderr)
        return 2
    criterion = args.criterion or ("sa1" if args.algorithm in ("mumrt", "muwf") else None)
    if criterion is not None and criterion not in ("sa1", "sa2"):
        print("error: criterion must be sa1 or sa2", file=sys.stderr)
        return 2
    try:
        config = SystemConfig(
            num_users=args.users,
            num_subcarriers=args.subcarriers,
            bandwidth_hz=args.bandwidth_hz,
            max_power_dbm=args.max_power_dbm,
            noise_psd_dbm_hz=args.noise_psd_dbm_hz,
            cell_inradius_m=args.cell_inradius_m,
            loading=args.loading,
            spreading=args.spreading,
            rng_seed=args.seed,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_manifest(
        outdir, "multiuser",
        {**dataclasses.asdict(config), "algorithm": args.algorithm,
         "criterion": criterion, "trials": args.trials},
        args.seed,
        ["multiuser_trials.csv", "multiuser_summary.json"],
    )
    trials = _run_point_trials(config, args.algorithm, criterion, args.trials, args.workers)
    rows = [_trial_row(m, config, args.seed) for m in trials]
    write_csv(outdir / "multiuser_trials.csv", TRIAL_CSV_FIELDS, rows)
    valid = [m for m in trials if m.valid]
    se = np.array([m.spectral_efficiency for m in valid]) if valid else np.zeros(0)
    outage = np.array([m.outage_fraction for m in valid]) if valid else np.zeros(0)
    summary = {
        "algorithm": args.algorithm,
        "criterion": criterion,
        "trials": args.trials,
        "invalid_trials": len(trials) - len(valid),
        "mean_spectral_efficiency_bps_hz": float(se.mean()) if se.size else None,
        "mean_outage_fraction": float(outage.mean()) if outage.size else None,
    }
    write_json(outdir / "multiuser_summary.json", summary)
    print(
        f"{args.algorithm}{'-' + criterion if criterion else ''}: "
        f"{len(valid)}/{args.trials} trials, mean SE "
        f"{summary['mean_spectral_efficiency_bps_hz']:.4f} bits/s/Hz, "
        f"mean outage {summary['mean_outage_fraction']:.4f}"
    )
    return 0


def parse_sweep_config(path: Path) -> dict:
    """Flat key = value experiment file; unknown keys are errors."""
    values = {}
    text = path.read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got '{raw.strip()}'")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in SWEEP_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key '{key}'")
        if key in values:
            raise ValueError(f"{path}:{lineno}: duplicate key '{key}'")
        try:
            values[key] = SWEEP_KEYS[key](val)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad value for '{key}': {exc}") from None
    if values.get("version") != 1:
        raise ValueError(f"{path}: missing or unsupported 'version' (expected 1)")
    for required in ("parameter", "values", "trials", "seed"):
        if required not in values:
            raise ValueError(f"{path}: missing required key '{required}'")
    return values


def _spec_from_mapping(cfg: dict) -> ExperimentSpec:
    base = SystemConfig(
        num_users=cfg.get("users", 30),
        num_subcarriers=cfg.get("subcarriers", 30),
        bandwidth_hz=cfg.get("bandwidth_hz", 5e6),
        max_power_dbm=cfg.get("max_power_dbm", 23.0),
        noise_psd_dbm_hz=cfg.get("noise_psd_dbm_hz", -173.0),
        cell_inradius_m=cfg.get("cell_inradius_m", 1000.0),
        loading=cfg.get("loading", 6),
        spreading=cfg.get("spreading", 2),
        rng_seed=cfg["seed"],
    )
    parameter = cfg["parameter"]
    raw_values = cfg["values"]
    if isinstance(raw_values, str):
        items = [v.strip() for v in raw_values.split(",") if v.strip()]
    else:
        items = list(raw_values)
    if parameter in ("K", "d_c", "d_v"):
        values = tuple(int(v) for v in items)
    else:
        values = tuple(str(v) for v in items)
    return ExperimentSpec(
        base=base,
        parameter=parameter,
        values=values,
        trials=cfg["trials"],
        algorithm=cfg.get("algorithm", "mumrt"),
        criterion=cfg.get("criterion", "sa1"),
    )


def cmd_sweep(args) -> int:
    path = Path(args.config)
    if not path.exists():
        print(f"error: config file not found: {path}", file=sys.stderr)
        return 2
    try:
        if path.suffix == ".json":
            manifest = json.loads(path.read_text())
            cfg = manifest["resolved"]
        else:
            cfg = parse_sweep_config(path)
        spec = _spec_from_mapping(cfg)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    point_files = [f"sweep_{spec.parameter}_{v}.csv" for v in spec.values]
    write_manifest(outdir, "sweep", dict(cfg), cfg["seed"], point_files + ["sweep_summary.json"])
    summaries, all_trials = run_experiment(spec)
    for value, fname in zip(spec.values, point_files):
        config, algorithm, criterion = _sweep_point_config(spec, value)
        rows = [_trial_row(m, config, cfg["seed"]) for m in all_trials[value]]
        write_csv(outdir / fname, TRIAL_CSV_FIELDS, rows)
    payload = [dataclasses.asdict(s) for s in summaries]
    write_json(outdir / "sweep_summary.json", payload)
    for s in summaries:
        ci = f" ±{s.ci95_se:.4f}" if s.ci95_se is not None else ""
        print(
            f"{s.parameter}={s.value} {s.algorithm}"
            f"{'-' + s.criterion if s.criterion else ''}: "
            f"SE {s.mean_se:.4f}{ci} bits/s/Hz, outage {s.mean_outage:.4f} "
            f"({s.n_trials} trials, {s.n_invalid} invalid)"
        )
    return 0


def _sweep_point_config(spec: ExperimentSpec, value):
    return _apply_point(spec, value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldsma",
        description="Resource allocation experiments for low-density-spreading multiple access",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_su = sub.add_parser("single-user", help="compare subcarrier partitioning schemes")
    p_su.add_argument("--subcarriers", type=int, default=8)
    p_su.add_argument("--spreading", type=int, default=2)
    p_su.add_argument("--power", type=float, default=10.0,
                      help="power budget in normalized-gain units")
    p_su.add_argument("--trials", type=int, default=100)
    p_su.add_argument("--seed", type=int, required=True)
    p_su.add_argument("--schemes", type=str, default="greedy,lmv,random,bruteforce")
    p_su.add_argument("--outdir", type=str, required=True)
    p_su.set_defaults(func=cmd_single_user)

    p_mu = sub.add_parser("multiuser", help="run one allocation algorithm over trials")
    p_mu.add_argument("--algorithm", type=str, required=True)
    p_mu.add_argument("--criterion", type=str, default=None)
    p_mu.add_argument("--users", type=int, default=30)
    p_mu.add_argument("--subcarriers", type=int, default=30)
    p_mu.add_argument("--loading", type=int, default=6)
    p_mu.add_argument("--spreading", type=int, default=2)
    p_mu.add_argument("--bandwidth-hz", type=float, default=5e6)
    p_mu.add_argument("--max-power-dbm", type=float, default=23.0)
    p_mu.add_argument("--noise-psd-dbm-hz", type=float, default=-173.0)
    p_mu.add_argument("--cell-inradius-m", type=float, default=1000.0)
    p_mu.add_argument("--trials", type=int, default=10)
    p_mu.add_argument("--seed", type=int, required=True)
    p_mu.add_argument("--workers", type=int, default=1)
    p_mu.add_argument("--outdir", type=str, required=True)
    p_mu.set_defaults(func=cmd_multiuser)

    p_sw = sub.add_parser("sweep", help="drive a parameter sweep from an experiment file")
    p_sw.add_argument("--config", type=str, required=True,
                      help="experiment file (key = value) or a previous manifest.json")
    p_sw.add_argument("--outdir", type=str, required=True)
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
