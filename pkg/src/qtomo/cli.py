"""Command-line interface.

Subcommands: ``simulate`` (measurement CSV), ``estimate`` (counts in,
density + manifest out), ``benchmark`` (timing CSV), ``tune`` (print tuned
betas), ``true-state`` (density CSV), ``experiment`` (full replicated run
with manifest). Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

import argparse
import sys
from pathlib import Path

from . import io
from .estimate import maee, mse
from .harness import (ExperimentSpec, aggregate_rows, benchmark_runtime,
                      derive_seed, run_experiment, speedup_ratios)
from .model import ModelConfig
from .qcore import (Dimensions, empirical_frequencies, simulate_counts,
                    true_state_mixed, true_state_rank2)
from .samplers import SamplerConfig, run_adaptive_mh, run_naive_mh, tune_betas


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qtomo",
        description="Pseudo-Bayesian quantum state tomography toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate Pauli measurement counts")
    _add_state_args(p)
    p.add_argument("--m", type=int, default=1000, help="shots per setting")
    p.add_argument("--seed", type=int, default=0, help="data seed")
    p.add_argument("--out", required=True, help="output counts CSV")

    p = sub.add_parser("estimate", help="estimate a state from a counts CSV")
    p.add_argument("--counts", required=True, help="input counts CSV")
    p.add_argument("--sampler", choices=("amh", "rmh", "both"), default="amh")
    p.add_argument("--T", type=int, default=30000, help="chain length")
    p.add_argument("--burn-in", type=int, default=None,
                   help="burn-in iterations (default T // 10)")
    p.add_argument("--seed", type=int, default=0, help="chain seed")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=None,
                   help="inverse temperature (default m / 2)")
    _add_beta_args(p)
    p.add_argument("--true-state", default=None,
                   help="density CSV to score MSE/MAEE against")
    p.add_argument("--out", required=True, help="output density CSV")
    p.add_argument("--manifest", required=True, help="output manifest JSON")

    p = sub.add_parser("benchmark", help="time both samplers per qubit count")
    p.add_argument("--n-list", default="2,4,6",
                   help="comma-separated qubit counts")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output timing CSV")

    p = sub.add_parser("tune", help="tune proposal scales to a target acceptance")
    p.add_argument("--counts", required=True, help="input counts CSV")
    p.add_argument("--target", type=float, default=0.3)
    p.add_argument("--pilot-len", type=int, default=500)
    p.add_argument("--max-rounds", type=int, default=30)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    _add_beta_args(p, default_y=0.3, default_z=0.3)

    p = sub.add_parser("true-state", help="write a reference density matrix CSV")
    _add_state_args(p)
    p.add_argument("--out", required=True, help="output density CSV")

    p = sub.add_parser("experiment", help="replicated end-to-end run")
    _add_state_args(p, state_seed=False)  # mixed state derives from master seed
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--sampler", choices=("amh", "rmh", "both"), default="both")
    p.add_argument("--T", type=int, default=30000)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--tune-target", type=float, default=0.3)
    _add_beta_args(p)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--shared-data", action="store_true",
                   help="reuse one dataset across chains")
    p.add_argument("--out-dir", required=True)
    return parser


def _add_state_args(p, state_seed=True):
    p.add_argument("--n", type=int, required=True, help="qubit count")
    p.add_argument("--state", default="rank2",
                   help="rank2 | mixed | path to density CSV")
    if state_seed:
        p.add_argument("--state-seed", type=int, default=0,
                       help="seed for the mixed state constructor")


def _add_beta_args(p, default_y=None, default_z=None):
    p.add_argument("--beta-y", type=float, default=default_y)
    p.add_argument("--beta-z", type=float, default=default_z)


def _build_state(n, state, state_seed):
    if state == "rank2":
        return true_state_rank2(n)
    if state == "mixed":
        return true_state_mixed(n, state_seed)
    rho = io.read_density_matrix(state)
    if rho.shape[0] != Dimensions.from_n(n).d:
        raise ValueError(f"state file dimension {rho.shape[0]} does not match n={n}")
    return rho


def cmd_simulate(args):
    rho = _build_state(args.n, args.state, args.state_seed)
    counts = simulate_counts(rho, args.m, args.seed)
    io.write_count_table(args.out, counts)
    print(f"wrote {args.out}: {counts.shape[0]} settings x {counts.shape[1]} "
          f"outcomes, m={args.m}")
    return 0


def cmd_true_state(args):
    io.write_density_matrix(args.out, _build_state(args.n, args.state,
                                                   args.state_seed))
    print(f"wrote {args.out}")
    return 0


def cmd_estimate(args):
    counts = io.read_count_table(args.counts)
    p_hat = empirical_frequencies(counts)
    m = int(counts[0].sum())
    n = Dimensions.from_table_shape(counts.shape).n
    lam = m / 2.0 if args.lam is None else args.lam
    model_cfg = ModelConfig(lam=lam, alpha=args.alpha)
    burn_in = (args.T // 10) if args.burn_in is None else args.burn_in

    if args.beta_y is None:
        base = SamplerConfig(beta_y=0.3, beta_z=0.3, T=500, model=model_cfg,
                             seed=derive_seed(args.seed, 3))
        tuned = tune_betas(p_hat, base, target=0.3)
        beta_y, beta_z = tuned.beta_y, tuned.beta_z
        betas = {"beta_y": beta_y, "beta_z": beta_z, "tuned": True,
                 "tune_acceptance": tuned.acceptance,
                 "tune_converged": tuned.converged}
    else:
        beta_y, beta_z = args.beta_y, args.beta_z
        betas = {"beta_y": beta_y, "beta_z": beta_z, "tuned": False}

    rho_true = (io.read_density_matrix(args.true_state)
                if args.true_state else None)
    methods = ("amh", "rmh") if args.sampler == "both" else (args.sampler,)
    out_path = Path(args.out)
    rows = []
    rho_files = {}
    for method_id, method in enumerate(methods):
        cfg = SamplerConfig(beta_y=beta_y, beta_z=beta_z, T=args.T,
                            burn_in=burn_in, model=model_cfg,
                            seed=derive_seed(args.seed, 2, 0, method_id))
        runner = run_adaptive_mh if method == "amh" else run_naive_mh
        out = runner(p_hat, cfg)
        path = out_path if len(methods) == 1 else out_path.with_name(
            f"{out_path.stem}_{method}{out_path.suffix}")
        io.write_density_matrix(path, out.rho_hat)
        rho_files[method] = str(path)
        row = {"chain": 0, "method": method,
               "acceptance_rate": out.acceptance_rate,
               "acceptance_rate_full": out.acceptance_rate_full,
               "wall_time": out.wall_time, "evals": out.n_evals}
        if rho_true is not None:
            row["mse"] = mse(out.rho_hat, rho_true)
            row["maee"] = maee(out.rho_hat, rho_true)
        rows.append(row)
        print(f"{method}: acceptance {out.acceptance_rate:.3f}, "
              f"{out.n_evals} loss evaluations, wrote {path}")

    record = {
        "schema": "qtomo-estimate-v1",
        "version": "0.1.0",
        "spec": {"counts": args.counts, "n": n, "m": m, "sampler": args.sampler,
                 "T": args.T, "burn_in": burn_in, "alpha": args.alpha,
                 "lam": lam, "seed": args.seed,
                 "true_state": args.true_state},
        "betas": betas,
        "chains": rows,
        "files": rho_files,
    }
    if rho_true is not None:
        record["aggregates"] = aggregate_rows(rows)
    io.write_manifest(args.manifest, record)
    print(f"wrote {args.manifest}")
    return 0


def cmd_benchmark(args):
    n_list = [int(tok) for tok in args.n_list.split(",") if tok.strip()]
    if not n_list:
        raise ValueError("empty --n-list")
    rows = benchmark_runtime(n_list, steps=args.steps, m=args.m,
                             master_seed=args.seed)
    io.write_timing_csv(args.out, rows)
    for n, ratio in sorted(speedup_ratios(rows).items()):
        print(f"n={n}: rmh/amh wall-time ratio {ratio:.1f}")
    print(f"wrote {args.out}")
    return 0


def cmd_tune(args):
    counts = io.read_count_table(args.counts)
    p_hat = empirical_frequencies(counts)
    m = int(counts[0].sum())
    lam = m / 2.0 if args.lam is None else args.lam
    cfg = SamplerConfig(beta_y=args.beta_y, beta_z=args.beta_z,
                        T=args.pilot_len, model=ModelConfig(lam=lam, alpha=args.alpha),
                        seed=args.seed)
    result = tune_betas(p_hat, cfg, target=args.target,
                        pilot_len=args.pilot_len, max_rounds=args.max_rounds)
    status = "converged" if result.converged else "budget exhausted"
    print(f"beta_y={result.beta_y:.6g} beta_z={result.beta_z:.6g} "
          f"acceptance={result.acceptance:.3f} ({status}, "
          f"{result.rounds} pilot rounds)")
    return 0


def cmd_experiment(args):
    spec = ExperimentSpec(
        n=args.n, m=args.m, state=args.state, sampler=args.sampler,
        alpha=args.alpha, lam=args.lam, beta_y=args.beta_y, beta_z=args.beta_z,
        tune_target=args.tune_target, T=args.T, burn_in=args.burn_in,
        chains=args.chains, master_seed=args.master_seed,
        shared_data=args.shared_data)
    record = run_experiment(spec, out_dir=args.out_dir)
    for method, stats in record.aggregates.items():
        print(f"{method}: MSE {stats['mse_mean']:.3e} +- {stats['mse_std']:.3e}, "
              f"MAEE {stats['maee_mean']:.3e} +- {stats['maee_std']:.3e}")
    print(f"wrote {Path(args.out_dir) / 'manifest.json'}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "benchmark": cmd_benchmark,
    "tune": cmd_tune,
    "true-state": cmd_true_state,
    "experiment": cmd_experiment,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"qtomo: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
