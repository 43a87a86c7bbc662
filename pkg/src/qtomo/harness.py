"""Experiment orchestration: end-to-end runs, replication, timing benchmarks.

Every random stream is derived from one master seed through
``derive_seed``: the master seed is hashed together with small integer
tags (purpose, chain index, method) via ``numpy.random.SeedSequence``, so
distinct chains never share a stream and reruns are bit-reproducible.
Chains may execute on a thread pool (capped by the ``QTOMO_THREADS``
environment variable); results are keyed by chain index, so the schedule
cannot change any output.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import io
from .estimate import linear_inversion, maee, mse
from .model import ModelConfig
from .qcore import (Dimensions, empirical_frequencies, simulate_counts,
                    true_state_mixed, true_state_rank2)
from .samplers import SamplerConfig, run_adaptive_mh, run_naive_mh, tune_betas

SCHEMA = "qtomo-run-v1"

# purpose tags for seed derivation
TAG_STATE = 0
TAG_DATA = 1
TAG_CHAIN = 2
TAG_TUNE = 3
TAG_BENCH = 4

METHOD_IDS = {"amh": 0, "rmh": 1}
RUNNERS = {"amh": run_adaptive_mh, "rmh": run_naive_mh}

# betas reported for the adaptive sampler at the paper's qubit counts;
# used by the benchmark, where only the cost per step matters
DEFAULT_BETAS = {2: (0.33, 0.2), 3: (0.03, 0.03), 4: (0.03, 0.02)}
FALLBACK_BETAS = (0.03, 0.02)


def derive_seed(master_seed, *tags):
    """Deterministic child seed: the master seed hashed with integer tags."""
    return np.random.SeedSequence((int(master_seed),) + tuple(int(t) for t in tags))


def thread_count():
    env = os.environ.get("QTOMO_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentSpec:
    """One tomography experiment: truth, data size, sampler(s), replication."""

    n: int
    m: int = 1000
    state: str = "rank2"            # rank2 | mixed | path to a density CSV
    sampler: str = "both"           # amh | rmh | both
    alpha: float = 1.0
    lam: float = None               # None -> m / 2
    beta_y: float = None            # both None -> auto-tune to tune_target
    beta_z: float = None
    tune_target: float = 0.3
    T: int = 30000
    burn_in: int = None             # None -> T // 10
    chains: int = 1
    master_seed: int = 0
    shared_data: bool = False       # reuse chain 0's dataset everywhere

    def __post_init__(self):
        if self.sampler not in ("amh", "rmh", "both"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.chains < 1:
            raise ValueError(f"chains must be >= 1, got {self.chains}")
        if (self.beta_y is None) != (self.beta_z is None):
            raise ValueError("set both beta_y and beta_z or neither")

    @property
    def methods(self):
        return ("amh", "rmh") if self.sampler == "both" else (self.sampler,)

    def resolved_lam(self):
        return float(self.m) / 2.0 if self.lam is None else float(self.lam)

    def resolved_burn_in(self):
        return self.T // 10 if self.burn_in is None else self.burn_in


@dataclass
class RunRecord:
    """Everything a figure script needs: spec echo, per-chain rows, aggregates."""

    spec: dict
    betas: dict
    chains: list
    aggregates: dict
    files: dict = field(default_factory=dict)
    schema: str = SCHEMA
    version: str = "0.1.0"
    created_at: str = ""

    def to_dict(self):
        return asdict(self)


def true_state_for(spec: ExperimentSpec):
    if spec.state == "rank2":
        return true_state_rank2(spec.n)
    if spec.state == "mixed":
        return true_state_mixed(spec.n, derive_seed(spec.master_seed, TAG_STATE))
    rho = io.read_density_matrix(spec.state)
    if rho.shape[0] != Dimensions.from_n(spec.n).d:
        raise ValueError(f"state file dimension {rho.shape[0]} does not match "
                         f"n={spec.n}")
    return rho


def resolve_betas(spec: ExperimentSpec, rho_true, model_cfg):
    """Explicit betas if given, otherwise tune on a dedicated pilot dataset."""
    if spec.beta_y is not None:
        return {"beta_y": spec.beta_y, "beta_z": spec.beta_z, "tuned": False}
    counts = simulate_counts(rho_true, spec.m, derive_seed(spec.master_seed, TAG_TUNE))
    start_y, start_z = DEFAULT_BETAS.get(spec.n, FALLBACK_BETAS)
    cfg = SamplerConfig(beta_y=start_y, beta_z=start_z, T=500, model=model_cfg,
                        seed=derive_seed(spec.master_seed, TAG_TUNE, 1))
    result = tune_betas(empirical_frequencies(counts), cfg, target=spec.tune_target)
    return {"beta_y": result.beta_y, "beta_z": result.beta_z, "tuned": True,
            "tune_acceptance": result.acceptance,
            "tune_converged": result.converged}


def _run_one_chain(spec, rho_true, betas, model_cfg, chain):
    data_seed = derive_seed(spec.master_seed, TAG_DATA,
                            0 if spec.shared_data else chain)
    counts = simulate_counts(rho_true, spec.m, data_seed)
    p_hat = empirical_frequencies(counts)
    rows, states = [], {}
    for method in spec.methods:
        cfg = SamplerConfig(
            beta_y=betas["beta_y"], beta_z=betas["beta_z"],
            T=spec.T, burn_in=spec.resolved_burn_in(), model=model_cfg,
            seed=derive_seed(spec.master_seed, TAG_CHAIN, chain,
                             METHOD_IDS[method]))
        out = RUNNERS[method](p_hat, cfg)
        rows.append({
            "chain": chain,
            "method": method,
            "mse": mse(out.rho_hat, rho_true),
            "maee": maee(out.rho_hat, rho_true),
            "acceptance_rate": out.acceptance_rate,
            "acceptance_rate_full": out.acceptance_rate_full,
            "wall_time": out.wall_time,
            "evals": out.n_evals,
        })
        states[method] = out.rho_hat
    rho_li = linear_inversion(p_hat)
    rows.append({
        "chain": chain,
        "method": "linear-inversion",
        "mse": mse(rho_li, rho_true),
        "maee": maee(rho_li, rho_true),
        "acceptance_rate": None,
        "acceptance_rate_full": None,
        "wall_time": 0.0,
        "evals": 0,
    })
    states["linear-inversion"] = rho_li
    return counts, rows, states


def aggregate_rows(rows):
    methods = sorted({row["method"] for row in rows})
    out = {}
    for method in methods:
        stats = {}
        for metric in ("mse", "maee"):
            vals = [row[metric] for row in rows if row["method"] == method]
            stats[f"{metric}_mean"] = float(np.mean(vals))
            stats[f"{metric}_std"] = (float(np.std(vals, ddof=1))
                                      if len(vals) > 1 else 0.0)
        out[method] = stats
    return out


def run_experiment(spec: ExperimentSpec, out_dir=None) -> RunRecord:
    """Simulate, sample, score, and (optionally) persist one experiment.

    Each chain gets a fresh dataset by default (independent replications);
    pass ``shared_data=True`` in the spec for the one-dataset reading.
    Deterministic given the master seed, up to wall-clock fields.
    """
    rho_true = true_state_for(spec)
    model_cfg = ModelConfig(lam=spec.resolved_lam(), alpha=spec.alpha)
    betas = resolve_betas(spec, rho_true, model_cfg)

    workers = min(thread_count(), spec.chains)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda c: _run_one_chain(spec, rho_true, betas, model_cfg, c),
                range(spec.chains)))
    else:
        results = [_run_one_chain(spec, rho_true, betas, model_cfg, c)
                   for c in range(spec.chains)]

    rows = [row for _, chain_rows, _ in results for row in chain_rows]
    spec_echo = asdict(spec)
    record = RunRecord(
        spec=spec_echo,
        betas=betas,
        chains=rows,
        aggregates=aggregate_rows(rows),
        created_at=datetime.now(timezone.utc).isoformat(),
    )

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        files = {"true_state": "true_state.csv", "counts": [], "rho": []}
        io.write_density_matrix(out_dir / "true_state.csv", rho_true)
        for chain, (counts, _, states) in enumerate(results):
            name = f"counts_chain{chain:03d}.csv"
            io.write_count_table(out_dir / name, counts)
            files["counts"].append(name)
            for method, rho_hat in states.items():
                name = f"rho_{method.replace('-', '_')}_chain{chain:03d}.csv"
                io.write_density_matrix(out_dir / name, rho_hat)
                files["rho"].append(name)
        record.files = files
        io.write_manifest(out_dir / "manifest.json", record.to_dict())
    return record


def benchmark_runtime(n_list, steps=10, m=1000, master_seed=0, lam=None,
                      alpha=1.0, repeats=3):
    """Wall time for ``steps`` sampler steps per method and qubit count.

    One warm-up run per method (JIT compilation, caches) is excluded from
    the timing; the timed segment is the iteration loop of a chain of
    length ``steps`` on rank-2 data, best of ``repeats`` reruns of the
    identical seeded chain. Single-threaded by construction.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    rows = []
    for n in n_list:
        rho_true = true_state_rank2(n)
        counts = simulate_counts(rho_true, m, derive_seed(master_seed, TAG_BENCH, n))
        p_hat = empirical_frequencies(counts)
        model_cfg = ModelConfig(lam=float(m) / 2.0 if lam is None else lam,
                                alpha=alpha)
        beta_y, beta_z = DEFAULT_BETAS.get(n, FALLBACK_BETAS)
        for method in ("amh", "rmh"):
            runner = RUNNERS[method]
            warm_cfg = SamplerConfig(beta_y=beta_y, beta_z=beta_z, T=1,
                                     model=model_cfg,
                                     seed=derive_seed(master_seed, TAG_BENCH, n, 0))
            runner(p_hat, warm_cfg)
            cfg = SamplerConfig(beta_y=beta_y, beta_z=beta_z, T=steps,
                                model=model_cfg,
                                seed=derive_seed(master_seed, TAG_BENCH, n, 1))
            outs = [runner(p_hat, cfg) for _ in range(max(1, repeats))]
            rows.append({"n": n, "method": method, "steps": steps,
                         "seconds": min(o.loop_time for o in outs),
                         "evals": outs[0].n_evals})
    return rows


def speedup_ratios(rows):
    """rmh/amh wall-time ratio per qubit count from benchmark rows."""
    by_n = {}
    for row in rows:
        by_n.setdefault(row["n"], {})[row["method"]] = row["seconds"]
    return {n: t["rmh"] / t["amh"] for n, t in sorted(by_n.items())
            if "amh" in t and "rmh" in t}
