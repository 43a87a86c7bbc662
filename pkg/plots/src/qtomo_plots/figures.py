"""Build the paper-style figures from run artifacts.

Three figure kinds:

* runtime -- log-scale seconds per 10 steps against qubit count, one line
  per method (from a timing CSV with columns n,method,steps,seconds,evals),
* mse-compare -- per-chain MSE boxplots grouped by method, MAEE as a
  second panel (from run manifests),
* acceptance-sweep -- per-chain MSE boxplots grouped by the target
  acceptance rate recorded in each manifest's spec.

Every plotting function returns the exact data arrays it drew, so tests
compare them against the input files instead of pixels.
"""

import csv
import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

TIMING_FIELDS = ("n", "method", "steps", "seconds", "evals")


def load_timing_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty timing CSV")
    for row in rows:
        if set(row) != set(TIMING_FIELDS):
            raise ValueError(f"{path}: expected columns {TIMING_FIELDS}, "
                             f"got {sorted(row)}")
        row["n"] = int(row["n"])
        row["steps"] = int(row["steps"])
        row["seconds"] = float(row["seconds"])
        row["evals"] = int(row["evals"])
    return rows


def load_manifest(path):
    with open(path) as fh:
        record = json.load(fh)
    if "chains" not in record:
        raise ValueError(f"{path}: not a run manifest (no chains)")
    return record


def runtime_series(rows):
    """Per-method (n, seconds) arrays, methods in first-appearance order."""
    series = {}
    for row in rows:
        series.setdefault(row["method"], []).append((row["n"], row["seconds"]))
    return {method: ([n for n, _ in points], [s for _, s in points])
            for method, points in series.items()}


def plot_runtime(timing_csv, out_path):
    """Line plot of per-steps wall time vs qubit count, log-scale y axis."""
    rows = load_timing_csv(timing_csv)
    series = runtime_series(rows)
    if len({row["n"] for row in rows}) < 2:
        raise ValueError("need at least two qubit counts to plot a trend")
    if len(series) < 2:
        raise ValueError("need both methods in the timing CSV")
    steps = rows[0]["steps"]

    fig, ax = plt.subplots(figsize=(6, 4.2))
    for method, (ns, secs) in series.items():
        ax.plot(ns, secs, marker="o", label=method)
    ax.set_yscale("log")
    ax.set_xlabel("qubits")
    ax.set_ylabel(f"seconds per {steps} steps (log scale)")
    ax.set_xticks(sorted({row["n"] for row in rows}))
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return series


def chain_metric(record, metric, method):
    return [row[metric] for row in record["chains"] if row["method"] == method]


def mse_boxplot_data(manifests, group_by="method"):
    """Per-group chain metrics from one or more manifests.

    ``group_by="method"`` pools per-method rows across the given manifests;
    ``group_by="acceptance"`` labels each manifest by its spec's target
    acceptance (the acceptance-sweep figure).
    """
    if not manifests:
        raise ValueError("no manifests given")
    records = [load_manifest(path) for path in manifests]
    groups = {}
    if group_by == "method":
        for record in records:
            for method in sorted({row["method"] for row in record["chains"]}):
                for metric in ("mse", "maee"):
                    groups.setdefault(method, {}).setdefault(metric, []).extend(
                        chain_metric(record, metric, method))
    elif group_by == "acceptance":
        for record in records:
            target = record.get("spec", {}).get("target_acceptance")
            if target is None:
                raise ValueError("manifest lacks spec.target_acceptance; "
                                 "not an acceptance-sweep run")
            label = f"{target:g}"
            for metric in ("mse", "maee"):
                groups.setdefault(label, {}).setdefault(metric, []).extend(
                    chain_metric(record, metric, "amh"))
    else:
        raise ValueError(f"unknown group_by {group_by!r}")
    return groups


def plot_mse_boxplots(manifests, out_path, group_by="method"):
    """Grouped per-chain MSE boxplots; MAEE in a second panel."""
    groups = mse_boxplot_data(manifests, group_by=group_by)
    n_chains = min(len(g["mse"]) for g in groups.values())
    if n_chains < 5:
        raise ValueError(f"need >= 5 chains per group, got {n_chains}")
    labels = list(groups)

    fig, axes = plt.subplots(1, 2, figsize=(9, 4.2))
    for ax, metric in zip(axes, ("mse", "maee")):
        ax.boxplot([groups[label][metric] for label in labels],
                   tick_labels=labels)
        ax.set_ylabel(metric.upper())
        xlabel = "method" if group_by == "method" else "target acceptance rate"
        ax.set_xlabel(xlabel)
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return groups
