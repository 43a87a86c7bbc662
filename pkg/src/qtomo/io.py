"""CSV and JSON persistence for measurement data, states, and run records.

Formats (canonical row order = lexicographic settings x outcomes):

* count/frequency tables: header ``setting,outcome,count`` (or ``freq``),
  setting as a string over ``xyz``, outcome over ``+-``,
* density matrices: header ``row,col,re,im``, all d**2 entries row-major,
* timing tables: header ``n,method,steps,seconds,evals``,
* run manifests: JSON, sorted keys; wall-clock fields are the only
  run-to-run volatile content and can be removed with ``strip_timing``.

Floats are serialized with ``repr`` (shortest round-trip form).
"""

import csv
import json
import math

import numpy as np

from .qcore import (Dimensions, outcome_signs, outcome_to_string, setting_axes,
                    setting_to_string, validate_count_table, validate_prob_table)

TIMING_FIELDS = ("n", "method", "steps", "seconds", "evals")

#: manifest keys whose values depend on the clock, not the seed
VOLATILE_KEYS = frozenset({"wall_time", "seconds", "created_at"})


def _canonical_pairs(n):
    settings = [setting_to_string(row) for row in setting_axes(n)]
    outcomes = [outcome_to_string(row) for row in outcome_signs(n)]
    return settings, outcomes


def _write_table(path, values, header, fmt):
    dims = Dimensions.from_table_shape(values.shape)
    settings, outcomes = _canonical_pairs(dims.n)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for si, setting in enumerate(settings):
            for oi, outcome in enumerate(outcomes):
                writer.writerow([setting, outcome, fmt(values[si, oi])])


def _read_table(path, expected_header, parse):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(expected_header):
            raise ValueError(f"{path}: expected header {expected_header}, got {header}")
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: empty table")
    n = len(rows[0][0])
    dims = Dimensions.from_n(n)
    if len(rows) != dims.num_settings * dims.num_outcomes:
        raise ValueError(f"{path}: expected {dims.num_settings * dims.num_outcomes} "
                         f"rows for n={n}, got {len(rows)}")
    settings, outcomes = _canonical_pairs(n)
    values = np.empty((dims.num_settings, dims.num_outcomes),
                      dtype=np.result_type(parse("0")))
    idx = 0
    for si, setting in enumerate(settings):
        for oi, outcome in enumerate(outcomes):
            s, o, val = rows[idx]
            if s != setting or o != outcome:
                raise ValueError(f"{path}: row {idx + 2} out of canonical order "
                                 f"(got {s},{o}, expected {setting},{outcome})")
            values[si, oi] = parse(val)
            idx += 1
    return values


def write_count_table(path, counts):
    counts = validate_count_table(counts)
    _write_table(path, counts, ("setting", "outcome", "count"), lambda v: int(v))


def read_count_table(path):
    counts = _read_table(path, ("setting", "outcome", "count"), int)
    return validate_count_table(counts.astype(np.int64), name=str(path))


def write_prob_table(path, probs):
    probs = validate_prob_table(probs)
    _write_table(path, probs, ("setting", "outcome", "freq"), lambda v: repr(float(v)))


def read_prob_table(path):
    probs = _read_table(path, ("setting", "outcome", "freq"), float)
    return validate_prob_table(probs, name=str(path))


def write_density_matrix(path, rho):
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected square matrix, got {rho.shape}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("row", "col", "re", "im"))
        for r in range(rho.shape[0]):
            for c in range(rho.shape[1]):
                writer.writerow([r, c, repr(float(rho[r, c].real)),
                                 repr(float(rho[r, c].imag))])


def read_density_matrix(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["row", "col", "re", "im"]:
            raise ValueError(f"{path}: expected header row,col,re,im, got {header}")
        rows = [row for row in reader if row]
    d = math.isqrt(len(rows))
    if d * d != len(rows) or d == 0:
        raise ValueError(f"{path}: expected d**2 entry rows, got {len(rows)}")
    rho = np.zeros((d, d), dtype=np.complex128)
    seen = np.zeros((d, d), dtype=bool)
    for r, c, re, im in rows:
        r, c = int(r), int(c)
        if not (0 <= r < d and 0 <= c < d) or seen[r, c]:
            raise ValueError(f"{path}: bad or duplicate entry ({r}, {c})")
        rho[r, c] = float(re) + 1j * float(im)
        seen[r, c] = True
    return rho


def write_timing_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TIMING_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in TIMING_FIELDS})


def read_timing_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty timing table")
    for row in rows:
        if set(row) != set(TIMING_FIELDS):
            raise ValueError(f"{path}: expected fields {TIMING_FIELDS}")
        row["n"] = int(row["n"])
        row["steps"] = int(row["steps"])
        row["seconds"] = float(row["seconds"])
        row["evals"] = int(row["evals"])
    return rows


def manifest_bytes(record):
    """Canonical JSON encoding of a run record (dict)."""
    return (json.dumps(record, indent=2, sort_keys=True) + "\n").encode()


def write_manifest(path, record):
    with open(path, "wb") as fh:
        fh.write(manifest_bytes(record))


def load_manifest(path):
    """Read a run manifest and re-check that the aggregate statistics match
    the per-chain rows."""
    with open(path) as fh:
        record = json.load(fh)
    aggregates = record.get("aggregates", {})
    chains = record.get("chains", [])
    for method, stats in aggregates.items():
        for metric in ("mse", "maee"):
            vals = [row[metric] for row in chains if row["method"] == method]
            mean = float(np.mean(vals))
            std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
            if not (math.isclose(mean, stats[f"{metric}_mean"],
                                 rel_tol=1e-12, abs_tol=1e-15)
                    and math.isclose(std, stats[f"{metric}_std"],
                                     rel_tol=1e-12, abs_tol=1e-15)):
                raise ValueError(f"{path}: aggregate {method}/{metric} does not "
                                 "match its chain rows")
    return record


def strip_timing(obj):
    """Copy of a manifest-like structure with wall-clock fields removed."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items()
                if k not in VOLATILE_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj
