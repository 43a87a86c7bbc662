"""Point estimators and error metrics.

``linear_inversion`` is the classical least-squares comparator: expand the
state in the Pauli basis and plug in empirical expectations. It is unbiased
but can (and routinely does) leave the PSD cone, which is exactly the
failure mode the Bayesian estimators avoid.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .qcore import Dimensions, PAULIS, outcome_signs

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class EstimateReport:
    """One estimator's output and its errors against the true state."""

    rho_hat: np.ndarray
    mse: float
    maee: float
    method: str  # amh | rmh | linear-inversion


def mse(rho_hat, rho_true):
    """Squared Frobenius distance divided by d**2."""
    rho_hat = np.asarray(rho_hat)
    rho_true = np.asarray(rho_true)
    if rho_hat.shape != rho_true.shape:
        raise ValueError(f"shape mismatch: {rho_hat.shape} vs {rho_true.shape}")
    d = rho_hat.shape[0]
    diff = rho_hat - rho_true
    return float(np.sum(diff.real ** 2 + diff.imag ** 2)) / d ** 2


def maee(rho_hat, rho_true):
    """Mean absolute difference of descending-sorted eigenvalues."""
    rho_hat = _check_hermitian(rho_hat, "rho_hat")
    rho_true = _check_hermitian(rho_true, "rho_true")
    if rho_hat.shape != rho_true.shape:
        raise ValueError(f"shape mismatch: {rho_hat.shape} vs {rho_true.shape}")
    ev_hat = np.linalg.eigvalsh(rho_hat)[::-1]
    ev_true = np.linalg.eigvalsh(rho_true)[::-1]
    return float(np.mean(np.abs(ev_hat - ev_true)))


def _check_hermitian(a, name):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name}: expected square matrix, got {a.shape}")
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
        raise ValueError(f"{name}: not Hermitian within {HERMITIAN_TOL}")
    return a


def linear_inversion(p_hat, project_psd=False):
    """Pauli-expansion estimate from an empirical frequency table.

    For every non-identity Pauli pattern, the expectation of the product of
    signs on the pattern's support is averaged over all settings that agree
    with the pattern there (3**k of them for k identity slots); the identity
    coefficient is 1. The result is exactly Hermitian with unit trace but
    not necessarily PSD; ``project_psd=True`` clips negative eigenvalues
    and renormalizes for callers that need a physical state.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    dims = Dimensions.from_table_shape(p_hat.shape)
    n = dims.n

    # moments[a, mask] = sum_s p_hat[a, s] * prod_{j in mask} s_j
    signs = outcome_signs(n).astype(float)
    masks = np.arange(2 ** n)
    walsh = np.ones((2 ** n, dims.num_outcomes))
    for j in range(n):
        hit = (masks >> (n - 1 - j)) & 1 == 1
        walsh[hit] *= signs[:, j]
    moments = p_hat @ walsh.T

    # coef[b] for b in {I,X,Y,Z}^n: mean moment over compatible settings
    coef = np.empty((4,) * n)
    pow3 = 3 ** np.arange(n - 1, -1, -1)
    for b in product(range(4), repeat=n):
        fixed = [(j, b[j] - 1) for j in range(n) if b[j] != 0]
        free = [j for j in range(n) if b[j] == 0]
        mask = 0
        base = 0
        for j, axis in fixed:
            mask |= 1 << (n - 1 - j)
            base += axis * pow3[j]
        total = 0.0
        for axes in product(range(3), repeat=len(free)):
            total += moments[base + sum(a * pow3[j] for j, a in zip(free, axes)),
                             mask]
        coef[b] = total / 3 ** len(free)

    # rho = 2^-n sum_b coef[b] sigma_b, assembled one qubit at a time
    cur = coef.astype(np.complex128)
    for _ in range(n):
        cur = np.tensordot(cur, PAULIS, axes=([0], [0]))
    row_axes = list(range(0, 2 * n, 2))
    col_axes = list(range(1, 2 * n, 2))
    rho = cur.transpose(row_axes + col_axes).reshape(dims.d, dims.d) / dims.d
    rho = 0.5 * (rho + rho.conj().T)

    if project_psd:
        evals, evecs = np.linalg.eigh(rho)
        evals = np.clip(evals, 0.0, None)
        evals /= evals.sum()
        rho = (evecs * evals) @ evecs.conj().T
        rho = 0.5 * (rho + rho.conj().T)
    return rho
