"""Low-rank mixture parameterization of density matrices and the
frequency-matching pseudo-posterior.

A state is parameterized by d positive weights ``y`` and d complex vectors
``z`` (rows of a (d, d) array); the density matrix is the gamma-weighted
mixture of the normalized rank-1 projectors, where gamma = y / sum(y).
The pseudo-posterior reweights the prior by exp(-lambda * loss), with the
loss the squared Frobenius distance between the state's outcome-probability
table and the empirical frequency table. Only log-densities up to additive
constants are ever computed.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .qcore import Dimensions, complex_normal, setting_axes, validate_prob_table

NORM_FLOOR = 1e-300


class DegenerateParameters(ValueError):
    """Zero weight or zero direction vector in a state parameterization."""


@dataclass(frozen=True)
class StateParams:
    """Mixture parameters: weights ``y`` (d,) and vectors ``z`` (d, d) complex,
    one vector per row. Treated as immutable after construction."""

    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        z = np.ascontiguousarray(self.z, dtype=np.complex128)
        if y.ndim != 1 or z.ndim != 2 or z.shape != (y.size, y.size):
            raise DegenerateParameters(
                f"expected y (d,) and z (d, d), got {y.shape} and {z.shape}")
        if not np.all(np.isfinite(y)) or np.any(y <= 0.0):
            raise DegenerateParameters("weights must be finite and strictly positive")
        if not np.all(np.isfinite(z)):
            raise DegenerateParameters("vectors must be finite")
        sq_norms = np.abs(z * z.conj()).sum(axis=1)
        if np.any(sq_norms < NORM_FLOOR):
            raise DegenerateParameters("direction vectors too close to zero")
        y.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @property
    def d(self):
        return self.y.size

    def factored(self):
        """Normalized form (gamma, vhat): Dirichlet weights and unit row vectors."""
        return factored_form(self.y, self.z)


def factored_form(y, z):
    gamma = y / y.sum()
    vhat = z / np.linalg.norm(z, axis=1, keepdims=True)
    return gamma, vhat


def rho_factored(gamma, vhat):
    """Assemble sum_i gamma_i vhat_i vhat_i^dagger from the factored form.

    The final symmetrization makes the result exactly Hermitian (the BLAS
    product alone is only Hermitian to rounding).
    """
    rho = (vhat.T * gamma) @ vhat.conj()
    return 0.5 * (rho + rho.conj().T)


@dataclass(frozen=True)
class ModelConfig:
    """Pseudo-posterior knobs: inverse temperature ``lam`` and Gamma/Dirichlet
    shape ``alpha``. lam = 0 turns the target into the bare prior (used by
    diagnostics); the production default lam = m/2 is applied by the
    harness, not here."""

    lam: float
    alpha: float = 1.0
    allow_large_alpha: bool = False

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.alpha > 1.0:
            if not self.allow_large_alpha:
                raise ValueError(
                    f"alpha={self.alpha} outside the supported (0, 1]; "
                    "pass allow_large_alpha=True to explore anyway")
            warnings.warn(f"alpha={self.alpha} > 1 is outside the validated range")
        if self.lam < 0.0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")


def rho_from_params(x: StateParams):
    """Density matrix of a parameter point; Hermitian, PSD, unit trace by
    construction."""
    gamma, vhat = x.factored()
    return rho_factored(gamma, vhat)


def prior_sample(d, alpha, seed):
    """One prior draw: y_i ~ Gamma(alpha, 1) i.i.d., z_i ~ standard complex
    normal on C^d. Deterministic given the seed."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    y = rng.gamma(alpha, 1.0, size=d)
    z = complex_normal(rng, (d, d))
    return StateParams(y=y, z=z)


def loss_prob(p_nu, p_hat):
    """Sum of squared entrywise differences between two outcome tables."""
    p_nu = np.asarray(p_nu, dtype=float)
    p_hat = np.asarray(p_hat, dtype=float)
    if p_nu.shape != p_hat.shape:
        raise ValueError(f"table shapes differ: {p_nu.shape} vs {p_hat.shape}")
    diff = p_nu - p_hat
    return float(np.sum(diff * diff))


class PseudoLikelihood:
    """Log pseudo-likelihood evaluator bound to one dataset.

    Precomputes the setting table once and counts evaluations (the cost
    unit the samplers are compared on). ``loss`` runs the factored
    Born-probability path: per setting, n successive 2x2 rotations applied
    to the r unit vectors, O(n * d * r) each, never a dense Kronecker.
    """

    def __init__(self, p_hat, config: ModelConfig):
        p_hat = validate_prob_table(p_hat, "empirical frequencies")
        self.dims = Dimensions.from_table_shape(p_hat.shape)
        self.p_hat = np.ascontiguousarray(p_hat)
        self.config = config
        self.axes = setting_axes(self.dims.n)
        self.n_evals = 0

    def loss(self, gamma, vhat):
        self.n_evals += 1
        return kernels.loss_factored(self.axes, gamma, vhat, self.p_hat)

    def log_density(self, gamma, vhat):
        return -self.config.lam * self.loss(gamma, vhat)


def log_pseudo_likelihood(x: StateParams, p_hat, config: ModelConfig):
    """-lam * loss of the state at x against the frequency table."""
    gamma, vhat = x.factored()
    return PseudoLikelihood(p_hat, config).log_density(gamma, vhat)
