"""Pauli-measurement core: settings/outcomes, Born probabilities, data simulation.

An n-qubit experiment picks one axis per qubit out of {X, Y, Z} (a *setting*)
and observes one sign per qubit (an *outcome*). Settings are enumerated
lexicographically with X < Y < Z, outcomes lexicographically with +1 < -1,
qubit 0 most significant in both. String forms use ``"xyz"`` and ``"+-"``
alphabets (e.g. setting ``"xzy"``, outcome ``"+-+"``).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

AXIS_CHARS = "xyz"
SIGN_CHARS = "+-"

# Pauli matrices indexed I=0, X=1, Y=2, Z=3 (used by linear inversion).
PAULIS = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)
PAULIS.setflags(write=False)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGMIN_FLOOR = -1e-10
ROW_SUM_TOL = 1e-10
PROB_SLACK = 1e-12


class InvariantViolation(ValueError):
    """A matrix or table failed its physicality/shape contract."""


@dataclass(frozen=True)
class Dimensions:
    """Derived sizes for an n-qubit system."""

    n: int
    d: int
    num_settings: int
    num_outcomes: int

    @classmethod
    def from_n(cls, n):
        if n < 1:
            raise ValueError(f"qubit count must be >= 1, got {n}")
        return cls(n=n, d=2 ** n, num_settings=3 ** n, num_outcomes=2 ** n)

    @classmethod
    def from_table_shape(cls, shape):
        """Recover n from a (3**n, 2**n) table shape."""
        n = round(np.log2(shape[1]))
        dims = cls.from_n(max(n, 1))
        if (dims.num_settings, dims.num_outcomes) != tuple(shape):
            raise InvariantViolation(
                f"table shape {tuple(shape)} is not (3**n, 2**n) for any n")
        return dims


def setting_axes(n):
    """All 3**n settings as an (3**n, n) int8 array of axis codes, canonical order."""
    grids = np.meshgrid(*([np.arange(3, dtype=np.int8)] * n), indexing="ij")
    return np.ascontiguousarray(
        np.stack([g.ravel() for g in grids], axis=1))


def outcome_signs(n):
    """All 2**n outcomes as an (2**n, n) int8 array of +1/-1, canonical order."""
    k = np.arange(2 ** n)
    bits = (k[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    return np.ascontiguousarray((1 - 2 * bits).astype(np.int8))


def setting_to_string(axes_row):
    return "".join(AXIS_CHARS[a] for a in axes_row)


def setting_from_string(s):
    try:
        return np.array([AXIS_CHARS.index(c) for c in s.lower()], dtype=np.int8)
    except ValueError:
        raise ValueError(f"invalid setting string {s!r}") from None


def outcome_to_string(signs_row):
    return "".join(SIGN_CHARS[0] if s > 0 else SIGN_CHARS[1] for s in signs_row)


def outcome_from_string(s):
    signs = []
    for c in s:
        if c not in SIGN_CHARS:
            raise ValueError(f"invalid outcome string {s!r}")
        signs.append(+1 if c == "+" else -1)
    return np.array(signs, dtype=np.int8)


def eigenbasis(axis):
    """2x2 rotation whose columns are the +1 and -1 eigenvectors of the axis."""
    return np.array(kernels.EIGENBASES[_axis_code(axis)])


def _axis_code(axis):
    if isinstance(axis, str):
        return AXIS_CHARS.index(axis.lower())
    code = int(axis)
    if code not in (0, 1, 2):
        raise ValueError(f"invalid axis {axis!r}")
    return code


# ---------------------------------------------------------------------------
# validation

def validate_density_matrix(rho, name="rho"):
    """Raise InvariantViolation unless rho is Hermitian, unit-trace, PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvariantViolation(f"{name}: expected square matrix, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise InvariantViolation(f"{name}: not Hermitian within {HERMITIAN_TOL}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvariantViolation(f"{name}: trace {tr} != 1 within {TRACE_TOL}")
    eigmin = np.linalg.eigvalsh(rho)[0]
    if eigmin < EIGMIN_FLOOR:
        raise InvariantViolation(f"{name}: min eigenvalue {eigmin} below PSD floor")
    return rho


def validate_prob_table(p, name="prob table"):
    """Raise InvariantViolation unless p is a row-stochastic (3**n, 2**n) table."""
    p = np.asarray(p, dtype=float)
    Dimensions.from_table_shape(p.shape)
    if p.min() < -PROB_SLACK or p.max() > 1.0 + PROB_SLACK:
        raise InvariantViolation(f"{name}: entries outside [0, 1]")
    row_sums = p.sum(axis=1)
    if np.max(np.abs(row_sums - 1.0)) > ROW_SUM_TOL:
        raise InvariantViolation(f"{name}: row sums deviate from 1 beyond {ROW_SUM_TOL}")
    return p


def validate_count_table(counts, name="count table"):
    """Raise InvariantViolation unless counts is nonnegative with equal row sums."""
    counts = np.asarray(counts)
    Dimensions.from_table_shape(counts.shape)
    if not np.issubdtype(counts.dtype, np.integer):
        raise InvariantViolation(f"{name}: counts must be integers")
    if counts.min() < 0:
        raise InvariantViolation(f"{name}: negative counts")
    row_sums = counts.sum(axis=1)
    if not np.all(row_sums == row_sums[0]):
        raise InvariantViolation(f"{name}: rows do not share one shot count m")
    if row_sums[0] < 1:
        raise InvariantViolation(f"{name}: shots per setting must be >= 1")
    return counts


# ---------------------------------------------------------------------------
# projectors (slow reference path; production code uses kernels)

def pauli_factor_projector(axis, sign):
    """Rank-1 projector onto the sign eigenvector of one Pauli axis."""
    u = kernels.EIGENBASES[_axis_code(axis)][:, 0 if sign > 0 else 1]
    return np.outer(u, u.conj())


def setting_projector(a, s):
    """Kronecker-product projector for a full setting/outcome pair.

    Accepts axis codes or a string like ``"xzy"`` for ``a``, sign values or
    a string like ``"+-+"`` for ``s``. Reference oracle only: O(4**n)
    memory, never used on the production probability path.
    """
    if isinstance(a, str):
        a = setting_from_string(a)
    if isinstance(s, str):
        s = outcome_from_string(s)
    a = np.atleast_1d(np.asarray(a))
    s = np.atleast_1d(np.asarray(s))
    if a.shape != s.shape:
        raise ValueError(f"setting length {a.shape} != outcome length {s.shape}")
    proj = pauli_factor_projector(a[0], s[0])
    for axis, sign in zip(a[1:], s[1:]):
        proj = np.kron(proj, pauli_factor_projector(axis, sign))
    return proj


# ---------------------------------------------------------------------------
# probabilities and data

def born_probabilities(rho, dims=None):
    """Born-rule outcome table p[a, s] = Tr(rho P_s^a) for all settings/outcomes."""
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    validate_density_matrix(rho)
    if dims is None:
        n = int(round(np.log2(rho.shape[0])))
        if 2 ** n != rho.shape[0]:
            raise InvariantViolation(f"dimension {rho.shape[0]} is not 2**n")
        dims = Dimensions.from_n(n)
    return kernels.born_dense(setting_axes(dims.n), rho)


def simulate_counts(rho, m, seed):
    """Draw m shots per setting from the Born distribution of rho.

    Deterministic given the seed; inverse-CDF sampling on each setting's
    cumulative outcome distribution.
    """
    if m < 1:
        raise ValueError(f"shots per setting must be >= 1, got {m}")
    probs = born_probabilities(rho)
    rng = np.random.default_rng(seed)
    num_settings, num_outcomes = probs.shape
    counts = np.empty((num_settings, num_outcomes), dtype=np.int64)
    for si in range(num_settings):
        cum = np.cumsum(probs[si])
        cum[-1] = 1.0
        idx = np.searchsorted(cum, rng.random(m), side="right")
        counts[si] = np.bincount(np.minimum(idx, num_outcomes - 1),
                                 minlength=num_outcomes)
    return counts


def empirical_frequencies(counts):
    """Entrywise counts / m."""
    counts = validate_count_table(counts)
    m = counts[0].sum()
    return counts / float(m)


# ---------------------------------------------------------------------------
# true states used in the experiments

def true_state_rank2(n):
    """Rank-2 entangled target: equal mixture of the 'first-half' and
    'second-half' uniform superpositions."""
    dims = Dimensions.from_n(n)
    d = dims.d
    psi1 = np.zeros(d, dtype=np.complex128)
    psi2 = np.zeros(d, dtype=np.complex128)
    psi1[: d // 2] = 1.0
    psi2[d // 2:] = 1.0
    psi1 /= np.linalg.norm(psi1)
    psi2 /= np.linalg.norm(psi2)
    return 0.5 * np.outer(psi1, psi1.conj()) + 0.5 * np.outer(psi2, psi2.conj())


def true_state_mixed(n, seed):
    """Full-rank target: equal mixture of d independent normalized complex
    Gaussian vectors. Deterministic given the seed."""
    dims = Dimensions.from_n(n)
    d = dims.d
    rng = np.random.default_rng(seed)
    vecs = complex_normal(rng, (d, d))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    rho = (vecs.T / d) @ vecs.conj()
    return 0.5 * (rho + rho.conj().T)


def complex_normal(rng, shape):
    """Standard complex normal draws: unit variance per complex coordinate."""
    return np.sqrt(0.5) * (rng.standard_normal(shape)
                           + 1j * rng.standard_normal(shape))
