"""MCMC engines for the pseudo-posterior over density matrices.

Two samplers share the target exp(-lam * loss) * prior:

* ``run_adaptive_mh`` updates the whole parameter point at once: a
  multiplicative log-uniform walk on the weights and a preconditioned
  Crank-Nicolson step on the vectors. The pCN step leaves the complex
  Gaussian prior invariant, so the vector prior and proposal densities
  cancel out of the acceptance ratio and each iteration costs exactly one
  loss evaluation.

* ``run_naive_mh`` is the coordinate-sweep baseline: per sweep, one
  multiplicative-walk update per weight followed by one independence
  (uniform-on-sphere) update per vector, each paying a full loss
  evaluation -- 2d evaluations per sweep.

Both are deterministic given the config seed and accumulate the ergodic
mean of the post-decision states after burn-in. Proposal randomness is
drawn in blocks up front (one block per chunk of iterations / per sweep),
so the compiled and pure-numpy backends consume identical streams.
"""

import math
import time
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .model import (ModelConfig, PseudoLikelihood, StateParams, factored_form,
                    prior_sample, rho_factored)
from .qcore import complex_normal

BETA_MIN = 1e-4
BETA_MAX = 0.999


@dataclass(frozen=True)
class SamplerConfig:
    """Chain parameters: proposal scales, length, burn-in, seed, model.

    ``init_state`` warm-starts the chain (pilot continuation); the default
    draws the initial point from the prior.
    """

    beta_y: float
    beta_z: float
    T: int
    model: ModelConfig
    burn_in: int = 0
    seed: object = None
    init_state: object = None

    def __post_init__(self):
        if not 0.0 < self.beta_y < 1.0:
            raise ValueError(f"beta_y must lie in (0, 1), got {self.beta_y}")
        if not 0.0 < self.beta_z < 1.0:
            raise ValueError(f"beta_z must lie strictly in (0, 1), got {self.beta_z}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if not 0 <= self.burn_in < self.T:
            raise ValueError(f"burn_in must lie in [0, T), got {self.burn_in}")


@dataclass(frozen=True)
class ProposalDraw:
    """Randomness for one adaptive proposal: eta uniform on (-0.5, 0.5) per
    weight, xi standard complex normal per vector."""

    eta: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class ChainOutput:
    """Chain results: ergodic-mean state, acceptance bookkeeping, loss trace."""

    rho_hat: np.ndarray
    acceptance_rate: float        # over post-burn-in iterations
    acceptance_rate_full: float   # over the whole chain
    loss_trace: np.ndarray
    wall_time: float              # whole run, setup included
    loop_time: float              # iteration phase only (benchmark unit)
    final_state: StateParams
    n_evals: int


def sample_proposal_draw(rng, d):
    return ProposalDraw(eta=rng.uniform(-0.5, 0.5, size=d),
                        xi=complex_normal(rng, (d, d)))


def _log_accepts(u, log_ratio):
    # u == 0 accepts unconditionally (log u = -inf)
    return u <= 0.0 or math.log(u) < log_ratio


def _chunk_size(d, T):
    # pre-drawn xi blocks stay around 16 MB at the largest supported d
    return max(1, min(256, (1 << 20) // (d * d), T))


def _hermitized_mean(rho_acc, kept):
    rho = rho_acc / kept
    return 0.5 * (rho + rho.conj().T)


def adaptive_propose(x: StateParams, beta_y, beta_z, draw: ProposalDraw):
    """One whole-state proposal: y'_j = y_j exp(beta_y eta_j),
    z'_j = sqrt(1 - beta_z^2) z_j + beta_z xi_j."""
    y_new = x.y * np.exp(beta_y * draw.eta)
    z_new = np.sqrt(1.0 - beta_z ** 2) * x.z + beta_z * draw.xi
    return StateParams(y=y_new, z=z_new)


def adaptive_log_accept_ratio(x: StateParams, x_new: StateParams, p_hat,
                              config: ModelConfig):
    """Log acceptance ratio of the adaptive sampler.

    The weight term carries coefficient alpha (not alpha - 1): the extra
    log absorbs the Jacobian of the multiplicative walk. No vector terms
    appear because the pCN proposal is reversible for the Gaussian prior.
    """
    ev = PseudoLikelihood(p_hat, config)
    g_old, v_old = x.factored()
    g_new, v_new = x_new.factored()
    delta_loss = ev.loss(g_new, v_new) - ev.loss(g_old, v_old)
    alpha = config.alpha
    weight_term = np.sum(alpha * (np.log(x_new.y) - np.log(x.y))
                         - x_new.y + x.y)
    return -config.lam * delta_loss + float(weight_term)


def run_adaptive_mh(p_hat, cfg: SamplerConfig) -> ChainOutput:
    """Run the whole-state adaptive chain; one loss evaluation per iteration."""
    t_start = time.perf_counter()
    ev = PseudoLikelihood(p_hat, cfg.model)
    d = ev.dims.d
    alpha = cfg.model.alpha
    lam = cfg.model.lam
    beta_y, beta_z = cfg.beta_y, cfg.beta_z
    keep = np.sqrt(1.0 - beta_z ** 2)

    rng = np.random.default_rng(cfg.seed)
    x0 = cfg.init_state if cfg.init_state is not None \
        else prior_sample(d, alpha, rng)
    y = x0.y.copy()
    z = x0.z.copy()
    gamma, vhat = factored_form(y, z)
    cur_loss = ev.loss(gamma, vhat)

    rho_acc = np.zeros((d, d), dtype=np.complex128)
    loss_trace = np.empty(cfg.T)
    accepted_total = 0
    accepted_post = 0
    kept = 0
    use_kernel = kernels.adaptive_chunk is not None

    k0 = 0
    chunk = _chunk_size(d, cfg.T)
    t_loop = time.perf_counter()
    while k0 < cfg.T:
        span = min(chunk, cfg.T - k0)
        eta_block = rng.uniform(-0.5, 0.5, size=(span, d))
        xi_block = complex_normal(rng, (span, d, d))
        u_block = rng.random(span)
        if use_kernel:
            cur_loss, acc, acc_post, kp = kernels.adaptive_chunk(
                ev.axes, ev.p_hat, y, z, gamma, vhat, cur_loss, lam, alpha,
                beta_y, beta_z, eta_block, xi_block, u_block, k0, cfg.burn_in,
                rho_acc, loss_trace[k0:k0 + span])
            ev.n_evals += span
            accepted_total += acc
            accepted_post += acc_post
            kept += kp
        else:
            for c in range(span):
                k = k0 + c
                eta = eta_block[c]
                y_new = y * np.exp(beta_y * eta)
                z_new = keep * z + beta_z * xi_block[c]
                gamma_new, vhat_new = factored_form(y_new, z_new)
                new_loss = ev.loss(gamma_new, vhat_new)
                # log(y'_j / y_j) == beta_y * eta_j exactly by construction
                log_a = (-lam * (new_loss - cur_loss)
                         + alpha * beta_y * eta.sum() - y_new.sum() + y.sum())
                if _log_accepts(u_block[c], log_a):
                    y, z = y_new, z_new
                    gamma, vhat = gamma_new, vhat_new
                    cur_loss = new_loss
                    accepted_total += 1
                    if k >= cfg.burn_in:
                        accepted_post += 1
                if k >= cfg.burn_in:
                    rho_acc += rho_factored(gamma, vhat)
                    kept += 1
                loss_trace[k] = cur_loss
        k0 += span
    loop_time = time.perf_counter() - t_loop

    post = cfg.T - cfg.burn_in
    return ChainOutput(
        rho_hat=_hermitized_mean(rho_acc, kept),
        acceptance_rate=accepted_post / post,
        acceptance_rate_full=accepted_total / cfg.T,
        loss_trace=loss_trace,
        wall_time=time.perf_counter() - t_start,
        loop_time=loop_time,
        final_state=StateParams(y=y, z=z),
        n_evals=ev.n_evals,
    )


def naive_propose_y(y_i, draw):
    """Multiplicative weight proposal of the baseline: y_i * exp(draw)."""
    return y_i * np.exp(draw)


def run_naive_mh(p_hat, cfg: SamplerConfig) -> ChainOutput:
    """Run the coordinate-sweep baseline; 2d loss evaluations per sweep.

    The acceptance ratios follow the standard Metropolis-Hastings form for
    the pseudo-posterior: the weight updates reuse the adaptive sampler's
    per-coordinate term, the vector updates are independence samples from
    the uniform sphere whose proposal and prior factors cancel. beta_y and
    beta_z are ignored (the baseline has fixed proposal scales).
    """
    t_start = time.perf_counter()
    ev = PseudoLikelihood(p_hat, cfg.model)
    d = ev.dims.d
    alpha = cfg.model.alpha
    lam = cfg.model.lam

    rng = np.random.default_rng(cfg.seed)
    x0 = cfg.init_state if cfg.init_state is not None \
        else prior_sample(d, alpha, rng)
    y = x0.y.copy()
    # chain state keeps only the directions; radial parts are not identified
    v = x0.z / np.linalg.norm(x0.z, axis=1, keepdims=True)
    y_sum = y.sum()
    gamma = y / y_sum
    cur_loss = ev.loss(gamma, v)

    rho_acc = np.zeros((d, d), dtype=np.complex128)
    loss_trace = np.empty(cfg.T)
    accepted_total = 0
    accepted_post = 0
    kept = 0
    use_kernel = kernels.naive_sweep is not None

    t_loop = time.perf_counter()
    for t in range(cfg.T):
        post = t >= cfg.burn_in
        # per-sweep randomness drawn in blocks, consumed coordinate by coordinate
        steps = rng.uniform(-0.5, 0.5, size=d)
        accept_y = rng.random(d)
        xi = complex_normal(rng, (d, d))
        accept_v = rng.random(d)
        if use_kernel:
            cur_loss, acc = kernels.naive_sweep(
                ev.axes, ev.p_hat, y, v, gamma, cur_loss, lam, alpha, steps,
                accept_y, xi, accept_v, post, rho_acc)
            ev.n_evals += 2 * d
            accepted_total += acc
            if post:
                accepted_post += acc
        else:
            acc = 0
            y_sum = y.sum()  # recomputed per sweep, matching the kernel
            for i in range(d):
                step = steps[i]
                y_old = y[i]
                y_prop = y_old * math.exp(step)
                sum_prop = y_sum - y_old + y_prop
                y[i] = y_prop
                np.divide(y, sum_prop, out=gamma)
                new_loss = ev.loss(gamma, v)
                log_r = (-lam * (new_loss - cur_loss)
                         + alpha * step - y_prop + y_old)
                if _log_accepts(accept_y[i], log_r):
                    y_sum = sum_prop
                    cur_loss = new_loss
                    acc += 1
                else:
                    y[i] = y_old
            np.divide(y, y_sum, out=gamma)
            for i in range(d):
                w = xi[i] / np.linalg.norm(xi[i])
                old_row = v[i].copy()
                v[i] = w
                new_loss = ev.loss(gamma, v)
                if _log_accepts(accept_v[i], -lam * (new_loss - cur_loss)):
                    cur_loss = new_loss
                    acc += 1
                else:
                    v[i] = old_row
            if post:
                rho_acc += rho_factored(gamma, v)
            accepted_total += acc
            if post:
                accepted_post += acc
        if post:
            kept += 1
        loss_trace[t] = cur_loss
    loop_time = time.perf_counter() - t_loop

    proposals_post = 2 * d * (cfg.T - cfg.burn_in)
    return ChainOutput(
        rho_hat=_hermitized_mean(rho_acc, kept),
        acceptance_rate=accepted_post / proposals_post,
        acceptance_rate_full=accepted_total / (2 * d * cfg.T),
        loss_trace=loss_trace,
        wall_time=time.perf_counter() - t_start,
        loop_time=loop_time,
        final_state=StateParams(y=y, z=v),
        n_evals=ev.n_evals,
    )


@dataclass(frozen=True)
class TuneResult:
    beta_y: float
    beta_z: float
    acceptance: float
    converged: bool
    rounds: int


def tune_betas(p_hat, cfg: SamplerConfig, target=0.3, pilot_len=500,
               max_rounds=30, tol=0.05) -> TuneResult:
    """Tune (beta_y, beta_z) so the adaptive chain accepts near ``target``.

    Runs short pilot chains and rescales both betas multiplicatively by
    exp(acceptance - target) after each round, clipped to
    (1e-4, 0.999), until the pilot acceptance is within ``tol`` of the
    target or the round budget runs out (then the closest pair found is
    returned with ``converged=False`` and a warning).

    Each pilot continues from the previous pilot's final state, so after
    the first few rounds the measured acceptance tracks the chain's
    stationary rate rather than its burn-in transient; production chains
    run at the tuned betas then realize close to the target. Convergence
    requires two consecutive pilots within tolerance (a single hit can be
    a burn-in artifact).
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target acceptance must lie in (0, 1), got {target}")
    rng = np.random.default_rng(cfg.seed)
    beta_y, beta_z = cfg.beta_y, cfg.beta_z
    best = None
    state = cfg.init_state
    hits = 0
    for rounds in range(1, max_rounds + 1):
        pilot_cfg = replace(cfg, beta_y=beta_y, beta_z=beta_z, T=pilot_len,
                            burn_in=0, seed=rng.integers(2 ** 63),
                            init_state=state)
        out = run_adaptive_mh(p_hat, pilot_cfg)
        state = out.final_state
        acc = out.acceptance_rate
        if best is None or abs(acc - target) < abs(best.acceptance - target):
            best = TuneResult(beta_y, beta_z, acc, True, rounds)
        if abs(acc - target) <= tol:
            hits += 1
            if hits >= 2:
                return TuneResult(beta_y, beta_z, acc, True, rounds)
        else:
            hits = 0
            scale = np.exp(acc - target)
            beta_y = float(np.clip(beta_y * scale, BETA_MIN, BETA_MAX))
            beta_z = float(np.clip(beta_z * scale, BETA_MIN, BETA_MAX))
    warnings.warn(f"beta tuning did not reach {target}+-{tol} in "
                  f"{max_rounds} rounds; returning closest pair")
    return replace(best, converged=False)
