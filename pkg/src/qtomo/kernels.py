"""Hot numeric kernels for Born-rule probability tables.

Two interchangeable backends compute the same tables:

* ``numba`` -- loop kernels compiled with ``@njit`` (default when numba
  imports cleanly),
* ``numpy`` -- a pure-numpy vectorized fallback.

Set the environment variable ``QTOMO_BACKEND`` to ``numba`` or ``numpy``
before import to force one. ``benchmarks/bench_kernels.py`` times both.

Conventions fixed here and relied on everywhere else:

* axis codes X=0, Y=1, Z=2 (lexicographic setting order),
* ``EIGENBASES[a]`` is the single-qubit rotation U_a whose column 0 is the
  +1 eigenvector and column 1 the -1 eigenvector of the Pauli matrix for
  axis ``a``, first component real nonnegative,
* qubit 0 is the outermost Kronecker factor, so coordinate index ``k`` of
  a length-2**n vector assigns qubit ``j`` the bit ``(k >> (n-1-j)) & 1``
  (bit 0 = +1 outcome, bit 1 = -1 outcome).
"""

import os
import warnings

import numpy as np

_SQ2 = 1.0 / np.sqrt(2.0)

# Columns: +1 eigenvector, -1 eigenvector.
EIGENBASES = np.array(
    [
        [[_SQ2, _SQ2], [_SQ2, -_SQ2]],            # X
        [[_SQ2, _SQ2], [1j * _SQ2, -1j * _SQ2]],  # Y
        [[1.0, 0.0], [0.0, 1.0]],                 # Z
    ],
    dtype=np.complex128,
)
EIGENBASES.setflags(write=False)

_UDAGS = np.ascontiguousarray(np.conj(np.transpose(EIGENBASES, (0, 2, 1))))
_UDAGS.setflags(write=False)


def _select_backend():
    requested = os.environ.get("QTOMO_BACKEND", "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        warnings.warn(f"unknown QTOMO_BACKEND={requested!r}, using default")
        requested = ""
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            warnings.warn("QTOMO_BACKEND=numba but numba is not importable; "
                          "falling back to numpy")
        return "numpy"
    return "numba"


BACKEND = _select_backend()


# ---------------------------------------------------------------------------
# pure-numpy backend

def _born_factored_np(axes, gamma, vhat):
    n_settings, n_qubits = axes.shape
    r, d = vhat.shape
    out = np.empty((n_settings, d))
    for si in range(n_settings):
        w = vhat
        for j in range(n_qubits):
            u = _UDAGS[axes[si, j]]
            w = np.einsum("ab,rjbk->rjak",
                          u, w.reshape(r, 1 << j, 2, -1)).reshape(r, d)
        out[si] = gamma @ (w.real * w.real + w.imag * w.imag)
    return out


def _loss_factored_np(axes, gamma, vhat, p_hat):
    diff = _born_factored_np(axes, gamma, vhat) - p_hat
    return float(np.sum(diff * diff))


def _born_dense_np(axes, rho):
    n_settings, n_qubits = axes.shape
    d = rho.shape[0]
    out = np.empty((n_settings, d))
    for si in range(n_settings):
        a = rho
        for j in range(n_qubits):
            udag = _UDAGS[axes[si, j]]
            u = EIGENBASES[axes[si, j]]
            a = np.einsum("ab,jbk->jak",
                          udag, a.reshape(1 << j, 2, -1)).reshape(d, d)
            a = np.einsum("rjbk,ba->rjak",
                          a.reshape(d, 1 << j, 2, -1), u).reshape(d, d)
        out[si] = np.real(np.diagonal(a))
    return out


# ---------------------------------------------------------------------------
# numba backend

if BACKEND == "numba":
    import math

    from numba import njit

    @njit(cache=True, nogil=True)
    def _rotate_rows(w, axes, si, udags):
        r, d = w.shape
        n_qubits = axes.shape[1]
        for j in range(n_qubits):
            ax = axes[si, j]
            if ax == 2:  # Z factor is the identity rotation
                continue
            d00 = udags[ax, 0, 0]
            d01 = udags[ax, 0, 1]
            d10 = udags[ax, 1, 0]
            d11 = udags[ax, 1, 1]
            half = d >> (j + 1)
            period = half << 1
            for i in range(r):
                base = 0
                while base < d:
                    for t in range(base, base + half):
                        va = w[i, t]
                        vb = w[i, t + half]
                        w[i, t] = d00 * va + d01 * vb
                        w[i, t + half] = d10 * va + d11 * vb
                    base += period

    @njit(cache=True, nogil=True)
    def _born_factored_nb(axes, gamma, vhat, udags, out):
        n_settings = axes.shape[0]
        r, d = vhat.shape
        w = np.empty((r, d), np.complex128)
        for si in range(n_settings):
            w[:, :] = vhat
            _rotate_rows(w, axes, si, udags)
            for k in range(d):
                out[si, k] = 0.0
            for i in range(r):
                g = gamma[i]
                for k in range(d):
                    wv = w[i, k]
                    out[si, k] += g * (wv.real * wv.real + wv.imag * wv.imag)

    @njit(cache=True, nogil=True)
    def _loss_factored_nb(axes, gamma, vhat, p_hat, udags):
        n_settings = axes.shape[0]
        r, d = vhat.shape
        w = np.empty((r, d), np.complex128)
        row = np.empty(d)
        sse = 0.0
        for si in range(n_settings):
            w[:, :] = vhat
            _rotate_rows(w, axes, si, udags)
            for k in range(d):
                row[k] = 0.0
            for i in range(r):
                g = gamma[i]
                for k in range(d):
                    wv = w[i, k]
                    row[k] += g * (wv.real * wv.real + wv.imag * wv.imag)
            for k in range(d):
                diff = row[k] - p_hat[si, k]
                sse += diff * diff
        return sse

    @njit(cache=True, nogil=True)
    def _adaptive_chunk_nb(axes, p_hat, udags, y, z, gamma, vhat, cur_loss,
                           lam, alpha, beta_y, beta_z, eta_block, xi_block,
                           u_block, k0, burn_in, rho_acc, trace_block):
        """Run one block of whole-state MH iterations fully compiled.

        Mutates the chain state (y, z, gamma, vhat), the ergodic accumulator
        and the loss-trace block in place; randomness comes pre-drawn so the
        stream is identical to the fallback path's.
        """
        n_iters, d = eta_block.shape
        keep = math.sqrt(1.0 - beta_z * beta_z)
        ty = np.empty(d)
        tg = np.empty(d)
        tz = np.empty((d, d), np.complex128)
        tv = np.empty((d, d), np.complex128)
        accepted = 0
        accepted_post = 0
        kept = 0
        for c in range(n_iters):
            sum_eta = 0.0
            sum_ty = 0.0
            sum_y = 0.0
            for j in range(d):
                e = eta_block[c, j]
                sum_eta += e
                w = y[j] * math.exp(beta_y * e)
                ty[j] = w
                sum_ty += w
                sum_y += y[j]
            for i in range(d):
                nrm = 0.0
                for k in range(d):
                    w = keep * z[i, k] + beta_z * xi_block[c, i, k]
                    tz[i, k] = w
                    nrm += w.real * w.real + w.imag * w.imag
                nrm = math.sqrt(nrm)
                for k in range(d):
                    tv[i, k] = tz[i, k] / nrm
                tg[i] = ty[i] / sum_ty
            new_loss = _loss_factored_nb(axes, tg, tv, p_hat, udags)
            log_a = (-lam * (new_loss - cur_loss)
                     + alpha * beta_y * sum_eta - sum_ty + sum_y)
            u = u_block[c]
            if u <= 0.0 or math.log(u) < log_a:
                for j in range(d):
                    y[j] = ty[j]
                    gamma[j] = tg[j]
                for i in range(d):
                    for k in range(d):
                        z[i, k] = tz[i, k]
                        vhat[i, k] = tv[i, k]
                cur_loss = new_loss
                accepted += 1
                if k0 + c >= burn_in:
                    accepted_post += 1
            if k0 + c >= burn_in:
                for i in range(d):
                    g = gamma[i]
                    for a in range(d):
                        va = g * vhat[i, a]
                        for b in range(d):
                            rho_acc[a, b] += va * np.conj(vhat[i, b])
                kept += 1
            trace_block[c] = cur_loss
        return cur_loss, accepted, accepted_post, kept

    @njit(cache=True, nogil=True)
    def _naive_sweep_nb(axes, p_hat, udags, y, v, gamma, cur_loss, lam, alpha,
                        steps, accept_y, xi, accept_v, accumulate, rho_acc):
        """One coordinate sweep of the baseline sampler, fully compiled.

        d weight updates then d vector updates, one loss evaluation each;
        mutates y, v, gamma and (when accumulate is set) rho_acc in place.
        """
        d = y.shape[0]
        y_sum = 0.0
        for j in range(d):
            y_sum += y[j]
        accepted = 0
        for i in range(d):
            step = steps[i]
            y_old = y[i]
            y_prop = y_old * math.exp(step)
            sum_prop = y_sum - y_old + y_prop
            y[i] = y_prop
            for j in range(d):
                gamma[j] = y[j] / sum_prop
            new_loss = _loss_factored_nb(axes, gamma, v, p_hat, udags)
            log_r = (-lam * (new_loss - cur_loss)
                     + alpha * step - y_prop + y_old)
            u = accept_y[i]
            if u <= 0.0 or math.log(u) < log_r:
                y_sum = sum_prop
                cur_loss = new_loss
                accepted += 1
            else:
                y[i] = y_old
        for j in range(d):
            gamma[j] = y[j] / y_sum
        old_row = np.empty(d, np.complex128)
        for i in range(d):
            nrm = 0.0
            for k in range(d):
                w = xi[i, k]
                nrm += w.real * w.real + w.imag * w.imag
            nrm = math.sqrt(nrm)
            for k in range(d):
                old_row[k] = v[i, k]
                v[i, k] = xi[i, k] / nrm
            new_loss = _loss_factored_nb(axes, gamma, v, p_hat, udags)
            u = accept_v[i]
            if u <= 0.0 or math.log(u) < -lam * (new_loss - cur_loss):
                cur_loss = new_loss
                accepted += 1
            else:
                for k in range(d):
                    v[i, k] = old_row[k]
        if accumulate:
            for i in range(d):
                g = gamma[i]
                for a in range(d):
                    va = g * v[i, a]
                    for b in range(d):
                        rho_acc[a, b] += va * np.conj(v[i, b])
        return cur_loss, accepted

    @njit(cache=True, nogil=True)
    def _born_dense_nb(axes, rho, udags, us, out):
        n_settings, n_qubits = axes.shape
        d = rho.shape[0]
        a = np.empty((d, d), np.complex128)
        for si in range(n_settings):
            a[:, :] = rho
            for j in range(n_qubits):
                ax = axes[si, j]
                if ax == 2:
                    continue
                d00 = udags[ax, 0, 0]
                d01 = udags[ax, 0, 1]
                d10 = udags[ax, 1, 0]
                d11 = udags[ax, 1, 1]
                u00 = us[ax, 0, 0]
                u01 = us[ax, 0, 1]
                u10 = us[ax, 1, 0]
                u11 = us[ax, 1, 1]
                half = d >> (j + 1)
                period = half << 1
                base = 0
                while base < d:  # left-multiply by U-dagger (row pairs)
                    for t in range(base, base + half):
                        for c in range(d):
                            va = a[t, c]
                            vb = a[t + half, c]
                            a[t, c] = d00 * va + d01 * vb
                            a[t + half, c] = d10 * va + d11 * vb
                    base += period
                base = 0
                while base < d:  # right-multiply by U (column pairs)
                    for rr in range(d):
                        for t in range(base, base + half):
                            va = a[rr, t]
                            vb = a[rr, t + half]
                            a[rr, t] = va * u00 + vb * u10
                            a[rr, t + half] = va * u01 + vb * u11
                    base += period
            for k in range(d):
                out[si, k] = a[k, k].real
        return out


# ---------------------------------------------------------------------------
# dispatch

def _check_factored(axes, gamma, vhat, p_hat=None):
    n_qubits = axes.shape[1]
    r, d = vhat.shape
    if 1 << n_qubits != d:
        raise ValueError(f"vector length {d} does not match 2**{n_qubits}")
    if gamma.shape != (r,):
        raise ValueError(f"gamma shape {gamma.shape} does not match {r} vectors")
    if p_hat is not None and p_hat.shape != (axes.shape[0], d):
        raise ValueError(f"table shape {p_hat.shape} does not match "
                         f"({axes.shape[0]}, {d})")


def born_factored(axes, gamma, vhat):
    """Outcome-probability table for a state in factored form.

    ``axes`` is the (3**n, n) int8 setting table, ``gamma`` the (r,) mixture
    weights and ``vhat`` the (r, d) matrix whose rows are unit vectors;
    returns the (3**n, 2**n) table of sum_i gamma_i |<outcome|vhat_i>|^2.
    """
    _check_factored(axes, gamma, vhat)
    if BACKEND == "numba":
        out = np.empty((axes.shape[0], vhat.shape[1]))
        _born_factored_nb(axes, gamma, vhat, _UDAGS, out)
        return out
    return _born_factored_np(axes, gamma, vhat)


def loss_factored(axes, gamma, vhat, p_hat):
    """Squared Frobenius distance between the factored-state table and p_hat."""
    _check_factored(axes, gamma, vhat, p_hat)
    if BACKEND == "numba":
        return float(_loss_factored_nb(axes, gamma, vhat, p_hat, _UDAGS))
    return _loss_factored_np(axes, gamma, vhat, p_hat)


def born_dense(axes, rho):
    """Outcome-probability table of a dense density matrix.

    Per setting, conjugates ``rho`` by the per-qubit eigenbasis rotations
    (n successive 2x2-factor transforms, no d x d Kronecker build) and
    reads the diagonal.
    """
    if rho.shape[0] != 1 << axes.shape[1]:
        raise ValueError(f"matrix dimension {rho.shape[0]} does not match "
                         f"2**{axes.shape[1]}")
    if BACKEND == "numba":
        out = np.empty((axes.shape[0], rho.shape[0]))
        _born_dense_nb(axes, rho, _UDAGS, EIGENBASES, out)
        return out
    return _born_dense_np(axes, rho)


def adaptive_chunk(axes, p_hat, y, z, gamma, vhat, cur_loss, lam, alpha,
                   beta_y, beta_z, eta_block, xi_block, u_block, k0, burn_in,
                   rho_acc, trace_block):
    """Compiled block of adaptive-MH iterations; None when the numba backend
    is inactive (callers then run the fallback chain loop)."""
    return _adaptive_chunk_nb(axes, p_hat, _UDAGS, y, z, gamma, vhat,
                              cur_loss, lam, alpha, beta_y, beta_z, eta_block,
                              xi_block, u_block, k0, burn_in, rho_acc,
                              trace_block)


def naive_sweep(axes, p_hat, y, v, gamma, cur_loss, lam, alpha, steps,
                accept_y, xi, accept_v, accumulate, rho_acc):
    """Compiled baseline sweep; see adaptive_chunk for backend handling."""
    return _naive_sweep_nb(axes, p_hat, _UDAGS, y, v, gamma, cur_loss, lam,
                           alpha, steps, accept_y, xi, accept_v, accumulate,
                           rho_acc)


if BACKEND != "numba":
    adaptive_chunk = None
    naive_sweep = None


def backend_impls(backend):
    """Kernel callables for an explicit backend, regardless of QTOMO_BACKEND.

    Used by the backend benchmark; raises if numba kernels are requested
    but the active backend is numpy (they are only compiled when selected).
    """
    if backend == "numpy":
        return {
            "born_factored": _born_factored_np,
            "loss_factored": _loss_factored_np,
            "born_dense": _born_dense_np,
        }
    if backend == "numba":
        if BACKEND != "numba":
            raise RuntimeError("numba backend not active (QTOMO_BACKEND=numpy "
                               "or numba unavailable)")
        return {
            "born_factored": born_factored,
            "loss_factored": loss_factored,
            "born_dense": born_dense,
        }
    raise ValueError(f"unknown backend {backend!r}")
