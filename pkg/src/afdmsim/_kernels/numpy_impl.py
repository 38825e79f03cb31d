"""Pure-numpy builds of the hot kernels.

Reference semantics for the numba builds in `numba_impl`; selected via
AFDMSIM_BACKEND=numpy.  All kernels are pure functions on contiguous
float64/complex128/int64 arrays.
"""

import numpy as np

_TWO_PI = 2.0 * np.pi
_VAR_FLOOR = 1e-30


def time_channel_matrix(gains, rc_taps, dopplers, n):
    """Assemble the N x N time-domain channel matrix.

    Row r, tap l contributes gains[i] * rc_taps[i, l] * exp(-2j pi r nu_i / n)
    at column (r - l) mod n: a cyclic delay of l samples followed by a
    per-sample Doppler phase ramp.
    """
    p_count, l_count = rc_taps.shape
    h = np.zeros((n, n), dtype=np.complex128)
    rows = np.arange(n)
    for i in range(p_count):
        ramp = gains[i] * np.exp(-1j * _TWO_PI * rows * dopplers[i] / n)
        for l in range(l_count):
            amp = rc_taps[i, l]
            if amp == 0.0:
                continue
            h[rows, (rows - l) % n] += amp * ramp
    return h


def _geometric_ratio(theta, n):
    """sum_{m=0}^{n-1} exp(-2j pi theta m / n) for real theta, any value.

    Evaluated as a Dirichlet-style ratio with the removable singularity at
    theta = 0 (mod n) replaced by its analytic limit.
    """
    phase = np.exp(-1j * np.pi * theta * (n - 1) / n)
    den = np.sin(np.pi * theta / n)
    num = np.sin(np.pi * theta)
    singular = np.abs(den) < 1e-9
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(singular, 0.0, num / np.where(singular, 1.0, den))
    limit = n * np.cos(np.pi * theta) / np.cos(np.pi * theta / n)
    return np.where(singular, limit, ratio) * phase


def affine_channel_matrix(gains, rc_taps, dopplers, c1, c2, n):
    """Closed-form affine-domain channel: entry (p, q) summed over paths/taps.

    Each (path, tap) term is rc/n times a chirp-and-delay phase times the
    geometric ratio in theta = p - q + nu + 2 n c1 l.  Requires the usual
    chirp-parameter regime (2 n c1 integer, n even) to agree with the
    transform sandwich.
    """
    p_count, l_count = rc_taps.shape
    rows = np.arange(n)
    diff = rows[:, None] - rows[None, :]
    c2_phase = np.exp(-1j * _TWO_PI * c2 * (rows[:, None] ** 2 - rows[None, :] ** 2))
    h = np.zeros((n, n), dtype=np.complex128)
    for i in range(p_count):
        acc = np.zeros((n, n), dtype=np.complex128)
        for l in range(l_count):
            amp = rc_taps[i, l] / n
            if amp == 0.0:
                continue
            theta = diff + dopplers[i] + 2.0 * n * c1 * l
            lphase = np.exp(1j * _TWO_PI * (n * c1 * l * l - rows[None, :] * l) / n)
            acc += amp * lphase * _geometric_ratio(theta, n)
        h += gains[i] * acc
    return h * c2_phase


def qam_denoise(u, v, points, prior):
    """Per-symbol posterior under a Gaussian pseudo-observation u ~ CN(x, v).

    beta[i, a] propto prior[i, a] * exp(-|points[a] - u[i]|^2 / v[i]); the
    per-symbol minimum distance is subtracted before exponentiation so the
    result is finite for arbitrarily small v.  Returns posterior mean,
    variance and the full probability table.
    """
    v = np.maximum(v, _VAR_FLOOR)
    d2 = np.abs(u[:, None] - points[None, :]) ** 2
    expo = -d2 / v[:, None]
    expo -= expo.max(axis=1, keepdims=True)
    xi = prior * np.exp(expo)
    beta = xi / xi.sum(axis=1, keepdims=True)
    xhat = beta @ points
    v_x = np.sum(np.abs(points[None, :] - xhat[:, None]) ** 2 * beta, axis=1)
    return xhat, v_x, beta


def mbuamp_step(phi, lam, gidx, rt, e_prev, shat, v_s, noise_var, n):
    """One backward+forward block pass plus the overlap merge.

    phi:     (B, Q, W) per-block factor Lambda_b V_b
    lam:     (B, Q) squared singular values
    gidx:    (B, W) global symbol index of each block column
    rt:      (B, Q) unitary-transformed receive slices
    e_prev:  (B, Q) scaled residuals from the previous iteration
    shat:    (n,) current time-domain mean
    Returns (qhat (n,), v_q (n,), e_new (B, Q), v_qb (B,)).
    """
    b_count, q_len, w_len = phi.shape
    e_new = np.empty_like(e_prev)
    qhat_blk = np.empty((b_count, w_len), dtype=np.complex128)
    v_qb = np.empty(b_count)
    for b in range(b_count):
        sb = shat[gidx[b]]
        vp = v_s * lam[b]
        p = phi[b] @ sb - vp * e_prev[b]
        ve = 1.0 / (vp + noise_var)
        e = ve * (rt[b] - p)
        vq = w_len / float(lam[b] @ ve)
        qhat_blk[b] = sb + vq * (phi[b].conj().T @ e)
        e_new[b] = e
        v_qb[b] = vq
    flat_idx = gidx.ravel()
    weights = np.repeat(1.0 / v_qb, w_len)
    den = np.bincount(flat_idx, weights=weights, minlength=n)
    num_re = np.bincount(flat_idx, weights=weights * qhat_blk.real.ravel(), minlength=n)
    num_im = np.bincount(flat_idx, weights=weights * qhat_blk.imag.ravel(), minlength=n)
    v_q = 1.0 / den
    qhat = (num_re + 1j * num_im) * v_q
    return qhat, v_q, e_new, v_qb


def gamp_linear_step(h, row_energy, y, xhat, v_x, shat, noise_var):
    """GAMP linear half-iteration on a dense (possibly row-truncated) matrix.

    Output nodes: vp = v_x * row_energy, Onsager-corrected prediction, scaled
    residual update.  Input nodes: scalar pseudo-observation variance
    v_r = n / sum(row_energy * v_s) and r_in = xhat + v_r * (h^H shat).
    Returns (r_in, v_r, shat_new).
    """
    n = h.shape[0]
    vp = v_x * row_energy
    p = h @ xhat - vp * shat
    shat_new = (y - p) / (noise_var + vp)
    vs = 1.0 / (noise_var + vp)
    v_r = n / float(row_energy @ vs)
    r_in = xhat + v_r * (h.conj().T @ shat_new)
    return r_in, v_r, shat_new
