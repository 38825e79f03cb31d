"""Numba @njit builds of the hot kernels.

Same signatures and semantics as `numpy_impl`; the docstrings live there.
Compiled lazily on first call, cached on disk so repeated runs and worker
processes skip recompilation.
"""

import numpy as np
from numba import njit

_TWO_PI = 2.0 * np.pi
_VAR_FLOOR = 1e-30


@njit(cache=True)
def time_channel_matrix(gains, rc_taps, dopplers, n):
    p_count, l_count = rc_taps.shape
    h = np.zeros((n, n), dtype=np.complex128)
    for i in range(p_count):
        for r in range(n):
            ramp = gains[i] * np.exp(-1j * _TWO_PI * r * dopplers[i] / n)
            for l in range(l_count):
                amp = rc_taps[i, l]
                if amp == 0.0:
                    continue
                h[r, (r - l) % n] += amp * ramp
    return h


@njit(cache=True)
def _geo_scalar(theta, n):
    phase = np.exp(-1j * np.pi * theta * (n - 1) / n)
    den = np.sin(np.pi * theta / n)
    if abs(den) < 1e-9:
        return n * np.cos(np.pi * theta) / np.cos(np.pi * theta / n) * phase
    return np.sin(np.pi * theta) / den * phase


@njit(cache=True)
def affine_channel_matrix(gains, rc_taps, dopplers, c1, c2, n):
    p_count, l_count = rc_taps.shape
    h = np.zeros((n, n), dtype=np.complex128)
    for i in range(p_count):
        for p in range(n):
            for q in range(n):
                acc = 0.0 + 0.0j
                for l in range(l_count):
                    amp = rc_taps[i, l] / n
                    if amp == 0.0:
                        continue
                    theta = p - q + dopplers[i] + 2.0 * n * c1 * l
                    lphase = np.exp(
                        1j * _TWO_PI * (n * c1 * l * l - q * l) / n
                    )
                    acc += amp * lphase * _geo_scalar(theta, n)
                h[p, q] += gains[i] * acc
    if c2 != 0.0:
        for p in range(n):
            for q in range(n):
                h[p, q] *= np.exp(-1j * _TWO_PI * c2 * (p * p - q * q))
    return h


@njit(cache=True)
def qam_denoise(u, v, points, prior):
    n = u.shape[0]
    m = points.shape[0]
    beta = np.empty((n, m))
    xhat = np.empty(n, dtype=np.complex128)
    v_x = np.empty(n)
    for i in range(n):
        vi = v[i] if v[i] > _VAR_FLOOR else _VAR_FLOOR
        dmin = 1e300
        for a in range(m):
            d = abs(points[a] - u[i]) ** 2
            beta[i, a] = d
            if d < dmin:
                dmin = d
        tot = 0.0
        for a in range(m):
            w = prior[i, a] * np.exp(-(beta[i, a] - dmin) / vi)
            beta[i, a] = w
            tot += w
        mean = 0.0 + 0.0j
        for a in range(m):
            beta[i, a] /= tot
            mean += points[a] * beta[i, a]
        var = 0.0
        for a in range(m):
            var += abs(points[a] - mean) ** 2 * beta[i, a]
        xhat[i] = mean
        v_x[i] = var
    return xhat, v_x, beta


@njit(cache=True)
def mbuamp_step(phi, lam, gidx, rt, e_prev, shat, v_s, noise_var, n):
    b_count, q_len, w_len = phi.shape
    e_new = np.empty((b_count, q_len), dtype=np.complex128)
    qhat_blk = np.empty((b_count, w_len), dtype=np.complex128)
    v_qb = np.empty(b_count)
    num = np.zeros(n, dtype=np.complex128)
    den = np.zeros(n)
    for b in range(b_count):
        info = 0.0
        for m in range(q_len):
            pred = 0.0 + 0.0j
            for w in range(w_len):
                pred += phi[b, m, w] * shat[gidx[b, w]]
            vp = v_s * lam[b, m]
            pred -= vp * e_prev[b, m]
            ve = 1.0 / (vp + noise_var)
            e_new[b, m] = ve * (rt[b, m] - pred)
            info += lam[b, m] * ve
        vq = w_len / info
        v_qb[b] = vq
        wgt = 1.0 / vq
        for w in range(w_len):
            corr = 0.0 + 0.0j
            for m in range(q_len):
                corr += np.conj(phi[b, m, w]) * e_new[b, m]
            q_val = shat[gidx[b, w]] + vq * corr
            qhat_blk[b, w] = q_val
            num[gidx[b, w]] += q_val * wgt
            den[gidx[b, w]] += wgt
    v_q = 1.0 / den
    qhat = num * v_q
    return qhat, v_q, e_new, v_qb


@njit(cache=True)
def gamp_linear_step(h, row_energy, y, xhat, v_x, shat, noise_var):
    n = h.shape[0]
    shat_new = np.empty(n, dtype=np.complex128)
    info = 0.0
    for m in range(n):
        pred = 0.0 + 0.0j
        for k in range(n):
            pred += h[m, k] * xhat[k]
        vp = v_x * row_energy[m]
        pred -= vp * shat[m]
        shat_new[m] = (y[m] - pred) / (noise_var + vp)
        info += row_energy[m] / (noise_var + vp)
    v_r = n / info
    r_in = np.empty(n, dtype=np.complex128)
    for k in range(n):
        corr = 0.0 + 0.0j
        for m in range(n):
            corr += np.conj(h[m, k]) * shat_new[m]
        r_in[k] = xhat[k] + v_r * corr
    return r_in, v_r, shat_new
