"""Multi-block unitary-transformed AMP detector.

The time-domain matrix is cut into B row blocks; the all-zero columns of each
block are pruned and the survivor is SVD-factored so the block observation
becomes r_tilde_b = Phi_b s_b + white noise.  Message passing runs per block
in the time domain, block estimates of shared symbols merge by inverse
variance, and the merged vector crosses into the affine domain for symbol
denoising.  Per-block passes are independent (parallelizable); the merge is
the synchronization point.
"""

from dataclasses import dataclass

import numpy as np

from .. import _kernels as K
from .common import DetectorOpts, DetectorOutput, check_prior, denoise, uniform_prior

PRUNE_EPS = 1e-14


@dataclass(frozen=True)
class BlockFactorization:
    """SVD factors of one pruned row block."""

    block_index: int
    pruned_matrix: np.ndarray   # (Q, W)
    left_factor: np.ndarray     # (Q, Q) unitary U_b
    singulars: np.ndarray       # (Q,) non-increasing
    phi: np.ndarray             # (Q, W) = diag(singulars) @ V_b
    lambda_vec: np.ndarray      # (Q,) squared singulars
    column_set: np.ndarray      # (W,) global symbol indices, band order


def _band_order(cols, n):
    """Order pruned columns along the cyclic band.

    Ascending order, rotated to start just past the largest cyclic gap, so a
    wrapped band lists its tail (high indices) before its head.  A full set
    stays 0..n-1.
    """
    cols = np.sort(cols)
    if cols.size == n:
        return cols
    gaps = np.diff(np.concatenate([cols, [cols[0] + n]]))
    k = int(np.argmax(gaps))
    return np.concatenate([cols[k + 1 :], cols[: k + 1]])


def segment(ht, b_count):
    """Split H_t into B row blocks and prune each block's zero columns.

    Returns a list of (rows_matrix, column_set) with columns in band order.
    """
    n = ht.n
    if b_count < 1 or n % b_count != 0:
        raise ValueError(f"block count {b_count} must divide N={n}")
    q = n // b_count
    band = ht.active_taps.max() if ht.active_taps.size else 0
    if q <= band:
        raise ValueError(f"block length {q} must exceed channel band {band}")
    blocks = []
    for b in range(b_count):
        rows = ht.matrix[b * q : (b + 1) * q]
        cols = np.nonzero(np.max(np.abs(rows), axis=0) > PRUNE_EPS)[0]
        order = _band_order(cols, n)
        blocks.append((rows[:, order], order))
    return blocks


def factorize(block, index=0):
    """Thin SVD of one pruned block; Phi_b = Lambda_b V_b."""
    mat, cols = block
    if mat.size == 0:
        raise ValueError("empty block")
    try:
        u, sv, vh = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError(f"SVD failed on block {index}: {err}") from err
    return BlockFactorization(
        block_index=index,
        pruned_matrix=mat,
        left_factor=u,
        singulars=sv,
        phi=sv[:, None] * vh,
        lambda_vec=sv**2,
        column_set=cols,
    )


def build_factorizations(ht, b_count):
    return [factorize(blk, i) for i, blk in enumerate(segment(ht, b_count))]


def transform_rx(r, facts):
    """Per-block unitary transform r_tilde_b = U_b^H r_b (noise stays white)."""
    r = np.asarray(r)
    q = facts[0].left_factor.shape[0]
    return [f.left_factor.conj().T @ r[i * q : (i + 1) * q] for i, f in enumerate(facts)]


def _stack(facts):
    widths = {f.phi.shape[1] for f in facts}
    if len(widths) != 1:
        raise ValueError("blocks have unequal pruned widths; cannot stack")
    phi = np.ascontiguousarray(np.stack([f.phi for f in facts]))
    lam = np.ascontiguousarray(np.stack([f.lambda_vec for f in facts]))
    gidx = np.ascontiguousarray(np.stack([f.column_set for f in facts]).astype(np.int64))
    return phi, lam, gidx


def merge_blocks(qhat_blocks, v_qb, gidx, n):
    """Inverse-variance combination of per-block symbol estimates.

    Symbols seen by a single block pass through unchanged; overlap symbols
    combine as v_q = (sum 1/v_qb)^-1, qhat = v_q * sum qhat_b / v_qb.
    """
    flat = gidx.ravel()
    w = np.repeat(1.0 / v_qb, gidx.shape[1])
    den = np.bincount(flat, weights=w, minlength=n)
    num = np.bincount(flat, weights=w * qhat_blocks.real.ravel(), minlength=n) + 1j * np.bincount(
        flat, weights=w * qhat_blocks.imag.ravel(), minlength=n
    )
    covered = den > 0
    v_q = np.full(n, np.inf)
    v_q[covered] = 1.0 / den[covered]
    qhat = np.zeros(n, dtype=np.complex128)
    qhat[covered] = num[covered] * v_q[covered]
    return qhat, v_q


def detect(rt_blocks, facts, gamma, prior, frame, opts=None, spec=None, record_beta=False):
    """Run the cross-domain message-passing loop on one frame.

    rt_blocks : list/array of unitary-transformed receive slices
    facts     : list of BlockFactorization from `build_factorizations`
    gamma     : noise precision (> 0, finite)
    prior     : (N, |A|) symbol priors (rows sum to 1)
    frame     : AffineFrame used by the modulator
    spec      : ConstellationSpec (required)
    """
    if spec is None:
        raise ValueError("spec (ConstellationSpec) is required")
    if opts is None:
        opts = DetectorOpts()
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValueError("gamma must be positive and finite")
    n = frame.n
    prior = check_prior(prior, n, spec)
    phi, lam, gidx = _stack(facts)
    rt = np.ascontiguousarray(np.stack(rt_blocks))
    noise_var = 1.0 / gamma
    rho = opts.damping

    xhat = prior @ spec.points
    v_x = np.sum(np.abs(spec.points[None, :] - xhat[:, None]) ** 2 * prior, axis=1)
    e_prev = np.zeros_like(rt)
    xn_prev = None
    trace = []
    history = [] if record_beta else None
    beta = prior
    iterations = opts.max_iter
    for t in range(opts.max_iter):
        shat = np.ascontiguousarray(frame.inverse(xhat))
        v_s = float(np.mean(v_x))
        qhat, v_q, e_new, _ = K.mbuamp_step(
            phi, lam, gidx, rt, e_prev, shat, v_s, noise_var, n
        )
        if opts.damp_target == "e" and t > 0:
            e_new = (1.0 - rho) * e_prev + rho * e_new
        e_prev = e_new
        u = frame.forward(qhat)
        v_u = float(np.mean(v_q))
        x_new, v_new, beta = denoise(u, v_u, spec, prior)
        if record_beta:
            history.append(beta.copy())
        dx = np.inf if xn_prev is None else float(np.max(np.abs(x_new - xn_prev)))
        xn_prev = x_new
        if opts.damp_target == "xhat":
            xhat = (1.0 - rho) * xhat + rho * x_new
            v_x = (1.0 - rho) * v_x + rho * v_new
        else:
            xhat, v_x = x_new, v_new
        trace.append((dx, float(np.mean(v_x))))
        if dx < opts.tol:
            iterations = t + 1
            break
    return DetectorOutput.from_beta(beta, spec.points, iterations, trace, history)


def detect_frame(r, ht, gamma, frame, spec, b_count, prior=None, opts=None, record_beta=False):
    """Convenience wrapper: factorize, transform, detect in one call."""
    facts = build_factorizations(ht, b_count)
    rt = transform_rx(r, facts)
    if prior is None:
        prior = uniform_prior(frame.n, spec)
    return detect(rt, facts, gamma, prior, frame, opts, spec, record_beta)
