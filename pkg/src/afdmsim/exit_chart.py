"""Empirical EXIT machinery.

Converts detector posteriors to per-bit LLRs, estimates mutual information,
fits the measured LLR mean/variance relation by local regression (the
Gaussian-consistency line sigma^2 = 2 mu is only a fallback), synthesizes
priors at a target mutual information, and records transfer curves and
free-running trajectories.
"""

from dataclasses import dataclass, field

import numpy as np

LLR_CLIP = 40.0
LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class LlrRecord:
    """Per-bit LLRs with their ground-truth bits for one detector pass."""

    llrs: np.ndarray
    true_bits: np.ndarray
    iteration: int = 0

    def __post_init__(self):
        if self.llrs.shape != self.true_bits.shape:
            raise ValueError("llrs/true_bits shape mismatch")
        if not np.all(np.isfinite(self.llrs)):
            raise ValueError("llrs must be finite (clip before recording)")

    def signed(self):
        """LLRs sign-aligned by the true bit (positive = correct direction)."""
        return (1.0 - 2.0 * self.true_bits) * self.llrs


def posterior_to_llr(beta, spec, clip=LLR_CLIP):
    """Per-bit LLRs from symbol posteriors, symbol-major MSB-first order."""
    beta = np.asarray(beta)
    bits = spec.bit_table  # (M, bps)
    n = beta.shape[0]
    out = np.empty((n, spec.bits_per_symbol))
    for k in range(spec.bits_per_symbol):
        p0 = beta[:, bits[:, k] == 0].sum(axis=1)
        p1 = beta[:, bits[:, k] == 1].sum(axis=1)
        out[:, k] = np.log(np.maximum(p0, 1e-300)) - np.log(np.maximum(p1, 1e-300))
    return np.clip(out.ravel(), -clip, clip)


def llrs_to_priors(llrs, spec):
    """Per-bit LLRs to symbol priors assuming per-bit independence."""
    llrs = np.asarray(llrs)
    bps = spec.bits_per_symbol
    if llrs.size % bps != 0:
        raise ValueError("LLR count not divisible by bits_per_symbol")
    l = llrs.reshape(-1, bps)
    p0 = 1.0 / (1.0 + np.exp(-l))  # P(bit = 0)
    bits = spec.bit_table  # (M, bps)
    prior = np.ones((l.shape[0], spec.size))
    for k in range(bps):
        prior *= np.where(bits[None, :, k] == 0, p0[:, k, None], 1.0 - p0[:, k, None])
    total = prior.sum(axis=1, keepdims=True)
    return prior / np.maximum(total, 1e-300)


def symbols_to_bits(indices, spec):
    """Constellation indices to the transmitted bit stream."""
    return spec.bit_table[np.asarray(indices)].ravel()


def mutual_information(record):
    """Bitwise MI estimate I = 1 - E[log2(1 + exp(-(1-2b) L))], in [0, 1].

    The raw average can dip below 0 by sampling noise when the true MI is
    ~0; the estimate is clamped to the valid range.
    """
    if isinstance(record, LlrRecord):
        signed = record.signed()
    else:
        signed = np.asarray(record)
    if signed.size == 0:
        raise ValueError("empty LLR record")
    est = 1.0 - np.mean(np.logaddexp(0.0, -signed)) / LN2
    return float(np.clip(est, 0.0, 1.0))


def mutual_information_symbol(x_hat, true_idx, spec, bins=41):
    """Histogram estimate of the symbol-wise MI, normalized to [0, 1].

    Cross-check mode: bins the complex posterior means conditioned on each
    transmitted symbol and evaluates the likelihood-ratio integral on the
    grid.  Needs substantially more samples than the bitwise estimator.
    """
    x_hat = np.asarray(x_hat)
    true_idx = np.asarray(true_idx)
    m = spec.size
    lim = float(np.max(np.abs(spec.points))) * 1.8 + 1e-9
    edges = np.linspace(-lim, lim, bins + 1)
    cond = np.zeros((m, bins, bins))
    for k in range(m):
        sel = x_hat[true_idx == k]
        if sel.size == 0:
            continue
        re = np.clip(sel.real, -lim, lim - 1e-12)
        im = np.clip(sel.imag, -lim, lim - 1e-12)
        hist, _, _ = np.histogram2d(re, im, bins=[edges, edges])
        cond[k] = hist / max(sel.size, 1)
    marg = cond.mean(axis=0)
    info = 0.0
    for k in range(m):
        mask = cond[k] > 0
        info += np.sum(
            cond[k][mask] * np.log2(cond[k][mask] / np.maximum(marg[mask], 1e-300))
        ) / m
    return float(np.clip(info / np.log2(m), 0.0, 1.0))


def _loess(x_pts, y_pts, x_query, span):
    """Local linear regression with tricube weights at each query point."""
    x_pts = np.asarray(x_pts, dtype=float)
    y_pts = np.asarray(y_pts, dtype=float)
    n = x_pts.size
    k = max(2, int(np.ceil(span * n)))
    out = np.empty(np.shape(x_query))
    flat_q = np.atleast_1d(np.asarray(x_query, dtype=float))
    res = np.empty(flat_q.size)
    for j, xq in enumerate(flat_q):
        d = np.abs(x_pts - xq)
        h = np.sort(d)[min(k, n) - 1]
        w = np.clip(1.0 - (d / max(h, 1e-12)) ** 3, 0.0, None) ** 3
        if w.sum() <= 0:
            w = np.ones(n)
        sw = w.sum()
        xm = (w * x_pts).sum() / sw
        ym = (w * y_pts).sum() / sw
        sxx = (w * (x_pts - xm) ** 2).sum()
        slope = (w * (x_pts - xm) * (y_pts - ym)).sum() / sxx if sxx > 1e-12 else 0.0
        res[j] = ym + slope * (xq - xm)
    out = res.reshape(np.shape(x_query)) if np.ndim(x_query) else float(res[0])
    return out


@dataclass
class LlrStatFit:
    """Smoothed relation sigma^2(mu) of the sign-aligned LLR statistics."""

    mu_points: np.ndarray
    var_points: np.ndarray
    span: float = 0.5
    fallback: bool = False  # set when the Gaussian line sigma^2 = 2 mu is used

    def predict(self, mu):
        """Fitted variance at mu (clamped to the sampled range, floored at 0)."""
        if self.fallback:
            return np.maximum(2.0 * np.asarray(mu, dtype=float), 0.0)
        lo, hi = float(self.mu_points.min()), float(self.mu_points.max())
        mu_c = np.clip(mu, lo, hi)
        return np.maximum(_loess(self.mu_points, self.var_points, mu_c, self.span), 0.0)


def fit_llr_stats(records, span=0.5):
    """Per-iteration conditioned mean/variance pairs, loess-smoothed.

    With fewer than 3 usable points the fit falls back to the
    Gaussian-consistency line and sets the `fallback` flag.
    """
    mus, variances = [], []
    for rec in records:
        signed = rec.signed()
        if signed.size < 2:
            continue
        mus.append(float(np.mean(signed)))
        variances.append(float(np.var(signed)))
    mus = np.asarray(mus)
    variances = np.asarray(variances)
    if mus.size < 3:
        return LlrStatFit(mus, variances, span=span, fallback=True)
    order = np.argsort(mus)
    return LlrStatFit(mus[order], variances[order], span=span)


def generate_prior(i_a_target, fit, true_bits, spec, rng, tol=0.02, clip=LLR_CLIP):
    """Symbol priors whose measured prior information equals i_a_target.

    Draws one set of standard-normal deviates, then bisects the LLR mean mu
    so that sign-aligned LLRs mu + sigma(mu) z reach the target MI under the
    same estimator used for measurement.  Endpoints are exact: target 0
    yields uniform priors, target 1 yields clip-limited near-certainty.
    """
    if not 0.0 <= i_a_target <= 1.0:
        raise ValueError("i_a_target must lie in [0, 1]")
    true_bits = np.asarray(true_bits)
    n_bits = true_bits.size
    sign = 1.0 - 2.0 * true_bits
    if i_a_target <= 0.0:
        return llrs_to_priors(np.zeros(n_bits), spec)
    if i_a_target >= 1.0:
        return llrs_to_priors(sign * clip, spec)
    z = rng.standard_normal(n_bits)

    def measured(mu):
        sig = np.sqrt(max(float(fit.predict(mu)), 0.0))
        signed = np.clip(mu + sig * z, -clip, clip)
        return mutual_information(signed), signed

    lo, hi = 0.0, clip
    best = np.zeros(n_bits)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        i_mid, signed = measured(mid)
        best = signed
        if abs(i_mid - i_a_target) <= tol * 0.5:
            break
        if i_mid < i_a_target:
            lo = mid
        else:
            hi = mid
    return llrs_to_priors(sign * best, spec)


@dataclass
class ExitPoint:
    i_a: float
    i_e: float
    samples: int
    iterations: int = 1


@dataclass
class ExitTrace:
    """Transfer-curve points and/or a chained free-running trajectory."""

    points: list = field(default_factory=list)
    trajectory: list = field(default_factory=list)  # I_E^(t) per iteration
    channel_desc: str = ""
    snr_db: float = 0.0

    def chained_pairs(self):
        """Trajectory as (I_A^(t), I_E^(t)) with I_A^(t+1) = I_E^(t)."""
        pairs = []
        prev = 0.0
        for i_e in self.trajectory:
            pairs.append((prev, i_e))
            prev = i_e
        return pairs


def exit_curve(run_frame, ia_grid, fit, spec, rng, frames_per_point, n_symbols):
    """Measure I_E(I_A) with one detector pass per frame.

    `run_frame(true_idx, prior, rng) -> beta` transmits the given symbol
    indices with the supplied prior and returns the one-iteration posterior.
    Each grid point aggregates frames until the bit budget is met by the
    caller's `frames_per_point`.
    """
    points = []
    for i_a in ia_grid:
        signed_all = []
        for _ in range(frames_per_point):
            true_idx = rng.integers(0, spec.size, size=n_symbols)
            true_bits = symbols_to_bits(true_idx, spec)
            prior = generate_prior(i_a, fit, true_bits, spec, rng)
            beta = run_frame(true_idx, prior, rng)
            llrs = posterior_to_llr(beta, spec)
            signed_all.append((1.0 - 2.0 * true_bits) * llrs)
        signed = np.concatenate(signed_all)
        points.append(ExitPoint(float(i_a), mutual_information(signed), signed.size))
    return points


def free_running_trajectory(run_frame_history, spec, rng, frames, n_symbols, n_iter):
    """Average per-iteration posterior MI under uniform priors.

    `run_frame_history(true_idx, rng, n_iter) -> list of beta per iteration`.
    Returns the I_E^(t) sequence (length n_iter).
    """
    acc = [[] for _ in range(n_iter)]
    for _ in range(frames):
        true_idx = rng.integers(0, spec.size, size=n_symbols)
        true_bits = symbols_to_bits(true_idx, spec)
        history = run_frame_history(true_idx, rng, n_iter)
        for t, beta in enumerate(history[:n_iter]):
            llrs = posterior_to_llr(beta, spec)
            acc[t].append((1.0 - 2.0 * true_bits) * llrs)
    return [mutual_information(np.concatenate(chunks)) for chunks in acc if chunks]
