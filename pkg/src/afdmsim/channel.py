"""Fractional delay-Doppler channel model.

A realization is a P-path linear time-varying channel; each path carries a
complex gain, a real-valued delay (sample units) and a real-valued Doppler
shift (normalized to the subcarrier grid).  The transmit filter is a raised
cosine, so a fractional delay leaks onto neighbouring integer taps and the
time-domain matrix is a cyclic band of width L.
"""

import io
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels as K

DEFAULT_TAIL = 4  # causal raised-cosine taps kept past the largest delay
SUPPORT_EPS = 1e-14


def raised_cosine(t, beta):
    """Raised-cosine pulse sinc(t) cos(pi beta t) / (1 - (2 beta t)^2).

    The removable singularities at t = 0 and |t| = 1/(2 beta) evaluate to
    their analytic limits (1 and (pi/4) sinc(1/(2 beta))).
    """
    t = np.asarray(t, dtype=np.float64)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    denom = 1.0 - (2.0 * beta * t) ** 2
    singular = np.abs(denom) < 1e-10
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.sinc(t) * np.cos(np.pi * beta * t) / np.where(singular, 1.0, denom)
    vals = np.where(singular, (np.pi / 4.0) * np.sinc(t), vals)
    return float(vals[0]) if scalar else vals


@dataclass(frozen=True)
class ChannelRealization:
    """P paths (gain, delay, Doppler) plus the filter roll-off and tap count."""

    gains: np.ndarray
    delays: np.ndarray
    dopplers: np.ndarray
    rolloff: float
    tap_count: int

    def __post_init__(self):
        p = self.gains.shape[0]
        if self.delays.shape != (p,) or self.dopplers.shape != (p,):
            raise ValueError("gains/delays/dopplers must share length")
        if np.any(self.delays < 0):
            raise ValueError("delays must be >= 0")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError("rolloff must be in [0, 1]")
        if self.tap_count < int(np.floor(self.delays.max())) + 1:
            raise ValueError("tap_count too small for the largest delay")

    @property
    def path_count(self):
        return self.gains.shape[0]

    @classmethod
    def fixed(cls, gains, delays, dopplers, rolloff=0.4, tap_count=None, tail=DEFAULT_TAIL):
        gains = np.asarray(gains, dtype=np.complex128)
        delays = np.asarray(delays, dtype=np.float64)
        dopplers = np.asarray(dopplers, dtype=np.float64)
        if tap_count is None:
            tap_count = int(math.ceil(tail + delays.max()))
        return cls(gains, delays, dopplers, float(rolloff), int(tap_count))

    def rc_taps(self):
        """(P, L) causal filter samples rc(l - tau_i), l = 0..L-1."""
        l = np.arange(self.tap_count, dtype=np.float64)
        return raised_cosine(l[None, :] - self.delays[:, None], self.rolloff)

    def to_text(self, extra_meta=None):
        """Serializable record: one `h_re,h_im,tau,doppler` line per path.

        The header carries beta and the tap count plus any caller metadata
        (the CLI dump adds N and the seed).
        """
        meta = {"beta": self.rolloff, "taps": self.tap_count}
        if extra_meta:
            meta.update(extra_meta)
        buf = io.StringIO()
        pairs = " ".join(f"{k}={v}" for k, v in meta.items())
        buf.write(f"# afdmsim-channel {pairs}\n")
        for g, t, d in zip(self.gains, self.delays, self.dopplers):
            buf.write(f"{float(g.real)!r},{float(g.imag)!r},{float(t)!r},{float(d)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text):
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# afdmsim-channel"):
            raise ValueError("missing afdmsim-channel header")
        meta = dict(kv.split("=", 1) for kv in lines[0].split()[2:])
        rows = [tuple(float(v) for v in ln.split(",")) for ln in lines[1:]]
        gains = np.array([re + 1j * im for re, im, _, _ in rows])
        delays = np.array([t for _, _, t, _ in rows])
        dopplers = np.array([d for _, _, _, d in rows])
        taps = int(meta["taps"]) if "taps" in meta else None
        real = cls.fixed(gains, delays, dopplers, float(meta["beta"]), taps)
        return real


def sample_paths(p_count, tau_max, nu_max, beta, rng, tail=DEFAULT_TAIL):
    """Draw one random realization.

    First path at delay 0, the rest uniform on (0, tau_max); Doppler
    nu = nu_max cos(rho) with rho uniform on [-pi, pi]; Rayleigh gains with
    an exponential power profile eta_i = exp(-tau_i)/sum_j exp(-tau_j).
    """
    if p_count < 1:
        raise ValueError("p_count must be >= 1")
    delays = np.zeros(p_count)
    if p_count > 1:
        delays[1:] = rng.uniform(0.0, tau_max, size=p_count - 1)
    dopplers = nu_max * np.cos(rng.uniform(-np.pi, np.pi, size=p_count))
    eta = np.exp(-delays)
    eta /= eta.sum()
    gains = np.sqrt(eta / 2.0) * (
        rng.standard_normal(p_count) + 1j * rng.standard_normal(p_count)
    )
    tap_count = int(math.ceil(tail + tau_max))
    return ChannelRealization(gains, delays, dopplers, float(beta), tap_count)


@dataclass(frozen=True)
class TimeChannel:
    """Dense N x N time-domain matrix plus its cyclic band metadata."""

    matrix: np.ndarray
    active_taps: np.ndarray  # tap offsets l with energy above SUPPORT_EPS

    @property
    def n(self):
        return self.matrix.shape[0]

    @cached_property
    def band_support(self):
        """Per-row arrays of numerically nonzero column indices."""
        n = self.n
        mask = np.abs(self.matrix) > SUPPORT_EPS
        return [np.nonzero(mask[r])[0] for r in range(n)]


def build_time_channel(real, n):
    """Assemble H_t = sum_i sum_l h_i rc(l - tau_i) Delta_{nu_i} Pi_l."""
    if real.tap_count >= n:
        raise ValueError(f"tap_count {real.tap_count} must be < n {n}")
    taps = real.rc_taps()
    mat = K.time_channel_matrix(
        np.ascontiguousarray(real.gains),
        np.ascontiguousarray(taps),
        np.ascontiguousarray(real.dopplers),
        n,
    )
    active = np.nonzero(np.any(np.abs(taps) > SUPPORT_EPS, axis=0))[0]
    return TimeChannel(mat, active)


@dataclass(frozen=True)
class AffineChannel:
    """Effective channel seen between affine-domain symbol vectors."""

    matrix: np.ndarray

    @property
    def n(self):
        return self.matrix.shape[0]


def affine_entry_closed_form(p, q, real, cfg):
    """Single effective-channel entry from the closed-form tap sum."""
    n = cfg.n_subcarriers
    if not (0 <= p < n and 0 <= q < n):
        raise ValueError("p, q must lie in [0, N)")
    taps = real.rc_taps()
    total = 0.0 + 0.0j
    for i in range(real.path_count):
        acc = 0.0 + 0.0j
        for l in range(real.tap_count):
            amp = taps[i, l] / n
            if amp == 0.0:
                continue
            theta = p - q + real.dopplers[i] + 2.0 * n * cfg.c1 * l
            lphase = np.exp(2j * np.pi * (n * cfg.c1 * l * l - q * l) / n)
            den = np.sin(np.pi * theta / n)
            phase = np.exp(-1j * np.pi * theta * (n - 1) / n)
            if abs(den) < 1e-9:
                geo = n * np.cos(np.pi * theta) / np.cos(np.pi * theta / n) * phase
            else:
                geo = np.sin(np.pi * theta) / den * phase
            acc += amp * lphase * geo
        total += real.gains[i] * acc
    return total * np.exp(-2j * np.pi * cfg.c2 * (p * p - q * q))


def affine_channel_closed_form(real, cfg):
    """Full effective channel via the closed-form entries (kernel-backed)."""
    mat = K.affine_channel_matrix(
        np.ascontiguousarray(real.gains),
        np.ascontiguousarray(real.rc_taps()),
        np.ascontiguousarray(real.dopplers),
        float(cfg.c1),
        float(cfg.c2),
        cfg.n_subcarriers,
    )
    return AffineChannel(mat)


def effective_affine_channel(ht, frame):
    """A H_t A^H as a dense product (FFT-accelerated conjugation)."""
    if ht.n != frame.n:
        raise ValueError("channel/frame dimension mismatch")
    return AffineChannel(frame.conjugate(ht.matrix))


def apply_channel(s, ht, snr_db, rng, noise_free=False):
    """r = H_t s + w at the requested receive SNR; returns (r, gamma).

    SNR convention: mean received sample energy over the *total* complex
    noise variance sigma^2; gamma = 1/sigma^2 is handed to detectors as
    known truth.  `noise_free` skips the noise entirely (gamma = inf).
    """
    s = np.asarray(s)
    clean = ht.matrix @ s
    if noise_free:
        return clean, math.inf
    es = float(np.mean(np.abs(clean) ** 2))
    sigma2 = es * 10.0 ** (-snr_db / 10.0)
    n = clean.shape[0]
    w = np.sqrt(sigma2 / 2.0) * (
        rng.standard_normal(n) + 1j * rng.standard_normal(n)
    )
    return clean + w, 1.0 / sigma2


def ltv_convolve(s_ext, real, n, cpp_len):
    """Sample-level linear time-varying convolution of an extended frame.

    The Doppler phase of output sample m references the payload start
    (m - cpp_len), so after prefix removal the result is directly comparable
    with the cyclic matrix model.
    """
    s_ext = np.asarray(s_ext)
    taps = real.rc_taps()
    total = s_ext.shape[0]
    out = np.zeros(total, dtype=np.complex128)
    m = np.arange(total)
    for i in range(real.path_count):
        ramp = real.gains[i] * np.exp(
            -2j * np.pi * (m - cpp_len) / n * real.dopplers[i]
        )
        for l in range(real.tap_count):
            amp = taps[i, l]
            if amp == 0.0:
                continue
            shifted = np.zeros(total, dtype=np.complex128)
            shifted[l:] = s_ext[: total - l]
            out += amp * ramp * shifted
    return out
