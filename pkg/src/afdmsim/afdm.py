"""Affine-transform modulation core: chirp matrices, the unitary transform
pair, QAM mapping, and chirp-periodic prefix handling.

Conventions (used consistently everywhere):
  * chirp matrix      diag(exp(-2j pi c k^2)), k = 0..N-1
  * forward transform A = Lambda_c2 . F . Lambda_c1 with F the *unitary* DFT
    (1/sqrt(N) both directions), so A is unitary and the inverse is A^H
  * transmit mapping  s = A^H x  (affine-domain symbols to time samples)
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class ConstellationSpec:
    """Square QAM constellation with a fixed, published Gray labeling.

    `points[a]` is the symbol whose bit label is the binary expansion of `a`,
    most-significant bit first.  For QPSK the first bit steers the real sign
    and the second the imaginary sign: 00 -> (1+1j)/sqrt(2),
    01 -> (1-1j)/sqrt(2), 11 -> (-1-1j)/sqrt(2), 10 -> (-1+1j)/sqrt(2).

    For 16-QAM the first two bits Gray-select the real level and the last two
    the imaginary level, with 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3 (scaled
    by 1/sqrt(10)).
    """

    name: str
    points: np.ndarray
    bits_per_symbol: int

    def __post_init__(self):
        m = self.points.shape[0]
        if m != 1 << self.bits_per_symbol:
            raise ValueError("constellation size must be 2**bits_per_symbol")
        energy = float(np.mean(np.abs(self.points) ** 2))
        if abs(energy - 1.0) > 1e-12:
            raise ValueError(f"constellation not unit-energy: {energy!r}")

    @property
    def size(self):
        return self.points.shape[0]

    @cached_property
    def bit_table(self):
        """(size, bits_per_symbol) 0/1 array; row a is the label of points[a]."""
        a = np.arange(self.size)[:, None]
        k = np.arange(self.bits_per_symbol)[None, :]
        return ((a >> (self.bits_per_symbol - 1 - k)) & 1).astype(np.int64)

    @classmethod
    def qpsk(cls):
        b = np.arange(4)
        re = 1.0 - 2.0 * ((b >> 1) & 1)
        im = 1.0 - 2.0 * (b & 1)
        return cls("qpsk", (re + 1j * im) / np.sqrt(2.0), 2)

    @classmethod
    def qam16(cls):
        gray_levels = np.array([-3.0, -1.0, 3.0, 1.0])  # index = 2*b0 + b1
        b = np.arange(16)
        re = gray_levels[(b >> 2) & 3]
        im = gray_levels[b & 3]
        return cls("qam16", (re + 1j * im) / np.sqrt(10.0), 4)

    @classmethod
    def by_name(cls, name):
        try:
            return {"qpsk": cls.qpsk, "qam16": cls.qam16}[name.lower()]()
        except KeyError:
            raise ValueError(f"unknown constellation {name!r}") from None


def chirp_matrix(c, n):
    """Diagonal chirp matrix diag(exp(-2j pi c k^2)), unitary for real c."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n)
    return np.diag(np.exp(-2j * np.pi * c * k * k))


def chirp_phases(c, n):
    """Diagonal of `chirp_matrix` as a vector (the fast-path form)."""
    k = np.arange(n)
    return np.exp(-2j * np.pi * c * k * k)


@dataclass(frozen=True)
class AffineFrame:
    """Unitary transform pair for a fixed (N, c1, c2).

    Vector transforms run through the FFT; the dense matrices are built
    lazily for tests and for the dense effective-channel product.
    """

    n: int
    c1: float
    c2: float
    _chirp1: np.ndarray = field(init=False, repr=False)
    _chirp2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("frame size must be >= 2")
        object.__setattr__(self, "_chirp1", chirp_phases(self.c1, self.n))
        object.__setattr__(self, "_chirp2", chirp_phases(self.c2, self.n))

    @cached_property
    def matrix(self):
        """Dense forward matrix Lambda_c2 F Lambda_c1 (unitary)."""
        k = np.arange(self.n)
        f = np.exp(-2j * np.pi * np.outer(k, k) / self.n) / np.sqrt(self.n)
        return self._chirp2[:, None] * f * self._chirp1[None, :]

    @cached_property
    def inverse_matrix(self):
        return self.matrix.conj().T

    def forward(self, s):
        """A @ s for a length-N vector (FFT fast path)."""
        s = np.asarray(s)
        if s.shape != (self.n,):
            raise ValueError(f"expected shape ({self.n},), got {s.shape}")
        return self._chirp2 * (np.fft.fft(self._chirp1 * s) / np.sqrt(self.n))

    def inverse(self, x):
        """A^H @ x for a length-N vector (FFT fast path)."""
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise ValueError(f"expected shape ({self.n},), got {x.shape}")
        return self._chirp1.conj() * (
            np.fft.ifft(self._chirp2.conj() * x) * np.sqrt(self.n)
        )

    def conjugate(self, mat):
        """A @ mat @ A^H through FFTs along both axes (O(N^2 log N))."""
        mat = np.asarray(mat, dtype=np.complex128)
        if mat.shape != (self.n, self.n):
            raise ValueError(f"expected shape ({self.n},{self.n})")
        rt = np.sqrt(self.n)
        left = self._chirp2[:, None] * (np.fft.fft(self._chirp1[:, None] * mat, axis=0) / rt)
        return (
            np.fft.fft(self._chirp1[None, :] * left.conj(), axis=1).conj()
            / rt
            * self._chirp2.conj()[None, :]
        )


def default_c1(n, k_max):
    """Chirp-rate rule matching the maximum integer Doppler k_max."""
    return (2 * k_max + 1) / (2.0 * n)


@dataclass(frozen=True)
class AfdmConfig:
    """System parameters for one carrier configuration."""

    n_subcarriers: int
    c1: float
    c2: float
    constellation: ConstellationSpec
    block_count: int = 1
    cpp_len: int = 0

    def __post_init__(self):
        n, b = self.n_subcarriers, self.block_count
        if n < 2:
            raise ValueError("n_subcarriers must be >= 2")
        if b < 1 or n % b != 0:
            raise ValueError(f"block_count {b} must divide n_subcarriers {n}")
        if self.cpp_len < 0 or self.cpp_len > n:
            raise ValueError("cpp_len must be in [0, n_subcarriers]")

    @classmethod
    def with_default_rule(cls, n, k_max, constellation, block_count=1, cpp_len=0):
        """c1 = (2 k_max + 1) / (2 N), c2 = 0."""
        return cls(n, default_c1(n, k_max), 0.0, constellation, block_count, cpp_len)

    @property
    def block_len(self):
        return self.n_subcarriers // self.block_count

    @cached_property
    def frame(self):
        return AffineFrame(self.n_subcarriers, self.c1, self.c2)


def map_bits(bits, spec):
    """Bits (MSB-first per symbol) to constellation symbols."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    bps = spec.bits_per_symbol
    if bits.size % bps != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {bps}")
    groups = bits.reshape(-1, bps)
    idx = groups @ (1 << np.arange(bps - 1, -1, -1))
    return spec.points[idx], idx


def hard_demap(symbols, spec):
    """Nearest-point hard decision; returns (bits, indices)."""
    symbols = np.asarray(symbols)
    idx = np.argmin(np.abs(symbols[:, None] - spec.points[None, :]) ** 2, axis=1)
    return spec.bit_table[idx].ravel(), idx


def cpp_phase(c1, n, offsets):
    """Phase attached to prefix sample -m: exp(-2j pi c1 (N^2 - 2 N m)).

    Equals 1 whenever 2 N c1 is an integer and N is even, i.e. under the
    default chirp-rate rule, where the prefix degenerates to a plain cyclic
    prefix.
    """
    offsets = np.asarray(offsets)
    return np.exp(-2j * np.pi * c1 * (n * n - 2.0 * n * offsets))


def add_cpp(s, cfg):
    """Prepend the chirp-periodic prefix: output length N + cpp_len."""
    s = np.asarray(s)
    n, lcp = cfg.n_subcarriers, cfg.cpp_len
    if s.shape != (n,):
        raise ValueError(f"expected shape ({n},), got {s.shape}")
    if lcp == 0:
        return s.copy()
    m = np.arange(lcp, 0, -1)  # prefix slot j holds offset m = lcp - j
    prefix = s[n - m] * cpp_phase(cfg.c1, n, m)
    return np.concatenate([prefix, s])


def remove_cpp(r_ext, cfg):
    """Drop the first cpp_len received samples."""
    r_ext = np.asarray(r_ext)
    expect = cfg.n_subcarriers + cfg.cpp_len
    if r_ext.shape != (expect,):
        raise ValueError(f"expected shape ({expect},), got {r_ext.shape}")
    return r_ext[cfg.cpp_len :].copy()
