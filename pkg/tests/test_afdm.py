import numpy as np
import pytest

from afdmsim import (
    AfdmConfig,
    AffineFrame,
    ConstellationSpec,
    add_cpp,
    apply_channel,
    build_time_channel,
    chirp_matrix,
    hard_demap,
    ltv_convolve,
    map_bits,
    remove_cpp,
    sample_paths,
)
from conftest import dense_frame_matrix


class TestChirpMatrix:
    def test_zero_rate_is_identity(self):
        assert np.allclose(chirp_matrix(0.0, 4), np.eye(4))

    def test_explicit_entries(self):
        got = np.diag(chirp_matrix(1.0 / 8.0, 4))
        want = np.exp(-1j * np.pi * np.array([0.0, 0.25, 1.0, 2.25]))
        assert np.allclose(got, want, atol=1e-14)

    def test_unitary(self):
        m = chirp_matrix(0.3173, 16)
        assert np.linalg.norm(m @ m.conj().T - np.eye(16)) < 1e-12

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            chirp_matrix(0.1, 0)


class TestAffineFrame:
    @pytest.mark.parametrize("n", [8, 16, 128, 256])
    def test_unitary(self, n):
        rng = np.random.default_rng(n)
        frame = AffineFrame(n, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        a = frame.matrix
        assert np.linalg.norm(a @ a.conj().T - np.eye(n)) < 1e-10

    def test_dft_row_zero(self):
        frame = AffineFrame(16, 0.0, 0.0)
        assert np.allclose(frame.matrix[0], np.full(16, 1.0 / 4.0), atol=1e-14)

    def test_forward_reduces_to_dft(self):
        rng = np.random.default_rng(1)
        s = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        frame = AffineFrame(32, 0.0, 0.0)
        assert np.allclose(frame.forward(s), np.fft.fft(s) / np.sqrt(32), atol=1e-12)

    def test_forward_matches_dense_matrix(self):
        # oracle: dense matrix-vector product with an independent A build
        rng = np.random.default_rng(2)
        c1, c2 = 0.173, -0.041
        a = dense_frame_matrix(16, c1, c2)
        frame = AffineFrame(16, c1, c2)
        s = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        assert np.allclose(frame.forward(s), a @ s, atol=1e-12)

    def test_impulse_response(self):
        # unit impulse at 0: output_m = exp(-2j pi c2 m^2) / sqrt(N)
        c1, c2 = 0.21, 0.37
        frame = AffineFrame(16, c1, c2)
        e0 = np.zeros(16, dtype=complex)
        e0[0] = 1.0
        m = np.arange(16)
        want = np.exp(-2j * np.pi * c2 * m * m) / 4.0
        assert np.allclose(frame.forward(e0), want, atol=1e-12)

    def test_inverse_impulse_response(self):
        # unit impulse at 0, c2 = 0: output_n = exp(+2j pi c1 n^2) / sqrt(N)
        c1 = 9.0 / 32.0
        frame = AffineFrame(16, c1, 0.0)
        e0 = np.zeros(16, dtype=complex)
        e0[0] = 1.0
        n = np.arange(16)
        want = np.exp(2j * np.pi * c1 * n * n) / 4.0
        assert np.allclose(frame.inverse(e0), want, atol=1e-12)

    def test_round_trip_many(self):
        rng = np.random.default_rng(3)
        frame = AffineFrame(32, 0.11, 0.02)
        for _ in range(100):
            s = rng.standard_normal(32) + 1j * rng.standard_normal(32)
            assert np.max(np.abs(frame.inverse(frame.forward(s)) - s)) < 1e-10

    def test_parseval(self):
        rng = np.random.default_rng(4)
        frame = AffineFrame(64, 0.07, 0.013)
        for _ in range(20):
            s = rng.standard_normal(64) + 1j * rng.standard_normal(64)
            ratio = np.linalg.norm(frame.forward(s)) / np.linalg.norm(s)
            assert abs(ratio - 1.0) < 1e-12

    def test_conjugate_matches_dense(self):
        rng = np.random.default_rng(5)
        frame = AffineFrame(24, 0.19, 0.0)
        mat = rng.standard_normal((24, 24)) + 1j * rng.standard_normal((24, 24))
        want = frame.matrix @ mat @ frame.matrix.conj().T
        assert np.linalg.norm(frame.conjugate(mat) - want) < 1e-10

    def test_dimension_mismatch(self):
        frame = AffineFrame(8, 0.1, 0.0)
        with pytest.raises(ValueError):
            frame.forward(np.zeros(9))


class TestConstellation:
    def test_qpsk_gray_table(self, qpsk):
        # documented mapping: 00 -> (1+1j)/sqrt(2), first bit steers Re
        want = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)
        assert np.allclose(qpsk.points, want)
        sym, idx = map_bits([0, 0], qpsk)
        assert np.allclose(sym, [(1 + 1j) / np.sqrt(2)])
        assert idx[0] == 0

    @pytest.mark.parametrize("name", ["qpsk", "qam16"])
    def test_unit_energy_and_bijective_labels(self, name):
        spec = ConstellationSpec.by_name(name)
        assert abs(np.mean(np.abs(spec.points) ** 2) - 1.0) < 1e-12
        labels = {tuple(row) for row in spec.bit_table}
        assert len(labels) == spec.size

    def test_qam16_gray_adjacency(self):
        # neighbouring amplitude levels differ in exactly one bit
        spec = ConstellationSpec.qam16()
        levels = sorted(set(np.round(spec.points.real * np.sqrt(10)).astype(int)))
        assert levels == [-3, -1, 1, 3]
        by_level = {}
        for a in range(16):
            lv = int(round(spec.points[a].real * np.sqrt(10)))
            by_level.setdefault(lv, set()).add(tuple(spec.bit_table[a][:2]))
        for lo, hi in [(-3, -1), (-1, 1), (1, 3)]:
            (b_lo,), (b_hi,) = by_level[lo], by_level[hi]
            assert sum(x != y for x, y in zip(b_lo, b_hi)) == 1

    def test_membership_and_round_trip(self, qpsk):
        rng = np.random.default_rng(6)
        bits = rng.integers(0, 2, size=8)
        sym, idx = map_bits(bits, qpsk)
        assert sym.shape == (4,)
        assert all(np.min(np.abs(s - qpsk.points)) < 1e-15 for s in sym)
        back, back_idx = hard_demap(sym, qpsk)
        assert np.array_equal(back, bits)
        assert np.array_equal(back_idx, idx)

    def test_bad_length(self, qpsk):
        with pytest.raises(ValueError):
            map_bits([0, 1, 0], qpsk)


class TestCpp:
    def _cfg(self, n, c1, cpp_len, qpsk):
        return AfdmConfig(n, c1, 0.0, qpsk, block_count=1, cpp_len=cpp_len)

    def test_zero_rate_is_plain_cyclic_prefix(self, qpsk):
        rng = np.random.default_rng(7)
        s = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        cfg = self._cfg(16, 0.0, 5, qpsk)
        ext = add_cpp(s, cfg)
        assert np.allclose(ext[:5], s[-5:])
        assert np.allclose(ext[5:], s)
        assert np.allclose(remove_cpp(ext, cfg), s)

    def test_zero_length_identity(self, qpsk):
        s = np.arange(8, dtype=complex)
        cfg = self._cfg(8, 0.1, 0, qpsk)
        assert np.allclose(add_cpp(s, cfg), s)

    def test_pipeline_matches_circular_model(self, qpsk):
        # oracle: dense H_t @ s; pipeline: add_cpp -> LTV convolution -> remove_cpp
        n = 32
        cfg = AfdmConfig.with_default_rule(n, 4, qpsk, cpp_len=8)
        rng = np.random.default_rng(8)
        for _ in range(20):
            real = sample_paths(2, 4.0, 4.0, 0.4, rng)
            ht = build_time_channel(real, n)
            s = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            ext = add_cpp(s, cfg)
            r = remove_cpp(ltv_convolve(ext, real, n, cfg.cpp_len), cfg)
            assert np.max(np.abs(r - ht.matrix @ s)) < 1e-8

    def test_memoryless_channel_noise_free(self, qpsk):
        n = 16
        cfg = AfdmConfig.with_default_rule(n, 2, qpsk, cpp_len=0)
        real = sample_paths(1, 0.0, 0.0, 0.4, np.random.default_rng(9))
        ht = build_time_channel(real, n)
        s = np.arange(n, dtype=complex)
        r, gamma = apply_channel(s, ht, 10.0, np.random.default_rng(0), noise_free=True)
        assert np.allclose(r, ht.matrix @ s)
        assert gamma == np.inf
