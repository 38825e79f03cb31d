import numpy as np
import pytest
from scipy import integrate

from afdmsim import (
    AfdmConfig,
    GampConfig,
    apply_channel,
    build_time_channel,
    detect_gamp_frame,
    map_bits,
)
from afdmsim.detectors.common import denoise, uniform_prior
from afdmsim.exit_chart import (
    ExitTrace,
    LlrRecord,
    LlrStatFit,
    exit_curve,
    fit_llr_stats,
    free_running_trajectory,
    generate_prior,
    llrs_to_priors,
    mutual_information,
    mutual_information_symbol,
    posterior_to_llr,
    symbols_to_bits,
)


def j_function(sigma):
    """Numeric-integration oracle: MI of a consistent Gaussian LLR."""
    if sigma < 1e-12:
        return 0.0
    mu = sigma**2 / 2.0

    def integrand(x):
        pdf = np.exp(-((x - mu) ** 2) / (2 * sigma**2)) / np.sqrt(2 * np.pi * sigma**2)
        return pdf * np.log2(1.0 + np.exp(-x))

    val, _ = integrate.quad(integrand, mu - 12 * sigma, mu + 12 * sigma, limit=200)
    return 1.0 - val


class TestPosteriorToLlr:
    def test_delta_posterior_clips(self, qpsk):
        beta = np.zeros((1, 4))
        beta[0, 0] = 1.0  # symbol 00: both bits are 0
        llr = posterior_to_llr(beta, qpsk)
        assert np.allclose(llr, [40.0, 40.0])
        beta2 = np.zeros((1, 4))
        beta2[0, 3] = 1.0  # symbol 11
        assert np.allclose(posterior_to_llr(beta2, qpsk), [-40.0, -40.0])

    def test_uniform_posterior_is_zero(self, qpsk):
        beta = np.full((5, 4), 0.25)
        assert np.allclose(posterior_to_llr(beta, qpsk), 0.0)

    def test_qpsk_closed_form(self, qpsk):
        # oracle: Gray QPSK AWGN LLRs are 2 sqrt(2) Re(y)/sigma^2 and
        # 2 sqrt(2) Im(y)/sigma^2
        rng = np.random.default_rng(0)
        sigma2 = 0.9
        y = 0.4 * (rng.standard_normal(50) + 1j * rng.standard_normal(50))
        _, _, beta = denoise(y, sigma2, qpsk, uniform_prior(50, qpsk))
        llr = posterior_to_llr(beta, qpsk).reshape(-1, 2)
        scale = 2.0 * np.sqrt(2.0) / sigma2
        assert np.max(np.abs(llr[:, 0] - scale * y.real)) < 1e-9
        assert np.max(np.abs(llr[:, 1] - scale * y.imag)) < 1e-9


class TestLlrPriors:
    def test_round_trip_preserves_marginals(self, qpsk):
        rng = np.random.default_rng(1)
        llrs = rng.uniform(-8, 8, size=64)
        prior = llrs_to_priors(llrs, qpsk)
        assert np.allclose(prior.sum(axis=1), 1.0, atol=1e-12)
        back = posterior_to_llr(prior, qpsk)
        assert np.max(np.abs(back - llrs)) < 1e-9

    def test_sixteen_qam_round_trip(self):
        from afdmsim import ConstellationSpec

        spec = ConstellationSpec.qam16()
        rng = np.random.default_rng(2)
        llrs = rng.uniform(-6, 6, size=32 * 4)
        back = posterior_to_llr(llrs_to_priors(llrs, spec), spec)
        assert np.max(np.abs(back - llrs)) < 1e-9


class TestMutualInformation:
    def test_zero_llrs(self):
        rec = LlrRecord(np.zeros(100), np.zeros(100, dtype=int))
        assert mutual_information(rec) == pytest.approx(0.0)

    def test_saturated_llrs(self):
        rec = LlrRecord(np.full(100, 40.0), np.zeros(100, dtype=int))
        assert mutual_information(rec) == pytest.approx(1.0, abs=1e-10)

    def test_empty_record_rejected(self):
        with pytest.raises(ValueError):
            mutual_information(np.array([]))

    def test_gaussian_llrs_match_j_function(self):
        # spec example: mu = 2, sigma^2 = 4 corresponds to J(2)
        rng = np.random.default_rng(3)
        n = 200_000
        bits = rng.integers(0, 2, size=n)
        signed = 2.0 + 2.0 * rng.standard_normal(n)
        rec = LlrRecord((1 - 2 * bits) * signed, bits)
        assert mutual_information(rec) == pytest.approx(j_function(2.0), abs=0.01)

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 4.0])
    def test_calibration_across_sigmas(self, sigma):
        rng = np.random.default_rng(int(sigma * 10))
        n = 200_000
        signed = sigma**2 / 2.0 + sigma * rng.standard_normal(n)
        assert mutual_information(signed) == pytest.approx(j_function(sigma), abs=0.01)

    def test_estimator_variance_shrinks_with_samples(self):
        rng = np.random.default_rng(4)

        def spread(n, reps=30):
            vals = [
                mutual_information(2.0 + 2.0 * rng.standard_normal(n))
                for _ in range(reps)
            ]
            return np.std(vals)

        ratio = spread(1000) / spread(16000)
        assert 2.0 < ratio < 8.0  # expect ~4 = sqrt(16)

    def test_symbol_level_cross_check(self, qpsk):
        # both estimators agree on a decoupled Gaussian observation channel
        rng = np.random.default_rng(5)
        n = 120_000
        idx = rng.integers(0, 4, size=n)
        sigma2 = 0.25
        y = qpsk.points[idx] + np.sqrt(sigma2 / 2) * (
            rng.standard_normal(n) + 1j * rng.standard_normal(n)
        )
        _, _, beta = denoise(y, sigma2, qpsk, uniform_prior(n, qpsk))
        llrs = posterior_to_llr(beta, qpsk)
        bits = symbols_to_bits(idx, qpsk)
        i_bit = mutual_information(LlrRecord(llrs, bits))
        i_sym = mutual_information_symbol(y, idx, qpsk, bins=61)
        assert abs(i_bit - i_sym) < 0.05


class TestLlrStatFit:
    def _synthetic_records(self, mus, var_of_mu, n=20_000, seed=6):
        rng = np.random.default_rng(seed)
        records = []
        for t, mu in enumerate(mus):
            bits = rng.integers(0, 2, size=n)
            signed = mu + np.sqrt(var_of_mu(mu)) * rng.standard_normal(n)
            records.append(LlrRecord((1 - 2 * bits) * np.clip(signed, -40, 40), bits, t))
        return records

    def test_recovers_consistency_line(self):
        mus = np.linspace(0.5, 8.0, 10)
        fit = fit_llr_stats(self._synthetic_records(mus, lambda m: 2 * m))
        assert not fit.fallback
        for mu in np.linspace(1.0, 7.5, 12):
            assert fit.predict(mu) == pytest.approx(2 * mu, rel=0.05)

    def test_single_record_falls_back(self):
        fit = fit_llr_stats(self._synthetic_records([3.0], lambda m: 2 * m))
        assert fit.fallback
        assert fit.predict(3.0) == pytest.approx(6.0)
        assert fit.predict(np.array([1.0, 2.0])).tolist() == [2.0, 4.0]

    def test_variance_clamped_nonnegative(self):
        fit = LlrStatFit(np.array([1.0, 2.0, 3.0]), np.array([0.0, 0.0, 0.0]))
        assert fit.predict(2.5) >= 0.0

    def test_detector_llrs_deviate_from_consistency_line(self, qpsk, eval_channel):
        # the effect motivating the empirical fit: truncated-support GAMP
        # LLR statistics are not Gaussian-consistent on the fixed channel
        n = 128
        cfg = AfdmConfig.with_default_rule(n, 4, qpsk, block_count=4)
        ht = build_time_channel(eval_channel, n)
        from afdmsim import effective_affine_channel

        heff = effective_affine_channel(ht, cfg.frame)
        rng = np.random.default_rng(7)
        sink = [[] for _ in range(8)]
        for _ in range(30):
            bits = rng.integers(0, 2, size=2 * n)
            x, idx = map_bits(bits, qpsk)
            r, gamma = apply_channel(cfg.frame.inverse(x), ht, 10.0, rng)
            out = detect_gamp_frame(
                r, heff, gamma, cfg.frame, qpsk,
                GampConfig(max_iter=8, tol=0.0, k_top=4), record_beta=True,
            )
            true_bits = symbols_to_bits(idx, qpsk)
            for t, beta in enumerate(out.beta_history):
                sink[t].append((posterior_to_llr(beta, qpsk), true_bits))
        records = [
            LlrRecord(np.concatenate([s[0] for s in chunk]),
                      np.concatenate([s[1] for s in chunk]), t)
            for t, chunk in enumerate(sink)
        ]
        fit = fit_llr_stats(records)
        rel_dev = np.abs(fit.var_points - 2 * fit.mu_points) / np.maximum(
            2 * fit.mu_points, 1e-9
        )
        assert rel_dev.max() > 0.10


class TestGeneratePrior:
    def test_target_zero_is_uniform(self, qpsk):
        fit = LlrStatFit(np.array([]), np.array([]), fallback=True)
        bits = np.zeros(64, dtype=int)
        prior = generate_prior(0.0, fit, bits, qpsk, np.random.default_rng(8))
        assert np.allclose(prior, 0.25)

    def test_target_one_concentrates_on_truth(self, qpsk):
        fit = LlrStatFit(np.array([]), np.array([]), fallback=True)
        rng = np.random.default_rng(9)
        idx = rng.integers(0, 4, size=32)
        bits = symbols_to_bits(idx, qpsk)
        prior = generate_prior(1.0, fit, bits, qpsk, rng)
        assert np.all(np.argmax(prior, axis=1) == idx)
        assert prior.max(axis=1).min() > 0.999

    def test_midpoint_closed_loop(self, qpsk):
        # measured MI of the generated priors' LLRs equals the 0.5 target
        fit = LlrStatFit(np.array([]), np.array([]), fallback=True)
        rng = np.random.default_rng(10)
        idx = rng.integers(0, 4, size=20_000)
        bits = symbols_to_bits(idx, qpsk)
        prior = generate_prior(0.5, fit, bits, qpsk, rng)
        llrs = posterior_to_llr(prior, qpsk)
        measured = mutual_information(LlrRecord(llrs, bits))
        assert measured == pytest.approx(0.5, abs=0.02)

    def test_rejects_out_of_range(self, qpsk):
        fit = LlrStatFit(np.array([]), np.array([]), fallback=True)
        with pytest.raises(ValueError):
            generate_prior(1.5, fit, np.zeros(4, dtype=int), qpsk,
                           np.random.default_rng(0))


class TestExitCurve:
    def test_identity_channel_gains_information(self, qpsk):
        # I_E >= I_A on a decoupled AWGN channel at 20 dB
        sigma2 = 0.01
        fit = LlrStatFit(np.array([]), np.array([]), fallback=True)

        def run_frame(true_idx, prior, rng):
            y = qpsk.points[true_idx] + np.sqrt(sigma2 / 2) * (
                rng.standard_normal(true_idx.size)
                + 1j * rng.standard_normal(true_idx.size)
            )
            _, _, beta = denoise(y, sigma2, qpsk, prior)
            return beta

        rng = np.random.default_rng(11)
        points = exit_curve(run_frame, [0.0, 0.5, 1.0], fit, qpsk, rng,
                            frames_per_point=40, n_symbols=256)
        for p in points:
            assert p.i_e >= p.i_a - 1e-6

    def test_trajectory_chaining(self):
        trace = ExitTrace(trajectory=[0.4, 0.7, 0.9])
        pairs = trace.chained_pairs()
        assert pairs == [(0.0, 0.4), (0.4, 0.7), (0.7, 0.9)]

    def test_free_running_helper(self, qpsk):
        sigma2 = 0.1

        def history(true_idx, rng, n_iter):
            out = []
            y = qpsk.points[true_idx] + np.sqrt(sigma2 / 2) * (
                rng.standard_normal(true_idx.size)
                + 1j * rng.standard_normal(true_idx.size)
            )
            for t in range(n_iter):
                _, _, beta = denoise(y, sigma2 * (2.0 - t / n_iter), qpsk,
                                     uniform_prior(true_idx.size, qpsk))
                out.append(beta)
            return out

        rng = np.random.default_rng(12)
        traj = free_running_trajectory(history, qpsk, rng, frames=10,
                                       n_symbols=128, n_iter=4)
        assert len(traj) == 4
        assert all(0.0 <= v <= 1.0 for v in traj)
        assert traj == sorted(traj)  # shrinking effective noise -> growing MI
