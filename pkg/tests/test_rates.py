"""Tests for the secrecy-rate formulas, slope fits and inequality checks."""

import math

import numpy as np
import pytest

from secmimo.errors import InvalidInputError
from secmimo.grassmann import FeedbackSchedule, GrassmannPoint, feedback_bits, perturb_quantize
from secmimo.linalg import (
    LOG2_E,
    gaussian_mi,
    hermitian_part,
    logdet_pd,
    random_gaussian_matrix,
)
from secmimo.rates import (
    RateSample,
    beta_P,
    eve_rate_limit,
    fit_slope,
    logdet_perturbation_check,
    logdet_variational_objective,
    sdof_fit,
    secrecy_rate_perfect_G,
    secrecy_rate_perfect_basic,
    secrecy_rate_quantized_G,
)
from secmimo.transceiver import (
    AntennaConfig,
    ChannelSet,
    PowerPolicy,
    rx_postfilter,
    sample_channels,
    tx_precoders_perfect,
    tx_precoders_quantized,
)


def _random_trial(seed, cfg=None, nf=30):
    rng = np.random.default_rng(seed)
    cfg = cfg or AntennaConfig(4, 2, 1, 2)
    ch = sample_channels(cfg, rng)
    filters = rx_postfilter(ch.Hd, ch.Hj, rng=rng)
    prec_p = tx_precoders_perfect(ch.Hd)
    fhat = perturb_quantize(GrassmannPoint(filters.F), nf, rng)
    prec_q = tx_precoders_quantized(fhat)
    return cfg, ch, filters, prec_p, prec_q


class TestPerfectBasic:
    def test_hand_case_one_bit(self):
        """Aligned scalar system at P = 2 carries exactly one secret bit."""
        cfg = AntennaConfig(2, 1, 0, 1)
        ch = ChannelSet(
            Hd=np.array([[1.0, 0.0]], dtype=complex),
            He=np.array([[0.0, 1.0]], dtype=complex),
            Hj=np.zeros((1, 0), dtype=complex),
        )
        policy = PowerPolicy(P=2.0, rho=0.5, kxs_scale=1.0)
        rate = secrecy_rate_perfect_basic(ch, policy, cfg)
        assert rate.clipped == pytest.approx(1.0, abs=1e-12)
        assert rate.t_minus == pytest.approx(0.0, abs=1e-12)

    def test_vanishes_with_rho(self):
        cfg, ch, _, _, _ = _random_trial(1)
        rate = secrecy_rate_perfect_basic(ch, PowerPolicy(P=100.0, rho=1e-9), cfg)
        assert abs(rate.raw) < 1e-6

    def test_matches_mi_oracle(self):
        rng = np.random.default_rng(2)
        cfg = AntennaConfig(4, 2, 1, 2)
        ch = sample_channels(cfg, rng)
        policy = PowerPolicy(P=37.0, rho=0.6)
        rate = secrecy_rate_perfect_basic(ch, policy, cfg)
        from secmimo.linalg import svd
        from secmimo.transceiver import rx_nuller

        dec = svd(ch.Hd)
        v = rx_nuller(ch.Hj)
        h_eff = v.conj().T @ dec.U @ np.diag(dec.singular_values)
        kxs = policy.kxs(2) * policy.P
        an = policy.an_cov_scale(4, 2)
        he_s = ch.He @ dec.V[:, :2]
        he_an = ch.He @ dec.V[:, 2:]
        mi_rx = gaussian_mi(h_eff, policy.rho * kxs * np.eye(2), None, 1.0)
        mi_eve = gaussian_mi(
            he_s,
            policy.rho * kxs * np.eye(2),
            an * (he_an @ he_an.conj().T),
            1.0,
        )
        assert rate.raw == pytest.approx(mi_rx - mi_eve, abs=1e-9)


class TestPerfectG:
    def test_scalar_case_matches_basic(self):
        """With d_s = n_r = 1 the G filter is a scalar and cancels."""
        rng = np.random.default_rng(3)
        cfg = AntennaConfig(2, 1, 0, 1)
        ch = sample_channels(cfg, rng)
        filters = rx_postfilter(ch.Hd, ch.Hj, rng=rng)
        prec = tx_precoders_perfect(ch.Hd)
        policy = PowerPolicy(P=25.0, rho=0.5)
        with_g = secrecy_rate_perfect_G(ch, prec, filters, policy, cfg)
        basic = secrecy_rate_perfect_basic(ch, policy, cfg)
        assert with_g.raw == pytest.approx(basic.raw, abs=1e-9)

    def test_t_plus_vanishes_with_rho(self):
        cfg, ch, filters, prec_p, _ = _random_trial(4)
        rate = secrecy_rate_perfect_G(
            ch, prec_p, filters, PowerPolicy(P=100.0, rho=1e-12), cfg
        )
        assert rate.t_plus < 1e-6

    def test_high_snr_slope_is_ds(self):
        """Raw-rate slope over P = 2^20..2^30 approximates d_s within 0.05."""
        for seed in (5, 6):
            cfg, ch, filters, prec_p, _ = _random_trial(seed, AntennaConfig(6, 3, 1, 3))
            snrs, rates = [], []
            for k in range(20, 31):
                policy = PowerPolicy(P=2.0**k, rho=0.5)
                snrs.append(policy.snr_db)
                rates.append(secrecy_rate_perfect_G(ch, prec_p, filters, policy, cfg).raw)
            est = fit_slope(np.array(snrs), np.array(rates), window=(min(snrs), max(snrs)))
            assert est.slope == pytest.approx(cfg.d_s, abs=0.05)

    def test_t_plus_monotone_in_power(self):
        cfg, ch, filters, prec_p, _ = _random_trial(7)
        values = [
            secrecy_rate_perfect_G(ch, prec_p, filters, PowerPolicy(P=p, rho=0.5), cfg).t_plus
            for p in (1.0, 10.0, 100.0, 1000.0)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_clipping(self):
        cfg, ch, filters, prec_p, _ = _random_trial(8)
        rate = secrecy_rate_perfect_G(ch, prec_p, filters, PowerPolicy(P=1e-6, rho=0.5), cfg)
        assert rate.clipped == max(rate.raw, 0.0)


class TestQuantizedG:
    def test_zero_quantization_error_matches_perfect_formula(self):
        """Feeding back the exact subspace reproduces the perfect-CSI rate."""
        rng = np.random.default_rng(9)
        cfg = AntennaConfig(4, 2, 1, 2)
        ch = sample_channels(cfg, rng)
        filters = rx_postfilter(ch.Hd, ch.Hj, rng=rng)
        prec_q = tx_precoders_quantized(GrassmannPoint(filters.F))
        policy = PowerPolicy(P=200.0, rho=0.5)
        quantized = secrecy_rate_quantized_G(ch, prec_q, filters, policy, cfg)
        perfect_same_basis = secrecy_rate_perfect_G(ch, prec_q, filters, policy, cfg)
        assert quantized.raw == pytest.approx(perfect_same_basis.raw, abs=1e-9)

    def test_quantized_below_perfect_at_high_snr(self):
        """Raw quantized rate at or below raw perfect rate on >= 95% of trials."""
        schedule = FeedbackSchedule.scaled(0.0)
        ok = 0
        trials = 60
        for seed in range(trials):
            rng = np.random.default_rng(1000 + seed)
            cfg = AntennaConfig(4, 2, 1, 2)
            ch = sample_channels(cfg, rng)
            filters = rx_postfilter(ch.Hd, ch.Hj, rng=rng)
            prec_p = tx_precoders_perfect(ch.Hd)
            good = True
            for snr in (40.0, 50.0, 60.0):
                policy = PowerPolicy.from_snr_db(snr)
                nf = feedback_bits(policy.P, schedule, 4, 2)
                fhat = perturb_quantize(GrassmannPoint(filters.F), nf, rng)
                prec_q = tx_precoders_quantized(fhat)
                r_p = secrecy_rate_perfect_G(ch, prec_p, filters, policy, cfg)
                r_q = secrecy_rate_quantized_G(ch, prec_q, filters, policy, cfg, nf)
                good = good and (r_q.raw <= r_p.raw + 1e-6)
            ok += good
        assert ok >= 0.95 * trials

    def test_fixed_bits_saturate(self):
        """With 30 bits fixed, the mean rate flattens between 50 and 60 dB."""
        cfg = AntennaConfig(6, 3, 1, 3)
        deltas = []
        for seed in range(60):
            rng = np.random.default_rng(2000 + seed)
            ch = sample_channels(cfg, rng)
            filters = rx_postfilter(ch.Hd, ch.Hj, rng=rng)
            values = {}
            for snr in (50.0, 60.0):
                policy = PowerPolicy.from_snr_db(snr)
                fhat = perturb_quantize(GrassmannPoint(filters.F), 30, rng)
                prec_q = tx_precoders_quantized(fhat)
                values[snr] = secrecy_rate_quantized_G(ch, prec_q, filters, policy, cfg).clipped
            deltas.append(values[60.0] - values[50.0])
        assert float(np.mean(deltas)) < 0.5

    def test_gap_nonincreasing_with_margin_schedule(self):
        """Mean raw gap is nonincreasing over 20..60 dB under the 1.5x bit law."""
        schedule = FeedbackSchedule.scaled(0.5)
        cfg = AntennaConfig(4, 2, 1, 2)
        snrs = (20.0, 30.0, 40.0, 50.0, 60.0)
        gaps = np.zeros(len(snrs))
        trials = 200
        for seed in range(trials):
            rng = np.random.default_rng(3000 + seed)
            ch = sample_channels(cfg, rng)
            filters = rx_postfilter(ch.Hd, ch.Hj, rng=rng)
            prec_p = tx_precoders_perfect(ch.Hd)
            for i, snr in enumerate(snrs):
                policy = PowerPolicy.from_snr_db(snr)
                nf = feedback_bits(policy.P, schedule, 4, 2)
                fhat = perturb_quantize(GrassmannPoint(filters.F), nf, rng)
                prec_q = tx_precoders_quantized(fhat)
                r_p = secrecy_rate_perfect_G(ch, prec_p, filters, policy, cfg)
                r_q = secrecy_rate_quantized_G(ch, prec_q, filters, policy, cfg, nf)
                gaps[i] += r_p.raw - r_q.raw
        gaps /= trials
        assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))


class TestEveRateLimit:
    def test_vanishes_with_rho(self):
        cfg, ch, _, prec_p, _ = _random_trial(10)
        limit = eve_rate_limit(ch, prec_p, PowerPolicy(P=10.0, rho=1e-12), cfg)
        assert limit < 1e-9

    def test_t_minus_converges(self):
        """The Eve term converges to the closed-form limit along P = 1e3, 1e6, 1e9."""
        cfg, ch, filters, prec_p, _ = _random_trial(11)
        policy9 = PowerPolicy(P=1e9, rho=0.5)
        limit = eve_rate_limit(ch, prec_p, policy9, cfg)
        diffs = []
        for p in (1e3, 1e6, 1e9):
            t_minus = secrecy_rate_perfect_G(
                ch, prec_p, filters, PowerPolicy(P=p, rho=0.5), cfg
            ).t_minus
            diffs.append(abs(t_minus - limit))
        assert diffs[0] > diffs[1] > diffs[2]
        assert diffs[2] < 1e-3

    def test_zero_when_eve_misses_signal(self):
        """An eavesdropper confined to the artificial-noise span learns nothing."""
        rng = np.random.default_rng(12)
        cfg = AntennaConfig(4, 2, 1, 2)
        ch = sample_channels(cfg, rng)
        prec = tx_precoders_perfect(ch.Hd)
        he = prec.W2[:, :2].conj().T  # rows orthogonal to W1's span
        ch2 = ChannelSet(Hd=ch.Hd, He=he, Hj=ch.Hj)
        limit = eve_rate_limit(ch2, prec, PowerPolicy(P=10.0, rho=0.5), cfg)
        assert limit == pytest.approx(0.0, abs=1e-9)


class TestBetaP:
    def test_zero_quantization_error(self):
        rng = np.random.default_rng(13)
        cfg = AntennaConfig(4, 2, 1, 2)
        ch = sample_channels(cfg, rng)
        filters = rx_postfilter(ch.Hd, ch.Hj, rng=rng)
        prec_q = tx_precoders_quantized(GrassmannPoint(filters.F))
        assert beta_P(ch, filters, prec_q, PowerPolicy(P=1e3, rho=0.5), cfg) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_nonnegative_sweep(self):
        for seed in range(50):
            cfg, ch, filters, _, prec_q = _random_trial(4000 + seed, nf=int(10 + seed % 30))
            policy = PowerPolicy(P=float(10 ** (1 + seed % 5)), rho=0.5)
            assert beta_P(ch, filters, prec_q, policy, cfg) >= -1e-12


class TestLogdetPerturbation:
    def test_zero_delta(self):
        lhs, upper, lower = logdet_perturbation_check(np.eye(3), np.zeros((3, 3)))
        assert lhs == upper == lower == 0.0

    def test_hand_case(self):
        lhs, upper, lower = logdet_perturbation_check(np.eye(2), np.eye(2))
        assert lhs == pytest.approx(2 * math.log(2), abs=1e-12)
        assert upper == pytest.approx(2.0, abs=1e-12)
        assert lower == pytest.approx(1.0, abs=1e-12)

    def test_sandwich_sweep(self):
        """Bounds hold with 1e-9 slack on 1000 random positive definite pairs."""
        rng = np.random.default_rng(14)
        for _ in range(1000):
            n = int(rng.integers(2, 5))
            m = random_gaussian_matrix(n, n, rng)
            a = hermitian_part(m @ m.conj().T) + np.eye(n)
            delta = hermitian_part(random_gaussian_matrix(n, n, rng))
            while np.linalg.eigvalsh(hermitian_part(a + delta))[0] <= 1e-8:
                delta = 0.5 * delta
            lhs, upper, lower = logdet_perturbation_check(a, delta)
            assert lower - 1e-9 <= lhs <= upper + 1e-9


class TestVariationalObjective:
    def test_maximizer_attains_logdet(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            m = random_gaussian_matrix(3, 3, rng)
            e = hermitian_part(m @ m.conj().T) + np.eye(3)
            target = -logdet_pd(e) / LOG2_E
            assert logdet_variational_objective(np.linalg.inv(e), e) == pytest.approx(
                target, abs=1e-9
            )
            for _ in range(3):
                m2 = random_gaussian_matrix(3, 3, rng)
                s_other = hermitian_part(m2 @ m2.conj().T) + np.eye(3)
                assert logdet_variational_objective(s_other, e) < target


class TestSdofFit:
    def _samples(self, fn):
        out = []
        for snr in (10.0, 20.0, 30.0, 40.0, 50.0):
            log2p = snr * math.log2(10.0) / 10.0
            r = fn(log2p)
            out.append(
                RateSample(
                    P=10 ** (snr / 10),
                    snr_db=snr,
                    r_perfect=r,
                    r_quantized=r,
                    r_perfect_raw=r,
                    r_quantized_raw=r,
                    gap=0.0,
                    leakage=0.0,
                    nf_bits=10,
                )
            )
        return out

    def test_exact_line(self):
        est = sdof_fit(self._samples(lambda x: 2.0 * x + 3.0), window=(10.0, 50.0))
        assert est.slope == pytest.approx(2.0, abs=1e-12)
        assert est.intercept == pytest.approx(3.0, abs=1e-10)

    def test_constant(self):
        est = sdof_fit(self._samples(lambda x: 4.5), window=(10.0, 50.0))
        assert est.slope == pytest.approx(0.0, abs=1e-12)

    def test_default_window_is_top_20db(self):
        est = sdof_fit(self._samples(lambda x: 1.0 * x))
        assert est.fit_window == (30.0, 50.0)

    def test_too_few_points(self):
        with pytest.raises(InvalidInputError):
            sdof_fit(self._samples(lambda x: x), window=(45.0, 50.0))
