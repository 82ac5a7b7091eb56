import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvqsim import hvsignal as hv
from hvqsim.errors import ConfigError, ContractError, SlownessViolation, TransientRegionError

from conftest import chi2_pvalue

CFG = hv.CarrierConfig()  # 1 kHz carrier, 100 kHz sampling, 20 ms
W0 = CFG.omega0


def frozen(value, cfg=CFG):
    return hv.StochasticPhase(np.full(cfg.n_samples, float(value)), math.inf, None, True)


def carrier(cfg=CFG):
    return np.cos(cfg.omega0 * cfg.times())


class TestCarrierConfig:
    def test_grid(self):
        assert CFG.n_samples == 2000 and CFG.period == pytest.approx(1e-3)

    def test_undersampled(self):
        with pytest.raises(ContractError):
            hv.CarrierConfig(W0, 1.0e4)

    def test_non_integer_samples(self):
        with pytest.raises(ContractError):
            hv.CarrierConfig(W0, 1e5, 1.5e-5)


class TestGenPhase:
    def test_frozen_constant(self):
        p = hv.gen_phase(CFG, 1.0, 3, frozen=True)
        assert np.all(p.samples == p.samples[0]) and 0 <= p.samples[0] < 2 * math.pi

    def test_infinite_time_freezes(self):
        p = hv.gen_phase(CFG, math.inf, 3)
        assert p.frozen and np.ptp(p.samples) == 0

    def test_same_seed(self):
        assert np.array_equal(hv.gen_phase(CFG, 1.0, 5).samples, hv.gen_phase(CFG, 1.0, 5).samples)

    def test_different_seed(self):
        assert not np.array_equal(hv.gen_phase(CFG, 1.0, 5).samples, hv.gen_phase(CFG, 1.0, 6).samples)

    def test_slowness_violation(self):
        with pytest.raises(SlownessViolation):
            hv.gen_phase(CFG, 0.5 * 100 * CFG.period, 0)

    def test_slowness_boundary_accepted(self):
        hv.gen_phase(CFG, 100 * CFG.period, 0)

    def test_ergodic_uniform(self):
        # slow grid so 1e4 correlation times fit in memory; samples 25 tc apart are independent
        tc = 100.0
        cfg = hv.CarrierConfig(2 * math.pi, 20.0, 1e4 * tc)
        p = hv.gen_phase(cfg, tc, 12)
        thin = p.samples[:: int(25 * tc * cfg.sample_rate)] % (2 * math.pi)
        counts, _ = np.histogram(thin, bins=8, range=(0, 2 * math.pi))
        assert chi2_pvalue(counts, np.full(8, 1 / 8)) > 0.001

    def test_coherence_time(self):
        tc = 100.0
        cfg = hv.CarrierConfig(2 * math.pi, 20.0, 200 * tc)
        p = hv.gen_phase(cfg, tc, 1)
        assert 0.5 * tc <= hv.phase_coherence_time(p.samples, cfg.sample_rate, tc) <= 2 * tc


class TestStages:
    def test_modulate_zero(self):
        assert np.allclose(hv.modulate(CFG, frozen(0)).samples, carrier(), atol=1e-12)

    def test_modulate_pi(self):
        assert np.allclose(hv.modulate(CFG, frozen(math.pi)).samples, -carrier(), atol=1e-12)

    def test_shift_zero_is_modulate(self):
        p = hv.gen_phase(CFG, 1.0, 2)
        assert np.array_equal(hv.phase_shift(CFG, p, 0.0).samples, hv.modulate(CFG, p).samples)

    def test_shift_periodic(self):
        p = hv.gen_phase(CFG, 1.0, 2)
        a = hv.phase_shift(CFG, p, 2 * math.pi).samples
        assert np.max(np.abs(a - hv.phase_shift(CFG, p, 0.0).samples)) <= 1e-12

    def test_shift_pi_negates(self):
        assert np.allclose(hv.phase_shift(CFG, frozen(0), math.pi).samples, -carrier(), atol=1e-12)

    def test_mix_in_phase(self):
        z = hv.homodyne_mix(hv.phase_shift(CFG, frozen(0), 0), CFG)
        assert np.allclose(z.samples, 2 * carrier(), atol=1e-12)

    def test_mix_destructive(self):
        z = hv.homodyne_mix(hv.phase_shift(CFG, frozen(0), math.pi), CFG)
        assert np.max(np.abs(z.samples)) <= 1e-12

    def test_mix_grid_mismatch(self):
        with pytest.raises(ContractError):
            hv.homodyne_mix(hv.SignalTrace(np.zeros(10), CFG.sample_rate), CFG)

    def test_detect_zero(self):
        assert not hv.square_law_detect(hv.SignalTrace(np.zeros(50), 1e5), 2).samples.any()

    def test_detect_constant(self):
        assert np.all(hv.square_law_detect(hv.SignalTrace(np.full(50, 2.0), 1e5), 2).samples == 8.0)


class TestLowPass:
    def test_design_targets(self):
        f = hv.design_lowpass(W0 / 2, W0, 1e5)
        assert f.taps.size % 2 == 1
        assert f.passband_ripple_db() <= 0.1
        assert f.stopband_attenuation_db() >= 60
        assert f.attenuation_db(2 * W0)[0] >= 60
        assert f.response(0.0)[0] == pytest.approx(1.0, abs=1e-12)

    def test_cutoff_above_carrier(self):
        with pytest.raises(ConfigError):
            hv.low_pass(hv.SignalTrace(np.zeros(4000), 1e5), W0, W0)

    @pytest.mark.parametrize("alpha,expected", [(0.0, 4.0), (math.pi, 0.0)])
    def test_baseband(self, alpha, expected):
        base = hv.run_chain(CFG, frozen(0), alpha)["baseband"]
        v = base.samples[base.valid]
        assert v.size > 0
        assert np.max(np.abs(v - expected)) <= max(0.01 * expected, 0.04)

    def test_valid_region(self):
        base = hv.run_chain(CFG, frozen(0), 0)["baseband"]
        h = hv.design_lowpass(W0 / 2, W0, 1e5).half
        assert (base.valid_start, base.valid_stop) == (h, CFG.n_samples - h)

    def test_white_noise_response_integration(self):
        f = hv.design_lowpass(W0 / 2, W0, 1e5)
        # oracle: variance ratio = mean of |H|^2 over [0, Nyquist]
        w = np.linspace(0, math.pi * 1e5, 40001)
        h2 = f.response(w) ** 2
        ratio = float(np.sum((h2[1:] + h2[:-1]) / 2) / (h2.size - 1))
        assert ratio == pytest.approx(f.noise_gain(), rel=1e-6)
        x = np.random.default_rng(0).standard_normal(400_000)
        y = hv.low_pass(hv.SignalTrace(x, 1e5), W0 / 2, W0)
        out = np.var(y.samples[y.valid])
        assert out / np.var(x) <= ratio * 1.05
        assert out / np.var(x) == pytest.approx(ratio, rel=0.05)

    def test_2w0_suppressed(self):
        # detected signal carries 2 w0 components of magnitude ~2; residue in the output is < -40 dB
        base = hv.run_chain(CFG, frozen(0.3), 0.4)["baseband"].samples
        h = hv.design_lowpass(W0 / 2, W0, 1e5).half
        v = base[h:-h]
        assert np.ptp(v) <= 0.02 * 2


class TestThreshold:
    def _base(self, theta):
        return hv.run_chain(CFG, frozen(theta), 0.0)["baseband"]

    def test_zero(self):
        b = self._base(0.0)
        assert hv.threshold_sign(b, hv.default_readout(b)) == 1

    def test_pi(self):
        b = self._base(math.pi)
        assert hv.threshold_sign(b, hv.default_readout(b)) == -1

    def test_tie_positive(self):
        b = hv.SignalTrace(np.full(10, 2.0), 1e5)
        assert hv.threshold_sign(b, 5, gain=2.0) == 1

    def test_transient_region(self):
        b = self._base(0.0)
        with pytest.raises(TransientRegionError):
            hv.threshold_sign(b, 0)


class TestCells:
    def test_equal_shifts(self):
        for s in range(5):
            a, b = hv.build_cells(2, [0.0, 0.0], CFG, 1.0, s)
            assert a.outcome == b.outcome

    def test_antipodal(self):
        for s in range(5):
            a, b = hv.build_cells(2, [0.0, math.pi], CFG, 1.0, s)
            assert a.outcome == -b.outcome

    def test_shared_phase(self):
        cells = hv.build_cells(3, [0.0, 1.0, 2.0], CFG, 1.0, 4, keep_stages=True)
        m = [c.stages["modulated"].samples for c in cells]
        assert np.array_equal(m[0], m[1]) and np.array_equal(m[1], m[2])

    def test_alpha_count_mismatch(self):
        with pytest.raises(ContractError):
            hv.build_cells(2, [0.0], CFG, 1.0, 0)

    def test_quadrature_zero_correlation(self):
        # 1e5 independent trials through the batched frozen-phase chain
        e = hv.hv_pair_correlation(0.0, math.pi / 2, 100_000, seed=3)
        assert abs(e.value) <= 5 * e.stderr

    def test_batched_matches_trace(self):
        geom = hv.trial_geometry()
        rng = np.random.default_rng(8)
        for theta in rng.uniform(0, 2 * math.pi, 5):
            phase = hv.StochasticPhase(np.full(geom.cfg.n_samples, theta), math.inf, None, True)
            base = hv.run_chain(geom.cfg, phase, 0.0)["baseband"]
            assert hv.frozen_baseband(np.array([theta]), geom)[0] == pytest.approx(base.samples[geom.at], abs=1e-12)


class TestCorrelation:
    def test_zero_exact(self):
        assert hv.hv_correlation(0.0, 10_000, seed=1).value == 1.0

    def test_pi_exact(self):
        assert hv.hv_correlation(math.pi, 10_000, seed=1).value == -1.0

    def test_pi_over_3(self):
        e = hv.hv_correlation(math.pi / 3, 100_000, seed=2)
        assert abs(e.value - 1 / 3) <= 5 * e.stderr

    def test_delta_range(self):
        with pytest.raises(ContractError):
            hv.hv_correlation(4.0, 10)

    def test_worker_independent(self):
        a = hv.hv_pair_agreements(0.0, 1.0, 20_000, 7, workers=1)
        assert a == hv.hv_pair_agreements(0.0, 1.0, 20_000, 7, workers=3)

    @given(st.floats(-10, 10, allow_nan=False))
    def test_sawtooth_range(self, d):
        assert -1.0 <= hv.sawtooth_correlation(d) <= 1.0
        assert hv.sawtooth_correlation(d) == pytest.approx(hv.sawtooth_correlation(-d))

    @given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
    @settings(max_examples=30, deadline=None)
    def test_sign_matches_cosine(self, phi, alpha):
        c = math.cos(phi + alpha)
        if abs(c) < 1e-3:
            return
        out = hv.frozen_outcomes(np.array([phi + alpha]), hv.trial_geometry())[0]
        assert out == (1 if c > 0 else -1)


class TestPhaseOffset:
    def test_noiseless_two_trials(self):
        s, c, q = hv.phase_offset_trials(0.7, 0.1, 0.0, 2, 5)
        angle, amp = hv.estimate_phase_offset(s, c, q)
        assert angle == pytest.approx(0.7, abs=1e-3)

    def test_one_trial_rejected(self):
        s, c, q = hv.phase_offset_trials(0.7, 0.1, 0.0, 1, 5)
        with pytest.raises(ContractError):
            hv.estimate_phase_offset(s, c, q)

    def test_wrap(self):
        assert hv.wrap_angle(3 * math.pi) == pytest.approx(-math.pi)
