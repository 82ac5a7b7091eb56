import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvqsim import photon as ph
from hvqsim import qubit as qc
from hvqsim.errors import ContractError
from hvqsim.rng import child_seed

from conftest import binomial_sigma


def cfg(theta=0.0, phi=0.0, prep=0.0, analysis=0.0, coef=1.0, count=0):
    return ph.ChannelConfig(
        qc.rotation_unitary(theta, phi), ph.Polarizer(prep), ph.Polarizer(analysis), ph.ReflectionLoss(coef, count)
    )


class TestInitialize:
    def test_ground(self):
        s = ph.initialize_channel(1)
        assert (s.a0, s.a1) == (1, 0)

    def test_seed_independent(self):
        assert ph.initialize_channel(1) == ph.initialize_channel(2)

    def test_measure_zero(self):
        s = ph.initialize_channel(3)
        assert qc.measure_all(qc.RegisterState(1, s.as_array()), 0) == "0"


class TestPolarizer:
    def test_aligned(self):
        passed, out = ph.apply_polarizer(qc.ZERO, ph.Polarizer(0.0), 0)
        assert passed and out.equals_up_to_phase(qc.ZERO)
        assert ph.pass_probability(qc.ZERO, ph.Polarizer(0.0)) == 1.0

    def test_crossed(self):
        assert ph.pass_probability(qc.ZERO, ph.Polarizer(math.pi / 2)) < 1e-30
        assert not any(ph.apply_polarizer(qc.ZERO, ph.Polarizer(math.pi / 2), s)[0] for s in range(50))

    def test_diagonal_statistics(self):
        rng = np.random.default_rng(4)
        n = 100_000
        p = ph.Polarizer(math.pi / 4)
        passed = sum(ph.apply_polarizer(qc.ZERO, p, rng)[0] for _ in range(n))
        assert abs(passed / n - 0.5) <= 5 * binomial_sigma(0.5, n)

    def test_axis_mod_pi(self):
        assert ph.Polarizer(math.pi + 0.3).axis == pytest.approx(0.3)

    def test_blocked_state_absent(self):
        passed, out = ph.apply_polarizer(qc.ONE, ph.Polarizer(0.0), 0)
        assert not passed and out is None


class TestLoss:
    def test_lossless(self):
        assert ph.apply_loss(1.0, ph.ReflectionLoss(1.0, 5)) == 1.0

    def test_single(self):
        assert ph.apply_loss(1.0, ph.ReflectionLoss(0.9, 1)) == pytest.approx(0.81, abs=1e-15)

    def test_double(self):
        assert ph.apply_loss(0.5, ph.ReflectionLoss(0.9, 2)) == pytest.approx(0.32805, abs=1e-15)

    @pytest.mark.parametrize("coef,count", [(0.0, 1), (1.5, 1), (0.9, -1), (0.9, 1.5)])
    def test_invalid(self, coef, count):
        with pytest.raises(ContractError):
            ph.ReflectionLoss(coef, count)

    def test_invalid_probability(self):
        with pytest.raises(ContractError):
            ph.apply_loss(1.5, ph.NO_LOSS)


class TestRunChannel:
    def test_pass_through(self):
        rec = ph.run_channel(cfg(), 0)
        assert rec.clicked and rec.outcome == 0 and rec.click_probability == 1.0

    def test_rotated(self):
        assert ph.run_channel(cfg(theta=math.pi / 4), 0).click_probability == pytest.approx(0.5, abs=1e-15)

    @given(st.floats(-4, 4), st.floats(-4, 4), st.floats(0, 3.2), st.floats(0, 3.2))
    @settings(max_examples=40)
    def test_heavy_loss_bound(self, theta, phi, prep, analysis):
        rec = ph.run_channel(cfg(theta, phi, prep, analysis, 0.5, 10), 0)
        assert rec.click_probability <= 0.5 ** 20

    @given(st.floats(-4, 4), st.floats(-4, 4), st.floats(0, 3.2), st.floats(0, 3.2),
           st.floats(0.01, 1.0), st.integers(0, 20))
    @settings(max_examples=100)
    def test_click_probability_bounds(self, theta, phi, prep, analysis, coef, count):
        p = ph.click_probability(cfg(theta, phi, prep, analysis, coef, count))
        assert 0.0 <= p <= 1.0

    def test_click_rate_matches_probability(self):
        c = cfg(theta=0.4, phi=0.2, prep=0.3, analysis=1.1, coef=0.95, count=2)
        n = 20_000
        st_ = ph.channel_statistics(c, n, 9)
        p = st_["click_probability"]
        assert abs(st_["clicks"] / n - p) <= 5 * binomial_sigma(p, n)

    def test_record_invariant(self):
        with pytest.raises(ContractError):
            ph.DetectorRecord(False, 1, 0.0)

    def test_non_unitary_config(self):
        with pytest.raises(ContractError):
            ph.ChannelConfig(qc.SingleQubitUnitary.from_matrix([[2, 0], [0, 1]]))


class TestRegister:
    def test_single_is_run_channel(self):
        c = cfg(theta=0.7, analysis=0.5)
        for s in range(20):
            assert ph.run_register([c], s)[0] == ph.run_channel(c, child_seed(s, 0))

    def test_repeatable(self):
        cs = [cfg(theta=0.5, analysis=0.3)] * 4
        assert ph.run_register(cs, 17) == ph.run_register(cs, 17)

    def test_empty(self):
        with pytest.raises(ContractError):
            ph.run_register([], 0)

    def test_two_channels_independent(self):
        c = cfg(theta=math.pi / 4)
        n = 100_000
        clicks = np.zeros(2)
        for s in range(n):
            recs = ph.run_register([c, c], s)
            clicks += [r.clicked for r in recs]
        p = ph.click_probability(c)
        assert np.all(np.abs(clicks / n - p) <= 5 * binomial_sigma(p, n))

