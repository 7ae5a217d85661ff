import math

import numpy as np
import pytest

from sbcsim.motional import (AtomConfig, TrapConfig, MG25, TruncationError,
                             doppler_limit_nbar, first_zero_crossing,
                             laguerre, lamb_dicke, rabi_frequency,
                             rabi_frequency_ladder, thermal_distribution)
from tests_support import explicit_laguerre


class TestThermalDistribution:
    def test_zero_temperature(self):
        dist = thermal_distribution(0.0, 16)
        assert dist.populations[0] == 1.0
        assert np.all(dist.populations[1:] == 0.0)

    def test_ground_population_geometric_form(self):
        dist = thermal_distribution(10.0, 200)
        assert dist.populations[0] == pytest.approx(1.0 / 11.0, abs=1e-6)

    def test_mean_matches_direct_summation(self):
        dist = thermal_distribution(10.0, 200)
        mean = float(np.arange(201) @ dist.populations)
        assert mean == pytest.approx(10.0, abs=0.01)
        assert dist.nbar == pytest.approx(mean, abs=1e-12)

    @pytest.mark.parametrize("nbar", [0.5, 1.0, 2.0, 5.0, 10.0])
    def test_normalization_and_mean_error(self, nbar):
        n_max = max(25, int(20 * nbar))
        dist = thermal_distribution(nbar, n_max)
        assert abs(dist.populations.sum() - 1.0) <= 1e-9
        assert abs(dist.nbar - nbar) / nbar < 1e-3

    def test_truncation_failure_is_explicit(self):
        with pytest.raises(TruncationError):
            thermal_distribution(10.0, 50)

    def test_rejects_negative_nbar(self):
        with pytest.raises(ValueError):
            thermal_distribution(-0.1, 64)


class TestDopplerLimit:
    def test_temperature_against_independent_constants(self):
        # oracle: same formula evaluated with scipy's CODATA table
        import scipy.constants as sc
        temperature, _ = doppler_limit_nbar(MG25, 2 * math.pi * 2e6)
        expected = sc.hbar * MG25.linewidth_gamma / (2 * sc.k)
        assert temperature == pytest.approx(expected, rel=1e-6)
        assert temperature == pytest.approx(0.99344e-3, rel=1e-4)

    def test_occupation_at_2mhz(self):
        _, nbar = doppler_limit_nbar(MG25, 2 * math.pi * 2e6)
        assert nbar == pytest.approx(9.858050, rel=1e-5)

    def test_infinite_frequency_limit(self):
        _, nbar = doppler_limit_nbar(MG25, 2 * math.pi * 1e13)
        assert nbar < 1e-4

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(ValueError):
            doppler_limit_nbar(MG25, 0.0)


class TestLambDicke:
    def test_crossed_beam_value(self):
        trap = TrapConfig(omega_ax=2 * math.pi * 2.2e6,
                          omega_rad=2 * math.pi * 2.3e6)
        eta = lamb_dicke(MG25, trap)
        assert eta == pytest.approx(0.304290, abs=1e-4)
        # within 10% of the measured 0.28 for this geometry
        assert abs(eta - 0.28) / 0.28 < 0.10

    def test_zero_geometry_factor_rejected(self):
        with pytest.raises(ValueError):
            TrapConfig(omega_ax=1e6, omega_rad=1e6, raman_geometry_factor=0.0)

    def test_override_wins(self):
        trap = TrapConfig(omega_ax=2 * math.pi * 2.2e6,
                          omega_rad=2 * math.pi * 2.3e6, eta_override=0.28)
        assert lamb_dicke(MG25, trap) == 0.28


class TestLaguerre:
    def test_order_zero_is_one(self):
        for alpha in (0, 1, 2):
            for x in (-1.0, 0.0, 0.3, 2.5):
                assert laguerre(0, alpha, x) == 1.0

    def test_first_order_alpha_one(self):
        for x in (0.0, 0.5, 1.0):
            assert laguerre(1, 1, x) == pytest.approx(2.0 - x, abs=1e-15)

    def test_recurrence_matches_expansion(self):
        for n in range(11):
            for alpha in (0, 1, 2):
                for x in np.linspace(-1.0, 1.0, 9):
                    expected = explicit_laguerre(n, alpha, float(x))
                    got = laguerre(n, alpha, float(x))
                    assert got == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_specific_value_from_expansion(self):
        x = 0.28 ** 2
        assert laguerre(5, 0, x) == pytest.approx(explicit_laguerre(5, 0, x),
                                                  rel=1e-12)


class TestRabiFrequency:
    def test_red_sideband_from_ground_is_dark(self):
        assert rabi_frequency(0, -1, 0.28, 1.0) == 0.0
        assert rabi_frequency(1, -2, 0.28, 1.0) == 0.0

    def test_carrier_ground_value(self):
        expected = math.exp(-0.28 ** 2 / 2.0)
        assert rabi_frequency(0, 0, 0.28, 1.0) == pytest.approx(expected,
                                                                rel=1e-12)

    def test_blue_sideband_ground_value(self):
        expected = 0.28 * math.exp(-0.28 ** 2 / 2.0)
        assert rabi_frequency(0, 1, 0.28, 1.0) == pytest.approx(expected,
                                                                rel=1e-12)

    def test_red_blue_matrix_element_symmetry(self):
        for n in range(0, 60, 7):
            for s in (-2, -1, 1, 2):
                if n + s < 0:
                    continue
                forward = rabi_frequency(n, s, 0.28, 1.0)
                backward = rabi_frequency(n + s, -s, 0.28, 1.0)
                assert abs(forward) == pytest.approx(abs(backward), rel=1e-12)

    def test_zero_eta_carrier_is_exact(self):
        for n in (0, 3, 41):
            assert rabi_frequency(n, 0, 0.0, 2.5) == 2.5

    def test_bounded_by_bare_rabi(self):
        for s in (-2, -1, 0, 1, 2):
            ladder = rabi_frequency_ladder(s, 0.35, 1.0, 200)
            assert np.all(np.abs(ladder) <= 1.0 + 1e-12)

    def test_ladder_matches_scalar(self):
        for s in (-2, -1, 0, 1, 2):
            ladder = rabi_frequency_ladder(s, 0.28, 1.0, 80)
            for n in (0, 1, 5, 40, 80):
                assert ladder[n] == pytest.approx(
                    rabi_frequency(n, s, 0.28, 1.0), rel=1e-12, abs=1e-15)

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            rabi_frequency(3, 5, 0.28, 1.0)


class TestFirstZeroCrossing:
    def test_carrier_crossing_matches_brute_force(self):
        from scipy.special import eval_genlaguerre
        x = 0.28 ** 2
        signs = np.sign(eval_genlaguerre(np.arange(400), 0, x))
        expected = int(np.nonzero(np.diff(signs))[0][0]) + 1
        assert first_zero_crossing(0, 0.28, 400) == expected

    def test_first_red_sideband_crossing_is_above_15(self):
        crossing = first_zero_crossing(-1, 0.28, 400)
        assert crossing is not None and crossing > 15

    def test_small_eta_has_no_crossing(self):
        assert first_zero_crossing(-1, 1e-3, 256) is None

    @pytest.mark.parametrize("s", [0, -1])
    def test_monotone_in_eta(self, s):
        crossings = [first_zero_crossing(s, eta, 3000)
                     for eta in (0.1, 0.2, 0.3, 0.4)]
        assert all(c is not None for c in crossings)
        assert all(a >= b for a, b in zip(crossings, crossings[1:]))


class TestConfigValidation:
    def test_atom_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            AtomConfig(mass=-1.0, transition_wavelength=280e-9,
                       linewidth_gamma=1e8, hyperfine_splitting=1.8e9)

    def test_distribution_invariants(self):
        from sbcsim.motional import MotionalDistribution
        with pytest.raises(ValueError):
            MotionalDistribution(np.array([0.5, 0.4]))  # not normalized
        with pytest.raises(TruncationError):
            MotionalDistribution(np.array([0.9, 0.1]))  # fat tail at cutoff
