import math

import numpy as np
import pytest

from sbcsim.analysis import (CollapsedDataWarning, FitError, ScanData,
                             ThermometryError, fit_decaying_sinusoid,
                             fit_gaussian_resonance, fit_rabi_sinusoid,
                             fit_thermal_flop, nbar_from_sidebands,
                             thermal_flop_curve)

OMEGA_RF = 2 * math.pi * 63.74e3
OMEGA_CARRIER = 2 * math.pi * 40.9e3
ETA = 0.28


class TestSidebandThermometry:
    def test_cold_ion_ratio(self):
        result = nbar_from_sidebands(0.029, 0.970, 0.01, 0.01)
        assert result.nbar == pytest.approx(0.031, abs=0.001)
        assert result.ground_population == pytest.approx(1.0 - 0.029 / 0.970,
                                                         rel=1e-12)

    def test_dark_red_sideband(self):
        result = nbar_from_sidebands(0.0, 0.95)
        assert result.nbar == 0.0
        assert result.ground_population == 1.0

    def test_unit_ratio_identity(self):
        result = nbar_from_sidebands(0.45, 0.90)
        assert result.nbar == pytest.approx(1.0, rel=1e-12)

    def test_inverted_ratio_rejected(self):
        with pytest.raises(ThermometryError):
            nbar_from_sidebands(0.9, 0.5)

    def test_leakage_correction_inverts_the_pointwise_map(self):
        from sbcsim.analysis import leakage_corrected_amplitude
        true_amp, duration = 0.82, 45e-6
        pu, pd = 200.0 * duration, 600.0 * duration
        measured = true_amp * (1.0 - pu - pd)
        corrected = leakage_corrected_amplitude(measured, duration, 200.0,
                                                600.0)
        assert corrected == pytest.approx(true_amp, rel=1e-12)
        with pytest.raises(ValueError):
            leakage_corrected_amplitude(0.5, 1.0, 600.0, 600.0)

    def test_error_propagation_matches_monte_carlo(self):
        rho_r, rho_b = 0.2, 0.8
        sigma_r, sigma_b = 0.015, 0.02
        result = nbar_from_sidebands(rho_r, rho_b, sigma_r, sigma_b)
        rng = np.random.default_rng(314)
        samples_r = rng.normal(rho_r, sigma_r, 100_000)
        samples_b = rng.normal(rho_b, sigma_b, 100_000)
        q = samples_r / samples_b
        nbars = q / (1.0 - q)
        assert result.sigma_nbar == pytest.approx(float(np.std(nbars)),
                                                  rel=0.2)


class TestGaussianResonance:
    @staticmethod
    def gaussian(x, baseline, amplitude, center, width):
        return baseline + amplitude * np.exp(-(x - center) ** 2
                                             / (2 * width ** 2))

    def test_noiseless_recovery(self):
        x = np.linspace(-1e5, 1e5, 41)
        y = self.gaussian(x, 0.02, 0.9, 1.2e4, 2.1e4)
        fit = fit_gaussian_resonance(ScanData(x, y))
        assert fit.amplitude == pytest.approx(0.9, abs=1e-6)
        assert fit.center == pytest.approx(1.2e4, abs=1.0)
        assert fit.width == pytest.approx(2.1e4, rel=1e-6)
        assert fit.baseline == pytest.approx(0.02, abs=1e-8)

    def test_binomial_noise_within_three_sigma(self):
        rng = np.random.default_rng(88)
        x = np.linspace(-8e4, 8e4, 25)
        truth = self.gaussian(x, 0.01, 0.8, 0.0, 1.8e4)
        shots = 300
        y = rng.binomial(shots, truth) / shots
        sigma = np.sqrt(np.maximum(y * (1 - y), 1e-4) / shots)
        fit = fit_gaussian_resonance(ScanData(x, y, sigma))
        assert abs(fit.amplitude - 0.8) <= 3 * fit.sigma("amplitude")

    def test_flat_scan_amplitude_consistent_with_zero(self):
        rng = np.random.default_rng(3)
        x = np.linspace(-2e5, 2e5, 21)
        y = np.clip(0.02 + rng.normal(0.0, 0.01, x.size), 0.0, 1.0)
        fit = fit_gaussian_resonance(ScanData(x, y, np.full(x.size, 0.01)))
        assert abs(fit.amplitude) <= 3 * fit.sigma("amplitude")

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_gaussian_resonance(ScanData(np.arange(4.0), np.zeros(4)))

    def test_fixed_shape_fit_of_a_dark_line(self):
        # a nearly dark resonance has a degenerate free fit; pinning the
        # lineshape from its bright partner keeps the amplitude honest
        rng = np.random.default_rng(41)
        x = np.linspace(-8e4, 8e4, 25)
        bright = self.gaussian(x, 0.01, 0.9, 3e3, 2e4)
        dark_truth = self.gaussian(x, 0.01, 0.045, 3e3, 2e4)
        noise = 0.02
        dark = np.clip(dark_truth + rng.normal(0, noise, x.size), 0, 1)
        bright_fit = fit_gaussian_resonance(
            ScanData(x, bright, np.full(x.size, noise)))
        dark_fit = fit_gaussian_resonance(
            ScanData(x, dark, np.full(x.size, noise)),
            fixed_center=bright_fit.center, fixed_width=bright_fit.width)
        assert dark_fit.center == bright_fit.center
        assert dark_fit.width == bright_fit.width
        assert abs(dark_fit.amplitude - 0.045) <= 3 * dark_fit.sigma("amplitude")
        assert dark_fit.sigma("amplitude") < 0.05

    def test_fixed_shape_requires_both_parameters(self):
        x = np.linspace(-1.0, 1.0, 9)
        with pytest.raises(ValueError):
            fit_gaussian_resonance(ScanData(x, np.full(9, 0.5)),
                                   fixed_center=0.0)

    def test_x_unit_invariance(self):
        x = np.linspace(-1e5, 1e5, 31)
        y = self.gaussian(x, 0.05, 0.7, -2e4, 3e4)
        in_rads = fit_gaussian_resonance(ScanData(x, y))
        in_khz = fit_gaussian_resonance(ScanData(x / (2e3 * math.pi), y))
        assert in_khz.center * 2e3 * math.pi == pytest.approx(in_rads.center,
                                                              rel=1e-6)
        assert in_khz.width * 2e3 * math.pi == pytest.approx(in_rads.width,
                                                             rel=1e-6)
        assert in_khz.amplitude == pytest.approx(in_rads.amplitude, rel=1e-9)


class TestRabiSinusoid:
    def test_clean_flop_recovery(self):
        t = np.linspace(0.0, 50e-6, 60)
        y = 0.5 * 0.978 * (1 - np.cos(OMEGA_RF * t))
        fit = fit_rabi_sinusoid(ScanData(t, y))
        assert fit.omega == pytest.approx(OMEGA_RF, rel=1e-9)
        assert fit.contrast == pytest.approx(0.978, rel=1e-9)

    def test_flat_data_gives_zero_contrast(self):
        rng = np.random.default_rng(17)
        t = np.linspace(0.0, 50e-6, 40)
        y = np.clip(0.3 + rng.normal(0, 0.01, t.size), 0, 1)
        fit = fit_rabi_sinusoid(ScanData(t, y, np.full(t.size, 0.01)))
        assert abs(fit.contrast) < 0.05

    def test_coverage_over_seeds(self):
        # noisy flops at the 300-shot uncertainty level: the quoted parameter
        # errors must cover the truth at 3 sigma in >= 95% of runs
        t = np.linspace(0.0, 50e-6, 40)
        truth = 0.04 + 0.45 * (1 - np.cos(OMEGA_RF * t))
        noise = 0.029
        hits = 0
        n_seeds = 100
        for seed in range(n_seeds):
            rng = np.random.default_rng(seed)
            y = np.clip(truth + rng.normal(0.0, noise, t.size), 0.0, 1.0)
            fit = fit_rabi_sinusoid(ScanData(t, y, np.full(t.size, noise)))
            ok = (abs(fit.omega - OMEGA_RF) <= 3 * fit.sigma("omega")
                  and abs(fit.contrast - 0.9) <= 3 * fit.sigma("contrast"))
            hits += ok
        assert hits >= 95

    def test_x_unit_invariance(self):
        t = np.linspace(0.0, 50e-6, 60)
        y = 0.5 * 0.9 * (1 - np.cos(OMEGA_RF * t + 0.3))
        in_seconds = fit_rabi_sinusoid(ScanData(t, y))
        in_us = fit_rabi_sinusoid(ScanData(t * 1e6, y))
        # rad/us back to rad/s
        assert in_us.omega * 1e6 == pytest.approx(in_seconds.omega, rel=1e-9)


class TestDecayingSinusoid:
    def test_reference_values_recovered(self):
        omega, gamma = 2 * math.pi * 40.9e3, 4.2e3
        t = np.linspace(0.0, 120e-6, 80)
        y = 0.5 * 0.97 * (1 - np.exp(-gamma * t) * np.cos(omega * t))
        rng = np.random.default_rng(10)
        noisy = np.clip(y + rng.normal(0, 0.02, y.size), 0, 1)
        fit = fit_decaying_sinusoid(ScanData(t, noisy, np.full(t.size, 0.02)))
        assert abs(fit.omega - omega) <= 3 * fit.sigma("omega")
        assert abs(fit.gamma - gamma) <= 3 * fit.sigma("gamma")
        assert not fit.low_confidence

    def test_zero_decay_reduces_to_sinusoid(self):
        t = np.linspace(0.0, 60e-6, 60)
        y = 0.5 * 0.95 * (1 - np.cos(OMEGA_RF * t))
        decaying = fit_decaying_sinusoid(ScanData(t, y))
        plain = fit_rabi_sinusoid(ScanData(t, y))
        assert decaying.omega == pytest.approx(plain.omega, rel=1e-6)
        assert abs(decaying.gamma) < 1.0

    def test_overdamped_flagged_low_confidence(self):
        rng = np.random.default_rng(4)
        t = np.linspace(0.0, 100e-6, 50)
        y = 0.5 * 0.9 * (1 - np.exp(-3e5 * t) * np.cos(2 * math.pi * 4e3 * t))
        noisy = np.clip(y + rng.normal(0, 0.02, y.size), 0, 1)
        fit = fit_decaying_sinusoid(ScanData(t, noisy, np.full(t.size, 0.02)))
        assert fit.low_confidence


class TestThermalFlop:
    def test_hot_ion_self_consistency(self):
        t = np.linspace(0.5e-6, 60e-6, 80)
        y = thermal_flop_curve(t, 10.0, OMEGA_CARRIER, ETA)
        fit = fit_thermal_flop(ScanData(t, y), ETA)
        assert abs(fit.params["nbar"] - 10.0) / 10.0 < 0.15
        assert fit.params["omega0"] == pytest.approx(OMEGA_CARRIER, rel=1e-3)

    def test_cold_ion_single_frequency(self):
        t = np.linspace(0.5e-6, 60e-6, 80)
        omega_00 = OMEGA_CARRIER * math.exp(-ETA ** 2 / 2)
        y = np.sin(omega_00 * t / 2) ** 2
        fit = fit_thermal_flop(ScanData(t, y), ETA)
        assert fit.params["nbar"] < 0.01
        assert fit.params["omega0"] == pytest.approx(OMEGA_CARRIER, rel=1e-3)

    def test_collapsed_tail_sits_at_half(self):
        # dephased carrier flop of a hot ion averages to 1/2
        t = np.linspace(15e-6, 40e-6, 120)
        y = thermal_flop_curve(t, 10.0, OMEGA_CARRIER, ETA)
        assert np.all(y > 0.39)
        assert np.all(y < 0.61)
        assert abs(float(y.mean()) - 0.5) < 0.03

    def test_collapsed_only_data_warns(self):
        t = np.linspace(20e-6, 40e-6, 40)
        y = thermal_flop_curve(t, 10.0, OMEGA_CARRIER, ETA)
        with pytest.warns(CollapsedDataWarning):
            fit_thermal_flop(ScanData(t, y), ETA)


class TestScanDataIo:
    def test_csv_roundtrip(self, tmp_path):
        scan = ScanData(np.linspace(0, 1e-4, 7), np.linspace(0, 1, 7),
                        np.full(7, 0.03))
        path = tmp_path / "scan.csv"
        scan.write_csv(path)
        back = ScanData.read_csv(path)
        assert np.array_equal(back.x, scan.x)
        assert np.array_equal(back.y, scan.y)
        assert np.array_equal(back.sigma_y, scan.sigma_y)

    def test_csv_roundtrip_without_sigma(self, tmp_path):
        scan = ScanData(np.linspace(0, 1, 5), np.full(5, 0.5))
        path = tmp_path / "scan.csv"
        scan.write_csv(path)
        assert ScanData.read_csv(path).sigma_y is None

    def test_validation(self):
        with pytest.raises(ValueError):
            ScanData(np.arange(3.0), np.array([0.1, 0.2, 1.5]))
        with pytest.raises(ValueError):
            ScanData(np.arange(3.0), np.zeros(4))
