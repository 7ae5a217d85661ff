import dataclasses
import math

import numpy as np
import pytest

from sbcsim.analysis import fit_gaussian_resonance, nbar_from_sidebands
from sbcsim.dynamics import (DissipationConfig, IonState, Level, PulseKind,
                             PulseSpec, apply_doppler_cool)
from sbcsim.motional import rabi_frequency, thermal_distribution
from sbcsim.sequence import (ExperimentConfig, SbcSchedule, SbcScheduleSet,
                             ScheduleError, Sequence, build_sbc_sequence,
                             prepare_state,
                             probe_frequency_scan, run_sequence,
                             scan_frequency, scan_time, sequence_from_text,
                             sequence_to_text)

CFG = ExperimentConfig()
IDEAL = dataclasses.replace(
    CFG, dissipation=DissipationConfig(repump_down_branch=1.0,
                                       repump_cycles=4))


def fock_state(n, n_max=CFG.n_max):
    pop = np.zeros((3, n_max + 1))
    pop[Level.DOWN, n] = 1.0
    return IonState(pop)


class TestBuildSchedule:
    def test_default_counts(self):
        seq = build_sbc_sequence(CFG)
        kinds = [step.kind for step in seq.steps]
        assert kinds.count(PulseKind.SIDEBAND) == 120  # 3 x (25 + 15)
        assert kinds.count(PulseKind.REPUMP) == 120
        # second-order pulses come first within each repeat
        assert seq.steps[0].order == -2
        assert seq.steps[2 * 25].order == -1

    def test_pi_times_match_target_ladder(self):
        seq = build_sbc_sequence(CFG)
        pulses = [s for s in seq.steps if s.kind is PulseKind.SIDEBAND]
        eta = CFG.eta
        # first repeat: 2nd order from n=40 down, then 1st order from n=15
        for k in range(25):
            expected = math.pi / abs(rabi_frequency(40 - k, -2, eta,
                                                    CFG.raman_omega0))
            assert pulses[k].duration == pytest.approx(expected, rel=1e-12)
        for k in range(15):
            expected = math.pi / abs(rabi_frequency(15 - k, -1, eta,
                                                    CFG.raman_omega0))
            assert pulses[25 + k].duration == pytest.approx(expected,
                                                            rel=1e-12)

    def test_total_duration_in_expected_window(self):
        seq = build_sbc_sequence(CFG)
        assert 5e-3 <= seq.total_duration <= 20e-3

    def test_empty_set_rejected(self):
        schedule = SbcSchedule(SbcScheduleSet(0, 40), SbcScheduleSet(15, 15), 1)
        with pytest.raises(ScheduleError):
            build_sbc_sequence(CFG, schedule)

    def test_descending_below_ladder_rejected(self):
        schedule = SbcSchedule(SbcScheduleSet(25, 40), SbcScheduleSet(16, 15), 1)
        with pytest.raises(ScheduleError):
            build_sbc_sequence(CFG, schedule)

    def test_target_at_zero_crossing_rejected(self):
        # at eta = 0.35 the first-order coupling nearly vanishes at n = 30
        trap = dataclasses.replace(CFG.trap, eta_override=0.35)
        cfg = dataclasses.replace(CFG, trap=trap)
        schedule = SbcSchedule(SbcScheduleSet(1, 40), SbcScheduleSet(1, 30), 1)
        with pytest.raises(ScheduleError, match="n = 30"):
            build_sbc_sequence(cfg, schedule)

    def test_sequence_requires_steps(self):
        with pytest.raises(ScheduleError):
            Sequence(())


class TestRunSequence:
    def test_single_quantum_removal(self):
        seq = Sequence((
            PulseSpec(PulseKind.SIDEBAND,
                      math.pi / abs(rabi_frequency(1, -1, IDEAL.eta,
                                                   IDEAL.raman_omega0)),
                      IDEAL.raman_omega0, order=-1),
            PulseSpec(PulseKind.REPUMP, 20e-6),
        ))
        cfg = dataclasses.replace(
            IDEAL, dissipation=DissipationConfig(repump_down_branch=1.0,
                                                 repump_cycles=4))
        out = run_sequence(fock_state(1), seq, cfg)
        assert out.pop[Level.DOWN, 0] == pytest.approx(1.0, abs=1e-6)

    def test_one_quantum_ladder_is_exact_without_leakage(self):
        for n in (2, 7, 15):
            seq = Sequence((
                PulseSpec(PulseKind.SIDEBAND,
                          math.pi / abs(rabi_frequency(n, -1, IDEAL.eta,
                                                       IDEAL.raman_omega0)),
                          IDEAL.raman_omega0, order=-1),
                PulseSpec(PulseKind.REPUMP, 20e-6),
            ))
            out = run_sequence(fock_state(n), seq, IDEAL)
            assert out.pop[Level.DOWN, n - 1] == pytest.approx(1.0, abs=1e-9)

    def test_zero_duration_pulses_are_identity(self):
        seq = Sequence((
            PulseSpec(PulseKind.SIDEBAND, 0.0, CFG.raman_omega0, order=-1),
            PulseSpec(PulseKind.CARRIER, 0.0, CFG.raman_omega0),
        ))
        cfg = dataclasses.replace(CFG, dissipation=DissipationConfig())
        state = IonState.from_motional(thermal_distribution(3.0, CFG.n_max))
        out = run_sequence(state, seq, cfg)
        assert np.allclose(out.pop, state.pop, atol=1e-15)

    def test_deterministic_replay(self):
        first = prepare_state(CFG)
        second = prepare_state(CFG)
        assert np.array_equal(first.pop, second.pop)

    def test_cooling_reaches_near_ground(self):
        out = prepare_state(CFG)
        assert out.nbar <= 0.05

    def test_nbar_monotone_over_repeats(self):
        state = apply_doppler_cool(IonState.ground(CFG.n_max), CFG.atom,
                                   CFG.trap)
        nbars = [state.nbar]
        single = dataclasses.replace(
            CFG, sbc=dataclasses.replace(CFG.sbc, repeats=1))
        seq = build_sbc_sequence(single)
        for _ in range(3):
            state = run_sequence(state, seq, CFG)
            nbars.append(state.nbar)
        assert all(b <= a for a, b in zip(nbars, nbars[1:]))


class TestScans:
    def test_seeded_scans_are_reproducible(self):
        probe = PulseSpec(PulseKind.SIDEBAND, 45e-6, CFG.raman_omega0, order=1)
        detunings = np.linspace(-2e5, 2e5, 7)
        cfg = dataclasses.replace(CFG, prepare="doppler")
        one = scan_frequency(cfg, probe, detunings, shots=200, seed=99)
        two = scan_frequency(cfg, probe, detunings, shots=200, seed=99)
        assert np.array_equal(one.y, two.y)
        assert np.array_equal(one.sigma_y, two.sigma_y)

    def test_zero_duration_probe_is_dark(self):
        probe = PulseSpec(PulseKind.SIDEBAND, 45e-6, CFG.raman_omega0, order=1)
        cfg = dataclasses.replace(IDEAL, prepare="doppler")
        scan = scan_time(cfg, probe, [0.0], shots=None)
        assert scan.y[0] == 0.0

    def test_thermal_sideband_ratio(self):
        # red/blue excitation of a thermal state is nbar/(nbar+1) pointwise
        cfg = dataclasses.replace(IDEAL, prepare="doppler")
        state = apply_doppler_cool(IonState.ground(cfg.n_max), cfg.atom,
                                   cfg.trap)
        nbar = state.nbar
        red = probe_frequency_scan(
            state, cfg, PulseSpec(PulseKind.SIDEBAND, 25e-6, cfg.raman_omega0,
                                  order=-1), [0.0], shots=None)
        blue = probe_frequency_scan(
            state, cfg, PulseSpec(PulseKind.SIDEBAND, 25e-6, cfg.raman_omega0,
                                  order=+1), [0.0], shots=None)
        assert red.y[0] / blue.y[0] == pytest.approx(nbar / (nbar + 1.0),
                                                     rel=1e-6)

    def test_cooled_red_sideband_is_dark(self):
        probe = PulseSpec(PulseKind.SIDEBAND, 45e-6, CFG.raman_omega0,
                          order=-1)
        detunings = np.linspace(-2 * math.pi * 25e3, 2 * math.pi * 25e3, 9)
        scan = scan_frequency(IDEAL, probe, detunings, shots=None)
        assert float(scan.y.max()) <= 0.05

    def test_rf_time_scan_recovers_drive_frequency(self):
        from sbcsim.analysis import fit_rabi_sinusoid
        cfg = dataclasses.replace(CFG, prepare="doppler")
        probe = PulseSpec(PulseKind.RF, 0.0, cfg.rf_omega)
        times = np.linspace(0.0, 50e-6, 40)
        scan = scan_time(cfg, probe, times, shots=300, seed=12)
        fit = fit_rabi_sinusoid(scan)
        assert abs(fit.omega - cfg.rf_omega) <= 3 * fit.sigma("omega")

    def test_empty_scan_rejected(self):
        probe = PulseSpec(PulseKind.RF, 0.0, CFG.rf_omega)
        with pytest.raises(ValueError):
            scan_time(CFG, probe, [], shots=None)


class TestEndToEndThermometry:
    @pytest.mark.parametrize("nbar", [0.05, 0.5, 2.0])
    def test_ratio_thermometer_recovers_injected_nbar(self, nbar):
        state = IonState.from_motional(thermal_distribution(nbar, CFG.n_max))
        probe_time = math.pi / rabi_frequency(0, 1, IDEAL.eta,
                                              IDEAL.raman_omega0)
        detunings = np.linspace(-2 * math.pi * 25e3, 2 * math.pi * 25e3, 21)
        amplitudes = {}
        for order in (-1, +1):
            probe = PulseSpec(PulseKind.SIDEBAND, probe_time,
                              IDEAL.raman_omega0, order=order)
            scan = probe_frequency_scan(state, IDEAL, probe, detunings,
                                        shots=None)
            amplitudes[order] = fit_gaussian_resonance(scan).amplitude
        result = nbar_from_sidebands(max(amplitudes[-1], 0.0), amplitudes[+1])
        assert abs(result.nbar - nbar) / nbar < 0.10


class TestSerialization:
    def test_text_round_trip(self):
        seq = build_sbc_sequence(CFG)
        text = sequence_to_text(seq)
        back = sequence_from_text(text)
        assert len(back.steps) == len(seq.steps)
        for ours, theirs in zip(seq.steps, back.steps):
            assert ours.kind == theirs.kind
            assert ours.order == theirs.order
            assert ours.duration == pytest.approx(theirs.duration, rel=1e-12)
            assert ours.omega0 == pytest.approx(theirs.omega0, rel=1e-12)

    def test_text_has_one_line_per_step(self):
        seq = build_sbc_sequence(CFG)
        lines = [line for line in sequence_to_text(seq).splitlines()
                 if line and not line.startswith("#")]
        assert len(lines) == len(seq.steps)
