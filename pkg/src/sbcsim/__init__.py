"""Resolved-sideband cooling simulator for a single trapped ion.

Fock-space couplings, pulse-level state evolution, photon-count state
detection, scan fitting/thermometry and the laser modulation-chain
arithmetic, tied together by an experiment sequencer and a small CLI.
"""

__version__ = "0.1.0"

from .motional import (AtomConfig, TrapConfig, MotionalDistribution, MG25,
                       TruncationError, thermal_distribution,
                       doppler_limit_nbar, lamb_dicke, laguerre,
                       rabi_frequency, rabi_frequency_ladder,
                       first_zero_crossing)
from .dynamics import (Level, PulseKind, PulseSpec, DissipationConfig,
                       IonState, apply_coherent_pulse, apply_rf_pulse,
                       apply_repump, apply_doppler_cool, apply_leakage)
from .detection import (DetectionModel, Histogram, PopulationFit,
                        reference_distributions, overlap, simulate_detection,
                        fit_population, depump_rate_for_up_mean)
from .analysis import (ScanData, SidebandThermometry, FitReport, FitError,
                       ThermometryError, nbar_from_sidebands,
                       leakage_corrected_amplitude, fit_gaussian_resonance,
                       fit_rabi_sinusoid, fit_decaying_sinusoid,
                       fit_thermal_flop, thermal_flop_curve)
from .modchain import (ModulationState, SidebandSpectrum, AomStage, AomChain,
                       bessel_j, sideband_powers, shg_transform,
                       carrier_sideband_ratio, beta_from_ratio, net_shift,
                       solve_chain, resolve_chain, raman_difference_chain)
from .sequence import (SbcSchedule, SbcScheduleSet, ExperimentConfig,
                       Sequence, ScheduleError, build_sbc_sequence,
                       run_sequence, iterate_sequence, prepare_state,
                       scan_frequency, scan_time, probe_frequency_scan,
                       probe_time_scan, sequence_to_text, sequence_from_text)
from .config import (ConfigError, LoadedConfig, ScanDefaults,
                     ModchainSettings, load_config_text, load_config_file,
                     default_config, DEFAULT_CONFIG_TEXT)

__all__ = [name for name in dir() if not name.startswith("_")]
