"""Configuration-file ingestion for the command-line tools.

One INI-style file holds every module's parameters; values are given in
bench units (MHz, kHz, us, nm) and converted here.  Parsing failures report
the offending section and key.  The built-in defaults describe the Mg-25
setup the package ships with and are used verbatim when no file is given.
"""

from dataclasses import dataclass
import configparser
import hashlib
import math

from .constants import C_LIGHT
from .detection import DetectionModel
from .dynamics import DissipationConfig
from .modchain import AomChain, AomStage, ModulationState
from .motional import AtomConfig, TrapConfig
from .sequence import ExperimentConfig, SbcSchedule, SbcScheduleSet


class ConfigError(ValueError):
    """Bad or missing configuration input; message names the field."""


DEFAULT_CONFIG_TEXT = """\
# default experiment configuration (Mg-25, single axial mode)

[atom]
mass_amu = 24.985837
transition_wavelength_nm = 280.0
linewidth_2pi_mhz = 41.4
hyperfine_splitting_ghz = 1.789

[trap]
omega_ax_2pi_mhz = 1.9
omega_rad_2pi_mhz = 2.3
raman_geometry_factor = 1.4142135623730951
# measured Lamb-Dicke parameter; comment out to use the computed value
eta_override = 0.28

[fock]
n_max = 256
truncation_tol = 1e-6

[dissipation]
# ideal repump: every pump cycle returns |up> population straight to |down>
repump_down_branch = 1.0
repump_cycles = 4
repump_cycle_us = 5.0
recoil_heating_per_photon = 0.0
# off-resonant excitation gain/loss under Raman light, in 1/s
leak_up_per_s = 200.0
leak_down_per_s = 600.0

[detection]
mean_bright = 5.8
mean_dark = 0.2
exposure_us = 12.5
depump_rate_per_s = 0.0
k_max = 30

[drive]
raman_omega0_2pi_khz = 40.9
rf_omega_2pi_khz = 63.74

[run]
shots_per_point = 300
seed = 20260810
prepare = sbc

[sbc]
second_order_count = 25
second_order_start = 40
first_order_count = 15
first_order_start = 15
repeats = 3

[scan]
probe_us = 45.0
probe_doppler_us = 25.0
detuning_span_2pi_khz = 50.0
points = 21
time_max_us = 60.0
time_points = 41

[modchain]
carrier_wavelength_nm = 559.1
modulation_index = 0.58
mod_frequency_ghz = 9.2
max_order = 5
single_pass_mhz = 450.0
beat_target_ghz = 1.789
"""


@dataclass(frozen=True)
class ScanDefaults:
    """Probe ranges used when the command line does not override them."""

    probe: float
    probe_doppler: float
    detuning_span: float
    points: int
    time_max: float
    time_points: int


@dataclass(frozen=True)
class ModchainSettings:
    modulation: ModulationState
    max_order: int
    chain: AomChain
    beat_target: float


@dataclass(frozen=True)
class LoadedConfig:
    experiment: ExperimentConfig
    scan: ScanDefaults
    modchain: ModchainSettings
    text: str

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()


class _Reader:
    """configparser access with section/key-qualified error messages."""

    def __init__(self, parser: configparser.ConfigParser):
        self._parser = parser

    def _get(self, section: str, key: str, conv, default=None):
        if not self._parser.has_option(section, key):
            if default is not None:
                return default
            raise ConfigError(f"[{section}] {key}: missing required value")
        raw = self._parser.get(section, key)
        try:
            return conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} "
                              f"({exc})") from exc

    def number(self, section, key, default=None):
        return self._get(section, key, float, default)

    def integer(self, section, key, default=None):
        return self._get(section, key, int, default)

    def word(self, section, key, default=None):
        return self._get(section, key, str, default)

    def optional_number(self, section, key):
        if not self._parser.has_option(section, key):
            return None
        return self.number(section, key)


def load_config_text(text: str) -> LoadedConfig:
    """Parse a configuration string into the typed config bundles."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    reader = _Reader(parser)
    try:
        atom = AtomConfig(
            mass=reader.number("atom", "mass_amu"),
            transition_wavelength=reader.number(
                "atom", "transition_wavelength_nm") * 1e-9,
            linewidth_gamma=2 * math.pi * reader.number(
                "atom", "linewidth_2pi_mhz") * 1e6,
            hyperfine_splitting=reader.number(
                "atom", "hyperfine_splitting_ghz") * 1e9,
        )
        trap = TrapConfig(
            omega_ax=2 * math.pi * reader.number("trap", "omega_ax_2pi_mhz") * 1e6,
            omega_rad=2 * math.pi * reader.number("trap", "omega_rad_2pi_mhz") * 1e6,
            raman_geometry_factor=reader.number("trap", "raman_geometry_factor",
                                                math.sqrt(2.0)),
            eta_override=reader.optional_number("trap", "eta_override"),
        )
        dissipation = DissipationConfig(
            repump_down_branch=reader.number("dissipation", "repump_down_branch"),
            repump_cycles=reader.integer("dissipation", "repump_cycles"),
            recoil_heating_per_photon=reader.number(
                "dissipation", "recoil_heating_per_photon", 0.0),
            leak_up_rate=reader.number("dissipation", "leak_up_per_s", 0.0),
            leak_down_rate=reader.number("dissipation", "leak_down_per_s", 0.0),
        )
        detection = DetectionModel(
            mean_bright=reader.number("detection", "mean_bright"),
            mean_dark=reader.number("detection", "mean_dark"),
            exposure=reader.number("detection", "exposure_us") * 1e-6,
            depump_rate=reader.number("detection", "depump_rate_per_s", 0.0),
            k_max=reader.integer("detection", "k_max", 30),
        )
        schedule = SbcSchedule(
            second_order=SbcScheduleSet(
                reader.integer("sbc", "second_order_count"),
                reader.integer("sbc", "second_order_start")),
            first_order=SbcScheduleSet(
                reader.integer("sbc", "first_order_count"),
                reader.integer("sbc", "first_order_start")),
            repeats=reader.integer("sbc", "repeats"),
        )
        experiment = ExperimentConfig(
            atom=atom,
            trap=trap,
            dissipation=dissipation,
            detection=detection,
            raman_omega0=2 * math.pi * reader.number(
                "drive", "raman_omega0_2pi_khz") * 1e3,
            rf_omega=2 * math.pi * reader.number("drive", "rf_omega_2pi_khz") * 1e3,
            shots_per_point=reader.integer("run", "shots_per_point"),
            seed=reader.integer("run", "seed"),
            n_max=reader.integer("fock", "n_max", 256),
            truncation_tol=reader.number("fock", "truncation_tol", 1e-6),
            sbc=schedule,
            prepare=reader.word("run", "prepare", "sbc"),
            repump_cycle_time=reader.number("dissipation", "repump_cycle_us",
                                            5.0) * 1e-6,
        )
        scan = ScanDefaults(
            probe=reader.number("scan", "probe_us", 45.0) * 1e-6,
            probe_doppler=reader.number("scan", "probe_doppler_us", 25.0) * 1e-6,
            detuning_span=2 * math.pi * reader.number(
                "scan", "detuning_span_2pi_khz", 50.0) * 1e3,
            points=reader.integer("scan", "points", 21),
            time_max=reader.number("scan", "time_max_us", 60.0) * 1e-6,
            time_points=reader.integer("scan", "time_points", 41),
        )
        modchain = ModchainSettings(
            modulation=ModulationState(
                carrier_frequency=C_LIGHT / (reader.number(
                    "modchain", "carrier_wavelength_nm") * 1e-9),
                beta=reader.number("modchain", "modulation_index"),
                mod_frequency=reader.number("modchain", "mod_frequency_ghz") * 1e9,
            ),
            max_order=reader.integer("modchain", "max_order", 5),
            chain=AomChain((
                AomStage(reader.number("modchain", "single_pass_mhz") * 1e6,
                         passes=1, sign=1),
                AomStage(reader.number("modchain", "single_pass_mhz") * 1e6,
                         passes=1, sign=1),
                AomStage(None, passes=4, sign=1),
            )),
            beat_target=reader.number("modchain", "beat_target_ghz") * 1e9,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid configuration value: {exc}") from exc
    return LoadedConfig(experiment, scan, modchain, text)


def load_config_file(path) -> LoadedConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return load_config_text(text)


def default_config() -> LoadedConfig:
    return load_config_text(DEFAULT_CONFIG_TEXT)
