"""Experiment recipes: the sideband-cooling schedule and scan engines.

A cooling schedule is a list of red-sideband pi-pulses with durations tuned
to a descending ladder of target Fock states (second order first, to reach
population parked above the first-order coupling's zero crossing), each
followed by a repump block.  Scans prepare the ion once (the evolution is
deterministic at the population level), probe it per point and push the
result through the detection simulator, so shot noise enters only through
the photon statistics.
"""

from dataclasses import dataclass, field, replace
import hashlib
import math

import numpy as np

from .analysis import ScanData
from .detection import (DetectionModel, fit_population,
                        reference_distributions, simulate_detection)
from .dynamics import (DissipationConfig, IonState, Level, PulseKind,
                       PulseSpec, apply_coherent_pulse,
                       apply_doppler_cool, apply_leakage, apply_repump,
                       apply_rf_pulse)
from .motional import (AtomConfig, TrapConfig, DEFAULT_N_MAX,
                       DEFAULT_TRUNCATION_TOL, MG25, lamb_dicke,
                       rabi_frequency)


class ScheduleError(ValueError):
    """A cooling schedule cannot be realized as stated."""


@dataclass(frozen=True)
class SbcScheduleSet:
    """One block of same-order red-sideband pulses."""

    count: int
    n_start: int


@dataclass(frozen=True)
class SbcSchedule:
    """Full cooling recipe: 2nd-order set, 1st-order set, repetitions."""

    second_order: SbcScheduleSet = SbcScheduleSet(25, 40)
    first_order: SbcScheduleSet = SbcScheduleSet(15, 15)
    repeats: int = 3


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to run one simulated experiment."""

    atom: AtomConfig = MG25
    trap: TrapConfig = TrapConfig(omega_ax=2 * math.pi * 1.9e6,
                                  omega_rad=2 * math.pi * 2.3e6,
                                  eta_override=0.28)
    dissipation: DissipationConfig = DissipationConfig()
    detection: DetectionModel = DetectionModel()
    raman_omega0: float = 2 * math.pi * 40.9e3
    rf_omega: float = 2 * math.pi * 63.74e3
    shots_per_point: int = 300
    seed: int = 0
    n_max: int = DEFAULT_N_MAX
    truncation_tol: float = DEFAULT_TRUNCATION_TOL
    sbc: SbcSchedule = SbcSchedule()
    prepare: str = "sbc"  # state preparation for scans: "doppler" or "sbc"
    repump_cycle_time: float = 5e-6

    def __post_init__(self):
        if self.shots_per_point < 1:
            raise ValueError("shots_per_point must be at least 1")
        if self.prepare not in ("doppler", "sbc"):
            raise ValueError('prepare must be "doppler" or "sbc"')

    @property
    def eta(self) -> float:
        return lamb_dicke(self.atom, self.trap)


@dataclass(frozen=True)
class Sequence:
    steps: tuple[PulseSpec, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ScheduleError("sequence must contain at least one step")

    @property
    def total_duration(self) -> float:
        return sum(step.duration for step in self.steps)


# minimum coupling (relative to omega0) accepted when converting a target
# level to a pi-time; below this the pulse duration diverges
MIN_RELATIVE_COUPLING = 1e-3


def build_sbc_sequence(cfg: ExperimentConfig,
                       schedule: SbcSchedule | None = None) -> Sequence:
    """Expand a cooling schedule into pi-pulses with repump blocks.

    Within each set, pulse k addresses target level n_start - k (one target
    per pulse, stepping down by one), with duration pi/|Omega(n_k, order)|.
    The default sets therefore tile the ladder from 40 down to 16 with the
    second-order sideband and 15 down to 1 with the first-order one.  A
    target whose coupling sits at a zero crossing is rejected by name.
    """
    schedule = schedule if schedule is not None else cfg.sbc
    eta = cfg.eta
    steps: list[PulseSpec] = []
    repump = PulseSpec(PulseKind.REPUMP,
                       duration=cfg.dissipation.repump_cycles
                       * cfg.repump_cycle_time)
    sets = ((-2, schedule.second_order), (-1, schedule.first_order))
    for order, block in sets:
        if block.count < 1:
            raise ScheduleError(f"order {order} set has no pulses")
        lowest = block.n_start - (block.count - 1)
        if lowest < -order:  # -order = |order| for red sidebands
            raise ScheduleError(
                f"order {order} set descends to n = {lowest}, below the "
                f"lowest drivable level {-order}")
    if schedule.repeats < 1:
        raise ScheduleError("schedule must repeat at least once")
    for _ in range(schedule.repeats):
        for order, block in sets:
            for k in range(block.count):
                n_target = block.n_start - k
                omega = rabi_frequency(n_target, order, eta, cfg.raman_omega0)
                if abs(omega) < MIN_RELATIVE_COUPLING * cfg.raman_omega0:
                    raise ScheduleError(
                        f"target n = {n_target} of the order {order} sideband "
                        f"sits at a coupling zero crossing "
                        f"(|Omega|/Omega0 = {abs(omega) / cfg.raman_omega0:.2e})")
                steps.append(PulseSpec(PulseKind.SIDEBAND,
                                       duration=math.pi / abs(omega),
                                       omega0=cfg.raman_omega0, order=order))
                steps.append(repump)
    return Sequence(tuple(steps), metadata={
        "label": "sideband_cooling",
        "seed": cfg.seed,
        "config_hash": config_fingerprint(cfg),
    })


def apply_step(state: IonState, step: PulseSpec,
               cfg: ExperimentConfig) -> IonState:
    """Apply one sequence step, including leakage for Raman-lit intervals."""
    if step.kind in (PulseKind.CARRIER, PulseKind.SIDEBAND):
        state = apply_coherent_pulse(state, step, cfg.eta)
        return apply_leakage(state, step.duration, cfg.dissipation)
    if step.kind is PulseKind.RAMAN_IDLE:
        return apply_leakage(state, step.duration, cfg.dissipation)
    if step.kind in (PulseKind.RF, PulseKind.RF_RECOVER):
        return apply_rf_pulse(state, step)
    if step.kind is PulseKind.REPUMP:
        return apply_repump(state, cfg.dissipation)
    if step.kind is PulseKind.DOPPLER_COOL:
        return apply_doppler_cool(state, cfg.atom, cfg.trap)
    raise ValueError(f"unhandled step kind {step.kind}")


def run_sequence(state: IonState, seq: Sequence,
                 cfg: ExperimentConfig) -> IonState:
    """Fold a sequence over a state; deterministic population evolution."""
    for step in seq.steps:
        state = apply_step(state, step, cfg)
    return state


def iterate_sequence(state: IonState, seq: Sequence, cfg: ExperimentConfig):
    """Yield (step, state_after_step); for cooling traces and debugging."""
    for step in seq.steps:
        state = apply_step(state, step, cfg)
        yield step, state


def prepare_state(cfg: ExperimentConfig) -> IonState:
    """Doppler-reset the ion; optionally run the cooling schedule on top."""
    state = apply_doppler_cool(IonState.ground(cfg.n_max), cfg.atom, cfg.trap)
    if cfg.prepare == "sbc":
        state = run_sequence(state, build_sbc_sequence(cfg), cfg)
    return state


def _measure(state: IonState, cfg: ExperimentConfig, shots: int | None,
             rng: np.random.Generator | None,
             references=None) -> tuple[float, float | None]:
    """Excitation probability of a state, optionally through detection.

    With shots=None the exact |up> population is returned (no uncertainty).
    Otherwise the bright (= not excited) probability is sampled through the
    photon-count model and refit, giving (y, sigma_y).
    """
    p_up = state.level_population(Level.UP)
    if shots is None:
        return p_up, None
    psi_down, psi_up = references if references is not None \
        else reference_distributions(cfg.detection)
    bright = min(max(1.0 - p_up, 0.0), 1.0)
    hist = simulate_detection(bright, cfg.detection, shots, rng)
    fit = fit_population(hist, psi_down, psi_up)
    return 1.0 - fit.a, max(fit.sigma_a, 1e-4)


def probe_frequency_scan(state: IonState, cfg: ExperimentConfig,
                         pulse_template: PulseSpec, detunings,
                         shots: int | None = None, seed: int = 0) -> ScanData:
    """Sweep the probe detuning over a prepared state."""
    return _probe_scan(state, cfg, pulse_template, np.asarray(detunings, float),
                       "detuning", shots, seed)


def probe_time_scan(state: IonState, cfg: ExperimentConfig,
                    pulse_template: PulseSpec, durations,
                    shots: int | None = None, seed: int = 0) -> ScanData:
    """Sweep the probe duration over a prepared state."""
    return _probe_scan(state, cfg, pulse_template, np.asarray(durations, float),
                       "duration", shots, seed)


def _probe_scan(state, cfg, template, values, attr, shots, seed):
    if values.size == 0:
        raise ValueError("scan range is empty")
    if not np.all(np.isfinite(values)):
        raise ValueError("scan values must be finite")
    # one generator stream per point, split off the master seed, keeps the
    # points independent and the whole scan reproducible
    streams = np.random.SeedSequence(seed).spawn(values.size)
    references = reference_distributions(cfg.detection) if shots else None
    ys = np.empty(values.size)
    sigmas = np.empty(values.size)
    for i, value in enumerate(values):
        probe = replace(template, **{attr: float(value)})
        if probe.kind in (PulseKind.RF, PulseKind.RF_RECOVER):
            probed = apply_rf_pulse(state, probe)
        else:
            probed = apply_coherent_pulse(state, probe, cfg.eta)
            probed = apply_leakage(probed, probe.duration, cfg.dissipation)
        rng = np.random.default_rng(streams[i]) if shots else None
        y, sigma = _measure(probed, cfg, shots, rng, references)
        ys[i] = y
        sigmas[i] = math.nan if sigma is None else sigma
    sigma_y = None if shots is None else sigmas
    return ScanData(values, ys, sigma_y)


def scan_frequency(cfg: ExperimentConfig, pulse_template: PulseSpec,
                   detunings, shots: int | None = None,
                   seed: int = 0) -> ScanData:
    """Prepare per cfg.prepare, then sweep the probe detuning."""
    return probe_frequency_scan(prepare_state(cfg), cfg, pulse_template,
                                detunings, shots, seed)


def scan_time(cfg: ExperimentConfig, pulse_template: PulseSpec, durations,
              shots: int | None = None, seed: int = 0) -> ScanData:
    """Prepare per cfg.prepare, then sweep the probe duration."""
    return probe_time_scan(prepare_state(cfg), cfg, pulse_template,
                           durations, shots, seed)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def sequence_to_text(seq: Sequence) -> str:
    """One step per line: kind, order, duration_us, detuning_Hz, omega0_Hz."""
    lines = ["# kind, order, duration_us, detuning_Hz, omega0_Hz"]
    for step in seq.steps:
        lines.append(", ".join([
            step.kind.value,
            str(step.order),
            repr(step.duration * 1e6),
            repr(step.detuning / (2 * math.pi)),
            repr(step.omega0 / (2 * math.pi)),
        ]))
    return "\n".join(lines) + "\n"


def sequence_from_text(text: str) -> Sequence:
    steps = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        kind, order, duration_us, detuning_hz, omega0_hz = \
            (part.strip() for part in line.split(","))
        steps.append(PulseSpec(
            kind=PulseKind(kind),
            duration=float(duration_us) * 1e-6,
            omega0=float(omega0_hz) * 2 * math.pi,
            detuning=float(detuning_hz) * 2 * math.pi,
            order=int(order),
        ))
    return Sequence(tuple(steps))


def config_fingerprint(cfg: ExperimentConfig) -> str:
    """Stable hash of every physics parameter of a configuration."""
    parts = [
        cfg.atom.mass, cfg.atom.transition_wavelength,
        cfg.atom.linewidth_gamma, cfg.atom.hyperfine_splitting,
        cfg.trap.omega_ax, cfg.trap.omega_rad, cfg.trap.raman_geometry_factor,
        cfg.trap.eta_override,
        cfg.dissipation.repump_down_branch, cfg.dissipation.repump_cycles,
        cfg.dissipation.recoil_heating_per_photon,
        cfg.dissipation.leak_up_rate, cfg.dissipation.leak_down_rate,
        cfg.detection.mean_bright, cfg.detection.mean_dark,
        cfg.detection.exposure, cfg.detection.depump_rate, cfg.detection.k_max,
        cfg.raman_omega0, cfg.rf_omega, cfg.shots_per_point, cfg.seed,
        cfg.n_max, cfg.truncation_tol,
        cfg.sbc.second_order.count, cfg.sbc.second_order.n_start,
        cfg.sbc.first_order.count, cfg.sbc.first_order.n_start,
        cfg.sbc.repeats, cfg.prepare, cfg.repump_cycle_time,
    ]
    blob = "|".join(repr(p) for p in parts).encode()
    return hashlib.sha256(blob).hexdigest()
