"""Pulse-level evolution of the joint internal x motional state.

The state tracks populations (no inter-pulse coherence) over three internal
levels -- |down> = |3,3>, |up> = |2,2> and the auxiliary |3,2> trap state
populated by imperfect repumping -- times a truncated Fock ladder.  Coherent
pulses are applied with the closed-form two-level transfer probability

    p = Omega^2 / (Omega^2 + delta^2) * sin^2(sqrt(Omega^2 + delta^2) t / 2)

evaluated per Fock pair, which is exact for the pi-pulse/repump protocols
simulated here.  Dissipative steps (repump cycles, Doppler reset, Raman
leakage) are classical population transfers.
"""

from dataclasses import dataclass
from enum import Enum, IntEnum
import warnings

import numpy as np

from .motional import (AtomConfig, TrapConfig, MotionalDistribution,
                       doppler_limit_nbar, rabi_frequency_ladder,
                       thermal_distribution)


class Level(IntEnum):
    DOWN = 0
    UP = 1
    AUX = 2


class PulseKind(str, Enum):
    CARRIER = "carrier"
    SIDEBAND = "sideband"
    RF = "rf"
    RF_RECOVER = "rf_recover"
    REPUMP = "repump"
    DOPPLER_COOL = "doppler_cool"
    RAMAN_IDLE = "raman_idle"


@dataclass(frozen=True)
class PulseSpec:
    """One step of a sequence: a coherent drive or a dissipative block.

    order is the sideband order (+-1, +-2) and is only meaningful for
    SIDEBAND pulses.  omega0 is the bare (carrier, n-independent) Rabi
    frequency in rad/s; detuning is measured from the addressed resonance.
    """

    kind: PulseKind
    duration: float
    omega0: float = 0.0
    detuning: float = 0.0
    order: int = 0

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("pulse duration must be non-negative")
        if self.kind is PulseKind.SIDEBAND and self.order not in (-2, -1, 1, 2):
            raise ValueError("sideband order must be one of -2, -1, +1, +2")


@dataclass(frozen=True)
class DissipationConfig:
    """Repump branching and off-resonant Raman leakage rates.

    repump_down_branch is the probability per optical pumping cycle that
    population in |up> ends in |down> (the rest lands in the auxiliary
    state and is recovered by an RF pi-pulse).  leak_up_rate/leak_down_rate
    are the first-order excitation gain/loss rates (1/s) while Raman light
    is on.  recoil_heating_per_photon adds that many quanta on average per
    scattering event (0 = Lamb-Dicke idealization).
    """

    repump_down_branch: float = 0.5
    repump_cycles: int = 4
    recoil_heating_per_photon: float = 0.0
    leak_up_rate: float = 0.0
    leak_down_rate: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.repump_down_branch <= 1.0:
            raise ValueError("repump_down_branch must be in [0, 1]")
        if self.repump_cycles < 1:
            raise ValueError("repump_cycles must be at least 1")
        if self.recoil_heating_per_photon < 0 or self.recoil_heating_per_photon > 1:
            raise ValueError("recoil_heating_per_photon must be in [0, 1]")
        if self.leak_up_rate < 0 or self.leak_down_rate < 0:
            raise ValueError("leakage rates must be non-negative")


class IonState:
    """Population over (internal level, Fock index); a value type.

    pop has shape (3, n_max+1) and sums to 1.  Operations never mutate
    their input; they return fresh states.
    """

    __slots__ = ("pop",)

    def __init__(self, pop: np.ndarray):
        pop = np.asarray(pop, dtype=float)
        if pop.ndim != 2 or pop.shape[0] != 3:
            raise ValueError("pop must have shape (3, n_max+1)")
        self.pop = pop

    @classmethod
    def ground(cls, n_max: int) -> "IonState":
        pop = np.zeros((3, n_max + 1))
        pop[Level.DOWN, 0] = 1.0
        return cls(pop)

    @classmethod
    def from_motional(cls, dist: MotionalDistribution,
                      level: Level = Level.DOWN) -> "IonState":
        pop = np.zeros((3, dist.n_max + 1))
        pop[level] = dist.populations
        return cls(pop)

    @property
    def n_max(self) -> int:
        return self.pop.shape[1] - 1

    def total(self) -> float:
        return float(self.pop.sum())

    def level_population(self, level: Level) -> float:
        return float(self.pop[level].sum())

    def motional_marginal(self) -> np.ndarray:
        return self.pop.sum(axis=0)

    @property
    def nbar(self) -> float:
        return float(np.arange(self.n_max + 1) @ self.motional_marginal())

    def copy(self) -> "IonState":
        return IonState(self.pop.copy())

    def validate(self, tol: float = 1e-9):
        if np.any(self.pop < -1e-12) or np.any(self.pop > 1 + 1e-12):
            raise ValueError("state populations must lie in [0, 1]")
        if abs(self.total() - 1.0) > tol:
            raise ValueError(f"state is not normalized: total = {self.total()!r}")


def _transfer_probability(omega, detuning: float, duration: float):
    """Two-level transfer probability; works on scalars and arrays."""
    w2 = np.square(omega) + detuning * detuning
    w = np.sqrt(w2)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(w2 > 0.0,
                     np.square(omega) / np.where(w2 > 0.0, w2, 1.0)
                     * np.sin(w * duration / 2.0) ** 2,
                     0.0)
    return p


def apply_coherent_pulse(state: IonState, pulse: PulseSpec,
                         eta: float) -> IonState:
    """Apply a carrier, sideband or RF pulse to the down/up manifold.

    Each Fock pair (down, n) <-> (up, n+s) mixes with its own detuned Rabi
    transfer probability; the auxiliary level is untouched.  Pairs whose
    upper index would fall beyond the Fock cutoff are left uncoupled.
    """
    if pulse.kind not in (PulseKind.CARRIER, PulseKind.SIDEBAND, PulseKind.RF):
        raise ValueError(f"not a coherent down/up pulse: {pulse.kind}")
    state.validate()
    n_max = state.n_max
    if pulse.kind is PulseKind.RF:
        p = _transfer_probability(pulse.omega0, pulse.detuning, pulse.duration)
        return _mix_levels(state, Level.DOWN, Level.UP, float(p))
    s = pulse.order if pulse.kind is PulseKind.SIDEBAND else 0
    omegas = rabi_frequency_ladder(s, eta, pulse.omega0, n_max)
    p = _transfer_probability(omegas, pulse.detuning, pulse.duration)
    pop = state.pop.copy()
    if s >= 0:
        down = pop[Level.DOWN, : n_max + 1 - s]
        up = pop[Level.UP, s:]
        pn = p[: n_max + 1 - s]
    else:
        a = -s
        down = pop[Level.DOWN, a:]
        up = pop[Level.UP, : n_max + 1 - a]
        pn = p[a:]
    delta = pn * (up - down)
    down += delta
    up -= delta
    return IonState(pop)


def _mix_levels(state: IonState, level_a: Level, level_b: Level,
                p: float) -> IonState:
    pop = state.pop.copy()
    a = pop[level_a].copy()
    b = pop[level_b].copy()
    pop[level_a] = (1 - p) * a + p * b
    pop[level_b] = (1 - p) * b + p * a
    return IonState(pop)


def apply_rf_pulse(state: IonState, pulse: PulseSpec) -> IonState:
    """Motion-independent RF transfer: down<->up, or aux<->up for recovery."""
    if pulse.kind not in (PulseKind.RF, PulseKind.RF_RECOVER):
        raise ValueError(f"not an RF pulse: {pulse.kind}")
    state.validate()
    p = float(_transfer_probability(pulse.omega0, pulse.detuning, pulse.duration))
    if pulse.kind is PulseKind.RF:
        return _mix_levels(state, Level.DOWN, Level.UP, p)
    return _mix_levels(state, Level.AUX, Level.UP, p)


def _recoil_kernel(row: np.ndarray, recoil: float) -> np.ndarray:
    """Shift a scattered packet up by one quantum with probability recoil.

    Population that would leave the truncated ladder stays in the top bin,
    so the total is conserved.
    """
    if recoil <= 0.0:
        return row
    out = (1.0 - recoil) * row
    out[1:] += recoil * row[:-1]
    out[-1] += recoil * row[-1]
    return out


def apply_repump(state: IonState, cfg: DissipationConfig) -> IonState:
    """Reinitialize |up> population into |down> by repeated pump cycles.

    Each cycle optically pumps |up> into |down> (branch fraction) and into
    the auxiliary state (the rest), then an RF recovery pi-pulse swaps the
    auxiliary population back into |up> for the next round.  One extra pump
    after the last cycle mops up the recovered remainder.  Scattered packets
    pass through the recoil kernel; with recoil 0 the motional distribution
    is untouched.
    """
    state.validate()
    branch = cfg.repump_down_branch
    recoil = cfg.recoil_heating_per_photon
    pop = state.pop.copy()

    def pump(p):
        up = p[Level.UP].copy()
        p[Level.UP] = 0.0
        p[Level.DOWN] += _recoil_kernel(branch * up, recoil)
        p[Level.AUX] += _recoil_kernel((1.0 - branch) * up, recoil)

    for _ in range(cfg.repump_cycles):
        pump(pop)
        # RF recovery pi-pulse: full aux <-> up swap
        pop[[Level.UP, Level.AUX]] = pop[[Level.AUX, Level.UP]]
    pump(pop)
    return IonState(pop)


def apply_doppler_cool(state: IonState, atom: AtomConfig,
                       trap: TrapConfig) -> IonState:
    """Reset to the Doppler limit: |down> times a thermal axial distribution."""
    _, nbar = doppler_limit_nbar(atom, trap.omega_ax)
    dist = thermal_distribution(nbar, state.n_max)
    return IonState.from_motional(dist, Level.DOWN)


def apply_leakage(state: IonState, duration: float,
                  cfg: DissipationConfig) -> IonState:
    """First-order off-resonant transfer while Raman light is on.

    down -> up grows at leak_up_rate * duration and up -> down at
    leak_down_rate * duration, each clamped to 1 (a warning is emitted when
    clamping, since the linear model has broken down by then).  Motional
    populations ride along unchanged.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    state.validate()
    p_up = cfg.leak_up_rate * duration
    p_down = cfg.leak_down_rate * duration
    if p_up > 1.0 or p_down > 1.0:
        warnings.warn("leakage probability clamped to 1; first-order model "
                      "is not valid for such long exposures", stacklevel=2)
        p_up = min(p_up, 1.0)
        p_down = min(p_down, 1.0)
    pop = state.pop.copy()
    down = pop[Level.DOWN].copy()
    up = pop[Level.UP].copy()
    pop[Level.DOWN] = (1 - p_up) * down + p_down * up
    pop[Level.UP] = (1 - p_down) * up + p_up * down
    return IonState(pop)
