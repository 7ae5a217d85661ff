"""Laser modulation-chain bookkeeping: EOM sidebands, SHG, AOM shifts.

Phase modulation at index beta puts a fraction J_k(beta)^2 of the optical
power into the k-th sideband.  Second-harmonic generation doubles the
carrier frequency and the modulation index while leaving the
carrier-sideband separation untouched, which is what lets one laser serve
both a resonant (sidebands on) and a far-detuned (sidebands off)
configuration.  AOM chains are pure frequency arithmetic: each stage adds
sign * passes * drive_frequency.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

# first zero of J0; the carrier/sideband ratio is invertible below it
_J0_FIRST_ZERO = 2.404825557695773


def bessel_j(order: int, x: float) -> float:
    """Bessel function J_order(x) by the ascending power series.

    Adequate over the modulation-index range used here (|x| <= ~10); each
    term is generated from the previous one, and the series is summed until
    it stops changing at double precision.
    """
    if order < 0:
        return (-1.0) ** (-order) * bessel_j(-order, x)
    half = 0.5 * x
    term = 1.0
    for k in range(1, order + 1):
        term *= half / k
    total = term
    m = 0
    while True:
        m += 1
        term *= -(half * half) / (m * (m + order))
        new_total = total + term
        if new_total == total or m > 200:
            return new_total
        total = new_total


@dataclass(frozen=True)
class ModulationState:
    """Optical carrier with phase-modulation sidebands."""

    carrier_frequency: float
    beta: float
    mod_frequency: float

    def __post_init__(self):
        if self.carrier_frequency <= 0 or self.mod_frequency <= 0:
            raise ValueError("frequencies must be positive")
        if self.beta < 0:
            raise ValueError("modulation index must be non-negative")


@dataclass(frozen=True)
class SidebandSpectrum:
    """Power fractions per sideband order with the truncation remainder."""

    orders: np.ndarray
    fractions: np.ndarray
    remainder: float

    def fraction(self, order: int) -> float:
        idx = int(order - self.orders[0])
        if idx < 0 or idx >= self.orders.size:
            raise IndexError(f"order {order} outside the computed range")
        return float(self.fractions[idx])


def sideband_powers(beta: float, max_order: int) -> SidebandSpectrum:
    """Power fraction J_k(beta)^2 for orders k = -max_order..+max_order.

    The untruncated fractions sum to exactly 1; the remainder field reports
    how much sits beyond the requested orders.
    """
    if beta < 0:
        raise ValueError("modulation index must be non-negative")
    if max_order < 0:
        raise ValueError("max_order must be non-negative")
    orders = np.arange(-max_order, max_order + 1)
    fractions = np.array([bessel_j(int(k), beta) ** 2 for k in orders])
    remainder = max(0.0, 1.0 - float(fractions.sum()))
    return SidebandSpectrum(orders, fractions, remainder)


def shg_transform(state: ModulationState) -> ModulationState:
    """Second-harmonic generation: doubles carrier and modulation index.

    The modulation frequency (carrier-sideband separation) is preserved.
    """
    return ModulationState(2.0 * state.carrier_frequency, 2.0 * state.beta,
                           state.mod_frequency)


def carrier_sideband_ratio(beta: float) -> float:
    """Carrier to single-sideband power ratio J0(beta)^2 / J1(beta)^2."""
    j1 = bessel_j(1, beta)
    if j1 == 0.0:
        raise ValueError("single-sideband power vanishes at beta = 0")
    return (bessel_j(0, beta) / j1) ** 2


def beta_from_ratio(ratio: float) -> float:
    """Invert the carrier/single-sideband power ratio for beta.

    The ratio decreases monotonically from infinity at beta = 0 to zero at
    the first J0 root, so a ratio > 1 brackets a unique beta which a
    bracketing root-finder pins to 1e-9.
    """
    if not ratio > 1.0:
        raise ValueError("carrier/sideband ratio must exceed 1 to invert")
    lo, hi = 1e-9, _J0_FIRST_ZERO - 1e-9
    if carrier_sideband_ratio(lo) < ratio:
        return lo  # ratio astronomically large: beta indistinguishable from 0
    return brentq(lambda b: carrier_sideband_ratio(b) - ratio, lo, hi,
                  xtol=1e-12, rtol=8.9e-16)


@dataclass(frozen=True)
class AomStage:
    """One AOM in a shift chain; frequency None marks the stage to solve."""

    frequency: float | None
    passes: int = 1
    sign: int = 1

    def __post_init__(self):
        if self.passes < 1:
            raise ValueError("passes must be at least 1")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if self.frequency is not None and self.frequency <= 0:
            raise ValueError("stage frequency must be positive")


@dataclass(frozen=True)
class AomChain:
    stages: tuple[AomStage, ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))


def net_shift(chain: AomChain) -> float:
    """Total frequency shift sum(sign * passes * frequency) of a chain."""
    total = 0.0
    for stage in chain.stages:
        if stage.frequency is None:
            raise ValueError("chain has an unsolved stage; use solve_chain")
        total += stage.sign * stage.passes * stage.frequency
    return total


def solve_chain(chain: AomChain, target: float) -> float:
    """Drive frequency of the single unknown stage hitting the target shift."""
    unknowns = [s for s in chain.stages if s.frequency is None]
    if len(unknowns) != 1:
        raise ValueError(f"solve_chain needs exactly one unknown stage, "
                         f"found {len(unknowns)}")
    known = sum(s.sign * s.passes * s.frequency for s in chain.stages
                if s.frequency is not None)
    stage = unknowns[0]
    freq = (target - known) / (stage.sign * stage.passes)
    if freq <= 0:
        raise ValueError("no positive drive frequency solves the chain "
                         f"(got {freq!r} Hz)")
    return freq


def resolve_chain(chain: AomChain, frequency: float) -> AomChain:
    """Copy of the chain with its unknown stage pinned to the given drive."""
    stages = []
    for stage in chain.stages:
        if stage.frequency is None:
            stages.append(AomStage(frequency, stage.passes, stage.sign))
        else:
            stages.append(stage)
    return AomChain(tuple(stages))


def raman_difference_chain(single_pass: float,
                           double_pass: float | None = None) -> AomChain:
    """Difference chain between two Raman beams sharing a double-pass pair.

    Each beam has its own single-pass AOM (one shifted up, one down: the
    difference picks up both) and both counter-propagate through the same
    double-pass stage with opposite signs, so that stage enters the
    difference four times.  Leave double_pass as None to solve it for a
    target splitting.
    """
    return AomChain((
        AomStage(single_pass, passes=1, sign=1),
        AomStage(single_pass, passes=1, sign=1),
        AomStage(double_pass, passes=4, sign=1),
    ))


def spectrum_table(state: ModulationState, max_order: int) -> list[dict]:
    """Rows (order, absolute frequency, offset, power fraction) for a state."""
    spec = sideband_powers(state.beta, max_order)
    rows = []
    for order, fraction in zip(spec.orders, spec.fractions):
        offset = float(order) * state.mod_frequency
        rows.append({
            "order": int(order),
            "frequency": state.carrier_frequency + offset,
            "offset": offset,
            "power_fraction": float(fraction),
        })
    return rows
