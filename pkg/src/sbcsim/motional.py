"""Fock-space arithmetic for a single harmonically trapped ion.

Thermal occupation distributions, the Doppler-cooling limit, the Lamb-Dicke
parameter and the motional-state dependence of stimulated Raman Rabi
frequencies all live here.  The key closed form is the coupling strength
between |n> and |n+s| quanta,

    Omega_{n,n+s} = Omega0 * exp(-eta^2/2) * eta^|s| * sqrt(n_<! / n_>!)
                    * L_{n_<}^{|s|}(eta^2),

with n_< = min(n, n+s) and L the generalized Laguerre polynomial.  The sign
of the Laguerre factor is kept, so zero crossings of the coupling show up as
sign changes rather than being hidden by an absolute value.
"""

from dataclasses import dataclass
import math

import numpy as np

from .constants import HBAR, KB, AMU

DEFAULT_N_MAX = 256
DEFAULT_TRUNCATION_TOL = 1e-6


class TruncationError(ValueError):
    """The Fock-space cutoff is too small for the requested distribution."""


@dataclass(frozen=True)
class AtomConfig:
    """Internal-structure parameters of the ion species.

    mass is in atomic mass units, transition_wavelength in meters,
    linewidth_gamma in rad/s and hyperfine_splitting in Hz.
    """

    mass: float
    transition_wavelength: float
    linewidth_gamma: float
    hyperfine_splitting: float

    def __post_init__(self):
        for name in ("mass", "transition_wavelength", "linewidth_gamma",
                     "hyperfine_splitting"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"AtomConfig.{name} must be positive and finite")

    @property
    def mass_kg(self) -> float:
        return self.mass * AMU


@dataclass(frozen=True)
class TrapConfig:
    """Harmonic trap frequencies and the Raman-beam projection geometry.

    raman_geometry_factor is the projection of the effective Raman wave
    vector onto the axial mode in units of the single-photon wave number
    (sqrt(2) for two beams crossing at 45 degrees to the trap axis).  If
    eta_override is set, lamb_dicke() returns it verbatim instead of the
    computed value.
    """

    omega_ax: float
    omega_rad: float
    raman_geometry_factor: float = math.sqrt(2.0)
    eta_override: float | None = None

    def __post_init__(self):
        if not (self.omega_ax > 0 and self.omega_rad > 0):
            raise ValueError("trap frequencies must be positive")
        if not (0.0 < self.raman_geometry_factor <= 2.0):
            raise ValueError("raman_geometry_factor must be in (0, 2]")
        if self.eta_override is not None and self.eta_override <= 0:
            raise ValueError("eta_override must be positive when set")


# Mg-25 ion: 280 nm cycling transition, gamma = 2pi x 41.4 MHz,
# 1.789 GHz ground-state hyperfine splitting.
MG25 = AtomConfig(
    mass=24.985837,
    transition_wavelength=280e-9,
    linewidth_gamma=2 * math.pi * 41.4e6,
    hyperfine_splitting=1.789e9,
)


@dataclass(frozen=True)
class MotionalDistribution:
    """Probability per Fock index n = 0..n_max of one harmonic mode."""

    populations: np.ndarray
    truncation_tol: float = DEFAULT_TRUNCATION_TOL

    def __post_init__(self):
        pops = np.asarray(self.populations, dtype=float)
        object.__setattr__(self, "populations", pops)
        if pops.ndim != 1 or pops.size < 2:
            raise ValueError("populations must be a 1-d vector with n_max >= 1")
        if np.any(pops < -1e-12) or np.any(pops > 1 + 1e-12):
            raise ValueError("populations must lie in [0, 1]")
        if abs(pops.sum() - 1.0) > 1e-9:
            raise ValueError("populations must sum to 1 within 1e-9")
        if pops[-1] > self.truncation_tol:
            raise TruncationError(
                f"population {pops[-1]:.3e} in the top Fock bin exceeds the "
                f"truncation tolerance {self.truncation_tol:.1e}"
            )

    @property
    def n_max(self) -> int:
        return self.populations.size - 1

    @property
    def nbar(self) -> float:
        return float(np.arange(self.populations.size) @ self.populations)

    @property
    def ground_population(self) -> float:
        return float(self.populations[0])


def thermal_distribution(nbar: float, n_max: int = DEFAULT_N_MAX,
                         truncation_tol: float = DEFAULT_TRUNCATION_TOL,
                         ) -> MotionalDistribution:
    """Geometric (thermal) Fock distribution P(n) = nbar^n / (nbar+1)^(n+1).

    The analytic tail mass beyond n_max, (nbar/(nbar+1))^(n_max+1), must be
    below truncation_tol; otherwise a TruncationError is raised.  The kept
    probabilities are renormalized, which perturbs the mean by at most the
    tail mass times n_max.
    """
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    n = np.arange(n_max + 1)
    if nbar == 0:
        pops = np.zeros(n_max + 1)
        pops[0] = 1.0
        return MotionalDistribution(pops, truncation_tol)
    tail = math.exp((n_max + 1) * (math.log(nbar) - math.log(nbar + 1.0)))
    if tail > truncation_tol:
        raise TruncationError(
            f"thermal tail {tail:.3e} beyond n_max={n_max} exceeds the "
            f"tolerance {truncation_tol:.1e}; increase n_max"
        )
    # log form avoids overflow of nbar^n for large n
    pops = np.exp(n * np.log(nbar) - (n + 1) * np.log(nbar + 1.0))
    pops /= pops.sum()
    return MotionalDistribution(pops, truncation_tol)


def doppler_limit_nbar(atom: AtomConfig, omega: float) -> tuple[float, float]:
    """Doppler-cooling limit: temperature and mean occupation of one mode.

    T = hbar*gamma / (2 kB) at optimal detuning, and the Bose occupation
    nbar = 1 / (exp(hbar*omega / kB T) - 1) of a mode at frequency omega.
    Returns (T_kelvin, nbar).
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    temperature = HBAR * atom.linewidth_gamma / (2.0 * KB)
    x = HBAR * omega / (KB * temperature)
    # 1/expm1 overflows for very stiff modes; there nbar ~ exp(-x)
    nbar = 1.0 / math.expm1(x) if x < 700.0 else math.exp(-x)
    return temperature, nbar


def lamb_dicke(atom: AtomConfig, trap: TrapConfig) -> float:
    """Lamb-Dicke parameter of the axial mode for the Raman beam geometry.

    eta = geometry_factor * (2 pi / lambda) * sqrt(hbar / (2 m omega_ax)).
    A configured eta_override wins over the computed value.
    """
    if trap.eta_override is not None:
        return trap.eta_override
    k_eff = trap.raman_geometry_factor * 2.0 * math.pi / atom.transition_wavelength
    x0 = math.sqrt(HBAR / (2.0 * atom.mass_kg * trap.omega_ax))
    return k_eff * x0


def laguerre(n: int, alpha: int, x: float) -> float:
    """Generalized Laguerre polynomial L_n^alpha(x).

    Uses the stable three-term recurrence
        k L_k = (2k - 1 + alpha - x) L_{k-1} - (k - 1 + alpha) L_{k-2}.
    """
    if n < 0 or alpha < 0:
        raise ValueError("laguerre requires n >= 0 and alpha >= 0")
    if n == 0:
        return 1.0
    if n == 1:
        return 1.0 + alpha - x
    l_prev, l_cur = 1.0, 1.0 + alpha - x
    for k in range(2, n + 1):
        l_prev, l_cur = l_cur, ((2 * k - 1 + alpha - x) * l_cur
                                - (k - 1 + alpha) * l_prev) / k
    return l_cur


def _laguerre_range(n_count: int, alpha: int, x: float) -> np.ndarray:
    """[L_0^alpha(x), ..., L_{n_count-1}^alpha(x)] via the same recurrence."""
    out = np.empty(n_count)
    out[0] = 1.0
    if n_count > 1:
        out[1] = 1.0 + alpha - x
    for k in range(2, n_count):
        out[k] = ((2 * k - 1 + alpha - x) * out[k - 1]
                  - (k - 1 + alpha) * out[k - 2]) / k
    return out


def _check_order(s: int):
    if s not in (-2, -1, 0, 1, 2):
        raise ValueError("sideband order must be in {-2, -1, 0, +1, +2}")


def rabi_frequency(n: int, s: int, eta: float, omega0: float) -> float:
    """Signed Rabi frequency Omega_{n,n+s} of the |n> <-> |n+s> coupling.

    Returns exactly 0 when n+s < 0 (no lower state for a red sideband).
    The factorial ratio sqrt(n_<!/n_>!) is accumulated as a product of
    1/sqrt(k) factors so large n never overflows.  |result| <= omega0.
    """
    _check_order(s)
    if n < 0:
        raise ValueError("n must be non-negative")
    if n + s < 0:
        return 0.0
    x = eta * eta
    n_lo = min(n, n + s)
    n_hi = max(n, n + s)
    fac = 1.0
    for k in range(n_lo + 1, n_hi + 1):
        fac /= math.sqrt(k)
    return omega0 * math.exp(-x / 2.0) * eta ** abs(s) * fac * laguerre(n_lo, abs(s), x)


def rabi_frequency_ladder(s: int, eta: float, omega0: float,
                          n_max: int) -> np.ndarray:
    """Vector of Omega_{n,n+s} for n = 0..n_max (signed; 0 where n+s < 0).

    Linear-time version of rabi_frequency over a whole ladder, used by the
    pulse propagator and for coupling-strength plots.
    """
    _check_order(s)
    x = eta * eta
    a = abs(s)
    count = n_max + 1
    lag = _laguerre_range(count, a, x)
    n_lo = np.arange(count, dtype=float)
    fac = np.ones(count)
    for j in range(1, a + 1):
        fac /= np.sqrt(n_lo + j)
    base = omega0 * math.exp(-x / 2.0) * eta ** a * fac * lag
    if s >= 0:
        return base
    # red sideband: Omega_{n,n-a} equals Omega_{n-a,n}, shifted down by a
    out = np.zeros(count)
    out[a:] = base[: count - a]
    return out


def first_zero_crossing(s: int, eta: float, n_max: int) -> int | None:
    """Smallest n where Omega_{n,n+s} changes sign, or None below n_max.

    Populations above this index cannot be efficiently driven down through
    it, which is why cooling schedules switch to a higher sideband order
    for hot distributions.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    ladder = rabi_frequency_ladder(s, eta, 1.0, n_max)
    start = max(0, -s)
    prev = ladder[start]
    for n in range(start + 1, n_max + 1):
        cur = ladder[n]
        if prev * cur < 0:
            return n
        prev = cur
    return None
