"""Electron-shelving photon statistics and the histogram state estimator.

A bright (|down>) ion scatters a Poisson-distributed number of photons per
exposure, a dark (|up>) ion mostly stray light, except that it can be
depumped mid-exposure and start scattering like a bright one.  The internal
state amplitude a is estimated by maximum likelihood against the two
calibrated reference distributions, psi = a psi_down + (1-a) psi_up.

All sampling flows through a numpy Generator handed in by the caller.  For
parallel Monte Carlo, derive one child stream per task from the master seed
(numpy SeedSequence.spawn); the scan engines follow that rule.
"""

from dataclasses import dataclass
import csv
import json
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

DEFAULT_TAIL_TOL = 1e-6


class ReferenceError(ValueError):
    """Reference distributions unusable (cutoff too small or degenerate)."""


class EstimationError(RuntimeError):
    """The mixture fit cannot be performed."""


@dataclass(frozen=True)
class DetectionModel:
    """Photon-count model for one detection exposure.

    mean_bright/mean_dark are the mean detected photon numbers at the
    calibration exposure; depump_rate (1/s) is the rate at which a dark ion
    converts to bright during detection; k_max truncates the histograms.
    """

    mean_bright: float = 5.8
    mean_dark: float = 0.2
    exposure: float = 12.5e-6
    depump_rate: float = 0.0
    k_max: int = 30

    def __post_init__(self):
        if self.mean_bright < 0 or self.mean_dark < 0:
            raise ValueError("mean photon numbers must be non-negative")
        if self.mean_bright <= self.mean_dark:
            raise ValueError("mean_bright must exceed mean_dark")
        if self.exposure <= 0:
            raise ValueError("exposure must be positive")
        if self.depump_rate < 0:
            raise ValueError("depump_rate must be non-negative")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")


@dataclass(frozen=True)
class Histogram:
    """Occurrences of k detected photons over a number of repetitions."""

    counts: np.ndarray
    shots: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if np.any(counts < 0):
            raise ValueError("histogram counts must be non-negative")
        if counts.sum() != self.shots:
            raise ValueError("histogram counts must sum to the number of shots")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "count"])
            for k, c in enumerate(self.counts):
                writer.writerow([k, int(c)])

    @classmethod
    def read_csv(cls, path) -> "Histogram":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        counts = np.zeros(len(rows), dtype=np.int64)
        for row in rows:
            counts[int(row["k"])] = int(row["count"])
        return cls(counts, int(counts.sum()))

    def to_json(self) -> str:
        return json.dumps({"counts": [int(c) for c in self.counts],
                           "shots": self.shots})

    @classmethod
    def from_json(cls, text: str) -> "Histogram":
        data = json.loads(text)
        return cls(np.asarray(data["counts"], dtype=np.int64), data["shots"])


def _poisson_pmf(mean: float, size: int) -> np.ndarray:
    out = np.empty(size)
    out[0] = math.exp(-mean)
    for k in range(1, size):
        out[k] = out[k - 1] * (mean / k)
    return out


def reference_distributions(model: DetectionModel,
                            exposure: float | None = None,
                            tail_tol: float = DEFAULT_TAIL_TOL,
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Calibrated photon-count distributions (psi_down, psi_up) over k=0..k_max.

    psi_down is Poisson at the bright mean.  psi_up is Poisson at the dark
    mean if depump_rate is 0; otherwise the dark ion converts to bright at an
    exponentially distributed time tau and the count distribution is the
    depump-time marginal, integrated by Gauss-Legendre quadrature.  Both are
    renormalized after truncation; a truncated tail above tail_tol raises.
    """
    t = model.exposure if exposure is None else exposure
    if t < 0:
        raise ValueError("exposure must be non-negative")
    size = model.k_max + 1
    bright_rate = model.mean_bright / model.exposure
    dark_rate = model.mean_dark / model.exposure
    psi_down = _poisson_pmf(bright_rate * t, size)
    if model.depump_rate == 0.0 or t == 0.0:
        psi_up = _poisson_pmf(dark_rate * t, size)
    else:
        rate = model.depump_rate
        psi_up = math.exp(-rate * t) * _poisson_pmf(dark_rate * t, size)
        # substitute u = exp(-rate*tau): the exponential weight becomes the
        # flat measure du, so the quadrature stays accurate at any rate
        u_lo = math.exp(-rate * t)
        nodes, weights = leggauss(64)
        us = 0.5 * ((1.0 - u_lo) * nodes + (1.0 + u_lo))
        weights = 0.5 * (1.0 - u_lo) * weights
        for u, w in zip(us, weights):
            tau = -math.log(u) / rate
            mean = dark_rate * tau + bright_rate * (t - tau)
            psi_up += w * _poisson_pmf(mean, size)
    for name, psi in (("psi_down", psi_down), ("psi_up", psi_up)):
        missing = 1.0 - psi.sum()
        if missing > tail_tol:
            raise ReferenceError(
                f"{name} leaves {missing:.3e} beyond k_max={model.k_max}; "
                "increase k_max")
    return psi_down / psi_down.sum(), psi_up / psi_up.sum()


def depump_rate_for_up_mean(model: DetectionModel, target_mean: float) -> float:
    """Depump rate that makes the dark-ion reference have the target mean.

    Useful for matching a calibrated dark-histogram mean that sits above the
    pure stray-light level.
    """
    if not model.mean_dark < target_mean < model.mean_bright:
        raise ValueError("target mean must lie between the dark and bright means")

    def mean_of(rate: float) -> float:
        psi = reference_distributions(
            DetectionModel(model.mean_bright, model.mean_dark, model.exposure,
                           rate, model.k_max))[1]
        return float(np.arange(psi.size) @ psi)

    hi = 50.0 / model.exposure  # essentially instant depumping
    return brentq(lambda r: mean_of(r) - target_mean, 1e-3, hi, xtol=1e-6)


def overlap(psi_down: np.ndarray, psi_up: np.ndarray) -> float:
    """Overlap sum(psi_down * psi_up); the single-shot confusion measure."""
    psi_down = np.asarray(psi_down, dtype=float)
    psi_up = np.asarray(psi_up, dtype=float)
    for psi in (psi_down, psi_up):
        if abs(psi.sum() - 1.0) > 1e-6:
            raise ValueError("reference distributions must be normalized")
    return float(psi_down @ psi_up)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def simulate_detection(bright_probability: float, model: DetectionModel,
                       shots: int, rng) -> Histogram:
    """Sample a photon-count histogram for a given bright-state probability.

    Each shot first draws bright/dark with probability bright_probability,
    then a photon count from the corresponding reference distribution.  rng
    may be a seed or a numpy Generator; a fixed seed reproduces the
    histogram bit for bit.
    """
    if not 0.0 <= bright_probability <= 1.0:
        raise ValueError("bright_probability must be in [0, 1]")
    if shots < 1:
        raise ValueError("shots must be at least 1")
    gen = _as_generator(rng)
    psi_down, psi_up = reference_distributions(model)
    ks = np.arange(model.k_max + 1)
    is_bright = gen.random(shots) < bright_probability
    samples = np.empty(shots, dtype=np.int64)
    n_bright = int(is_bright.sum())
    if n_bright:
        samples[is_bright] = gen.choice(ks, size=n_bright, p=psi_down)
    if shots - n_bright:
        samples[~is_bright] = gen.choice(ks, size=shots - n_bright, p=psi_up)
    counts = np.bincount(samples, minlength=model.k_max + 1)
    return Histogram(counts, shots)


@dataclass(frozen=True)
class PopulationFit:
    """Maximum-likelihood bright-state amplitude with its uncertainty."""

    a: float
    sigma_a: float
    at_boundary: bool
    log_likelihood: float


def fit_population(hist: Histogram, psi_down: np.ndarray,
                   psi_up: np.ndarray) -> PopulationFit:
    """Fit the two-component mixture a*psi_down + (1-a)*psi_up to a histogram.

    The likelihood is concave in a, so the estimate is the (unique) root of
    its derivative, constrained to [0, 1].  sigma_a comes from the observed
    Fisher information; at the boundary it is the one-sided uncertainty.
    Degenerate (identical) references cannot be told apart and raise.
    """
    counts = np.asarray(hist.counts, dtype=float)
    psi_down = np.asarray(psi_down, dtype=float)
    psi_up = np.asarray(psi_up, dtype=float)
    if counts.size != psi_down.size or counts.size != psi_up.size:
        raise ValueError("histogram and reference distributions differ in length")
    if np.allclose(psi_down, psi_up, atol=1e-12):
        raise EstimationError("reference distributions are degenerate "
                              "(overlap = 1); the amplitude is unidentifiable")
    observed = counts > 0
    if np.any(observed & (psi_down + psi_up <= 0.0)):
        raise EstimationError("histogram has counts where both references "
                              "assign zero probability")
    diff = psi_down - psi_up

    def derivative(a: float) -> float:
        mix = psi_up + a * diff
        good = observed & (mix > 0.0)
        if np.any(observed & ~good):
            # impossible bin at this a: derivative diverges toward the
            # feasible side
            return math.inf if a < 0.5 else -math.inf
        return float(np.sum(counts[good] * diff[good] / mix[good]))

    eps = 1e-12
    d0 = derivative(eps)
    d1 = derivative(1.0 - eps)
    if d0 <= 0.0:
        a_hat, boundary = 0.0, True
    elif d1 >= 0.0:
        a_hat, boundary = 1.0, True
    else:
        a_hat = brentq(derivative, eps, 1.0 - eps, xtol=1e-12)
        boundary = False
    mix = np.clip(psi_up + a_hat * diff, 1e-300, None)
    fisher = float(np.sum(counts * diff * diff / (mix * mix)))
    sigma = 1.0 / math.sqrt(fisher) if fisher > 0 else math.inf
    loglike = float(np.sum(counts[observed] * np.log(mix[observed])))
    return PopulationFit(a_hat, sigma, boundary, loglike)


def write_reference_csv(path, psi_down: np.ndarray, psi_up: np.ndarray):
    """Export the reference distributions for plotting histogram overlays."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "psi_down", "psi_up"])
        for k, (d, u) in enumerate(zip(psi_down, psi_up)):
            writer.writerow([k, repr(float(d)), repr(float(u))])
