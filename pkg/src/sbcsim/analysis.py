"""Thermometry and curve fitting for scan data.

The sideband-ratio thermometer nbar = Q/(1-Q) with Q = rho_R/rho_B, plus
weighted least-squares fitters for the standard lineshapes: Gaussian
resonances on frequency scans, (decaying) Rabi sinusoids on time scans and
the multi-frequency carrier flop of a thermal ion.  All fitters rescale the
x axis internally to order unity before running damped least squares, and
report parameters back in the input units, so results do not depend on
whether a scan comes in Hz or rad/s.
"""

from dataclasses import dataclass, field, asdict
import csv
import json
import math
import warnings

import numpy as np
from scipy.optimize import curve_fit

from .motional import rabi_frequency_ladder


class FitError(RuntimeError):
    """A least-squares fit failed to converge; the message says why."""


class ThermometryError(ValueError):
    """Sideband amplitudes incompatible with a thermal ratio (Q >= 1)."""


@dataclass(frozen=True)
class ScanData:
    """One measured scan: x (seconds or rad/s), excitation y, uncertainty."""

    x: np.ndarray
    y: np.ndarray
    sigma_y: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.sigma_y is not None:
            sig = np.asarray(self.sigma_y, dtype=float)
            object.__setattr__(self, "sigma_y", sig)
            if sig.shape != x.shape:
                raise ValueError("sigma_y length must match x")
            if np.any(sig < 0):
                raise ValueError("sigma_y must be non-negative")
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d vectors of equal length")
        if np.any(y < -1e-9) or np.any(y > 1 + 1e-9):
            raise ValueError("y must be an excitation probability in [0, 1]")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "sigma_y"])
            for i in range(self.x.size):
                sig = "" if self.sigma_y is None else repr(float(self.sigma_y[i]))
                writer.writerow([repr(float(self.x[i])), repr(float(self.y[i])), sig])

    @classmethod
    def read_csv(cls, path) -> "ScanData":
        xs, ys, sigs = [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                xs.append(float(row["x"]))
                ys.append(float(row["y"]))
                raw = row.get("sigma_y", "")
                sigs.append(float(raw) if raw not in ("", None) else math.nan)
        sigma = np.asarray(sigs)
        if np.all(np.isnan(sigma)):
            sigma = None
        return cls(np.asarray(xs), np.asarray(ys), sigma)


@dataclass(frozen=True)
class SidebandThermometry:
    """Mean occupation from the red/blue sideband amplitude ratio."""

    nbar: float
    sigma_nbar: float
    ground_population: float
    sigma_ground_population: float
    q: float
    sigma_q: float

    def to_dict(self) -> dict:
        return asdict(self)


def leakage_corrected_amplitude(amplitude: float, duration: float,
                                leak_up_rate: float,
                                leak_down_rate: float) -> float:
    """Undo the first-order off-resonant leakage bias of a fitted amplitude.

    Leakage during a probe of length t maps the excitation pointwise as
    y -> y (1 - (pu + pd)) + pu with pu/pd the up/down transfer
    probabilities; a baseline-fitted peak amplitude is therefore scaled by
    1 - (pu + pd), which this inverts.
    """
    scale = 1.0 - (leak_up_rate + leak_down_rate) * duration
    if scale <= 0.0:
        raise ValueError("leakage saturates the probe; no correction exists")
    return amplitude / scale


def nbar_from_sidebands(rho_r: float, rho_b: float, sigma_r: float = 0.0,
                        sigma_b: float = 0.0) -> SidebandThermometry:
    """Sideband thermometry: nbar = Q/(1-Q), P(n=0) = 1-Q with Q = rho_R/rho_B.

    Uncertainties propagate to first order.  rho_r >= rho_b means Q >= 1 and
    no thermal occupation reproduces it, so that raises ThermometryError.
    """
    if not (0.0 <= rho_r <= 1.0 and 0.0 < rho_b <= 1.0):
        raise ValueError("sideband amplitudes must lie in [0, 1] with rho_b > 0")
    if rho_r >= rho_b:
        raise ThermometryError(
            f"rho_R = {rho_r:.4f} >= rho_B = {rho_b:.4f}: ratio Q >= 1 has no "
            "thermal interpretation")
    q = rho_r / rho_b
    sigma_q = math.hypot(sigma_r / rho_b, rho_r * sigma_b / rho_b ** 2)
    nbar = q / (1.0 - q)
    sigma_nbar = sigma_q / (1.0 - q) ** 2
    return SidebandThermometry(nbar, sigma_nbar, 1.0 - q, sigma_q, q, sigma_q)


# ---------------------------------------------------------------------------
# least-squares fitters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitReport:
    """Common container for fitted parameters in input units."""

    params: dict[str, float]
    sigmas: dict[str, float]
    covariance: np.ndarray
    residual_norm: float
    low_confidence: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __getattr__(self, name):
        params = object.__getattribute__(self, "params")
        if name in params:
            return params[name]
        raise AttributeError(name)

    def sigma(self, name: str) -> float:
        return self.sigmas[name]

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "sigmas": self.sigmas,
            "covariance": np.asarray(self.covariance).tolist(),
            "residual_norm": self.residual_norm,
            "low_confidence": self.low_confidence,
            "notes": list(self.notes),
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _run_curve_fit(model, xs, y, sigma, p0, names, scale_back, bounds=None):
    """curve_fit wrapper: scaled coordinates in, input-unit FitReport out.

    scale_back maps the fitted parameter vector (and the Jacobian diagonal
    used to rescale the covariance) to input units.
    """
    kwargs = {"maxfev": 20000} if bounds is None else {"max_nfev": 20000,
                                                       "bounds": bounds}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            popt, pcov = curve_fit(model, xs, y, p0=p0, sigma=sigma,
                                   absolute_sigma=sigma is not None, **kwargs)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"fit did not converge: {exc}") from exc
    if not np.all(np.isfinite(popt)):
        raise FitError(f"fit returned non-finite parameters: {popt}")
    resid = model(xs, *popt) - y
    if sigma is not None:
        resid = resid / sigma
    params, jac = scale_back(popt)
    cov = np.asarray(pcov) * np.outer(jac, jac)
    sigmas = {}
    with np.errstate(invalid="ignore"):
        diag = np.sqrt(np.abs(np.diag(cov)))
    for name, s in zip(names, diag):
        sigmas[name] = float(s)
    return params, sigmas, cov, float(np.linalg.norm(resid))


def _normalize_x(x: np.ndarray) -> tuple[np.ndarray, float, float]:
    x0 = float(x.min())
    span = float(x.max() - x.min())
    if span <= 0:
        raise FitError("scan covers a single x value; nothing to fit")
    return (x - x0) / span, x0, span


def fit_gaussian_resonance(scan: ScanData, fixed_center: float | None = None,
                           fixed_width: float | None = None) -> FitReport:
    """Weighted Gaussian-on-baseline fit of one resonance line.

    Model: y = baseline + amplitude * exp(-(x - center)^2 / (2 width^2)).
    The amplitude is the peak height above the fitted baseline, i.e. the
    rho entering the sideband-ratio thermometer.  Initialization: baseline
    from the scan edges, center at the extremal point, width from the span.

    Passing fixed_center and fixed_width pins the line position and shape
    and fits only (baseline, amplitude), a well-posed linear problem even
    for a dark resonance; sideband pairs share their lineshape, so the dark
    red sideband is best fit with the blue sideband's center and width.
    """
    if (fixed_center is None) != (fixed_width is None):
        raise ValueError("fixed_center and fixed_width go together")
    if fixed_center is not None:
        return _fit_gaussian_fixed_shape(scan, fixed_center, fixed_width)
    if scan.x.size < 5:
        raise FitError("need at least 5 points to fit a resonance")
    xs, x0, span = _normalize_x(scan.x)
    y = scan.y
    baseline0 = float(np.median(np.concatenate([y[:2], y[-2:]])))
    amp0 = float(y.max() - baseline0)
    if abs(float(y.min() - baseline0)) > abs(amp0):
        amp0 = float(y.min() - baseline0)
    center0 = float(xs[np.argmax(y)] if amp0 >= 0 else xs[np.argmin(y)])
    p0 = [baseline0, amp0 if amp0 != 0.0 else 1e-3, center0, 0.15]

    def model(t, baseline, amplitude, center, width):
        return baseline + amplitude * np.exp(-((t - center) ** 2)
                                             / (2.0 * width ** 2))

    names = ["baseline", "amplitude", "center", "width"]

    def scale_back(popt):
        baseline, amplitude, center, width = popt
        params = {"baseline": float(baseline), "amplitude": float(amplitude),
                  "center": x0 + span * float(center),
                  "width": span * abs(float(width))}
        return params, np.array([1.0, 1.0, span, span])

    params, sigmas, cov, rnorm = _run_curve_fit(
        model, xs, y, scan.sigma_y, p0, names, scale_back)
    return FitReport(params, sigmas, cov, rnorm)


def _fit_gaussian_fixed_shape(scan: ScanData, center: float,
                              width: float) -> FitReport:
    """Linear weighted least squares for (baseline, amplitude) only."""
    if scan.x.size < 2:
        raise FitError("need at least 2 points for the fixed-shape fit")
    if width <= 0:
        raise FitError("fixed width must be positive")
    shape = np.exp(-((scan.x - center) ** 2) / (2.0 * width ** 2))
    design = np.column_stack([np.ones_like(shape), shape])
    weights = (np.ones_like(shape) if scan.sigma_y is None
               else 1.0 / np.maximum(scan.sigma_y, 1e-12))
    lhs = design * weights[:, None]
    rhs = scan.y * weights
    coeffs, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    resid = lhs @ coeffs - rhs
    cov2 = np.linalg.inv(lhs.T @ lhs)
    if scan.sigma_y is None and scan.x.size > 2:
        cov2 = cov2 * float(resid @ resid) / (scan.x.size - 2)
    params = {"baseline": float(coeffs[0]), "amplitude": float(coeffs[1]),
              "center": float(center), "width": float(width)}
    sigmas = {"baseline": float(math.sqrt(cov2[0, 0])),
              "amplitude": float(math.sqrt(cov2[1, 1])),
              "center": 0.0, "width": 0.0}
    cov = np.zeros((4, 4))
    cov[:2, :2] = cov2
    return FitReport(params, sigmas, cov, float(np.linalg.norm(resid)),
                     notes=("center and width held fixed",))


def _spectral_omega(x: np.ndarray, y: np.ndarray) -> float:
    """Dominant angular frequency of a (near) uniformly sampled scan.

    Primary estimate from the discrete spectrum; if the spectrum is too
    flat to call, fall back to counting mean crossings.  Returns 0 when no
    oscillation is detectable (flat data fits still converge from there).
    """
    dt = float(np.median(np.diff(x)))
    if dt <= 0:
        raise FitError("x values must be increasing for frequency estimation")
    detrended = y - y.mean()
    spectrum = np.abs(np.fft.rfft(detrended))
    freqs = np.fft.rfftfreq(x.size, dt)
    if spectrum.size > 1:
        k = 1 + int(np.argmax(spectrum[1:]))
        floor = float(np.median(spectrum[1:]))
        if spectrum[k] > 3.0 * floor and freqs[k] > 0:
            return 2.0 * math.pi * float(freqs[k])
    crossings = np.count_nonzero(np.diff(np.sign(detrended)) != 0)
    if crossings >= 2:
        return math.pi * crossings / float(x[-1] - x[0])
    return 0.0


def fit_rabi_sinusoid(scan: ScanData) -> FitReport:
    """Fit y = baseline + contrast/2 * (1 - cos(omega t + phase)).

    The frequency is initialized from the spectral peak of the scan (with a
    mean-crossing fallback), so at least two oscillation periods should be
    sampled.  Returns omega (rad/s), contrast, phase and baseline.
    """
    if scan.x.size < 6:
        raise FitError("need at least 6 points to fit a Rabi oscillation")
    xs, x0, span = _normalize_x(scan.x)
    y = scan.y
    omega0 = _spectral_omega(scan.x, y) * span
    if omega0 == 0.0:
        omega0 = 2.0 * math.pi  # one period across the scan as a last resort
    contrast0 = float(np.clip(y.max() - y.min(), 1e-3, 1.0))
    p0 = [float(y.min()), contrast0, omega0, 0.0]

    def model(t, baseline, contrast, omega, phase):
        return baseline + 0.5 * contrast * (1.0 - np.cos(omega * t + phase))

    names = ["baseline", "contrast", "omega", "phase"]

    def scale_back(popt):
        baseline, contrast, omega, phase = popt
        # cos is even: pick the positive-frequency branch
        if omega < 0:
            omega, phase = -omega, -phase
        params = {"baseline": float(baseline), "contrast": float(contrast),
                  "omega": float(omega) / span,
                  "phase": float(math.remainder(phase - omega * x0 / span,
                                                2.0 * math.pi))}
        return params, np.array([1.0, 1.0, 1.0 / span, 1.0])

    params, sigmas, cov, rnorm = _run_curve_fit(
        model, xs, y, scan.sigma_y, p0, names, scale_back)
    return FitReport(params, sigmas, cov, rnorm)


def fit_decaying_sinusoid(scan: ScanData) -> FitReport:
    """Fit y = baseline + contrast/2 * (1 - exp(-gamma t) cos(omega t + phase)).

    Same initialization as the plain sinusoid with the decay rate seeded at
    one inverse scan length.  The report is flagged low_confidence when the
    oscillation is not cleanly identified (overdamped: gamma comparable to
    omega, or a frequency uncertainty above 10%).
    """
    if scan.x.size < 8:
        raise FitError("need at least 8 points to fit a decaying oscillation")
    xs, x0, span = _normalize_x(scan.x)
    y = scan.y
    omega0 = _spectral_omega(scan.x, y) * span
    if omega0 == 0.0:
        omega0 = 2.0 * math.pi
    p0 = [float(y.min()), float(np.clip(y.max() - y.min(), 1e-3, 1.0)),
          omega0, 0.0, 1.0]

    def model(t, baseline, contrast, omega, phase, gamma):
        return baseline + 0.5 * contrast * (
            1.0 - np.exp(-gamma * t) * np.cos(omega * t + phase))

    names = ["baseline", "contrast", "omega", "phase", "gamma"]

    def scale_back(popt):
        baseline, contrast, omega, phase, gamma = popt
        if omega < 0:
            omega, phase = -omega, -phase
        params = {"baseline": float(baseline), "contrast": float(contrast),
                  "omega": float(omega) / span,
                  "phase": float(math.remainder(phase - omega * x0 / span,
                                                2.0 * math.pi)),
                  "gamma": float(gamma) / span}
        return params, np.array([1.0, 1.0, 1.0 / span, 1.0, 1.0 / span])

    params, sigmas, cov, rnorm = _run_curve_fit(
        model, xs, y, scan.sigma_y, p0, names, scale_back)
    notes = []
    low = False
    if abs(params["gamma"]) >= abs(params["omega"]):
        low = True
        notes.append("overdamped: decay rate exceeds the fitted frequency")
    elif sigmas["omega"] > 0.1 * abs(params["omega"]):
        low = True
        notes.append("frequency poorly identified (sigma_omega > 10%)")
    return FitReport(params, sigmas, cov, rnorm, low, tuple(notes))


class CollapsedDataWarning(UserWarning):
    """Scan only covers the dephased plateau; nbar is weakly constrained."""


def thermal_flop_curve(t, nbar: float, omega0: float, eta: float,
                       n_max: int = 512) -> np.ndarray:
    """Carrier-flop excitation of a thermal ion: the dephasing-collapse curve.

    y(t) = sum_n P(n; nbar) sin^2(Omega_{n,n} t / 2), with the geometric
    P(n) evaluated in log space and the carrier ladder Omega_{n,n}.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = np.arange(n_max + 1)
    nbar = max(float(nbar), 1e-12)
    logp = n * math.log(nbar) - (n + 1) * math.log(nbar + 1.0)
    pops = np.exp(logp)
    pops /= pops.sum()
    omegas = rabi_frequency_ladder(0, eta, omega0, n_max)
    return np.sin(np.outer(t, omegas) / 2.0) ** 2 @ pops


def fit_thermal_flop(scan: ScanData, eta: float,
                     n_max: int = 512) -> FitReport:
    """Fit the thermal carrier flop for (nbar, omega0) at known eta.

    omega0 is seeded from the spectral peak divided by the n=0 carrier
    factor exp(-eta^2/2); nbar from a coarse grid search.  Warns with
    CollapsedDataWarning when the scan starts after the collapse has
    flattened the curve, where the likelihood in nbar is nearly flat.
    """
    if scan.x.size < 8:
        raise FitError("need at least 8 points to fit a thermal flop")
    xs, x0, span = _normalize_x(scan.x)
    if x0 < 0:
        raise FitError("time axis must be non-negative")
    y = scan.y
    carrier_factor = math.exp(-eta * eta / 2.0)
    omega_est = _spectral_omega(scan.x, y) / carrier_factor
    if omega_est == 0.0:
        omega_est = 2.0 * math.pi / float(scan.x.max() - scan.x.min())

    def model_t(t, nbar, omega0):
        return thermal_flop_curve(t, nbar, omega0, eta, n_max)

    grid = [0.02, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0]
    sses = [float(np.sum((model_t(scan.x, g, omega_est) - y) ** 2))
            for g in grid]
    nbar0 = grid[int(np.argmin(sses))]

    def model(ts, nbar, omega_scaled):
        return model_t(ts * span + x0, nbar, omega_scaled / span)

    names = ["nbar", "omega0"]

    def scale_back(popt):
        nbar, omega_scaled = popt
        return ({"nbar": float(nbar), "omega0": float(omega_scaled) / span},
                np.array([1.0, 1.0 / span]))

    params, sigmas, cov, rnorm = _run_curve_fit(
        model, xs, y, scan.sigma_y, [nbar0, omega_est * span], names,
        scale_back, bounds=([1e-9, 0.0], [200.0, np.inf]))
    nbar, omega0 = params["nbar"], params["omega0"]
    # collapse time of the thermal flop; data starting well beyond it carries
    # almost no nbar information
    sigma_n = math.sqrt(max(nbar * (nbar + 1.0), 1e-12))
    spread = omega0 * carrier_factor * eta * eta * sigma_n
    if spread > 0 and float(scan.x.min()) > 3.0 / spread:
        warnings.warn("scan covers only the collapsed regime; the fitted "
                      "nbar is weakly constrained", CollapsedDataWarning,
                      stacklevel=2)
    return FitReport(params, sigmas, cov, rnorm)
