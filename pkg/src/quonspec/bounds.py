"""Upper limits on the violation parameter from synthetic spectra.

The chain is: damped least squares (Levenberg-Marquardt) for baseline and
allowed-line amplitudes, a linear matched filter on the residuals at each
forbidden-line position, conversion of the filtered amplitudes to
beta2_half through the catalog's unit-violation strengths, and a one-sided
Gaussian upper limit on the inverse-variance combination.  A Monte-Carlo
driver calibrates coverage and median sensitivity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm

from . import __version__
from .specmodel import LineCatalog, RoVibLine
from .synth import GridRangeError, LineShapeParams, Spectrum, average_spectra, profile, synthesize

MAX_ITERATIONS = 200
RELATIVE_STEP_TOL = 1e-10


class FitConvergenceError(RuntimeError):
    """Levenberg-Marquardt failed to converge within the iteration budget."""

    def __init__(self, iterations: int, gradient_norm: float):
        self.iterations = iterations
        self.gradient_norm = gradient_norm
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(final gradient norm {gradient_norm:.3e})"
        )


class SingularJacobianError(RuntimeError):
    """A fit parameter has no leverage on the data."""


class NoUnblendedLinesError(RuntimeError):
    """Every forbidden line was excluded as blended."""


class CalibrationError(RuntimeError):
    """Too many Monte-Carlo trials failed to fit."""


def _levenberg_marquardt(
    residual_fn,
    jacobian_fn,
    theta0: np.ndarray,
    lower_bounds: Optional[np.ndarray] = None,
    max_iterations: int = MAX_ITERATIONS,
    relative_step_tol: float = RELATIVE_STEP_TOL,
):
    """Damped least squares with monotone accepted steps and bound projection.

    Returns (theta, iterations, gradient_inf_norm).  Steps are accepted only
    if they do not increase the residual norm; convergence is declared when
    the accepted relative step falls below relative_step_tol.
    """

    def project(t):
        return t if lower_bounds is None else np.maximum(t, lower_bounds)

    theta = project(np.asarray(theta0, dtype=float))
    r = residual_fn(theta)
    cost = float(r @ r)
    jac = jacobian_fn(theta)
    lam = 1e-3
    for iteration in range(1, max_iterations + 1):
        gradient = jac.T @ r
        jtj = jac.T @ jac
        diag = np.maximum(np.diag(jtj), 1e-300)
        try:
            delta = np.linalg.solve(jtj + lam * np.diag(diag), -gradient)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        trial = project(theta + delta)
        step = trial - theta
        r_trial = residual_fn(trial)
        cost_trial = float(r_trial @ r_trial)
        if cost_trial <= cost:
            theta, r, cost = trial, r_trial, cost_trial
            jac = jacobian_fn(theta)
            lam = max(lam * 0.3, 1e-15)
            step_norm = float(np.linalg.norm(step))
            if step_norm <= relative_step_tol * (float(np.linalg.norm(theta)) + relative_step_tol):
                return theta, iteration, float(np.max(np.abs(jac.T @ r)))
        else:
            lam *= 4.0
    raise FitConvergenceError(max_iterations, float(np.max(np.abs(jac.T @ r))))


@dataclass(frozen=True)
class FitModel:
    """Converged baseline + allowed-amplitude model for one spectrum."""

    baseline_coeffs: np.ndarray
    allowed_amplitudes: np.ndarray
    shape: LineShapeParams
    allowed_lines: tuple
    domain: tuple
    residuals: np.ndarray = field(repr=False)
    residual_std: float
    intensity_scale: float
    chi2_dof: float
    iterations: int
    gradient_norm: float

    def predict(self, grid: np.ndarray) -> np.ndarray:
        x = self._scaled(grid)
        out = np.polynomial.polynomial.polyval(x, self.baseline_coeffs)
        for amp, line in zip(self.allowed_amplitudes, self.allowed_lines):
            out = out + amp * profile(grid - line.position, self.shape)
        return out

    def _scaled(self, grid: np.ndarray) -> np.ndarray:
        lo, hi = self.domain
        return (2.0 * np.asarray(grid) - (hi + lo)) / (hi - lo)


def _design_matrix(grid, lines, shape, degree, domain):
    lo, hi = domain
    x = (2.0 * grid - (hi + lo)) / (hi - lo)
    columns = [x**k for k in range(degree + 1)]
    names = [f"baseline[{k}]" for k in range(degree + 1)]
    for line in lines:
        columns.append(profile(grid - line.position, shape))
        names.append(f"amplitude[{line.branch.value}({line.j_lower})]")
    return np.column_stack(columns), names


def fit_allowed(
    spectrum: Spectrum,
    catalog: LineCatalog,
    shape: LineShapeParams,
    baseline_degree: int = 1,
) -> FitModel:
    """Fit baseline and allowed-line amplitudes to an absorbance spectrum.

    The catalog must be the beta2_half = 0 template; only its allowed lines
    enter the model, amplitudes constrained non-negative.
    """
    if catalog.beta2_half != 0.0:
        raise ValueError("fit template must be a catalog built with beta2_half = 0")
    if not 0 <= baseline_degree <= 3:
        raise ValueError("baseline degree must be between 0 and 3")
    grid = spectrum.grid
    y = spectrum.absorbance
    lines = tuple(
        line for line in catalog.allowed_lines() if grid[0] <= line.position <= grid[-1]
    )
    if not lines:
        raise GridRangeError("no allowed catalog line falls inside the spectrum range")
    domain = (float(grid[0]), float(grid[-1]))
    design, names = _design_matrix(grid, lines, shape, baseline_degree, domain)
    column_norms = np.linalg.norm(design, axis=0)
    weakest = int(np.argmin(column_norms))
    if column_norms[weakest] < 1e-12 * column_norms.max():
        raise SingularJacobianError(
            f"parameter {names[weakest]} has no support on the grid"
        )

    def residual(theta):
        return design @ theta - y

    def jacobian(_theta):
        return design

    n_baseline = baseline_degree + 1
    lower = np.full(design.shape[1], -np.inf)
    lower[n_baseline:] = 0.0  # amplitudes are physical absorptions
    theta0 = np.zeros(design.shape[1])
    theta, iterations, gradient_norm = _levenberg_marquardt(
        residual, jacobian, theta0, lower_bounds=lower
    )
    predicted = design @ theta
    residuals = y - predicted
    dof = max(grid.size - design.shape[1], 1)
    residual_std = float(np.sqrt(residuals @ residuals / dof))
    strengths = np.array([line.strength for line in lines])
    amplitudes = theta[n_baseline:]
    intensity_scale = float(strengths @ amplitudes / (strengths @ strengths))
    chi2_dof = _chi_squared_per_dof(spectrum, predicted, residuals, dof)
    return FitModel(
        baseline_coeffs=theta[:n_baseline],
        allowed_amplitudes=amplitudes,
        shape=shape,
        allowed_lines=lines,
        domain=domain,
        residuals=residuals,
        residual_std=residual_std,
        intensity_scale=intensity_scale,
        chi2_dof=chi2_dof,
        iterations=iterations,
        gradient_norm=gradient_norm,
    )


def _chi_squared_per_dof(spectrum, predicted, residuals, dof):
    snr = spectrum.meta.get("snr")
    n_avg = spectrum.meta.get("n_averaged", 1) or 1
    if snr is None or not math.isfinite(snr):
        scale = residuals @ residuals / dof
        return float((residuals @ residuals) / (scale * dof)) if scale > 0 else 0.0
    # transmittance noise 1/snr maps to absorbance noise exp(A)/snr
    sigma = np.exp(predicted) / (float(snr) * math.sqrt(n_avg))
    return float(np.sum((residuals / sigma) ** 2) / dof)


@dataclass(frozen=True)
class ForbiddenLineEstimate:
    """Matched-filter amplitude at one forbidden-line position."""

    line: RoVibLine
    amplitude: float
    sigma: float
    blended: bool


def forbidden_scan(
    spectrum: Spectrum,
    model: FitModel,
    forbidden_lines: Sequence[RoVibLine],
    blend_radius_hwhm: float = 3.0,
    strong_line_threshold: float = 1e-3,
) -> list:
    """Matched-filter estimates a = sum(w r) / sum(w^2) on the fit residuals.

    Lines closer than blend_radius_hwhm total half-widths to a strong
    allowed line are flagged blended and excluded from the combination.
    """
    grid = spectrum.grid
    if model.residuals.shape != grid.shape:
        raise ValueError("model residuals do not match the spectrum grid")
    radius = blend_radius_hwhm * model.shape.total_hwhm
    strong_positions = [
        line.position
        for line in model.allowed_lines
        if line.strength >= strong_line_threshold
    ]
    results = []
    for line in forbidden_lines:
        if line.position < grid[0] or line.position > grid[-1]:
            raise GridRangeError(
                f"forbidden line {line.branch.value}({line.j_lower}) at "
                f"{line.position:g} cm-1 lies outside the spectrum grid"
            )
        w = profile(grid - line.position, model.shape)
        denom = float(w @ w)
        amplitude = float(w @ model.residuals) / denom
        sigma = model.residual_std / math.sqrt(denom)
        blended = any(abs(line.position - pos) < radius for pos in strong_positions)
        results.append(
            ForbiddenLineEstimate(line=line, amplitude=amplitude, sigma=sigma, blended=blended)
        )
    return results


@dataclass(frozen=True)
class PerLineBound:
    branch: str
    j_lower: int
    position: float
    amplitude: float
    sigma: float
    beta2_half: float
    beta2_half_sigma: float
    blended: bool

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "J_lower": self.j_lower,
            "position_cm1": self.position,
            "amplitude": self.amplitude,
            "sigma": self.sigma,
            "beta2_half": self.beta2_half,
            "beta2_half_sigma": self.beta2_half_sigma,
            "blended": self.blended,
        }


@dataclass(frozen=True)
class BoundReport:
    """Point estimate and one-sided confidence upper limit for beta2_half."""

    beta2_half_hat: float
    sigma: float
    upper_limit: float
    confidence_level: float
    per_line: tuple
    chi2_dof: float
    n_lines_used: int

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("combined sigma must be positive")
        if self.upper_limit < max(self.beta2_half_hat, 0.0):
            raise ValueError("upper limit must dominate the truncated point estimate")

    def summary(self) -> str:
        return (
            f"beta2_half <= {self.upper_limit:.1e} "
            f"({self.confidence_level:.0%} CL, {self.n_lines_used} lines, "
            f"chi2/dof={self.chi2_dof:.2f})"
        )

    def to_json(self, meta: Optional[dict] = None) -> str:
        payload = {
            "beta2_half_hat": self.beta2_half_hat,
            "sigma": self.sigma,
            "upper_limit": self.upper_limit,
            "confidence_level": self.confidence_level,
            "chi2_dof": self.chi2_dof,
            "n_lines_used": self.n_lines_used,
            "per_line": [entry.to_dict() for entry in self.per_line],
            "meta": {"tool_version": __version__, **(meta or {})},
        }
        return json.dumps(payload, sort_keys=True)


def combine_bound(
    per_line: Sequence[ForbiddenLineEstimate],
    catalog: LineCatalog,
    confidence_level: float = 0.95,
    intensity_scale: float = 1.0,
    chi2_dof: float = float("nan"),
) -> BoundReport:
    """Inverse-variance combination of per-line estimates into one upper limit.

    Each amplitude is divided by the line's beta2_half = 1 predicted
    strength times the fitted intensity scale, so the reported parameter is
    the relative population of the forbidden states.
    """
    if not 0.0 < confidence_level < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    if intensity_scale <= 0:
        raise ValueError("intensity scale must be positive")
    usable = [est for est in per_line if not est.blended]
    if not usable:
        raise NoUnblendedLinesError("every forbidden line is blended; no bound possible")
    entries = []
    betas, variances = [], []
    for est in per_line:
        conversion = intensity_scale * catalog.unit_violation_strength(est.line)
        beta = est.amplitude / conversion
        beta_sigma = est.sigma / conversion
        entries.append(
            PerLineBound(
                branch=est.line.branch.value,
                j_lower=est.line.j_lower,
                position=est.line.position,
                amplitude=est.amplitude,
                sigma=est.sigma,
                beta2_half=beta,
                beta2_half_sigma=beta_sigma,
                blended=est.blended,
            )
        )
        if not est.blended:
            betas.append(beta)
            variances.append(beta_sigma**2)
    weights = 1.0 / np.asarray(variances)
    hat = float(np.asarray(betas) @ weights / weights.sum())
    sigma = float(1.0 / math.sqrt(weights.sum()))
    z = float(norm.ppf(confidence_level))
    upper = max(hat, 0.0) + z * sigma
    return BoundReport(
        beta2_half_hat=hat,
        sigma=sigma,
        upper_limit=upper,
        confidence_level=confidence_level,
        per_line=tuple(entries),
        chi2_dof=chi2_dof,
        n_lines_used=len(usable),
    )


def derive_seed(*keys) -> int:
    """Deterministic child seed from integer keys (master_seed, trial, ...)."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def bound_from_spectrum(spectrum: Spectrum, config):
    """fit -> scan -> combine against the config's beta2_half = 0 template.

    Returns (BoundReport, FitModel, scan estimates).
    """
    template = config.template_catalog()
    model = fit_allowed(spectrum, template, config.shape, config.baseline_degree)
    scan = forbidden_scan(spectrum, model, template.forbidden_lines())
    report = combine_bound(
        scan,
        template,
        confidence_level=config.confidence_level,
        intensity_scale=model.intensity_scale,
        chi2_dof=model.chi2_dof,
    )
    return report, model, scan


def run_bound_pipeline(config, trial_index: Optional[int] = None):
    """synth -> fit -> scan -> combine for one configuration.

    Returns (BoundReport, FitModel, Spectrum, scan).  trial_index switches
    the seed derivation to the per-trial scheme used by mc_calibrate.
    """
    injected = config.injected_catalog()
    grid = config.grid()
    if trial_index is None:
        seeds = [config.seed + k for k in range(config.n_average)]
    else:
        seeds = [derive_seed(config.seed, trial_index, k) for k in range(config.n_average)]
    spectra = [
        synthesize(injected, grid, config.shape, config.column, config.snr, s)
        for s in seeds
    ]
    spectrum = average_spectra(spectra)
    report, model, scan = bound_from_spectrum(spectrum, config)
    return report, model, spectrum, scan


@dataclass(frozen=True)
class CoverageReport:
    """Empirical behavior of the upper limit over Monte-Carlo trials."""

    n_trials: int
    n_failed: int
    true_beta2_half: float
    confidence_level: float
    coverage: float
    coverage_threshold: float
    coverage_ok: bool
    median_upper_limit: float
    median_estimate: float
    upper_limits: tuple
    estimates: tuple
    failures: tuple

    def summary(self) -> str:
        return (
            f"coverage {self.coverage:.3f} (threshold {self.coverage_threshold:.3f}, "
            f"{'ok' if self.coverage_ok else 'FAIL'}), median limit "
            f"{self.median_upper_limit:.2e} over {self.n_trials} trials "
            f"({self.n_failed} failed)"
        )

    def to_json(self, meta: Optional[dict] = None) -> str:
        payload = {
            "n_trials": self.n_trials,
            "n_failed": self.n_failed,
            "true_beta2_half": self.true_beta2_half,
            "confidence_level": self.confidence_level,
            "coverage": self.coverage,
            "coverage_threshold": self.coverage_threshold,
            "coverage_ok": self.coverage_ok,
            "median_upper_limit": self.median_upper_limit,
            "median_estimate": self.median_estimate,
            "upper_limits": list(self.upper_limits),
            "estimates": list(self.estimates),
            "failures": [list(f) for f in self.failures],
            "meta": {"tool_version": __version__, **(meta or {})},
        }
        return json.dumps(payload, sort_keys=True)


def mc_calibrate(config, n_trials: Optional[int] = None) -> CoverageReport:
    """Repeat the bound pipeline with independent seeds and report coverage.

    Individual fit failures are recorded, not fatal, unless they exceed 10%
    of the trials.  Per-trial seeds derive from (config.seed, trial_index),
    so trials are order-independent and could run concurrently.
    """
    n = config.n_trials if n_trials is None else int(n_trials)
    if n < 100:
        raise ValueError(f"calibration needs at least 100 trials, got {n}")
    true_beta = config.beta2_half
    limits, estimates, failures = [], [], []
    for trial in range(n):
        try:
            report = run_bound_pipeline(config, trial_index=trial)[0]
        except RuntimeError as exc:  # fit trouble; config errors still raise
            failures.append((trial, str(exc)))
            continue
        limits.append(report.upper_limit)
        estimates.append(report.beta2_half_hat)
    if len(failures) > 0.1 * n:
        raise CalibrationError(
            f"{len(failures)}/{n} trials failed to fit; calibration aborted"
        )
    n_success = len(limits)
    covered = sum(1 for lim in limits if lim >= true_beta)
    coverage = covered / n_success
    cl = config.confidence_level
    threshold = cl - 3.0 * math.sqrt(cl * (1.0 - cl) / n_success)
    return CoverageReport(
        n_trials=n,
        n_failed=len(failures),
        true_beta2_half=true_beta,
        confidence_level=cl,
        coverage=coverage,
        coverage_threshold=threshold,
        coverage_ok=coverage >= threshold,
        median_upper_limit=float(np.median(limits)),
        median_estimate=float(np.median(estimates)),
        upper_limits=tuple(limits),
        estimates=tuple(estimates),
        failures=tuple(failures),
    )
