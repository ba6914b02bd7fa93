"""
checks - the invariant suite run by `squeeze2phase check`.

Each check recomputes one property from scratch through the library and
compares the worst observed deviation with a threshold from the `acceptance`
and `tolerances` sections of the settings.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from analytic import (
    HomodyneSettings,
    appendix_series_AB,
    closed_form_AB,
    nbc_variance_coherent,
    nbc_variance_coherent_exact,
    nbc_variance_fock,
    poisson_mixture_variance,
    series_terms_for_tolerance,
    squeezing_extremes,
)
from block_sim import (
    TwoModeState,
    build_entangled_state,
    coherent_lo_state,
    nbc_eigensystem,
    nbc_moments,
    sample_nbc,
    shot_noise_state,
    summarize_samples,
)
from core import Tolerances
from fock_core import SqueezeParams, squeezed_vacuum_coefficients, truncation_for_tolerance
from phase_dist import (
    fit_log_ratio_slope,
    log_variance_ratio_curve,
    peak_locations,
    phase_distribution_closed,
    phase_distribution_general,
    restricted_window_stats,
    uniform_window_variance,
)
from settings import SettingsManager

logger = logging.getLogger(__name__)

SQUEEZING_R_VALUES = (0.5, 1.0, 2.0)
SQUEEZING_PHI_VALUES = (0.0, 1.3)
ORACLE_FOCK_R = 1.0
ORACLE_FOCK_THETA_POINTS = 16
ORACLE_COHERENT_BETA = 4.0
ORACLE_COHERENT_R = 0.8
ORACLE_COHERENT_THETA_POINTS = 8
SPECTRUM_BLOCKS = (1, 2, 50, 200)
ROUTE_R = 1.0
ROUTE_M_MAX = 50
ROUTE_BLOCKS = (100, 200, 400)
POISSON_ALPHA = 10.0
DETERMINISM_SAMPLES = 20_000


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one property: the worst deviation seen and the threshold it is held to."""

    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


def _relative(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference)


def check_squeezing_law(settings: SettingsManager) -> CheckResult:
    """Both analytic routes hit N e^{-2r} at 2 theta = phi and N e^{2r} at 2 theta - phi = pi."""
    threshold = settings.get_section("acceptance")["squeezing_law_rel"]
    n_total = settings.get_numeric("oracle_n_total")
    beta = math.sqrt(n_total)
    worst = 0.0
    for r in SQUEEZING_R_VALUES:
        low, high = squeezing_extremes(n_total, r)
        for phi in SQUEEZING_PHI_VALUES:
            params = SqueezeParams(r, phi)
            for theta, expected in ((params.phi / 2, low), ((params.phi + math.pi) / 2, high)):
                worst = max(
                    worst,
                    _relative(nbc_variance_coherent(beta, params, theta).variance, expected),
                    _relative(nbc_variance_fock(n_total, params, theta).variance, expected),
                )
    return CheckResult("squeezing_law", worst <= threshold, worst, threshold)


def check_appendix_closure(settings: SettingsManager) -> CheckResult:
    """Series A and B converge to cosh 2r and sinh 2r on r = 0, 0.1, ..., 3."""
    threshold = settings.get_section("acceptance")["appendix_closure_abs"]
    worst = 0.0
    for r in np.round(np.arange(0.0, 3.0 + 1e-9, 0.1), 10):
        a_exact, b_exact = closed_form_AB(r)
        # Literal 200-term sums wherever their tail is provably negligible.
        m_values = {max(200, series_terms_for_tolerance(r, 1e-12))}
        if series_terms_for_tolerance(r, 1e-10) <= 200:
            m_values.add(200)
        for m_max in m_values:
            a, b = appendix_series_AB(r, m_max)
            worst = max(worst, abs(a - a_exact), abs(b - b_exact))
    return CheckResult("appendix_closure", worst < threshold, worst, threshold)


def _fock_oracle_error(
    params: SqueezeParams, n_total: int, theta: float, tolerances: Tolerances
) -> tuple[float, float, float]:
    """(oracle variance, Fock-basis prediction, relative error) for the entangled state."""
    lo = HomodyneSettings.for_theta(theta, n_total=n_total)
    state = TwoModeState.from_block(build_entangled_state(params, lo.n_total, lo.lo_phase))
    oracle = nbc_moments(state, tolerances).variance
    predicted = nbc_variance_fock(n_total, params, theta).variance
    return oracle, predicted, abs(oracle - predicted) / predicted


def check_oracle_fock(settings: SettingsManager) -> CheckResult:
    """Exact block variance of the entangled state against N F(r, phi, theta)."""
    acceptance = settings.get_section("acceptance")
    threshold = acceptance["oracle_fock_rel"]
    floor = acceptance["oracle_fock_floor_fraction"]
    n_total = settings.get_numeric("oracle_n_total")
    params = SqueezeParams(ORACLE_FOCK_R, 0.0)
    tolerances = settings.get_tolerances()

    passed = True
    worst = 0.0
    for theta in np.arange(ORACLE_FOCK_THETA_POINTS) * math.pi / ORACLE_FOCK_THETA_POINTS:
        oracle, predicted, relative = _fock_oracle_error(params, n_total, theta, tolerances)
        if predicted > floor * n_total:
            worst = max(worst, relative)
            passed &= relative < threshold
        else:
            passed &= abs(oracle - predicted) < threshold * n_total

    coarse = _fock_oracle_error(params, n_total, params.phi / 2, tolerances)[2]
    fine = _fock_oracle_error(params, 2 * n_total, params.phi / 2, tolerances)[2]
    converges = fine < coarse
    return CheckResult(
        "oracle_fock",
        passed and converges,
        worst,
        threshold,
        detail=f"minimum error N={n_total}: {coarse:.3g}, N={2 * n_total}: {fine:.3g}",
    )


def check_oracle_coherent(settings: SettingsManager) -> CheckResult:
    """Block-exact variance with a coherent local oscillator against beta^2 F + sinh^2 r."""
    acceptance = settings.get_section("acceptance")
    threshold = acceptance["oracle_coherent_exact_rel"]
    params = SqueezeParams(ORACLE_COHERENT_R, 0.0)
    m_max = truncation_for_tolerance(params.r, settings.get_numeric("tail_mass"))
    signal = squeezed_vacuum_coefficients(params, m_max)
    tolerances = settings.get_tolerances()

    worst = 0.0
    worst_leading = 0.0
    for theta in np.arange(ORACLE_COHERENT_THETA_POINTS) * math.pi / ORACLE_COHERENT_THETA_POINTS:
        lo = HomodyneSettings.for_theta(theta, beta=ORACLE_COHERENT_BETA)
        state = coherent_lo_state(lo.beta, lo.lo_phase, signal)
        oracle = nbc_moments(state, tolerances).variance
        exact = nbc_variance_coherent_exact(ORACLE_COHERENT_BETA, params, theta).variance
        leading = nbc_variance_coherent(ORACLE_COHERENT_BETA, params, theta).variance
        worst = max(worst, _relative(oracle, exact))
        worst_leading = max(worst_leading, _relative(oracle, leading))
    return CheckResult(
        "oracle_coherent",
        worst < min(threshold, acceptance["oracle_coherent_rel"]),
        worst,
        threshold,
        detail=f"largest deviation from beta^2 F alone: {worst_leading:.3g}",
    )


def check_shot_noise(settings: SettingsManager) -> CheckResult:
    """|0>|N> has oracle variance N and a seeded Monte Carlo variance within 5% of N."""
    acceptance = settings.get_section("acceptance")
    n_total = settings.get_numeric("oracle_n_total")
    tolerances = settings.get_tolerances()
    state = shot_noise_state(n_total)
    exact = _relative(nbc_moments(state, tolerances).variance, n_total)
    samples = sample_nbc(
        state,
        acceptance["monte_carlo_samples"],
        seed=settings.get_defaults("check")["seed"],
        chunk_size=settings.get_numeric("sample_chunk_size"),
        max_workers=settings.get_numeric("max_workers"),
        tolerances=tolerances,
    )
    sampled = _relative(summarize_samples(samples).variance, n_total)
    passed = exact <= acceptance["shot_noise_rel"] and sampled < acceptance["monte_carlo_rel"]
    return CheckResult(
        "shot_noise",
        passed,
        exact,
        acceptance["shot_noise_rel"],
        detail=f"Monte Carlo relative error {sampled:.3g}",
    )


def check_spectrum(settings: SettingsManager) -> CheckResult:
    """Block eigenvalues sit on {N - 2j}; eigenvectors are orthonormal."""
    threshold = settings.get_tolerance("spectrum")
    orthonormal = settings.get_tolerance("orthonormal")
    worst = 0.0
    worst_unitarity = 0.0
    for n_total in SPECTRUM_BLOCKS:
        spectrum = nbc_eigensystem(n_total)
        lattice = np.arange(-n_total, n_total + 1, 2)
        worst = max(worst, float(np.max(np.abs(spectrum.eigenvalues - lattice))))
        gram = spectrum.eigenvectors.conj().T @ spectrum.eigenvectors
        worst_unitarity = max(worst_unitarity, float(np.max(np.abs(gram - np.eye(n_total + 1)))))
    return CheckResult(
        "spectrum",
        worst < threshold and worst_unitarity < orthonormal,
        worst,
        threshold,
        detail=f"orthonormality error {worst_unitarity:.3g}",
    )


def check_fig2a(settings: SettingsManager) -> CheckResult:
    """Peaks at pi/2 and 3pi/2 for r = 1, 2 and a narrower r = 2 window."""
    acceptance = settings.get_section("acceptance")
    figure = settings.get_defaults("fig2a")
    tolerances = settings.get_tolerances()
    variances = []
    worst_steps = 0.0
    for r in figure["r_values"]:
        dist = phase_distribution_closed(
            SqueezeParams(r, figure["phi"]), figure["varphi"], figure["m_max"], figure["grid_points"]
        )
        first, second = peak_locations(dist)
        worst_steps = max(
            worst_steps,
            abs(first - math.pi / 2) / dist.step,
            abs(second - 3 * math.pi / 2) / dist.step,
        )
        variances.append(restricted_window_stats(dist, (0.0, math.pi), tolerances).variance)
    narrowing = all(b < a for a, b in zip(variances, variances[1:]))
    threshold = acceptance["peak_grid_steps"]
    return CheckResult("fig2a", worst_steps <= threshold and narrowing, worst_steps, threshold)


def check_fig2b(settings: SettingsManager) -> CheckResult:
    """Fitted slope of ln(sigma^2 / sigma_0^2) against r, and the uniform baseline."""
    acceptance = settings.get_section("acceptance")
    figure = settings.get_defaults("fig2b")
    tolerances = settings.get_tolerances()
    r_values = np.linspace(figure["r_start"], figure["r_stop"], figure["r_count"])
    curve = log_variance_ratio_curve(
        r_values,
        figure["phi"],
        figure["varphi"],
        figure["m_max"],
        figure["grid_points"],
        max_workers=settings.get_numeric("max_workers"),
        tolerances=tolerances,
    )
    slope, _ = fit_log_ratio_slope(curve)

    uniform = phase_distribution_closed(SqueezeParams(0.0), 0.0, figure["m_max"], figure["grid_points"])
    baseline = restricted_window_stats(uniform, (0.0, math.pi), tolerances).variance
    baseline_error = abs(baseline - uniform_window_variance(0.0, math.pi))

    deviation = abs(slope - acceptance["slope_target"])
    return CheckResult(
        "fig2b",
        deviation <= acceptance["slope_tolerance"] and baseline_error < acceptance["baseline_abs"],
        slope,
        acceptance["slope_target"],
        detail=f"tolerance {acceptance['slope_tolerance']:g}, baseline error {baseline_error:.3g}",
    )


def check_route_equivalence(settings: SettingsManager) -> CheckResult:
    """General projector route on entangled states equals the closed form, for every N."""
    threshold = settings.get_tolerance("route_equivalence")
    grid_points = settings.get_numeric("grid_points")
    tolerances = settings.get_tolerances()
    params = SqueezeParams(ROUTE_R, 0.0)
    varphi = 0.3
    closed = phase_distribution_closed(params, varphi, ROUTE_M_MAX, grid_points)
    worst = 0.0
    for n_total in ROUTE_BLOCKS:
        state = TwoModeState.from_block(build_entangled_state(params, n_total, varphi, ROUTE_M_MAX))
        general = phase_distribution_general(state, grid_points, tolerances)
        worst = max(worst, float(np.max(np.abs(general.density - closed.density))))
    return CheckResult("route_equivalence", worst < threshold, worst, threshold)


def check_poisson_mixture(settings: SettingsManager) -> CheckResult:
    """Poisson-averaged variance at alpha^2 = 100 equals the N = 100 formula."""
    threshold = settings.get_section("acceptance")["poisson_rel"]
    n_sigma = settings.get_numeric("poisson_n_sigma")
    tolerances = settings.get_tolerances()
    n_total = round(POISSON_ALPHA**2)
    worst = 0.0
    for r in (0.0, 1.0):
        params = SqueezeParams(r, 0.0)
        for theta in (0.0, math.pi / 4, math.pi / 2):
            mixture = poisson_mixture_variance(POISSON_ALPHA, params, theta, n_sigma, tolerances).variance
            fixed = nbc_variance_fock(n_total, params, theta).variance
            worst = max(worst, _relative(mixture, fixed))
    return CheckResult("poisson_mixture", worst < threshold, worst, threshold)


def check_determinism(settings: SettingsManager) -> CheckResult:
    """Seeded records repeat exactly and do not depend on the worker count."""
    seed = settings.get_defaults("check")["seed"]
    state = shot_noise_state(settings.get_numeric("oracle_n_total"))
    chunk_size = DETERMINISM_SAMPLES // 8
    serial = sample_nbc(state, DETERMINISM_SAMPLES, seed, chunk_size=chunk_size, max_workers=1)
    repeat = sample_nbc(state, DETERMINISM_SAMPLES, seed, chunk_size=chunk_size, max_workers=1)
    threaded = sample_nbc(state, DETERMINISM_SAMPLES, seed, chunk_size=chunk_size, max_workers=4)
    mismatches = int(np.count_nonzero(serial != repeat) + np.count_nonzero(serial != threaded))
    return CheckResult("determinism", mismatches == 0, float(mismatches), 0.0)


CHECKS: tuple[Callable[[SettingsManager], CheckResult], ...] = (
    check_squeezing_law,
    check_appendix_closure,
    check_oracle_fock,
    check_oracle_coherent,
    check_shot_noise,
    check_spectrum,
    check_fig2a,
    check_fig2b,
    check_route_equivalence,
    check_poisson_mixture,
    check_determinism,
)


def run_checks(settings: SettingsManager) -> list[CheckResult]:
    """Run every check in order, logging each verdict."""
    results = []
    for check in CHECKS:
        result = check(settings)
        mark = "✓" if result.passed else "✗"
        log = logger.info if result.passed else logger.error
        log(f"{mark} {result.name}: value={result.value:.6g} threshold={result.threshold:g} {result.detail}".rstrip())
        results.append(result)
    return results
