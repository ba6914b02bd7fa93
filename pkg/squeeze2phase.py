#!/usr/bin/env python3
"""
squeeze2phase - homodyne statistics and relative-phase distributions of squeezed vacuum

Subcommands:
- coeffs: squeezed-vacuum pair amplitudes C_m
- variance: analytic n_bc variances (coherent, Fock, Poisson-mixture, homodyne-mapping and
  phase-averaged routes) over a theta sweep
- oracle: exact block-by-block moments next to the matching analytic route
- sample: seeded Monte Carlo records of n_bc
- phase: relative-phase distribution P(Phi) (closed and/or general route)
- fig2a: P(Phi) for r = 1 and r = 2
- fig2b: log variance ratio against r, with the fitted slope
- check: the full invariant suite

Usage examples:
    python squeeze2phase.py variance --r 1 --phi 0 --beta 10 --theta 0
    python squeeze2phase.py --format json --out out/fig2b.json fig2b
    python squeeze2phase.py sample --mode fock --seed 42
    python squeeze2phase.py check

Angles are in radians. Tables go to standard output unless --out is given;
logging goes to standard error.
"""

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from analytic import (
    HomodyneSettings,
    Route,
    homodyne_mapping,
    nbc_variance_coherent,
    nbc_variance_coherent_exact,
    nbc_variance_fock,
    nbc_variance_series,
    phase_averaged_variance,
    poisson_mixture_variance,
)
from block_sim import (
    SEED_LIMIT,
    TwoModeState,
    build_entangled_state,
    coherent_lo_state,
    nbc_moments,
    outcome_distribution,
    sample_nbc,
    shot_noise_state,
    summarize_samples,
)
from checks import run_checks
from core import (
    DEFAULT_TOLERANCES,
    Tolerances,
    require_finite,
    require_non_negative,
    require_non_negative_int,
    require_positive_int,
)
from fock_core import (
    FockVector,
    SqueezeParams,
    pair_coefficients,
    quadrature_statistics,
    squeezed_vacuum_coefficients,
    truncation_for_tolerance,
)
from phase_dist import (
    fit_log_ratio_slope,
    log_variance_ratio_curve,
    peak_locations,
    phase_distribution_closed,
    phase_distribution_general,
    restricted_window_stats,
    uniform_window_variance,
)
from settings import SettingsManager, get_settings_manager
from tables import FORMATS, Table, write_output

# Set up logging
logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_CHECK_FAILED = 3
EXIT_INTERRUPTED = 130

COMMANDS = ("coeffs", "variance", "oracle", "sample", "phase", "fig2a", "fig2b", "check")
CHOICES = {
    "mode": {"oracle": ("fock", "coherent"), "sample": ("shot", "fock", "coherent")},
    "route": {"phase": ("closed", "general", "both")},
}

_NON_NEGATIVE = ("r", "beta", "alpha", "n_sigma", "r_start", "r_stop")
_FINITE = ("phi", "varphi", "theta")
_NON_NEGATIVE_INT = ("n_total", "m_max", "seed")
_POSITIVE_INT = ("grid_points", "samples", "theta_points", "r_count")


@dataclass
class RunConfig:
    """One subcommand with fully resolved parameters and its output target."""

    command: str
    params: dict = field(default_factory=dict)
    fmt: str = "csv"
    out: Optional[str] = None
    settings: Optional[SettingsManager] = field(default=None, repr=False)

    def validate(self) -> None:
        """
        Check every parameter against its operation's preconditions before any computation.

        Raises:
            ValueError: On an unknown command, format or choice, or an out-of-range value.
        """
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command '{self.command}'. Available commands: {list(COMMANDS)}")
        if self.fmt not in FORMATS:
            raise ValueError(f"Unknown output format '{self.fmt}'. Available formats: {list(FORMATS)}")

        for key, value in self.params.items():
            if value is None:
                continue
            if key in _NON_NEGATIVE:
                require_non_negative(key, value)
            elif key in _FINITE:
                require_finite(key, value)
            elif key in _NON_NEGATIVE_INT:
                require_non_negative_int(key, value)
            elif key in _POSITIVE_INT:
                require_positive_int(key, value)
            elif key in CHOICES and self.command in CHOICES[key]:
                allowed = CHOICES[key][self.command]
                if value not in allowed:
                    raise ValueError(f"{key} must be one of {list(allowed)}, got {value!r}")
            elif key == "r_values":
                for r in value:
                    require_non_negative("r_values", r)

        seed = self.params.get("seed")
        if seed is not None and seed >= SEED_LIMIT:
            raise ValueError(f"seed must be below 2**64, got {seed}")
        if self.params.get("alpha") == 0.0:
            raise ValueError("alpha must be positive for the Poisson mixture")
        if self.command == "fig2b" and not 0.0 < self.params["r_start"] <= self.params["r_stop"]:
            raise ValueError("fig2b needs 0 < r_start <= r_stop")

    @property
    def tolerances(self) -> Tolerances:
        """Library tolerances from the settings file."""
        return self.settings.get_tolerances() if self.settings is not None else DEFAULT_TOLERANCES

    def emit(self, table: Table) -> None:
        table.parameters = {"command": self.command, **self.params}
        write_output(table.render(self.fmt), self.out)


def _banner(title: str) -> None:
    logger.info("=" * 60)
    logger.info(title)
    logger.info("=" * 60)


def _theta_values(params: dict) -> list[float]:
    """The single --theta, or theta_points angles k pi / K over [0, pi)."""
    if params.get("theta") is not None:
        return [float(params["theta"])]
    count = params["theta_points"]
    return [k * math.pi / count for k in range(count)]


def _squeeze_params(params: dict) -> SqueezeParams:
    return SqueezeParams(params["r"], params["phi"])


def _relative_error(value: float, reference: float) -> float:
    """|value - reference| / reference, or the absolute difference when reference is zero."""
    difference = abs(value - reference)
    return difference / abs(reference) if reference else difference


def cmd_coeffs(config: RunConfig) -> int:
    """
    Tabulate C_m of the squeezed vacuum.

    Args:
        config: Resolved run configuration

    Returns:
        Exit code
    """
    _banner("SQUEEZED-VACUUM PAIR AMPLITUDES")
    params = config.params
    squeeze = _squeeze_params(params)
    tail_mass = config.settings.get_numeric("tail_mass")
    if params["m_max"] is None:
        params["m_max"] = truncation_for_tolerance(squeeze.r, tail_mass)
        logger.info(f"m_max={params['m_max']} leaves less than {tail_mass:g} of the probability")

    pairs = pair_coefficients(squeeze, params["m_max"])
    populations = np.abs(pairs) ** 2
    table = Table("coeffs", ("m", "real", "imag", "abs2"))
    for m, (c, p) in enumerate(zip(pairs, populations)):
        table.add_row(m, float(c.real), float(c.imag), float(p))
    table.summary = {"squared_norm": float(populations.sum())}
    config.emit(table)
    return EXIT_OK


def _signal_state(config: RunConfig, squeeze: SqueezeParams) -> FockVector:
    """Squeezed vacuum truncated at the configured tail mass."""
    m_max = truncation_for_tolerance(squeeze.r, config.settings.get_numeric("tail_mass"))
    return squeezed_vacuum_coefficients(squeeze, m_max)


def cmd_variance(config: RunConfig) -> int:
    """
    Analytic n_bc variances at each theta.

    Rows per angle: the coherent-basis, Fock-basis and Poisson-mixture
    predictions, the homodyne mapping 4 beta^2 Var X(theta) from the exact
    quadrature statistics of the truncated signal, and the phase-averaged
    variance for an unknown squeeze phase. N defaults to round(beta^2) and
    alpha to beta, so every route describes the same laser intensity.
    """
    _banner("ANALYTIC HOMODYNE VARIANCES")
    params = config.params
    squeeze = _squeeze_params(params)
    tolerances = config.tolerances
    if params["n_total"] is None:
        params["n_total"] = round(params["beta"] ** 2)
    if params["alpha"] is None:
        params["alpha"] = params["beta"]
    signal = _signal_state(config, squeeze)

    table = Table("variance", ("theta", "route", "mean", "variance"))
    for theta in _theta_values(params):
        lo = HomodyneSettings.for_theta(theta, beta=params["beta"])
        reports = [
            nbc_variance_coherent(lo.beta, squeeze, lo.theta),
            nbc_variance_fock(params["n_total"], squeeze, lo.theta),
            poisson_mixture_variance(params["alpha"], squeeze, lo.theta, params["n_sigma"], tolerances),
            homodyne_mapping(lo.beta, quadrature_statistics(signal, lo.theta, tolerances)),
            phase_averaged_variance(lo.beta, squeeze.r, lo.theta),
        ]
        for report in reports:
            table.add_row(theta, report.route, report.mean, report.variance)
    table.summary = {"shot_noise": params["beta"] ** 2, "poisson_relative_spread": 1.0 / params["alpha"]}
    config.emit(table)
    return EXIT_OK


def cmd_oracle(config: RunConfig) -> int:
    """
    Exact block moments of the entangled Fock-basis state or the coherent-LO product state.

    Each theta yields one row per analytic route the oracle is compared with.
    """
    params = config.params
    mode = params["mode"]
    _banner(f"BLOCK ORACLE ({mode.upper()} LOCAL OSCILLATOR)")
    squeeze = _squeeze_params(params)
    tolerances = config.tolerances

    if mode == "coherent":
        signal = _signal_state(config, squeeze)
        amplitude = {"beta": params["beta"]}
    else:
        pairs = pair_coefficients(squeeze, params["n_total"] // 2)
        amplitude = {"n_total": params["n_total"]}

    table = Table("oracle", ("theta", "route", "predicted", "oracle_mean", "oracle_variance", "relative_error"))
    worst = 0.0
    for theta in _theta_values(params):
        lo = HomodyneSettings.for_theta(theta, **amplitude)
        if mode == "coherent":
            state = coherent_lo_state(lo.beta, lo.lo_phase, signal)
            predictions = [
                nbc_variance_coherent_exact(lo.beta, squeeze, lo.theta),
                nbc_variance_coherent(lo.beta, squeeze, lo.theta),
            ]
        else:
            state = TwoModeState.from_block(build_entangled_state(squeeze, lo.n_total, lo.lo_phase))
            predictions = [
                nbc_variance_fock(lo.n_total, squeeze, lo.theta),
                nbc_variance_series(pairs, lo.n_total, lo.theta),
            ]
        oracle = nbc_moments(state, tolerances)
        for prediction in predictions:
            error = _relative_error(oracle.variance, prediction.variance)
            if prediction.route in (Route.FOCK_ANALYTIC, Route.COHERENT_EXACT):
                worst = max(worst, error)
            table.add_row(theta, prediction.route, prediction.variance, oracle.mean, oracle.variance, error)
    table.summary = {"max_relative_error": worst}
    config.emit(table)
    return EXIT_OK


def _sampling_state(config: RunConfig) -> TwoModeState:
    params = config.params
    mode = params["mode"]
    if mode == "shot":
        return shot_noise_state(params["n_total"])
    squeeze = _squeeze_params(params)
    if mode == "fock":
        lo = HomodyneSettings.for_theta(params["theta"], n_total=params["n_total"])
        return TwoModeState.from_block(build_entangled_state(squeeze, lo.n_total, lo.lo_phase))
    lo = HomodyneSettings.for_theta(params["theta"], beta=params["beta"])
    return coherent_lo_state(lo.beta, lo.lo_phase, _signal_state(config, squeeze))


def cmd_sample(config: RunConfig) -> int:
    """
    Seeded Monte Carlo n_bc records, summarized against the exact outcome distribution.

    The default artifact is the outcome histogram; --records dumps every draw.
    """
    params = config.params
    _banner(f"MONTE CARLO SAMPLING ({params['mode'].upper()} STATE)")
    state = _sampling_state(config)
    samples = sample_nbc(
        state,
        params["samples"],
        params["seed"],
        chunk_size=config.settings.get_numeric("sample_chunk_size"),
        max_workers=config.settings.get_numeric("max_workers"),
        tolerances=config.tolerances,
    )
    sampled = summarize_samples(samples)
    exact = nbc_moments(state, config.tolerances)

    if params["records"]:
        table = Table("sample", ("index", "n_bc"))
        for index, outcome in enumerate(samples.tolist()):
            table.add_row(index, outcome)
    else:
        table = Table("sample", ("outcome", "count", "frequency", "probability"))
        outcomes, counts = np.unique(samples, return_counts=True)
        observed = dict(zip(outcomes.tolist(), counts.tolist()))
        for outcome, probability in outcome_distribution(state).items():
            count = observed.get(outcome, 0)
            if count or probability > 0.0:
                table.add_row(outcome, count, count / samples.size, probability)

    table.summary = {
        "sample_mean": sampled.mean,
        "sample_variance": sampled.variance,
        "exact_mean": exact.mean,
        "exact_variance": exact.variance,
        "relative_error": _relative_error(sampled.variance, exact.variance),
    }
    logger.info(f"Sample variance {sampled.variance:.6g} vs exact {exact.variance:.6g}")
    config.emit(table)
    return EXIT_OK


def cmd_phase(config: RunConfig) -> int:
    """
    Dump P(Phi) on the grid, by the closed form, the general projector route, or both.
    """
    params = config.params
    route = params["route"]
    _banner(f"RELATIVE-PHASE DISTRIBUTION ({route.upper()})")
    squeeze = _squeeze_params(params)
    tolerances = config.tolerances

    distributions = {}
    if route in ("closed", "both"):
        distributions["density"] = phase_distribution_closed(
            squeeze, params["varphi"], params["m_max"], params["grid_points"]
        )
    if route in ("general", "both"):
        block = build_entangled_state(squeeze, params["n_total"], params["varphi"], params["m_max"])
        key = "density_general" if route == "both" else "density"
        distributions[key] = phase_distribution_general(
            TwoModeState.from_block(block), params["grid_points"], tolerances
        )

    reference = next(iter(distributions.values()))
    table = Table("phase", ("phi_grid", *distributions))
    columns = [d.density for d in distributions.values()]
    for j, phi_value in enumerate(reference.grid.tolist()):
        table.add_row(phi_value, *(float(c[j]) for c in columns))

    stats = restricted_window_stats(reference, (0.0, math.pi), tolerances)
    first, second = peak_locations(reference)
    table.summary = {
        "integral": reference.integral(),
        "peak_1": first,
        "peak_2": second,
        "window_mean": stats.mean,
        "window_variance": stats.variance,
    }
    if route == "both":
        table.summary["max_route_difference"] = float(np.max(np.abs(columns[0] - columns[1])))
    config.emit(table)
    return EXIT_OK


def cmd_fig2a(config: RunConfig) -> int:
    """
    The two closed-form distributions at r = 1 and r = 2 (phi = varphi = 0, m_max = 200).
    """
    _banner("PHASE DISTRIBUTIONS FOR r = 1 AND r = 2")
    params = config.params
    distributions = {
        f"density_r{r:g}": phase_distribution_closed(
            SqueezeParams(r, params["phi"]), params["varphi"], params["m_max"], params["grid_points"]
        )
        for r in params["r_values"]
    }
    grid = next(iter(distributions.values())).grid
    table = Table("fig2a", ("phi_grid", *distributions))
    for j, phi_value in enumerate(grid.tolist()):
        table.add_row(phi_value, *(float(d.density[j]) for d in distributions.values()))

    for r, dist in zip(params["r_values"], distributions.values()):
        first, second = peak_locations(dist)
        table.summary[f"peaks_r{r:g}"] = [first, second]
        table.summary[f"window_variance_r{r:g}"] = restricted_window_stats(
            dist, (0.0, math.pi), config.tolerances
        ).variance
    config.emit(table)
    return EXIT_OK


def cmd_fig2b(config: RunConfig) -> int:
    """
    ln(sigma_psi^2 / sigma_0^2) on the [0, pi] window against r, plus the least-squares slope.
    """
    _banner("LOG VARIANCE RATIO AGAINST r")
    params = config.params
    r_values = np.linspace(params["r_start"], params["r_stop"], params["r_count"])
    curve = log_variance_ratio_curve(
        r_values,
        params["phi"],
        params["varphi"],
        params["m_max"],
        params["grid_points"],
        max_workers=config.settings.get_numeric("max_workers"),
        tolerances=config.tolerances,
    )
    table = Table("fig2b", ("r", "log_ratio"))
    for r, log_ratio in curve:
        table.add_row(r, log_ratio)

    table.summary = {"baseline": uniform_window_variance(0.0, math.pi)}
    if len(curve) >= 2:
        slope, intercept = fit_log_ratio_slope(curve)
        table.summary.update({"slope": slope, "intercept": intercept})
        logger.info(f"Fitted slope {slope:.4f}")
    config.emit(table)
    return EXIT_OK


def cmd_check(config: RunConfig) -> int:
    """
    Run the invariant suite; exit 3 if any property fails.
    """
    _banner("INVARIANT SUITE")
    settings = config.settings
    settings.update_defaults("check", seed=config.params["seed"])
    results = run_checks(settings)

    table = Table("check", ("name", "passed", "value", "threshold", "detail"))
    for result in results:
        table.add_row(result.name, result.passed, result.value, result.threshold, result.detail)
    failed = [r.name for r in results if not r.passed]
    table.summary = {"passed": len(results) - len(failed), "failed": len(failed)}
    config.emit(table)

    if failed:
        logger.error(f"✗ {len(failed)} check(s) failed: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    logger.info("✓ ALL CHECKS PASSED")
    return EXIT_OK


HANDLERS = {
    "coeffs": cmd_coeffs,
    "variance": cmd_variance,
    "oracle": cmd_oracle,
    "sample": cmd_sample,
    "phase": cmd_phase,
    "fig2a": cmd_fig2a,
    "fig2b": cmd_fig2b,
    "check": cmd_check,
}


def _add_squeeze_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--r", type=float, default=None, help="Squeeze magnitude r >= 0")
    parser.add_argument("--phi", type=float, default=None, help="Squeeze phase phi (radians)")


def _add_theta_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--theta", type=float, default=None, help="Single quadrature angle (radians); omit for a sweep"
    )
    parser.add_argument(
        "--theta-points", type=int, default=None, help="Angles k*pi/K in the sweep over [0, pi)"
    )


def _add_grid_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m-max", type=int, default=None, help="Highest pair index m_max")
    parser.add_argument("--grid-points", type=int, default=None, help="Grid points on [0, 2pi)")


def create_parser() -> argparse.ArgumentParser:
    """
    Create the argument parser with subcommands.

    Every numeric option defaults to None so that unset flags fall back to the
    settings file.

    Returns:
        Configured ArgumentParser
    """
    parser = argparse.ArgumentParser(
        prog="squeeze2phase",
        description="Homodyne statistics and relative-phase distributions of squeezed vacuum",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Analytic variances at one angle (both routes give ~13.5335)
  python squeeze2phase.py variance --r 1 --phi 0 --beta 10 --theta 0

  # Exact block oracle against N F(r, phi, theta), 16-angle sweep
  python squeeze2phase.py oracle --mode fock --n-total 200

  # Reproduce the r = 1 / r = 2 phase distributions as JSON
  python squeeze2phase.py --format json --out out/fig2a.json fig2a

  # Seeded Monte Carlo of the shot-noise baseline
  python squeeze2phase.py sample --mode shot --seed 42

  # Everything at once; exit status 3 if a property fails
  python squeeze2phase.py check
        """,
    )

    # Global options
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    parser.add_argument("--config", type=str, default=None, help="Alternative settings YAML file")
    parser.add_argument("--format", choices=FORMATS, default="csv", help="Output format (default: csv)")
    parser.add_argument("--out", type=str, default=None, help="Output path (default: standard output)")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    parser_coeffs = subparsers.add_parser(
        "coeffs", help="Squeezed-vacuum pair amplitudes C_m", description="Tabulate m, Re C_m, Im C_m, |C_m|^2"
    )
    _add_squeeze_options(parser_coeffs)
    parser_coeffs.add_argument(
        "--m-max", type=int, default=None, help="Highest pair index (default: from the tail-mass tolerance)"
    )

    parser_variance = subparsers.add_parser(
        "variance",
        help="Analytic n_bc variances over a theta sweep",
        description="Coherent-basis, Fock-basis and Poisson-mixture variance predictions",
    )
    _add_squeeze_options(parser_variance)
    _add_theta_options(parser_variance)
    parser_variance.add_argument("--beta", type=float, default=None, help="Coherent LO amplitude")
    parser_variance.add_argument("--n-total", type=int, default=None, help="Total photons N (default: round(beta^2))")
    parser_variance.add_argument("--alpha", type=float, default=None, help="Laser amplitude (default: beta)")
    parser_variance.add_argument("--n-sigma", type=float, default=None, help="Poisson window half-width in sigmas")

    parser_oracle = subparsers.add_parser(
        "oracle",
        help="Exact block moments next to the analytic routes",
        description="Brute-force n_bc moments of the Fock-basis or coherent-LO state",
    )
    parser_oracle.add_argument("--mode", choices=CHOICES["mode"]["oracle"], default=None)
    _add_squeeze_options(parser_oracle)
    _add_theta_options(parser_oracle)
    parser_oracle.add_argument("--n-total", type=int, default=None, help="Total photons N (fock mode)")
    parser_oracle.add_argument("--beta", type=float, default=None, help="Coherent LO amplitude (coherent mode)")

    parser_sample = subparsers.add_parser(
        "sample", help="Seeded Monte Carlo n_bc records", description="Draw n_bc outcomes block by block"
    )
    parser_sample.add_argument("--mode", choices=CHOICES["mode"]["sample"], default=None)
    _add_squeeze_options(parser_sample)
    parser_sample.add_argument("--theta", type=float, default=None, help="Quadrature angle (radians)")
    parser_sample.add_argument("--n-total", type=int, default=None, help="Total photons N (shot and fock modes)")
    parser_sample.add_argument("--beta", type=float, default=None, help="Coherent LO amplitude (coherent mode)")
    parser_sample.add_argument("--samples", type=int, default=None, help="Number of records")
    parser_sample.add_argument("--seed", type=int, default=None, help="Random seed, 0 <= seed < 2**64")
    parser_sample.add_argument(
        "--records", action="store_true", default=None, help="Dump every record instead of the histogram"
    )

    parser_phase = subparsers.add_parser(
        "phase", help="Relative-phase distribution P(Phi)", description="Closed-form and/or projector-route P(Phi)"
    )
    parser_phase.add_argument("--route", choices=CHOICES["route"]["phase"], default=None)
    _add_squeeze_options(parser_phase)
    parser_phase.add_argument("--varphi", type=float, default=None, help="Local-oscillator phase (radians)")
    parser_phase.add_argument("--n-total", type=int, default=None, help="Total photons N (general route)")
    _add_grid_options(parser_phase)

    parser_fig2a = subparsers.add_parser("fig2a", help="P(Phi) for r = 1 and r = 2")
    _add_grid_options(parser_fig2a)

    parser_fig2b = subparsers.add_parser("fig2b", help="Log variance ratio against r with fitted slope")
    _add_grid_options(parser_fig2b)

    parser_check = subparsers.add_parser("check", help="Run the invariant suite")
    parser_check.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")

    return parser


_GLOBAL_KEYS = ("verbose", "config", "format", "out", "command")


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge command-line values over the settings defaults and validate the result.

    Raises:
        ValueError: If a parameter is unknown or out of range.
    """
    settings = get_settings_manager(args.config)
    overrides = {k: v for k, v in vars(args).items() if k not in _GLOBAL_KEYS and v is not None}
    settings.validate_parameters(args.command, **overrides)
    config = RunConfig(
        command=args.command,
        params=settings.get_defaults(args.command, **overrides),
        fmt=args.format,
        out=args.out,
        settings=settings,
    )
    config.validate()
    return config


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point."""
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_INVALID

    try:
        config = build_run_config(args)
    except (ValueError, KeyError, FileNotFoundError, yaml.YAMLError) as e:
        logger.error(f"✗ Invalid configuration: {e}")
        return EXIT_INVALID

    try:
        return HANDLERS[config.command](config)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_INTERRUPTED
    except (ValueError, KeyError) as e:
        logger.error(f"✗ {config.command} rejected its parameters: {e}")
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        if args.verbose:
            import traceback

            traceback.print_exc()
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
