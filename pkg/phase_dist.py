"""
phase_dist - relative-phase distribution between the signal (mode a) and the
local oscillator (mode a0).

The distribution is P(Phi) = sum_N <Phi^(N)| rho |Phi^(N)> with the
total-number-conserving phase states

    |Phi^(N)> = (2 pi)^{-1/2} sum_{n=0}^{N} e^{i n Phi} |n>_a |N-n>_{a0}.

For the entangled squeezed-vacuum state it reduces to the closed form

    P(Phi) = (1/2pi) |sum_m C_m e^{-2im(Phi + varphi)}|^2,

independent of N once |C_m| is negligible near 2m ~ N.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import simpson

from block_sim import TwoModeState
from core import (
    DEFAULT_TOLERANCES,
    TWO_PI,
    Tolerances,
    check_truncated_norm,
    frozen_array,
    parallel_map,
    require_finite,
    require_non_negative_int,
    require_positive_int,
)
from fock_core import SqueezeParams, pair_coefficients

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 4096
FIG2_M_MAX = 200
# Pair indices summed per vectorized block in the closed form.
_M_CHUNK = 64


@dataclass(frozen=True)
class PhaseDistribution:
    """Density P(Phi) (per radian) sampled on the uniform grid 2 pi j / G, j = 0..G-1."""

    grid: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)

    def __post_init__(self):
        grid = frozen_array(self.grid, dtype=float)
        density = frozen_array(self.density, dtype=float)
        if grid.size != density.size:
            raise ValueError(f"grid has {grid.size} points but density has {density.size}")
        if np.any(density < 0.0):
            raise ValueError("phase density must be non-negative")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", density)

    @property
    def grid_points(self) -> int:
        return self.grid.size

    @property
    def step(self) -> float:
        return TWO_PI / self.grid.size

    def integral(self) -> float:
        """Periodic trapezoid rule over [0, 2pi); exact for harmonics below the Nyquist limit."""
        return float(self.density.sum() * self.step)


@dataclass(frozen=True)
class WindowStats:
    """Linear mean and variance of the density renormalized to [lo, hi], plus the raw window mass."""

    lo: float
    hi: float
    mean: float
    variance: float
    window_mass: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"window needs lo < hi, got [{self.lo}, {self.hi}]")
        if not 0.0 <= self.variance <= (self.hi - self.lo) ** 2 / 4.0:
            raise ValueError(f"variance {self.variance} outside [0, (hi - lo)^2 / 4]")

    @property
    def window(self) -> tuple[float, float]:
        return self.lo, self.hi


def phase_grid(grid_points: int) -> np.ndarray:
    grid_points = require_positive_int("grid_points", grid_points)
    return TWO_PI * np.arange(grid_points) / grid_points


def _require_resolved(grid_points: int, harmonic: int) -> None:
    if grid_points < 2 * harmonic:
        raise ValueError(
            f"grid of {grid_points} points cannot resolve harmonic {harmonic}; need at least {2 * harmonic}"
        )


def phase_distribution_closed(
    params: SqueezeParams,
    varphi: float,
    m_max: int = FIG2_M_MAX,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> PhaseDistribution:
    """
    Evaluate (1/2pi) |sum_{m<=m_max} C_m e^{-2im(Phi + varphi)}|^2 by direct summation.

    Args:
        params: Squeeze parameters of C_m
        varphi: Local-oscillator phase
        m_max: Highest pair index, standing in for the infinite sum
        grid_points: Number of grid points G on [0, 2pi)

    Returns:
        PhaseDistribution on the G-point grid

    Raises:
        ValueError: If G < 4 m_max (the highest harmonic 2 m_max would alias).
    """
    m_max = require_non_negative_int("m_max", m_max)
    varphi = require_finite("varphi", varphi)
    grid = phase_grid(grid_points)
    _require_resolved(grid.size, 2 * m_max)

    pairs = pair_coefficients(params, m_max)
    shifted = grid + varphi
    amplitude = np.zeros(grid.size, dtype=complex)
    for start in range(0, pairs.size, _M_CHUNK):
        m = np.arange(start, min(start + _M_CHUNK, pairs.size))
        amplitude += np.exp(-2j * np.outer(shifted, m)) @ pairs[m]
    density = np.abs(amplitude) ** 2 / TWO_PI
    return PhaseDistribution(grid=grid, density=density)


def _highest_harmonic(state: TwoModeState) -> int:
    highest = 0
    for block in state.blocks.values():
        nonzero = np.nonzero(block.amplitudes)[0]
        if nonzero.size:
            highest = max(highest, int(nonzero[-1]))
    return highest


def phase_distribution_general(
    state: TwoModeState,
    grid_points: int = DEFAULT_GRID_POINTS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> PhaseDistribution:
    """
    P(Phi) = sum_N |<Phi^(N)|psi_N>|^2 for any block-structured pure state.

    <Phi^(N)|psi_N> = (2pi)^{-1/2} sum_k e^{-ik Phi} psi_N[k] is a discrete Fourier
    sum, evaluated with an FFT of the zero-padded block. The density is not
    renormalized: it integrates to the state's squared norm.

    Raises:
        ValueError: If the state exceeds unit norm or has lost more than
            tolerances.truncation_mass, or the grid is coarser than twice the
            highest occupied photon number in mode a.
    """
    grid = phase_grid(grid_points)
    check_truncated_norm(state.squared_norm, "phase_distribution_general input", tolerances)
    highest = _highest_harmonic(state)
    _require_resolved(grid.size, highest)

    density = np.zeros(grid.size)
    for block in state.blocks.values():
        amplitudes = block.amplitudes[: highest + 1]
        transform = np.fft.fft(amplitudes, n=grid.size)
        density += np.abs(transform) ** 2
    density /= TWO_PI
    logger.debug(f"General-route phase distribution over {len(state.blocks)} blocks, harmonic {highest}")
    return PhaseDistribution(grid=grid, density=density)


def uniform_window_variance(lo: float, hi: float) -> float:
    """(hi - lo)^2 / 12: the vacuum-signal baseline of a restricted window."""
    return (hi - lo) ** 2 / 12.0


def restricted_window_stats(
    dist: PhaseDistribution,
    window: tuple[float, float],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> WindowStats:
    """
    Linear mean and variance of P restricted to [lo, hi] and renormalized there.

    Interior grid points are used as they are; the endpoints are interpolated
    periodically. Moments use composite Simpson quadrature, which is exact for
    the uniform baseline.

    Raises:
        ValueError: For empty, reversed or out-of-range windows, or a window mass
            below tolerances.window_mass.
    """
    lo, hi = (float(v) for v in window)
    if not (0.0 <= lo < hi <= TWO_PI):
        raise ValueError(f"window must satisfy 0 <= lo < hi <= 2pi, got [{lo}, {hi}]")

    # Grid points within rounding of an endpoint would make a degenerate Simpson panel.
    margin = 1e-9 * dist.step
    inside = dist.grid[(dist.grid > lo + margin) & (dist.grid < hi - margin)]
    nodes = np.concatenate(([lo], inside, [hi]))
    values = np.interp(nodes, dist.grid, dist.density, period=TWO_PI)

    mass = float(simpson(values, x=nodes))
    if mass < tolerances.window_mass:
        raise ValueError(f"window [{lo}, {hi}] holds mass {mass:.3g} < {tolerances.window_mass:g}")
    mean = float(simpson(values * nodes, x=nodes)) / mass
    variance = float(simpson(values * (nodes - mean) ** 2, x=nodes)) / mass
    variance = min(max(variance, 0.0), (hi - lo) ** 2 / 4.0)
    return WindowStats(lo=lo, hi=hi, mean=mean, variance=variance, window_mass=mass)


def peak_locations(dist: PhaseDistribution) -> tuple[float, float]:
    """Grid argmax in [0, pi) and in [pi, 2pi)."""
    half = dist.grid < math.pi
    first = dist.grid[half][np.argmax(dist.density[half])]
    second = dist.grid[~half][np.argmax(dist.density[~half])]
    return float(first), float(second)


def log_variance_ratio_curve(
    r_values: Sequence[float],
    phi: float = 0.0,
    varphi: float = 0.0,
    m_max: int = FIG2_M_MAX,
    grid_points: int = DEFAULT_GRID_POINTS,
    max_workers: int | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> list[tuple[float, float]]:
    """
    ln(sigma_psi^2 / sigma_0^2) against r, on the [0, pi] window.

    sigma_0^2 = pi^2/12 is the window variance of the uniform (vacuum-signal)
    distribution. Points are computed concurrently and returned in input order.

    Returns:
        List of (r, log_ratio)
    """
    r_values = [float(r) for r in r_values]
    if any(not r > 0.0 for r in r_values):
        raise ValueError(f"r_values must be positive, got {r_values}")
    baseline = uniform_window_variance(0.0, math.pi)

    def point(r: float) -> tuple[float, float]:
        dist = phase_distribution_closed(SqueezeParams(r, phi), varphi, m_max, grid_points)
        stats = restricted_window_stats(dist, (0.0, math.pi), tolerances)
        return r, math.log(stats.variance / baseline)

    return parallel_map(point, r_values, max_workers)


def fit_log_ratio_slope(curve: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Ordinary least-squares (slope, intercept) of log_ratio against r."""
    if len(curve) < 2:
        raise ValueError("need at least two curve points to fit a slope")
    r, log_ratio = np.asarray(curve, dtype=float).T
    slope, intercept = np.polyfit(r, log_ratio, 1)
    return float(slope), float(intercept)
