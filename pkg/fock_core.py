"""
fock_core - single-mode Fock amplitudes, squeezed-vacuum coefficients and
quadrature statistics.

The squeezed vacuum |xi> = S(xi)|vac>, S(xi) = exp((xi* a^2 - xi a^dag^2)/2),
xi = r e^{i phi}, has only even photon numbers with pair amplitudes

    C_m = sqrt(sech r) (-1)^m sqrt((2m)!) / (2^m m!) (e^{i phi} tanh r)^m.

Coefficients are produced by the ratio recurrence

    C_{m+1} = C_m (-e^{i phi} tanh r) sqrt((2m+1)(2m+2)) / (2(m+1)),

which never forms (2m)! and so does not overflow past m = 85.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from core import (
    DEFAULT_TOLERANCES,
    TWO_PI,
    Tolerances,
    check_norm_bound,
    check_truncated_norm,
    frozen_array,
    require_finite,
    require_non_negative,
    require_non_negative_int,
    squared_norm,
)

logger = logging.getLogger(__name__)

# Hard stop for the tail search; r ~ 5 already needs ~1e5 terms.
MAX_TAIL_TERMS = 10_000_000


@dataclass(frozen=True)
class SqueezeParams:
    """Squeeze magnitude r >= 0 and phase phi, reduced into [0, 2pi)."""

    r: float
    phi: float = 0.0

    def __post_init__(self):
        r = require_non_negative("r", self.r)
        phi = require_finite("phi", self.phi) % TWO_PI
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "phi", float(phi))

    @property
    def xi(self) -> complex:
        return self.r * complex(math.cos(self.phi), math.sin(self.phi))


@dataclass(frozen=True)
class FockVector:
    """
    Complex amplitudes over photon numbers 0..cutoff of one mode.

    The squared norm may fall short of 1 (truncated tail) but may not exceed
    1 + EPS_NORM.
    """

    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amplitudes = frozen_array(self.amplitudes)
        if amplitudes.size == 0:
            raise ValueError("FockVector needs at least one amplitude")
        check_norm_bound(squared_norm(amplitudes), "FockVector")
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size - 1

    @property
    def squared_norm(self) -> float:
        return squared_norm(self.amplitudes)

    def __len__(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class QuadratureStats:
    """Mean and variance of X(theta) = (a e^{-i theta} + a^dag e^{i theta}) / 2."""

    theta: float
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError(f"variance must be non-negative, got {self.variance}")


def pair_coefficients(params: SqueezeParams, m_max: int) -> np.ndarray:
    """
    Return C_0..C_{m_max} of the squeezed vacuum by the ratio recurrence.

    Args:
        params: Squeeze parameters
        m_max: Highest pair index

    Returns:
        Read-only complex array of length m_max + 1
    """
    m_max = require_non_negative_int("m_max", m_max)
    c0 = 1.0 / math.sqrt(math.cosh(params.r))
    m = np.arange(m_max, dtype=float)
    ratios = (
        -np.exp(1j * params.phi)
        * math.tanh(params.r)
        * np.sqrt((2 * m + 1) * (2 * m + 2))
        / (2 * (m + 1))
    )
    coefficients = np.empty(m_max + 1, dtype=complex)
    coefficients[0] = c0
    coefficients[1:] = c0 * np.cumprod(ratios)
    return frozen_array(coefficients)


def direct_pair_coefficients(params: SqueezeParams, m_max: int) -> np.ndarray:
    """
    Evaluate C_m straight from the closed form, magnitudes in log space.

    Independent of the recurrence; used to cross-check it.
    """
    m_max = require_non_negative_int("m_max", m_max)
    m = np.arange(m_max + 1, dtype=float)
    coefficients = np.zeros(m_max + 1, dtype=complex)
    if params.r == 0.0:
        coefficients[0] = 1.0
        return frozen_array(coefficients)

    log_magnitude = (
        -0.5 * math.log(math.cosh(params.r))
        + 0.5 * gammaln(2 * m + 1)
        - m * math.log(2.0)
        - gammaln(m + 1)
        + m * math.log(math.tanh(params.r))
    )
    # (-1)^m e^{i m phi} = e^{i m (phi + pi)}
    phase = np.exp(1j * m * (params.phi + np.pi))
    coefficients[:] = np.exp(log_magnitude) * phase
    return frozen_array(coefficients)


def squeezed_vacuum_coefficients(params: SqueezeParams, m_max: int) -> FockVector:
    """
    Build the truncated squeezed vacuum over photon numbers 0..2*m_max.

    Even index 2m holds C_m, odd indices are exactly zero. r = 0 gives the vacuum.
    """
    pairs = pair_coefficients(params, m_max)
    amplitudes = np.zeros(2 * pairs.size - 1, dtype=complex)
    amplitudes[::2] = pairs
    logger.debug(
        f"Squeezed vacuum r={params.r:g} phi={params.phi:g}: {pairs.size} pairs, "
        f"norm {squared_norm(pairs):.15g}"
    )
    return FockVector(amplitudes)


def truncation_for_tolerance(r: float, tail_mass: float) -> int:
    """
    Smallest m_max whose discarded probability sum_{m > m_max} |C_m|^2 is below tail_mass.

    The populations p_m = |C_m|^2 obey p_{m+1} / p_m = tanh^2 r (2m+1)/(2m+2) < tanh^2 r,
    so everything past index M is bounded by p_{M+1} / (1 - tanh^2 r). Terms are
    generated until that bound is negligible and the exact tails are then summed
    from the far end.

    Args:
        r: Squeeze magnitude
        tail_mass: Discarded-probability budget in (0, 1)

    Returns:
        The truncation index m_max

    Raises:
        ValueError: If tail_mass is outside (0, 1) or r is so large the search
            would not terminate.
    """
    r = require_non_negative("r", r)
    tail_mass = float(tail_mass)
    if not 0.0 < tail_mass < 1.0:
        raise ValueError(f"tail_mass must lie in (0, 1), got {tail_mass!r}")
    if r == 0.0:
        return 0

    ratio_limit = math.tanh(r) ** 2
    geometric = 1.0 / (1.0 - ratio_limit)
    populations = [1.0 / math.cosh(r)]
    m = 0
    while populations[-1] * geometric >= tail_mass * 1e-6:
        populations.append(populations[-1] * ratio_limit * (2 * m + 1) / (2 * m + 2))
        m += 1
        if m > MAX_TAIL_TERMS:
            raise ValueError(
                f"r={r:g} needs more than {MAX_TAIL_TERMS} terms to reach tail_mass={tail_mass:g}"
            )

    p = np.asarray(populations)
    remainder = p[-1] * ratio_limit * geometric
    # tails[M] = sum_{m > M} p_m
    tails = np.cumsum(p[::-1])[::-1] - p + remainder
    below = np.nonzero(tails < tail_mass)[0]
    m_max = int(below[0])
    logger.debug(f"truncation_for_tolerance(r={r:g}, tail={tail_mass:g}) -> m_max={m_max}")
    return m_max


def vacuum(cutoff: int = 0) -> FockVector:
    return fock_state(0, cutoff)


def fock_state(n: int, cutoff: int | None = None) -> FockVector:
    """Number state |n> padded to `cutoff` (defaults to n)."""
    n = require_non_negative_int("n", n)
    cutoff = n if cutoff is None else require_non_negative_int("cutoff", cutoff)
    if cutoff < n:
        raise ValueError(f"cutoff {cutoff} is below the photon number {n}")
    amplitudes = np.zeros(cutoff + 1, dtype=complex)
    amplitudes[n] = 1.0
    return FockVector(amplitudes)


def coherent_tail_mass(beta: float, cutoff: int) -> float:
    """Poisson mass of |beta e^{i varphi}> beyond photon number `cutoff`."""
    beta = require_non_negative("beta", beta)
    if beta == 0.0:
        return 0.0
    return float(poisson.sf(cutoff, beta**2))


def coherent_state(beta: float, varphi: float, cutoff: int) -> FockVector:
    """
    Truncated coherent state |beta e^{i varphi}>.

    Amplitudes e^{-beta^2/2} (beta e^{i varphi})^n / sqrt(n!) are formed in log
    space so large cutoffs do not overflow.
    """
    beta = require_non_negative("beta", beta)
    varphi = require_finite("varphi", varphi)
    cutoff = require_non_negative_int("cutoff", cutoff)
    n = np.arange(cutoff + 1, dtype=float)
    amplitudes = np.zeros(cutoff + 1, dtype=complex)
    if beta == 0.0:
        amplitudes[0] = 1.0
    else:
        log_magnitude = -0.5 * beta**2 + n * math.log(beta) - 0.5 * gammaln(n + 1)
        amplitudes[:] = np.exp(log_magnitude) * np.exp(1j * n * varphi)
    return FockVector(amplitudes)


def photon_number_distribution(state: FockVector) -> np.ndarray:
    """Populations |c_n|^2; for the squeezed vacuum, the even-only mixture sum |C_m|^2 |2m><2m|."""
    return np.abs(state.amplitudes) ** 2


def mean_photon_number(state: FockVector) -> float:
    populations = photon_number_distribution(state)
    return float(np.dot(np.arange(populations.size), populations) / populations.sum())


def quadrature_statistics(
    state: FockVector, theta: float, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> QuadratureStats:
    """
    Exact mean and variance of X(theta) over a truncated single-mode state.

    Uses <X> = Re(e^{-i theta} <a>) and
    <X^2> = (2 Re(e^{-2i theta} <a^2>) + 2 <n> + 1) / 4,
    with every expectation divided by the state's squared norm.

    Args:
        state: Single-mode amplitudes, normalized up to truncation
        theta: Quadrature angle in radians
        tolerances: Norm acceptance limits

    Returns:
        QuadratureStats for the given angle

    Raises:
        ValueError: If the state exceeds unit norm or has lost more than truncation_mass.
    """
    theta = require_finite("theta", theta)
    c = state.amplitudes
    norm = state.squared_norm
    check_truncated_norm(norm, "quadrature_statistics input", tolerances)

    n = np.arange(c.size, dtype=float)
    a_mean = np.vdot(c[:-1], c[1:] * np.sqrt(n[1:])) / norm
    a2_mean = np.vdot(c[:-2], c[2:] * np.sqrt(n[2:] * n[1:-1])) / norm
    n_mean = float(np.dot(n, np.abs(c) ** 2)) / norm

    mean = float((np.exp(-1j * theta) * a_mean).real)
    second = (2.0 * float((np.exp(-2j * theta) * a2_mean).real) + 2.0 * n_mean + 1.0) / 4.0
    variance = max(second - mean**2, 0.0)
    return QuadratureStats(theta=theta, mean=mean, variance=variance)
