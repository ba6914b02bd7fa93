"""
analytic - closed-form homodyne variance predictions in the coherent and Fock
bases, the series behind the Fock-basis result, and the Poisson-mixture average.

All predictions share the squeezing factor

    F(r, phi, theta) = cosh^2 r + sinh^2 r - 2 sinh r cosh r cos(2 theta - phi)
                     = e^{-2r} cos^2(delta/2) + e^{+2r} sin^2(delta/2),  delta = 2 theta - phi,

evaluated in the second form so the squeezed extreme e^{-2r} keeps full
relative precision. The large-N regime condition is not enforced here; the
oracle in block_sim measures where it breaks.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import poisson

from core import DEFAULT_TOLERANCES, Tolerances, require_finite, require_non_negative, require_non_negative_int
from fock_core import MAX_TAIL_TERMS, QuadratureStats, SqueezeParams

logger = logging.getLogger(__name__)

DEFAULT_N_SIGMA = 8.0


class Route(str, Enum):
    """Which computation produced a VarianceReport."""

    COHERENT_ANALYTIC = "coherent-analytic"
    FOCK_ANALYTIC = "fock-analytic"
    ORACLE = "oracle"
    MONTE_CARLO = "monte-carlo"
    POISSON_MIXTURE = "poisson-mixture"
    APPENDIX_SERIES = "appendix-series"
    HOMODYNE_MAPPING = "homodyne-mapping"
    COHERENT_EXACT = "coherent-exact"
    PHASE_AVERAGED = "phase-averaged"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class HomodyneSettings:
    """
    Local-oscillator phase plus either a coherent amplitude beta or a total photon number N.

    The measured quadrature angle is theta = lo_phase + pi/2.
    """

    lo_phase: float
    beta: float | None = None
    n_total: int | None = None

    def __post_init__(self):
        require_finite("lo_phase", self.lo_phase)
        if (self.beta is None) == (self.n_total is None):
            raise ValueError("HomodyneSettings needs exactly one of beta or n_total")
        if self.beta is not None:
            object.__setattr__(self, "beta", require_non_negative("beta", self.beta))
        else:
            object.__setattr__(self, "n_total", require_non_negative_int("n_total", self.n_total))

    @classmethod
    def for_theta(cls, theta: float, **amplitude) -> "HomodyneSettings":
        return cls(lo_phase=float(theta) - math.pi / 2, **amplitude)

    @property
    def theta(self) -> float:
        return self.lo_phase + math.pi / 2

    @property
    def intensity(self) -> float:
        """beta^2 for a coherent local oscillator, N for a Fock-basis one."""
        return self.beta**2 if self.beta is not None else float(self.n_total)


@dataclass(frozen=True)
class VarianceReport:
    """Mean and variance of n_bc together with the route that produced them."""

    mean: float
    variance: float
    route: Route
    theta: float | None = None
    relative_spread: float | None = None

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError(f"variance must be non-negative, got {self.variance}")
        object.__setattr__(self, "route", Route(self.route))


def squeezing_factor(params: SqueezeParams, theta: float) -> float:
    """cosh^2 r + sinh^2 r - 2 sinh r cosh r cos(2 theta - phi)."""
    delta = 2.0 * require_finite("theta", theta) - params.phi
    return (
        math.exp(-2.0 * params.r) * math.cos(delta / 2.0) ** 2
        + math.exp(2.0 * params.r) * math.sin(delta / 2.0) ** 2
    )


def nbc_variance_coherent(beta: float, params: SqueezeParams, theta: float) -> VarianceReport:
    """Coherent local oscillator: <(Delta n_bc)^2> ~ beta^2 F(r, phi, theta)."""
    beta = require_non_negative("beta", beta)
    return VarianceReport(
        mean=0.0,
        variance=beta**2 * squeezing_factor(params, theta),
        route=Route.COHERENT_ANALYTIC,
        theta=theta,
    )


def nbc_variance_fock(n_total: int, params: SqueezeParams, theta: float) -> VarianceReport:
    """Fock-basis local oscillator with N photons in modes a and a0: N F(r, phi, theta)."""
    n_total = require_non_negative_int("N", n_total)
    return VarianceReport(
        mean=0.0,
        variance=n_total * squeezing_factor(params, theta),
        route=Route.FOCK_ANALYTIC,
        theta=theta,
    )


def nbc_variance_coherent_exact(beta: float, params: SqueezeParams, theta: float) -> VarianceReport:
    """
    Exact n_bc variance for a coherent local oscillator and squeezed-vacuum signal.

    beta^2 F(r, phi, theta) + sinh^2 r; the second term is the LO-independent
    <n_a> the large-beta homodyne mapping drops.
    """
    beta = require_non_negative("beta", beta)
    return VarianceReport(
        mean=0.0,
        variance=beta**2 * squeezing_factor(params, theta) + math.sinh(params.r) ** 2,
        route=Route.COHERENT_EXACT,
        theta=theta,
    )


def homodyne_mapping(beta: float, stats: QuadratureStats) -> VarianceReport:
    """
    Large-beta homodyne mapping: <n_bc> ~ 2 beta <X(theta)>, Var(n_bc) ~ 4 beta^2 Var X(theta).
    """
    beta = require_non_negative("beta", beta)
    return VarianceReport(
        mean=2.0 * beta * stats.mean,
        variance=4.0 * beta**2 * stats.variance,
        route=Route.HOMODYNE_MAPPING,
        theta=stats.theta,
    )


def phase_averaged_variance(beta: float, r: float, theta: float | None = None) -> VarianceReport:
    """
    Variance when the squeeze phase is uniformly random (laser absolute phase unknown).

    Averaging F over phi removes the cosine: beta^2 cosh 2r >= beta^2, i.e. no
    quadrature is squeezed.
    """
    beta = require_non_negative("beta", beta)
    r = require_non_negative("r", r)
    return VarianceReport(
        mean=0.0,
        variance=beta**2 * math.cosh(2.0 * r),
        route=Route.PHASE_AVERAGED,
        theta=theta,
    )


def squeezing_extremes(n_total: float, r: float) -> tuple[float, float]:
    """(minimum, maximum) of N F over theta: N e^{-2r} at 2theta = phi, N e^{2r} at 2theta - phi = pi."""
    r = require_non_negative("r", r)
    return n_total * math.exp(-2.0 * r), n_total * math.exp(2.0 * r)


def _central_binomial_terms(x: float, m_max: int) -> np.ndarray:
    """w_m x^m with w_m = (2m)! / (2^{2m} (m!)^2), via the term ratio x (2m+1)/(2m+2)."""
    m = np.arange(m_max, dtype=float)
    terms = np.empty(m_max + 1)
    terms[0] = 1.0
    terms[1:] = np.cumprod(x * (2 * m + 1) / (2 * m + 2))
    return terms


def appendix_series_AB(r: float, m_max: int) -> tuple[float, float]:
    """
    Partial sums (m = 0..m_max) of the series for A and B:

        A = (1/cosh r)        sum w_m (tanh^2 r)^m (1 + 4m)
        B = (sinh r/cosh^2 r) sum w_m (tanh^2 r)^m (2 + 4m)

    Args:
        r: Squeeze magnitude
        m_max: Last term index

    Returns:
        (A, B) partial sums
    """
    r = require_non_negative("r", r)
    m_max = require_non_negative_int("m_max", m_max)
    terms = _central_binomial_terms(math.tanh(r) ** 2, m_max)
    m = np.arange(m_max + 1, dtype=float)
    a = float(np.sum(terms * (1.0 + 4.0 * m))) / math.cosh(r)
    b = float(np.sum(terms * (2.0 + 4.0 * m))) * math.sinh(r) / math.cosh(r) ** 2
    return a, b


def closed_form_AB(r: float) -> tuple[float, float]:
    """A = cosh^2 r + sinh^2 r, B = 2 sinh r cosh r (from (1-x)^{-1/2} with x = tanh^2 r)."""
    r = require_non_negative("r", r)
    return math.cosh(2.0 * r), math.sinh(2.0 * r)


def series_terms_for_tolerance(r: float, tol: float) -> int:
    """
    Smallest m_max at which the geometric bound on the omitted A and B terms is below tol.

    Term ratios of w_m x^m (2 + 4m) stay below x (2m+3)/(2m+2) <= x (1 + 1/(2m+2)),
    so past m the tail is bounded by t_{m+1} / (1 - q) with q that ratio at m + 1.
    """
    r = require_non_negative("r", r)
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    x = math.tanh(r) ** 2
    if x == 0.0:
        return 0
    if x >= 1.0:
        raise ValueError(f"tanh^2 r rounds to 1 at r={r:g}; the series tail has no finite bound")
    prefactor = max(1.0 / math.cosh(r), math.sinh(r) / math.cosh(r) ** 2)
    term = 1.0
    m = 0
    while True:
        next_term = term * x * (2 * m + 1) / (2 * m + 2)
        q = x * (2 * m + 5) / (2 * m + 4)
        if q < 1.0:
            bound = prefactor * next_term * (2.0 + 4.0 * (m + 1)) / (1.0 - q)
            if bound < tol:
                return m
        term = next_term
        m += 1
        if m > MAX_TAIL_TERMS:
            raise ValueError(f"r={r:g} needs more than {MAX_TAIL_TERMS} series terms to reach tol={tol:g}")


def nbc_variance_series(pairs: np.ndarray, n_total: int, theta: float) -> VarianceReport:
    """
    Fock-basis variance from arbitrary pair amplitudes under N - 2m ~ N - 2m - 1 ~ N:

        N sum_m { |C_m|^2 (4m + 1) + 2 Re[C_m* C_{m+1} sqrt((2m+2)(2m+1)) e^{-2i theta}] }.

    For the squeezed-vacuum C_m this reduces to N [A - B cos(2 theta - phi)].
    """
    n_total = require_non_negative_int("N", n_total)
    theta = require_finite("theta", theta)
    c = np.asarray(pairs, dtype=complex)
    m = np.arange(c.size, dtype=float)
    diagonal = float(np.sum(np.abs(c) ** 2 * (4.0 * m + 1.0)))
    cross = np.sum(np.conj(c[:-1]) * c[1:] * np.sqrt((2.0 * m[:-1] + 2.0) * (2.0 * m[:-1] + 1.0)))
    off_diagonal = 2.0 * float((cross * np.exp(-2j * theta)).real)
    return VarianceReport(
        mean=0.0,
        variance=max(n_total * (diagonal + off_diagonal), 0.0),
        route=Route.APPENDIX_SERIES,
        theta=theta,
    )


def poisson_window(
    alpha: float, n_sigma: float = DEFAULT_N_SIGMA, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> tuple[np.ndarray, np.ndarray]:
    """
    Photon numbers in [alpha^2 - n_sigma alpha, alpha^2 + n_sigma alpha] and their Poisson weights.

    Raises:
        ValueError: If alpha is zero or the window misses more than
            tolerances.poisson_window_mass of the Poisson mass.
    """
    alpha = require_non_negative("alpha", alpha)
    if alpha == 0.0:
        raise ValueError("alpha must be positive: the photon-number window is empty at alpha = 0")
    if not n_sigma > 0.0:
        raise ValueError(f"n_sigma must be positive, got {n_sigma!r}")

    mean = alpha**2
    lo = max(0, math.floor(mean - n_sigma * alpha))
    hi = math.ceil(mean + n_sigma * alpha)
    numbers = np.arange(lo, hi + 1)
    weights = poisson.pmf(numbers, mean)
    captured = float(weights.sum())
    if 1.0 - captured > tolerances.poisson_window_mass:
        raise ValueError(
            f"Poisson window [{lo}, {hi}] for alpha^2={mean:g} holds only {captured:.12g} of the mass; "
            f"increase alpha or n_sigma"
        )
    return numbers, weights


def poisson_mixture_variance(
    alpha: float,
    params: SqueezeParams,
    theta: float,
    n_sigma: float = DEFAULT_N_SIGMA,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> VarianceReport:
    """
    Fock-basis variance averaged over a Poissonian photon number with mean alpha^2.

    By the law of total variance Var = E_N[Var(n_bc | N)] + Var_N(E[n_bc | N]); the
    conditional means vanish, so only the first term survives. Weights are
    renormalized over the window.

    Args:
        alpha: Laser amplitude (mean photon number alpha^2)
        params: Squeeze parameters
        theta: Quadrature angle
        n_sigma: Half-width of the photon-number window in standard deviations
        tolerances: Supplies the largest Poisson mass the window may miss

    Returns:
        VarianceReport with route poisson-mixture and relative_spread = 1/alpha
    """
    numbers, weights = poisson_window(alpha, n_sigma, tolerances)
    factor = squeezing_factor(params, theta)
    conditional = numbers * factor
    variance = float(np.dot(weights, conditional) / weights.sum())
    logger.debug(
        f"Poisson mixture alpha^2={alpha**2:g}: window {numbers[0]}..{numbers[-1]}, "
        f"mass {weights.sum():.15g}"
    )
    return VarianceReport(
        mean=0.0,
        variance=variance,
        route=Route.POISSON_MIXTURE,
        theta=theta,
        relative_spread=1.0 / alpha,
    )
